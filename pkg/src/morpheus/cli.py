"""Command-line pipeline: attack corpora, run the random baseline,
evaluate predictions, analyze substitution distributions, and generate
augmented training sets.

Every run writes a manifest (config snapshot, dataset hash, counts,
timestamps). All other artifacts are timestamp-free so that identical
config + seed + dataset + builtin oracle reruns are byte-identical.

Exit codes: 0 success, 1 usage/config error (nothing written), 2 run
completed but some examples failed or were skipped.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .augment import (
    InflectionDistribution,
    build_manifest,
    compute_distribution,
    generate_trainset,
)
from .metrics import Metric, bleu, chrf, qa_score
from .oracle import (
    Oracle,
    OracleError,
    OracleRequest,
    Task,
    TaskContext,
    parse_oracle_spec,
)
from .search import (
    AttackConfig,
    AttackMode,
    attack_corpus,
    example_rng,
    random_baseline,
    report_to_json,
    result_from_json,
    result_to_json,
)


class UsageError(Exception):
    """Configuration/usage problem; the run aborts before writing output."""


# ------------------------------------------------------------ datasets

@dataclasses.dataclass(frozen=True)
class Example:
    id: str
    text: str
    context: TaskContext
    payload: dict


def _parse_record(record: Mapping, task: Task, fallback_id: str) -> Example:
    rid = str(record.get("id", fallback_id))
    if task is Task.QA:
        question = record["question"]
        passage = record["passage"]
        answers = record.get("answers", [])
        if record.get("is_impossible"):
            answers = []
        context = TaskContext(task=Task.QA, passage=passage,
                              gold_answers=list(answers))
        payload = {"passage": passage, "answers": list(answers)}
        return Example(rid, question, context, payload)
    if task is Task.MT:
        source = record["source"]
        reference = record["reference"]
        context = TaskContext(task=Task.MT, reference=reference)
        return Example(rid, source, context, {"reference": reference})
    return Example(rid, record["text"], TaskContext(task=Task.GENERIC), {})


def read_dataset(path: str, task: Task) -> tuple[list[Example], int]:
    """Parses a JSONL dataset; malformed lines are skipped and counted."""
    file = Path(path)
    if not file.is_file():
        raise UsageError(f"dataset not found: {path}")
    examples = []
    skipped = 0
    for lineno, line in enumerate(file.read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            examples.append(_parse_record(record, task, f"line-{lineno}"))
        except (ValueError, KeyError, TypeError) as exc:
            print(f"warning: {path}:{lineno}: skipping record ({exc})",
                  file=sys.stderr)
            skipped += 1
    return examples, skipped


# ------------------------------------------------------- config files

def _parse_config_value(raw: str):
    if raw.lower() == "true":
        return True
    if raw.lower() == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    return raw


def load_config(path: str) -> dict:
    """Flat key = value file; '#' starts a comment. Keys mirror flag names."""
    file = Path(path)
    if not file.is_file():
        raise UsageError(f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(file.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        values[key.strip().replace("-", "_")] = \
            _parse_config_value(value.strip())
    return values


# ------------------------------------------------------------ manifest

def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _hash_file(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _config_snapshot(args: argparse.Namespace) -> dict:
    skip = {"func", "config"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = value if isinstance(value, (str, int, float, bool,
                                               type(None))) else str(value)
    return out


def write_manifest(path: str, command: str, args: argparse.Namespace,
                   started: str, counts: dict,
                   dataset: Optional[str] = None,
                   oracle: Optional[str] = None,
                   extra: Optional[dict] = None) -> None:
    manifest = {
        "command": command,
        "config": _config_snapshot(args),
        "rng_seed": getattr(args, "seed", None),
        "dataset": ({"path": dataset, "sha256": _hash_file(dataset)}
                    if dataset else None),
        "oracle": oracle,
        "started": started,
        "ended": _utcnow(),
        "counts": counts,
    }
    if extra:
        manifest.update(extra)
    _write_json(path, manifest)


def _write_json(path: str, payload: object) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False)
                          + "\n")


def _write_jsonl(path: str, rows) -> int:
    n = 0
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
            n += 1
    return n


def _manifest_path(args: argparse.Namespace) -> str:
    if args.manifest:
        return args.manifest
    return str(args.out) + ".manifest.json"


# ------------------------------------------------------------- oracles

def build_oracle(args: argparse.Namespace) -> Oracle:
    predictions = None
    if getattr(args, "predictions", None):
        pred_file = Path(args.predictions)
        if not pred_file.is_file():
            raise UsageError(f"predictions file not found: {args.predictions}")
        predictions = json.loads(pred_file.read_text())
    triggers = []
    if getattr(args, "triggers", None):
        triggers = [t for t in args.triggers.split(",") if t]
    try:
        return parse_oracle_spec(
            args.oracle, triggers=triggers, predictions=predictions,
            metric=Metric(args.metric), batch_size=args.batch_size,
            timeout=args.timeout)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _score_report(clean: Optional[float], adversarial: Optional[float],
                  relative: Optional[float], n: int, label: str) -> dict:
    return {
        "clean": {"metric": label, "value": clean, "n_examples": n},
        "adversarial": {"metric": label, "value": adversarial,
                        "n_examples": n},
        "relative_decrease": relative,
    }


# --------------------------------------------------------- subcommands

def cmd_attack(args: argparse.Namespace) -> int:
    oracle = build_oracle(args)
    examples, skipped = read_dataset(args.data, Task(args.task))
    config = AttackConfig(
        mode=AttackMode.PARALLEL if args.mode == "par"
        else AttackMode.SEQUENTIAL,
        constrain_upos=not args.no_constrain,
        failure_threshold=args.failure_threshold,
        shuffle_inflections=not args.no_shuffle,
        reverse_retry=not args.no_reverse_retry,
        rng_seed=args.seed)
    started = _utcnow()
    try:
        run = attack_corpus([(e.text, e.context) for e in examples], oracle,
                            config, jobs=args.jobs)
    finally:
        if hasattr(oracle, "close"):
            oracle.close()
    _write_jsonl(args.out, ({"id": e.id, **result_to_json(r)}
                            for e, r in zip(examples, run.results)))
    label = args.metric if args.oracle.startswith("builtin:metric-replay") \
        else "score"
    n_scored = run.report.n_examples - run.report.n_failed
    if args.report:
        _write_json(args.report, _score_report(
            run.report.clean, run.report.adversarial,
            run.report.relative_decrease, n_scored, label))
    write_manifest(
        _manifest_path(args), "attack", args, started,
        counts={"examples": run.report.n_examples,
                "failures": run.report.n_failed, "skipped": skipped,
                "queries": run.report.queries},
        dataset=args.data, oracle=args.oracle,
        extra={"report": report_to_json(run.report)})
    return 2 if (run.report.n_failed or skipped) else 0


def cmd_random_baseline(args: argparse.Namespace) -> int:
    oracle = build_oracle(args) if args.oracle else None
    examples, skipped = read_dataset(args.data, Task(args.task))
    started = _utcnow()
    rows = []
    clean_scores = []
    perturbed_scores = []
    failures = 0
    queries = 0
    for example in examples:
        perturbed = random_baseline(
            example.text, example.context,
            rng=example_rng(args.seed, example.text),
            constrain_upos=not args.no_constrain)
        row = {"id": example.id, "original": example.text,
               "perturbed": perturbed}
        if oracle is not None:
            try:
                response = oracle.score_batch(OracleRequest(
                    context=example.context,
                    candidates=[example.text, perturbed]))
                row["clean_score"], row["perturbed_score"] = response.scores
                clean_scores.append(response.scores[0])
                perturbed_scores.append(response.scores[1])
                queries += 2
            except OracleError as exc:
                row["failed"] = True
                row["error"] = f"{type(exc).__name__}: {exc}"
                failures += 1
        rows.append(row)
    if oracle is not None and hasattr(oracle, "close"):
        oracle.close()
    _write_jsonl(args.out, rows)
    if args.report and clean_scores:
        clean = sum(clean_scores) / len(clean_scores)
        perturbed = sum(perturbed_scores) / len(perturbed_scores)
        relative = (clean - perturbed) / clean if clean > 0 else None
        _write_json(args.report, _score_report(
            clean, perturbed, relative, len(clean_scores), "score"))
    write_manifest(
        _manifest_path(args), "random-baseline", args, started,
        counts={"examples": len(examples), "failures": failures,
                "skipped": skipped, "queries": queries},
        dataset=args.data, oracle=args.oracle)
    return 2 if (failures or skipped) else 0


def cmd_eval(args: argparse.Namespace) -> int:
    examples, skipped = read_dataset(args.data, Task(args.task))
    pred_file = Path(args.pred)
    if not pred_file.is_file():
        raise UsageError(f"predictions not found: {args.pred}")
    predictions = {}
    for lineno, line in enumerate(pred_file.read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            predictions[str(record["id"])] = record["prediction"]
        except (ValueError, KeyError, TypeError) as exc:
            print(f"warning: {args.pred}:{lineno}: skipping ({exc})",
                  file=sys.stderr)
            skipped += 1
    started = _utcnow()
    metric = Metric(args.metric)
    matched = [e for e in examples if e.id in predictions]
    skipped += len(examples) - len(matched)
    if not matched:
        raise UsageError("no predictions matched the dataset ids")
    if metric in (Metric.F1, Metric.EM):
        if Task(args.task) is not Task.QA:
            raise UsageError(f"--metric {metric} needs --task qa")
        scores = [qa_score(predictions[e.id], e.context.gold_answers or [])
                  for e in matched]
        values = [s.f1 if metric is Metric.F1 else s.exact_match
                  for s in scores]
        value = sum(values) / len(values)
    else:
        if Task(args.task) is not Task.MT:
            raise UsageError(f"--metric {metric} needs --task mt")
        candidates = [predictions[e.id] for e in matched]
        references = [e.context.reference for e in matched]
        value = (bleu if metric is Metric.BLEU else chrf)(candidates,
                                                          references)
    report = {"metric": str(metric), "value": value,
              "n_examples": len(matched)}
    if args.out:
        _write_json(args.out, report)
        write_manifest(
            _manifest_path(args), "eval", args, started,
            counts={"examples": len(matched), "failures": 0,
                    "skipped": skipped},
            dataset=args.data)
    else:
        print(json.dumps(report))
    return 2 if skipped else 0


def cmd_analyze_dist(args: argparse.Namespace) -> int:
    results_file = Path(args.results)
    if not results_file.is_file():
        raise UsageError(f"results not found: {args.results}")
    started = _utcnow()
    results = []
    skipped = 0
    for lineno, line in enumerate(results_file.read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            results.append(result_from_json(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            print(f"warning: {args.results}:{lineno}: skipping ({exc})",
                  file=sys.stderr)
            skipped += 1
    dist = compute_distribution(results, filter_degrading=not args.no_filter)
    _write_json(args.out, dist.to_json())
    if args.plot:
        with open(args.plot, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tag", "count"])
            ordered = sorted(dist.weights.items(),
                             key=lambda kv: (-kv[1], str(kv[0])))
            for tag, count in ordered:
                writer.writerow([str(tag), count])
    write_manifest(
        _manifest_path(args), "analyze-dist", args, started,
        counts={"examples": len(results), "failures": 0, "skipped": skipped},
        dataset=args.results,
        extra={"dist_sha256": dist.sha256(), "empty": dist.is_empty})
    return 2 if skipped else 0


def _load_distribution(args: argparse.Namespace) -> InflectionDistribution:
    if args.uniform and args.dist:
        raise UsageError("--uniform and --dist are mutually exclusive")
    if args.uniform or not args.dist:
        return InflectionDistribution.uniform()
    dist_file = Path(args.dist)
    if not dist_file.is_file():
        raise UsageError(f"distribution not found: {args.dist}")
    try:
        return InflectionDistribution.from_json(
            json.loads(dist_file.read_text()))
    except ValueError as exc:
        raise UsageError(f"bad distribution file: {exc}") from exc


def cmd_gen_trainset(args: argparse.Namespace) -> int:
    task = Task(args.task)
    dist = _load_distribution(args)
    examples, skipped = read_dataset(args.data, task)
    started = _utcnow()
    items = [(e.id, e.text, e.payload) for e in examples]
    records = generate_trainset(items, k=args.k, dist=dist, seed=args.seed)
    if args.format == "jsonl":
        n_records = _write_jsonl(args.out,
                                 (r.to_json() for r in records))
    elif args.format == "pairs":
        if task is not Task.MT:
            raise UsageError("--format pairs needs --task mt")
        n_records = 0
        with open(f"{args.out}.src", "w") as src, \
                open(f"{args.out}.ref", "w") as ref:
            for record in records:
                src.write(record.text + "\n")
                ref.write(record.payload["reference"] + "\n")
                n_records += 1
    else:  # squad
        if task is not Task.QA:
            raise UsageError("--format squad needs --task qa")
        entries = []
        for record in records:
            passage = record.payload["passage"]
            answers = [{"text": a, "answer_start": passage.find(a)}
                       for a in record.payload["answers"]]
            entries.append({
                "title": record.source_id,
                "paragraphs": [{
                    "context": passage,
                    "qas": [{
                        "id": f"{record.source_id}:{record.variant}",
                        "question": record.text,
                        "answers": answers,
                        "is_impossible": not answers,
                    }],
                }],
            })
        _write_json(args.out, {"version": "aug-1.0", "data": entries})
        n_records = len(entries)
    write_manifest(
        _manifest_path(args), "gen-trainset", args, started,
        counts={"examples": len(examples), "failures": 0,
                "skipped": skipped, "records": n_records},
        dataset=args.data,
        extra={"trainset": build_manifest(args.seed, args.k, dist,
                                          len(examples), n_records)})
    return 2 if skipped else 0


# --------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here is usage -> 1
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}".rstrip())


def _add_common(p: argparse.ArgumentParser, with_oracle: bool) -> None:
    p.add_argument("--config", help="flat key = value file; flags win")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--manifest", help="manifest path "
                                      "(default: <out>.manifest.json)")
    if with_oracle:
        p.add_argument("--triggers", help="comma list for builtin:keyword")
        p.add_argument("--predictions",
                       help="JSON map {text: prediction} for "
                            "builtin:metric-replay")
        p.add_argument("--metric", default="f1",
                       choices=[str(m) for m in Metric])
        p.add_argument("--batch-size", type=int, default=64)
        p.add_argument("--timeout", type=float, default=30.0)


def build_parser() -> _Parser:
    parser = _Parser(prog="morpheus",
                     description="Inflectional adversarial attack toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("attack", parents=[], help="attack a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--task", default="generic",
                   choices=[str(t) for t in Task])
    p.add_argument("--oracle", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--mode", default="seq", choices=["seq", "par"])
    p.add_argument("--failure-threshold", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-constrain", action="store_true")
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--no-reverse-retry", action="store_true")
    _add_common(p, with_oracle=True)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("random-baseline",
                       help="uniform re-inflection baseline")
    p.add_argument("--data", required=True)
    p.add_argument("--task", default="generic",
                   choices=[str(t) for t in Task])
    p.add_argument("--oracle", help="optional; scores clean and perturbed")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--no-constrain", action="store_true")
    _add_common(p, with_oracle=True)
    p.set_defaults(func=cmd_random_baseline)

    p = sub.add_parser("eval", help="score a prediction file")
    p.add_argument("--data", required=True)
    p.add_argument("--task", default="qa", choices=[str(t) for t in Task])
    p.add_argument("--pred", required=True,
                   help="JSONL of {id, prediction}")
    p.add_argument("--metric", default="f1",
                   choices=[str(m) for m in Metric])
    p.add_argument("--out", help="report path; stdout when omitted")
    _add_common(p, with_oracle=False)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze-dist",
                       help="tag histogram from attack results")
    p.add_argument("results")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", help="also write a tag,count CSV")
    p.add_argument("--no-filter", action="store_true",
                   help="count substitutions from all results, not only "
                        "degrading ones")
    _add_common(p, with_oracle=False)
    p.set_defaults(func=cmd_analyze_dist)

    p = sub.add_parser("gen-trainset",
                       help="clean + k re-inflected variants per example")
    p.add_argument("--data", required=True)
    p.add_argument("--task", default="generic",
                   choices=[str(t) for t in Task])
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--dist", help="distribution JSON from analyze-dist")
    p.add_argument("--uniform", action="store_true")
    p.add_argument("--format", default="jsonl",
                   choices=["jsonl", "squad", "pairs"])
    _add_common(p, with_oracle=False)
    p.set_defaults(func=cmd_gen_trainset)
    return parser


def _apply_config(parser: _Parser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = load_config(args.config)
        sub_actions = next(a for a in parser._actions
                           if isinstance(a, argparse._SubParsersAction))
        sub_parser = sub_actions.choices[args.subcommand]
        valid = {a.dest for a in sub_parser._actions}
        unknown = set(values) - valid
        if unknown:
            raise UsageError(
                f"unknown config keys: {', '.join(sorted(unknown))}")
        sub_parser.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, list(argv if argv is not None
                                          else sys.argv[1:]))
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
