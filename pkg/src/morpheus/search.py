"""Greedy search for loss-maximizing inflections.

The attack tags a sentence once, then walks its noun/verb/adjective tokens
and swaps each for the paradigm member the oracle scores worst, keeping
earlier swaps in place. A sequential pass can retry in reversed token
order from the original sentence; the parallel mode instead picks every
token's winner against the original sentence and applies them together.

Substituted sentences are rebuilt with the original spacing, so structure
(token count, order, universal POS of swapped tokens) is preserved.
"""
from __future__ import annotations

import dataclasses
import enum
import hashlib
import random
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .lexicon import InflectionCandidate, Lexicon, default_lexicon
from .metrics import relative_decrease
from .oracle import (
    Oracle,
    OracleError,
    OracleRequest,
    TaskContext,
    objective,
)
from .tags import ELIGIBLE_UPOS, PtbTag
from .textproc import TaggedSentence, detokenize, tag_pos, tokenize, with_surface

Tagger = Callable[[TaggedSentence, Optional[Lexicon]], TaggedSentence]


class AttackMode(enum.Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"

    def __str__(self) -> str:
        return self.value


@dataclasses.dataclass(frozen=True)
class AttackConfig:
    mode: AttackMode = AttackMode.SEQUENTIAL
    constrain_upos: bool = True
    failure_threshold: float = 0.0
    shuffle_inflections: bool = True
    reverse_retry: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.failure_threshold < 0:
            raise ValueError("failure_threshold must be >= 0")


@dataclasses.dataclass(frozen=True)
class Substitution:
    index: int
    original_surface: str
    new_surface: str
    tag_original: PtbTag
    tag_new: PtbTag


@dataclasses.dataclass(frozen=True)
class AttackResult:
    original: str
    adversarial: str
    clean_score: Optional[float]
    adversarial_score: Optional[float]
    queries: int
    terminated_early: bool
    used_reverse_pass: bool
    substitutions: tuple[Substitution, ...]
    lower_is_worse: Optional[bool]
    failed: bool = False
    error: Optional[str] = None


@dataclasses.dataclass(frozen=True)
class CorpusReport:
    clean: Optional[float]
    adversarial: Optional[float]
    relative_decrease: Optional[float]
    n_examples: int
    n_failed: int
    queries: int
    lower_is_worse: Optional[bool]


@dataclasses.dataclass(frozen=True)
class CorpusRun:
    results: tuple[AttackResult, ...]
    report: CorpusReport


def example_rng(seed: int, text: str) -> random.Random:
    """Deterministic per-example RNG, independent of corpus order."""
    digest = hashlib.sha256(f"{seed}:{text}".encode()).hexdigest()
    return random.Random(int(digest, 16))


class _Scorer:
    """Caches scores per candidate text; assumes a deterministic oracle.

    `queries` counts candidate texts actually sent, which keeps the greedy
    loop at one oracle call per position and never re-buys a known score.
    """

    def __init__(self, oracle: Oracle, context: TaskContext):
        self._oracle = oracle
        self._context = context
        self._cache: dict[str, float] = {}
        self.lower_is_worse: Optional[bool] = None
        self.queries = 0

    def scores(self, texts: Sequence[str]) -> list[float]:
        todo = []
        for text in texts:
            if text not in self._cache and text not in todo:
                todo.append(text)
        if todo:
            response = self._oracle.score_batch(
                OracleRequest(context=self._context, candidates=todo))
            self.queries += len(todo)
            if self.lower_is_worse is None:
                self.lower_is_worse = response.lower_is_worse
            self._cache.update(zip(todo, response.scores))
        return [self._cache[t] for t in texts]

    def score_one(self, text: str) -> float:
        return self.scores([text])[0]

    def objective(self, score: float) -> float:
        assert self.lower_is_worse is not None
        return objective(score, self.lower_is_worse)


def _pick_winner(objectives: Sequence[float], incumbent: int) -> int:
    """Argmax with ties broken toward the incumbent, then list order."""
    best = incumbent
    for i, obj in enumerate(objectives):
        if obj > objectives[best]:
            best = i
    return best


def _incumbent_index(candidates: Sequence[InflectionCandidate],
                     surface: str) -> int:
    for i, cand in enumerate(candidates):
        if cand.surface == surface:
            return i
    raise ValueError(f"candidates do not include current surface {surface!r}")


def max_inflected(candidates: Sequence[InflectionCandidate],
                  tokens: TaggedSentence, position: int,
                  context: TaskContext, oracle: Oracle) -> InflectionCandidate:
    """One batch query over `candidates` substituted at `position`; returns
    the most adversarial candidate, or the current one when nothing is
    strictly worse for the model."""
    scorer = _Scorer(oracle, context)
    texts = [detokenize(with_surface(tokens, position, c.surface))
             for c in candidates]
    scores = scorer.scores(texts)
    objs = [scorer.objective(s) for s in scores]
    incumbent = _incumbent_index(candidates,
                                 tokens.tokens[position].surface)
    return candidates[_pick_winner(objs, incumbent)]


@dataclasses.dataclass
class _Pass:
    sentence: TaggedSentence
    score: float
    substitutions: list[Substitution]
    terminated: bool


def _run_pass(tagged: TaggedSentence, order: Sequence[int], scorer: _Scorer,
              config: AttackConfig, lexicon: Lexicon, rng: random.Random,
              clean_score: float) -> _Pass:
    current = tagged
    current_score = clean_score
    subs: list[Substitution] = []
    for pos in order:
        token = tagged.tokens[pos]
        assert token.upos is not None
        cands = lexicon.get_inflections(
            token.surface, token.upos, constrain=config.constrain_upos,
            shuffle=config.shuffle_inflections, rng=rng)
        if len({c.surface for c in cands}) <= 1:
            continue
        texts = [detokenize(with_surface(current, pos, c.surface))
                 for c in cands]
        scores = scorer.scores(texts)
        objs = [scorer.objective(s) for s in scores]
        incumbent = _incumbent_index(cands, current.tokens[pos].surface)
        winner = _pick_winner(objs, incumbent)
        if winner == incumbent:
            continue
        current = with_surface(current, pos, cands[winner].surface)
        current_score = scores[winner]
        subs.append(Substitution(
            index=pos, original_surface=token.surface,
            new_surface=cands[winner].surface,
            tag_original=token.tag, tag_new=cands[winner].tag))
        if scorer.lower_is_worse and current_score <= config.failure_threshold:
            return _Pass(current, current_score, subs, True)
    return _Pass(current, current_score, subs, False)


def _parallel_pass(tagged: TaggedSentence, eligible: Sequence[int],
                   scorer: _Scorer, config: AttackConfig, lexicon: Lexicon,
                   rng: random.Random, clean_score: float) -> _Pass:
    winners: list[tuple[int, InflectionCandidate, object]] = []
    for pos in eligible:
        token = tagged.tokens[pos]
        assert token.upos is not None
        cands = lexicon.get_inflections(
            token.surface, token.upos, constrain=config.constrain_upos,
            shuffle=config.shuffle_inflections, rng=rng)
        if len({c.surface for c in cands}) <= 1:
            continue
        texts = [detokenize(with_surface(tagged, pos, c.surface))
                 for c in cands]
        scores = scorer.scores(texts)
        objs = [scorer.objective(s) for s in scores]
        incumbent = _incumbent_index(cands, token.surface)
        winner = _pick_winner(objs, incumbent)
        if winner != incumbent:
            winners.append((pos, cands[winner], token))
    if not winners:
        return _Pass(tagged, clean_score, [], False)
    combined = tagged
    subs = []
    for pos, cand, token in winners:
        combined = with_surface(combined, pos, cand.surface)
        subs.append(Substitution(
            index=pos, original_surface=token.surface,
            new_surface=cand.surface, tag_original=token.tag,
            tag_new=cand.tag))
    combined_score = scorer.score_one(detokenize(combined))
    # Winners were judged one at a time; together they can backfire, in
    # which case the clean sentence is the better adversary and we keep it.
    if scorer.objective(combined_score) < scorer.objective(clean_score):
        return _Pass(tagged, clean_score, [], False)
    terminated = bool(scorer.lower_is_worse
                      and combined_score <= config.failure_threshold)
    return _Pass(combined, combined_score, subs, terminated)


def _failed_result(example: str, queries: int, clean_score: Optional[float],
                   lower: Optional[bool], error: Exception) -> AttackResult:
    return AttackResult(
        original=example, adversarial=example, clean_score=clean_score,
        adversarial_score=None, queries=queries, terminated_early=False,
        used_reverse_pass=False, substitutions=(), lower_is_worse=lower,
        failed=True, error=f"{type(error).__name__}: {error}")


def attack(example: str, context: TaskContext, oracle: Oracle,
           config: Optional[AttackConfig] = None,
           lexicon: Optional[Lexicon] = None,
           tagger: Optional[Tagger] = None) -> AttackResult:
    """Runs the full attack on one example; oracle failures come back as a
    flagged result instead of an exception so corpus runs keep going."""
    if not example:
        raise ValueError("empty example")
    config = config or AttackConfig()
    lexicon = lexicon or default_lexicon()
    tagger = tagger or tag_pos
    tagged = tagger(tokenize(example), lexicon)
    rng = example_rng(config.rng_seed, example)
    scorer = _Scorer(oracle, context)
    try:
        clean_score = scorer.score_one(detokenize(tagged))
    except OracleError as exc:
        return _failed_result(example, scorer.queries, None, None, exc)

    eligible = [i for i, t in enumerate(tagged.tokens)
                if t.upos in ELIGIBLE_UPOS]
    already_failing = bool(scorer.lower_is_worse
                           and clean_score <= config.failure_threshold)
    if not eligible or already_failing:
        return AttackResult(
            original=example, adversarial=example, clean_score=clean_score,
            adversarial_score=clean_score, queries=scorer.queries,
            terminated_early=already_failing, used_reverse_pass=False,
            substitutions=(), lower_is_worse=scorer.lower_is_worse)

    used_reverse = False
    try:
        if config.mode is AttackMode.PARALLEL:
            final = _parallel_pass(tagged, eligible, scorer, config,
                                   lexicon, rng, clean_score)
        else:
            final = _run_pass(tagged, eligible, scorer, config, lexicon,
                              rng, clean_score)
            retry = (config.reverse_retry and not final.terminated
                     and final.substitutions)
            if retry:
                # A reversed pass over an unchanged sentence would rescore
                # identical batches, so it only runs after a real change.
                rev = _run_pass(tagged, list(reversed(eligible)), scorer,
                                config, lexicon, rng, clean_score)
                if scorer.objective(rev.score) > scorer.objective(final.score):
                    final = rev
                    used_reverse = True
    except OracleError as exc:
        return _failed_result(example, scorer.queries, clean_score,
                              scorer.lower_is_worse, exc)

    adversarial = detokenize(final.sentence) if final.substitutions \
        else example
    return AttackResult(
        original=example, adversarial=adversarial, clean_score=clean_score,
        adversarial_score=final.score, queries=scorer.queries,
        terminated_early=final.terminated, used_reverse_pass=used_reverse,
        substitutions=tuple(final.substitutions),
        lower_is_worse=scorer.lower_is_worse)


def random_baseline(example: str, context: Optional[TaskContext] = None,
                    lexicon: Optional[Lexicon] = None,
                    tagger: Optional[Tagger] = None,
                    rng: Optional[random.Random] = None,
                    constrain_upos: bool = True) -> str:
    """Uniformly re-inflects every eligible token; the no-model baseline."""
    lexicon = lexicon or default_lexicon()
    tagger = tagger or tag_pos
    rng = rng or random.Random()
    tagged = tagger(tokenize(example), lexicon)
    current = tagged
    changed = False
    for pos, token in enumerate(tagged.tokens):
        if token.upos not in ELIGIBLE_UPOS:
            continue
        cands = lexicon.get_inflections(token.surface, token.upos,
                                        constrain=constrain_upos)
        surfaces = list(dict.fromkeys(c.surface for c in cands))
        if len(surfaces) <= 1:
            continue
        choice = rng.choice(surfaces)
        if choice != token.surface:
            current = with_surface(current, pos, choice)
            changed = True
    return detokenize(current) if changed else example


def attack_corpus(pairs: Iterable[tuple[str, TaskContext]], oracle: Oracle,
                  config: Optional[AttackConfig] = None,
                  lexicon: Optional[Lexicon] = None,
                  tagger: Optional[Tagger] = None,
                  jobs: int = 1) -> CorpusRun:
    """Attacks every (example, context) pair; failures are recorded in
    their result line and excluded from the score aggregates."""
    todo = list(pairs)
    lexicon = lexicon or default_lexicon()

    def one(pair: tuple[str, TaskContext]) -> AttackResult:
        return attack(pair[0], pair[1], oracle, config, lexicon, tagger)

    if jobs > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = tuple(pool.map(one, todo))
    else:
        results = tuple(one(p) for p in todo)
    return CorpusRun(results=results, report=summarize(results))


def summarize(results: Sequence[AttackResult]) -> CorpusReport:
    scored = [r for r in results if not r.failed
              and r.clean_score is not None
              and r.adversarial_score is not None]
    clean = adv = rel = lower = None
    if scored:
        clean = sum(r.clean_score for r in scored) / len(scored)
        adv = sum(r.adversarial_score for r in scored) / len(scored)
        lower = scored[0].lower_is_worse
        if clean > 0:
            rel = relative_decrease(clean, adv)
    return CorpusReport(
        clean=clean, adversarial=adv, relative_decrease=rel,
        n_examples=len(results),
        n_failed=sum(1 for r in results if r.failed),
        queries=sum(r.queries for r in results),
        lower_is_worse=lower)


# ------------------------------------------------------------- JSON IO

def substitution_to_json(sub: Substitution) -> dict:
    return {"index": sub.index, "original_surface": sub.original_surface,
            "new_surface": sub.new_surface,
            "tag_original": str(sub.tag_original),
            "tag_new": str(sub.tag_new)}


def result_to_json(result: AttackResult) -> dict:
    return {
        "original": result.original,
        "adversarial": result.adversarial,
        "clean_score": result.clean_score,
        "adversarial_score": result.adversarial_score,
        "queries": result.queries,
        "terminated_early": result.terminated_early,
        "used_reverse_pass": result.used_reverse_pass,
        "substitutions": [substitution_to_json(s)
                          for s in result.substitutions],
        "lower_is_worse": result.lower_is_worse,
        "failed": result.failed,
        "error": result.error,
    }


def result_from_json(payload: Mapping) -> AttackResult:
    subs = tuple(
        Substitution(index=s["index"],
                     original_surface=s["original_surface"],
                     new_surface=s["new_surface"],
                     tag_original=PtbTag(s["tag_original"]),
                     tag_new=PtbTag(s["tag_new"]))
        for s in payload.get("substitutions", ()))
    return AttackResult(
        original=payload["original"],
        adversarial=payload["adversarial"],
        clean_score=payload.get("clean_score"),
        adversarial_score=payload.get("adversarial_score"),
        queries=int(payload.get("queries", 0)),
        terminated_early=bool(payload.get("terminated_early", False)),
        used_reverse_pass=bool(payload.get("used_reverse_pass", False)),
        substitutions=subs,
        lower_is_worse=payload.get("lower_is_worse"),
        failed=bool(payload.get("failed", False)),
        error=payload.get("error"))


def report_to_json(report: CorpusReport) -> dict:
    return {
        "clean": report.clean,
        "adversarial": report.adversarial,
        "relative_decrease": report.relative_decrease,
        "n_examples": report.n_examples,
        "n_failed": report.n_failed,
        "queries": report.queries,
        "lower_is_worse": report.lower_is_worse,
    }
