"""Black-box scoring boundary for the attack.

An oracle scores a batch of candidate inputs for one task context and says
which direction is bad for the model: `lower_is_worse=True` means the
scores are task scores the attack should minimize, `False` means they are
losses to maximize. `objective` folds both into "higher = more adversarial".

Transports: in-process builtins (deterministic, used by tests and the
brute-force checks), HTTP POST /score, and a one-JSON-line-per-request
stdio subprocess protocol.
"""
from __future__ import annotations

import dataclasses
import enum
import json
import math
import os
import select
import shlex
import subprocess
from typing import Mapping, Optional, Protocol, Sequence

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from .lexicon import Lexicon, default_lexicon
from .metrics import Metric, qa_score, sentence_bleu, sentence_chrf
from .tags import PtbTag
from .textproc import tag_pos, tokenize

DEFAULT_BATCH_SIZE = 64
DEFAULT_TIMEOUT = 30.0
ORACLE_URL_ENV = "MORPHEUS_ORACLE_URL"


class Task(enum.Enum):
    QA = "qa"
    MT = "mt"
    GENERIC = "generic"

    def __str__(self) -> str:
        return self.value


class OracleError(Exception):
    """Base for scoring failures; aborts the current example, never the run."""


class TransportError(OracleError):
    """Could not reach the oracle; retrying later may succeed."""


class ProtocolError(OracleError):
    """The oracle answered with something other than the protocol."""


@dataclasses.dataclass(frozen=True)
class TaskContext:
    task: Task
    passage: Optional[str] = None
    gold_answers: Optional[Sequence[str]] = None
    reference: Optional[str] = None
    label: Optional[str] = None

    def __post_init__(self):
        if self.task is Task.QA and (self.passage is None
                                     or self.gold_answers is None):
            raise ValueError("QA context needs passage and gold_answers")
        if self.task is Task.MT and self.reference is None:
            raise ValueError("MT context needs a reference")


@dataclasses.dataclass(frozen=True)
class OracleRequest:
    context: TaskContext
    candidates: Sequence[str]

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("empty candidate batch")


@dataclasses.dataclass(frozen=True)
class OracleResponse:
    scores: Sequence[float]
    lower_is_worse: bool


class Oracle(Protocol):
    def score_batch(self, request: OracleRequest) -> OracleResponse: ...


def objective(score: float, lower_is_worse: bool) -> float:
    """Adversarial objective: higher means the model is doing worse."""
    return -score if lower_is_worse else score


# --------------------------------------------------------- wire format

def request_to_wire(request: OracleRequest) -> dict:
    body: dict = {"task": request.context.task.value,
                  "candidates": list(request.candidates)}
    if request.context.passage is not None:
        body["passage"] = request.context.passage
    if request.context.gold_answers is not None:
        body["gold_answers"] = list(request.context.gold_answers)
    if request.context.reference is not None:
        body["reference"] = request.context.reference
    return body


def response_from_wire(payload: object, n_candidates: int) -> OracleResponse:
    if not isinstance(payload, dict):
        raise ProtocolError(f"response is not an object: {payload!r}")
    scores = payload.get("scores")
    lower = payload.get("lower_is_worse")
    if not isinstance(scores, list) or not isinstance(lower, bool):
        raise ProtocolError("response needs 'scores' list and"
                            " 'lower_is_worse' bool")
    if len(scores) != n_candidates:
        raise ProtocolError(
            f"got {len(scores)} scores for {n_candidates} candidates")
    out = []
    for s in scores:
        if not isinstance(s, (int, float)) or isinstance(s, bool) \
                or not math.isfinite(s):
            raise ProtocolError(f"non-finite or non-numeric score: {s!r}")
        out.append(float(s))
    return OracleResponse(scores=out, lower_is_worse=lower)


# ------------------------------------------------------- builtin oracles

class BagOfTagsOracle:
    """Toy loss: number of tokens carrying any of the given tags.

    Additive over tokens, so the global optimum is brute-forceable and the
    greedy search can be checked against it exactly.
    """

    def __init__(self, tags: Sequence[PtbTag] = (PtbTag.VBG, PtbTag.NNS),
                 lexicon: Optional[Lexicon] = None):
        self._tags = frozenset(tags)
        self._lexicon = lexicon or default_lexicon()

    def score_batch(self, request: OracleRequest) -> OracleResponse:
        scores = []
        for cand in request.candidates:
            tagged = tag_pos(tokenize(cand), self._lexicon)
            scores.append(float(sum(1 for t in tagged.tokens
                                    if t.tag in self._tags)))
        return OracleResponse(scores=scores, lower_is_worse=False)


class KeywordOracle:
    """Task score that collapses to zero when a trigger surface shows up.

    Token-level, case-insensitive match. Useful for exercising the
    early-termination path without a model.
    """

    def __init__(self, triggers: Sequence[str]):
        if not triggers:
            raise ValueError("keyword oracle needs at least one trigger")
        self._triggers = frozenset(t.lower() for t in triggers)

    def score_batch(self, request: OracleRequest) -> OracleResponse:
        scores = []
        for cand in request.candidates:
            surfaces = {t.surface.lower() for t in tokenize(cand).tokens}
            scores.append(0.0 if surfaces & self._triggers else 1.0)
        return OracleResponse(scores=scores, lower_is_worse=True)


class MetricReplayOracle:
    """Scores candidates by replaying stored model predictions through a
    task metric. The map covers every candidate the search may produce;
    anything missing is a protocol error, mirroring a server that cannot
    answer."""

    def __init__(self, predictions: Mapping[str, str],
                 metric: Metric = Metric.F1):
        self._predictions = dict(predictions)
        self._metric = metric

    def _score_one(self, candidate: str, context: TaskContext) -> float:
        try:
            prediction = self._predictions[candidate]
        except KeyError:
            raise ProtocolError(
                f"no stored prediction for candidate: {candidate!r}") from None
        if self._metric is Metric.F1:
            return qa_score(prediction, context.gold_answers or []).f1
        if self._metric is Metric.EM:
            return qa_score(prediction, context.gold_answers or []).exact_match
        if self._metric is Metric.BLEU:
            return sentence_bleu(prediction, context.reference or "")
        return sentence_chrf(prediction, context.reference or "")

    def score_batch(self, request: OracleRequest) -> OracleResponse:
        scores = [self._score_one(c, request.context)
                  for c in request.candidates]
        return OracleResponse(scores=scores, lower_is_worse=True)


# -------------------------------------------------------- remote oracles

class HTTPOracle:
    """POSTs request chunks to <base>/score and reassembles the scores."""

    def __init__(self, url: str, batch_size: int = DEFAULT_BATCH_SIZE,
                 timeout: float = DEFAULT_TIMEOUT,
                 session: Optional[requests.Session] = None):
        base = url.rstrip("/")
        self._endpoint = base if base.endswith("/score") else base + "/score"
        self._batch_size = batch_size
        self._timeout = timeout
        if session is None:
            session = requests.Session()
            retry = Retry(total=2, backoff_factor=0.2,
                          status_forcelist=[502, 503, 504],
                          allowed_methods=["POST"])
            session.mount("http://", HTTPAdapter(max_retries=retry))
            session.mount("https://", HTTPAdapter(max_retries=retry))
        self._session = session

    def _post_chunk(self, request: OracleRequest) -> OracleResponse:
        try:
            resp = self._session.post(self._endpoint,
                                      json=request_to_wire(request),
                                      timeout=self._timeout)
        except requests.RequestException as exc:
            raise TransportError(f"oracle unreachable: {exc}") from exc
        if resp.status_code >= 500:
            raise TransportError(f"oracle returned {resp.status_code}")
        if resp.status_code != 200:
            raise ProtocolError(
                f"oracle returned {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"oracle sent non-JSON body: {exc}") from exc
        return response_from_wire(payload, len(request.candidates))

    def score_batch(self, request: OracleRequest) -> OracleResponse:
        scores: list[float] = []
        lower: Optional[bool] = None
        cands = list(request.candidates)
        for start in range(0, len(cands), self._batch_size):
            chunk = OracleRequest(context=request.context,
                                  candidates=cands[start:start
                                                   + self._batch_size])
            part = self._post_chunk(chunk)
            if lower is None:
                lower = part.lower_is_worse
            elif lower != part.lower_is_worse:
                raise ProtocolError(
                    "oracle flipped lower_is_worse between chunks")
            scores.extend(part.scores)
        assert lower is not None
        return OracleResponse(scores=scores, lower_is_worse=lower)


class StdioOracle:
    """Keeps a scoring subprocess alive and speaks one JSON line per
    request on its stdin/stdout."""

    def __init__(self, command: str, batch_size: int = DEFAULT_BATCH_SIZE,
                 timeout: float = DEFAULT_TIMEOUT):
        self._batch_size = batch_size
        self._timeout = timeout
        try:
            self._proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE,
                stdout=subprocess.PIPE, text=True, bufsize=1)
        except OSError as exc:
            raise TransportError(f"cannot start oracle: {exc}") from exc

    def _roundtrip(self, request: OracleRequest) -> OracleResponse:
        proc = self._proc
        if proc.poll() is not None:
            raise TransportError("oracle subprocess exited")
        assert proc.stdin is not None and proc.stdout is not None
        try:
            proc.stdin.write(json.dumps(request_to_wire(request)) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"oracle pipe closed: {exc}") from exc
        ready, _, _ = select.select([proc.stdout], [], [], self._timeout)
        if not ready:
            raise TransportError(f"oracle silent for {self._timeout}s")
        line = proc.stdout.readline()
        if not line:
            raise TransportError("oracle closed its stdout")
        try:
            payload = json.loads(line)
        except ValueError as exc:
            raise ProtocolError(f"oracle sent non-JSON line: {exc}") from exc
        return response_from_wire(payload, len(request.candidates))

    def score_batch(self, request: OracleRequest) -> OracleResponse:
        scores: list[float] = []
        lower: Optional[bool] = None
        cands = list(request.candidates)
        for start in range(0, len(cands), self._batch_size):
            part = self._roundtrip(
                OracleRequest(context=request.context,
                              candidates=cands[start:start
                                               + self._batch_size]))
            if lower is None:
                lower = part.lower_is_worse
            elif lower != part.lower_is_worse:
                raise ProtocolError(
                    "oracle flipped lower_is_worse between chunks")
            scores.extend(part.scores)
        assert lower is not None
        return OracleResponse(scores=scores, lower_is_worse=lower)

    def close(self) -> None:
        proc = self._proc
        for stream in (proc.stdin, proc.stdout):
            if stream is not None:
                try:
                    stream.close()
                except OSError:
                    pass
        if proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    def __enter__(self) -> "StdioOracle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


BUILTIN_NAMES = ("bag-of-tags", "keyword", "metric-replay")


def parse_oracle_spec(spec: Optional[str], *,
                      triggers: Sequence[str] = (),
                      predictions: Optional[Mapping[str, str]] = None,
                      metric: Metric = Metric.F1,
                      batch_size: int = DEFAULT_BATCH_SIZE,
                      timeout: float = DEFAULT_TIMEOUT) -> Oracle:
    """Builds an oracle from a CLI-style spec string:

    builtin:<bag-of-tags|keyword|metric-replay>, http:<url> (a bare
    http(s) URL also works), or stdio:<command>. With no spec, the
    MORPHEUS_ORACLE_URL environment variable supplies the URL.
    """
    if spec is None:
        url = os.environ.get(ORACLE_URL_ENV)
        if not url:
            raise ValueError(
                f"no oracle spec and {ORACLE_URL_ENV} is unset")
        return HTTPOracle(url, batch_size=batch_size, timeout=timeout)
    if spec.startswith(("http://", "https://")):
        return HTTPOracle(spec, batch_size=batch_size, timeout=timeout)
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise ValueError(f"malformed oracle spec: {spec!r}")
    if kind == "builtin":
        if rest == "bag-of-tags":
            return BagOfTagsOracle()
        if rest == "keyword":
            return KeywordOracle(triggers)
        if rest == "metric-replay":
            if predictions is None:
                raise ValueError("metric-replay oracle needs --predictions")
            return MetricReplayOracle(predictions, metric=metric)
        raise ValueError(f"unknown builtin oracle: {rest!r} "
                         f"(have {', '.join(BUILTIN_NAMES)})")
    if kind == "http":
        return HTTPOracle(rest, batch_size=batch_size, timeout=timeout)
    if kind == "stdio":
        return StdioOracle(rest, batch_size=batch_size, timeout=timeout)
    raise ValueError(f"unknown oracle kind: {kind!r}")
