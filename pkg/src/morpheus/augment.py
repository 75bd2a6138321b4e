"""Tag-level analysis of successful attacks and weighted resampling.

`compute_distribution` counts which inflection tags the attack used on
examples it actually degraded. `random_inflect` then re-inflects clean
text by sampling each eligible token's replacement with probability
proportional to those tag weights, and `generate_trainset` streams the
1 clean + k sampled variants per source record, deterministically.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import random
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .lexicon import Lexicon, default_lexicon
from .oracle import objective
from .search import AttackResult, Tagger
from .tags import ELIGIBLE_UPOS, PtbTag
from .textproc import detokenize, tag_pos, tokenize, with_surface

log = logging.getLogger(__name__)

CONTENT_TAGS = frozenset(t for t in PtbTag if t is not PtbTag.OTHER)


@dataclasses.dataclass(frozen=True)
class InflectionDistribution:
    weights: Mapping[PtbTag, float]

    def __post_init__(self):
        for tag, weight in self.weights.items():
            if tag not in CONTENT_TAGS:
                raise ValueError(f"non-content tag in distribution: {tag}")
            if weight < 0:
                raise ValueError(f"negative weight for {tag}: {weight}")

    @property
    def total(self) -> float:
        return float(sum(self.weights.values()))

    @property
    def is_empty(self) -> bool:
        return self.total == 0

    def normalized(self) -> dict[PtbTag, float]:
        total = self.total
        if total == 0:
            return {}
        return {t: w / total for t, w in self.weights.items() if w > 0}

    def weight(self, tag: PtbTag) -> float:
        return float(self.weights.get(tag, 0.0))

    def sha256(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()

    def to_json(self) -> dict:
        return {"weights": {str(t): self.weights[t]
                            for t in sorted(self.weights, key=str)}}

    @classmethod
    def from_json(cls, payload: Mapping) -> "InflectionDistribution":
        raw = payload.get("weights")
        if not isinstance(raw, Mapping):
            raise ValueError("distribution JSON needs a 'weights' object")
        weights = {}
        for name, value in raw.items():
            try:
                tag = PtbTag(name)
            except ValueError:
                raise ValueError(f"unknown tag in distribution: {name!r}") \
                    from None
            weights[tag] = float(value)
        return cls(weights)

    @classmethod
    def uniform(cls) -> "InflectionDistribution":
        return cls({t: 1.0 for t in sorted(CONTENT_TAGS, key=str)})


@dataclasses.dataclass(frozen=True)
class TrainsetRecord:
    source_id: str
    variant: int
    text: str
    payload: Mapping

    def to_json(self) -> dict:
        return {"source_id": self.source_id, "variant": self.variant,
                "text": self.text, "payload": dict(self.payload)}


def _degraded(result: AttackResult) -> bool:
    if result.failed or result.clean_score is None \
            or result.adversarial_score is None \
            or result.lower_is_worse is None:
        return False
    return objective(result.adversarial_score, result.lower_is_worse) \
        > objective(result.clean_score, result.lower_is_worse)


def compute_distribution(results: Iterable[AttackResult],
                         filter_degrading: bool = True
                         ) -> InflectionDistribution:
    """Histogram of tag_new over substitutions, by default restricted to
    results whose score actually moved against the model."""
    counts: dict[PtbTag, float] = {}
    for result in results:
        if filter_degrading and not _degraded(result):
            continue
        for sub in result.substitutions:
            counts[sub.tag_new] = counts.get(sub.tag_new, 0.0) + 1.0
    dist = InflectionDistribution(counts)
    if dist.is_empty:
        log.warning("no degrading substitutions found; distribution is empty")
    return dist


def random_inflect(example: str, k: int = 4,
                   dist: Optional[InflectionDistribution] = None,
                   lexicon: Optional[Lexicon] = None,
                   tagger: Optional[Tagger] = None,
                   rng: Optional[random.Random] = None,
                   constrain_upos: bool = True) -> list[str]:
    """The clean example followed by k weighted re-inflections of it.

    Each eligible token's replacement is drawn from its same-UPOS
    candidates with probability proportional to the candidate tag's
    weight; tokens whose candidates all have zero weight draw uniformly.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = dist or InflectionDistribution.uniform()
    lexicon = lexicon or default_lexicon()
    tagger = tagger or tag_pos
    rng = rng or random.Random()
    tagged = tagger(tokenize(example), lexicon)
    out = [example]
    for _ in range(k):
        out.append(_sample_variant(example, tagged, dist, lexicon, rng,
                                   constrain_upos))
    return out


def _sample_variant(example: str, tagged, dist: InflectionDistribution,
                    lexicon: Lexicon, rng: random.Random,
                    constrain_upos: bool) -> str:
    current = tagged
    changed = False
    for pos, token in enumerate(tagged.tokens):
        if token.upos not in ELIGIBLE_UPOS:
            continue
        cands = lexicon.get_inflections(token.surface, token.upos,
                                        constrain=constrain_upos)
        if len({c.surface for c in cands}) <= 1:
            continue
        weights = [dist.weight(c.tag) for c in cands]
        if sum(weights) > 0:
            choice = rng.choices(cands, weights=weights, k=1)[0]
        else:
            choice = cands[rng.randrange(len(cands))]
        if choice.surface != current.tokens[pos].surface:
            current = with_surface(current, pos, choice.surface)
            changed = True
    return detokenize(current) if changed else example


def record_rng(seed: int, source_id: str, variant: int) -> random.Random:
    """Per-record RNG; output depends only on (seed, source_id, variant),
    so workers may process records in any order or partition."""
    digest = hashlib.sha256(f"{seed}:{source_id}:{variant}".encode())
    return random.Random(int(digest.hexdigest(), 16))


def generate_trainset(items: Iterable[tuple[str, str, Mapping]],
                      k: int = 4,
                      dist: Optional[InflectionDistribution] = None,
                      seed: int = 0,
                      lexicon: Optional[Lexicon] = None,
                      tagger: Optional[Tagger] = None,
                      constrain_upos: bool = True
                      ) -> Iterator[TrainsetRecord]:
    """Streams (k+1) records per (source_id, text, payload) item: variant 0
    is the input text untouched, variants 1..k are weighted re-inflections.
    One pass, constant memory."""
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = dist or InflectionDistribution.uniform()
    lexicon = lexicon or default_lexicon()
    tagger = tagger or tag_pos
    for source_id, text, payload in items:
        tagged = tagger(tokenize(text), lexicon)
        yield TrainsetRecord(source_id, 0, text, payload)
        for variant in range(1, k + 1):
            sampled = _sample_variant(
                text, tagged, dist, lexicon,
                record_rng(seed, source_id, variant), constrain_upos)
            yield TrainsetRecord(source_id, variant, sampled, payload)


def build_manifest(seed: int, k: int, dist: InflectionDistribution,
                   n_sources: int, n_records: int,
                   created_at: Optional[str] = None) -> dict:
    manifest = {"seed": seed, "k": k, "dist_sha256": dist.sha256(),
                "n_sources": n_sources, "n_records": n_records}
    if created_at is not None:
        manifest["created_at"] = created_at
    return manifest
