"""Built-in extractive reader: a deterministic lexical span picker.

Candidate answers are short runs of non-stopword passage tokens; each is
scored by distance-weighted exact matches between the question's content
words and the tokens around the span.  No training and no logits, but it
behaves like a reader in the interface sense (question + passage -> span)
and is sensitive to surface perturbations of the question, which is what
the scoring protocol exercises.
"""
import dataclasses
import re

_WORD_RE = re.compile(r"[A-Za-z0-9]+(?:'[A-Za-z]+)?")

_STOPWORDS = frozenset("""
    a an the of in on at to and or for with by from as that this these those
    is are was were be been being am do does did have has had will would can
    could shall should may might must not no nor so than then there here it
    its he she they them his her their who whom whose what which when where
    why how many much
""".split())


@dataclasses.dataclass(frozen=True)
class Span:
    text: str
    start: int
    length: int
    score: float


class LexicalSpanPicker:
    """Picks the span whose neighborhood best matches the question.

    A keyword occurring d tokens from the span edge contributes
    1 / (1 + d); keywords repeated inside the span are penalized because
    answer text rarely restates the question, and longer spans pay a small
    length penalty so ties resolve to the tightest span.
    """

    def __init__(self, max_span: int = 4, neighborhood: int = 8,
                 repeat_penalty: float = 0.5, length_penalty: float = 0.05):
        self.max_span = max_span
        self.neighborhood = neighborhood
        self.repeat_penalty = repeat_penalty
        self.length_penalty = length_penalty

    def _keywords(self, question: str) -> set[str]:
        return {w.lower() for w in _WORD_RE.findall(question)} - _STOPWORDS

    def best_span(self, question: str, passage: str) -> Span:
        keywords = self._keywords(question)
        words = _WORD_RE.findall(passage)
        lowered = [w.lower() for w in words]
        best = Span("", 0, 0, 0.0)
        if not keywords or not words:
            return best
        positions: dict[str, list[int]] = {}
        for i, w in enumerate(lowered):
            if w in keywords:
                positions.setdefault(w, []).append(i)
        best_key: tuple = (0.0, 0, 0)
        for start in range(len(words)):
            if lowered[start] in _STOPWORDS:
                continue
            for length in range(1, self.max_span + 1):
                end = start + length
                if end > len(words) or lowered[end - 1] in _STOPWORDS:
                    break
                score = 0.0
                for keyword, occs in positions.items():
                    weight = 0.0
                    inside = False
                    for p in occs:
                        if start <= p < end:
                            inside = True
                        elif p < start:
                            d = start - p
                            if d <= self.neighborhood:
                                weight = max(weight, 1.0 / (1.0 + d))
                        else:
                            d = p - end + 1
                            if d <= self.neighborhood:
                                weight = max(weight, 1.0 / (1.0 + d))
                    score += weight
                    if inside:
                        score -= self.repeat_penalty
                score -= self.length_penalty * (length - 1)
                key = (score, -start, -length)
                if key > best_key:
                    best_key = key
                    best = Span(" ".join(words[start:end]), start, length,
                                score)
        return best

    def predict(self, question: str, passage: str) -> str:
        """The chosen answer span, or "" when nothing scores above zero."""
        span = self.best_span(question, passage)
        return span.text if span.score > 0.0 else ""
