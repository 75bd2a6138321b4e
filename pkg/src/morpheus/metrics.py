"""Task metrics: SQuAD exact-match/F1, corpus BLEU-4, chrF, and the
relative score decrease used in degradation reports.

BLEU follows the mteval-13a tokenization and reports on the usual 0..100
scale with no smoothing by default; chrF uses character n-grams up to order
6 with beta 2 on whitespace-stripped text, also scaled to 0..100.
"""
from __future__ import annotations

import collections
import dataclasses
import enum
import math
import re
import string
from typing import Sequence, Union

_LOG_ZERO = -9999999999
_BLEU_ORDER = 4
_CHRF_ORDER = 6
_CHRF_BETA = 2.0


class Metric(enum.Enum):
    EM = "em"
    F1 = "f1"
    BLEU = "bleu"
    CHRF = "chrf"

    def __str__(self) -> str:
        return self.value


@dataclasses.dataclass(frozen=True)
class QaScore:
    exact_match: float
    f1: float


@dataclasses.dataclass(frozen=True)
class CorpusScore:
    metric: Metric
    value: float
    n_examples: int


# --------------------------------------------------------------- SQuAD

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNC = set(string.punctuation)


def normalize_answer(text: str) -> str:
    """Official SQuAD normalization: case, punctuation, articles, spacing."""
    text = text.lower()
    text = "".join(ch for ch in text if ch not in _PUNC)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def _token_f1(prediction: str, gold: str) -> float:
    pred_tokens = normalize_answer(prediction).split()
    gold_tokens = normalize_answer(gold).split()
    if not pred_tokens or not gold_tokens:
        return float(pred_tokens == gold_tokens)
    common = collections.Counter(pred_tokens) & collections.Counter(gold_tokens)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def qa_score(prediction: str, gold_answers: Sequence[str]) -> QaScore:
    """Best exact-match and token-bag F1 over the gold answers.

    An empty gold list marks an unanswerable question: the model is right
    exactly when its normalized prediction is empty.
    """
    if not gold_answers:
        right = float(normalize_answer(prediction) == "")
        return QaScore(right, right)
    norm_pred = normalize_answer(prediction)
    em = max(float(norm_pred == normalize_answer(g)) for g in gold_answers)
    f1 = max(_token_f1(prediction, g) for g in gold_answers)
    return QaScore(em, f1)


# ---------------------------------------------------------------- BLEU

def _tokenize_13a(line: str) -> list[str]:
    line = line.replace("<skipped>", "")
    line = line.replace("-\n", "")
    line = line.replace("\n", " ")
    line = line.replace("&quot;", '"')
    line = line.replace("&amp;", "&")
    line = line.replace("&lt;", "<")
    line = line.replace("&gt;", ">")
    line = f" {line} "
    line = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", r" \1 ", line)
    line = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", line)
    line = re.sub(r"([\.,])([^0-9])", r" \1 \2", line)
    line = re.sub(r"([0-9])(-)", r"\1 \2 ", line)
    return line.split()


def _ngrams(tokens: Sequence[str], max_order: int) -> collections.Counter:
    counts: collections.Counter = collections.Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i:i + n])] += 1
    return counts


Refs = Union[Sequence[str], Sequence[Sequence[str]]]


def _ref_lists(references: Refs) -> list[list[str]]:
    out = []
    for ref in references:
        out.append([ref] if isinstance(ref, str) else list(ref))
    return out


def bleu(candidates: Sequence[str], references: Refs,
         smooth: str = "none", smooth_value: float = 0.01) -> float:
    """Corpus BLEU-4 in [0, 100]. references may be one string or a list of
    alternatives per candidate. smooth is "none" (default) or "floor"."""
    refs = _ref_lists(references)
    if not candidates or len(candidates) != len(refs):
        raise ValueError("need equal, non-empty candidate/reference lists")
    correct = [0] * _BLEU_ORDER
    total = [0] * _BLEU_ORDER
    sys_len = 0
    ref_len = 0
    for cand, ref_group in zip(candidates, refs):
        ctok = _tokenize_13a(cand)
        rtoks = [_tokenize_13a(r) for r in ref_group]
        sys_len += len(ctok)
        closest = min(rtoks, key=lambda r: (abs(len(r) - len(ctok)), len(r)))
        ref_len += len(closest)
        cand_counts = _ngrams(ctok, _BLEU_ORDER)
        max_ref: collections.Counter = collections.Counter()
        for rtok in rtoks:
            for gram, count in _ngrams(rtok, _BLEU_ORDER).items():
                max_ref[gram] = max(max_ref[gram], count)
        for gram, count in cand_counts.items():
            n = len(gram)
            total[n - 1] += count
            correct[n - 1] += min(count, max_ref.get(gram, 0))
    log_sum = 0.0
    for n in range(_BLEU_ORDER):
        if total[n] == 0:
            precision = 0.0
        elif smooth == "floor":
            precision = 100.0 * max(smooth_value, correct[n]) / total[n]
        else:
            precision = 100.0 * correct[n] / total[n]
        log_sum += math.log(precision) if precision > 0 else _LOG_ZERO
    if sys_len == 0:
        return 0.0
    bp = 1.0 if sys_len > ref_len else math.exp(1 - ref_len / sys_len)
    return bp * math.exp(log_sum / _BLEU_ORDER)


def sentence_bleu(candidate: str, reference: str,
                  smooth: str = "floor", smooth_value: float = 0.01) -> float:
    """Single-sentence BLEU; floor smoothing by default so that partial
    matches keep a usable gradient for per-candidate ranking."""
    return bleu([candidate], [[reference]], smooth=smooth,
                smooth_value=smooth_value)


# ---------------------------------------------------------------- chrF

_WS = re.compile(r"\s+")


def _char_ngrams(text: str, n: int) -> collections.Counter:
    return collections.Counter(text[i:i + n] for i in range(len(text) - n + 1))


def chrf(candidates: Sequence[str], references: Refs) -> float:
    """Corpus chrF (char n-grams to order 6, beta 2) in [0, 100]. With
    multiple references per candidate, the first is used."""
    refs = _ref_lists(references)
    if not candidates or len(candidates) != len(refs):
        raise ValueError("need equal, non-empty candidate/reference lists")
    stats = [0] * (3 * _CHRF_ORDER)
    for cand, ref_group in zip(candidates, refs):
        c = _WS.sub("", cand)
        r = _WS.sub("", ref_group[0])
        for i in range(_CHRF_ORDER):
            cg = _char_ngrams(c, i + 1)
            rg = _char_ngrams(r, i + 1)
            stats[3 * i] += sum(cg.values())
            stats[3 * i + 1] += sum(rg.values())
            stats[3 * i + 2] += sum((cg & rg).values())
    precision = 0.0
    recall = 0.0
    effective = 0
    for i in range(_CHRF_ORDER):
        if stats[3 * i] > 0 and stats[3 * i + 1] > 0:
            precision += stats[3 * i + 2] / stats[3 * i]
            recall += stats[3 * i + 2] / stats[3 * i + 1]
            effective += 1
    if effective == 0:
        return 0.0
    precision /= effective
    recall /= effective
    if precision + recall == 0:
        return 0.0
    beta_sq = _CHRF_BETA ** 2
    return 100.0 * (1 + beta_sq) * precision * recall / \
        (beta_sq * precision + recall)


def sentence_chrf(candidate: str, reference: str) -> float:
    return chrf([candidate], [reference])


# ------------------------------------------------------- degradation

def relative_decrease(score_original: float, score_adversarial: float) -> float:
    """Fractional drop from the original score; undefined at zero."""
    if score_original <= 0:
        raise ValueError("relative decrease needs a positive original score")
    return (score_original - score_adversarial) / score_original
