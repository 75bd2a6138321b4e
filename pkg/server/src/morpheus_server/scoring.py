"""Sentence-level scoring used by the adapters.

Deliberately self-contained: the server talks to the attack tooling over
the wire protocol only, so it carries its own small scoring code instead
of importing the client side.
"""
import collections
import math
import re
import string
from typing import Sequence

_ARTICLE_RE = re.compile(r"\b(?:a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_WORD_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def normalize_answer(text: str) -> str:
    """SQuAD-style normalization: case, punctuation, articles, whitespace."""
    text = text.lower().translate(_PUNCT_TABLE)
    return " ".join(_ARTICLE_RE.sub(" ", text).split())


def token_f1(prediction: str, gold_answers: Sequence[str]) -> float:
    """Best token-bag F1 of the prediction against any gold answer.

    An empty gold list marks an unanswerable question: full credit iff the
    prediction normalizes to the empty string.
    """
    pred = normalize_answer(prediction)
    if not gold_answers:
        return 1.0 if not pred else 0.0
    best = 0.0
    pred_tokens = pred.split()
    for gold in gold_answers:
        gold_tokens = normalize_answer(gold).split()
        if not pred_tokens or not gold_tokens:
            best = max(best, float(pred_tokens == gold_tokens))
            continue
        common = collections.Counter(pred_tokens) & collections.Counter(
            gold_tokens)
        overlap = sum(common.values())
        if overlap == 0:
            continue
        precision = overlap / len(pred_tokens)
        recall = overlap / len(gold_tokens)
        best = max(best, 2 * precision * recall / (precision + recall))
    return best


def _ngrams(tokens: Sequence[str], order: int) -> collections.Counter:
    return collections.Counter(
        tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1))


def sentence_bleu(candidate: str, reference: str, max_order: int = 4,
                  floor: float = 0.01) -> float:
    """Floor-smoothed sentence BLEU in [0, 100]."""
    cand = _WORD_RE.findall(candidate)
    ref = _WORD_RE.findall(reference)
    if not cand or not ref:
        return 0.0
    log_sum = 0.0
    for order in range(1, max_order + 1):
        total = max(len(cand) - order + 1, 0)
        if total == 0:
            # Shorter than the order: count the missing n-grams against it.
            log_sum += math.log(floor)
            continue
        matched = sum((_ngrams(cand, order) & _ngrams(ref, order)).values())
        log_sum += math.log(max(matched, floor) / total)
    brevity = 1.0 if len(cand) >= len(ref) else math.exp(
        1.0 - len(ref) / len(cand))
    return 100.0 * brevity * math.exp(log_sum / max_order)


def sentence_chrf(candidate: str, reference: str, max_order: int = 6,
                  beta: float = 2.0) -> float:
    """Character n-gram F-score in [0, 100] (whitespace ignored)."""
    cand = "".join(candidate.split())
    ref = "".join(reference.split())
    if not cand or not ref:
        return 100.0 if cand == ref else 0.0
    precisions = []
    recalls = []
    for order in range(1, max_order + 1):
        cg = collections.Counter(
            cand[i:i + order] for i in range(len(cand) - order + 1))
        rg = collections.Counter(
            ref[i:i + order] for i in range(len(ref) - order + 1))
        if not cg and not rg:
            continue
        matched = sum((cg & rg).values())
        precisions.append(matched / sum(cg.values()) if cg else 0.0)
        recalls.append(matched / sum(rg.values()) if rg else 0.0)
    precision = sum(precisions) / len(precisions)
    recall = sum(recalls) / len(recalls)
    if precision + recall == 0.0:
        return 0.0
    b2 = beta * beta
    return 100.0 * (1 + b2) * precision * recall / (b2 * precision + recall)
