"""Part-of-speech tag vocabulary shared across the toolkit.

Penn Treebank tags for content words, the coarse universal classes they map
to, and the fixed bridge table between the two.
"""
from __future__ import annotations

import enum


class UPos(enum.Enum):
    """Coarse word class. Only NOUN/VERB/ADJ are perturbation-eligible."""

    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    ADV = "ADV"
    OTHER = "OTHER"

    def __str__(self) -> str:  # keeps JSONL output compact
        return self.value


class PtbTag(enum.Enum):
    """PTB tags for inflectable content words; everything else is OTHER."""

    NN = "NN"
    NNS = "NNS"
    NNP = "NNP"
    NNPS = "NNPS"
    VB = "VB"
    VBD = "VBD"
    VBG = "VBG"
    VBN = "VBN"
    VBP = "VBP"
    VBZ = "VBZ"
    JJ = "JJ"
    JJR = "JJR"
    JJS = "JJS"
    RBR = "RBR"
    RBS = "RBS"
    OTHER = "OTHER"

    def __str__(self) -> str:
        return self.value


_PTB_TO_UPOS = {
    PtbTag.NN: UPos.NOUN,
    PtbTag.NNS: UPos.NOUN,
    PtbTag.NNP: UPos.NOUN,
    PtbTag.NNPS: UPos.NOUN,
    PtbTag.VB: UPos.VERB,
    PtbTag.VBD: UPos.VERB,
    PtbTag.VBG: UPos.VERB,
    PtbTag.VBN: UPos.VERB,
    PtbTag.VBP: UPos.VERB,
    PtbTag.VBZ: UPos.VERB,
    PtbTag.JJ: UPos.ADJ,
    PtbTag.JJR: UPos.ADJ,
    PtbTag.JJS: UPos.ADJ,
    # Comparative/superlative adverbs are inflectable but not eligible by
    # default; an AttackConfig flag opts them in as ADV.
    PtbTag.RBR: UPos.OTHER,
    PtbTag.RBS: UPos.OTHER,
    PtbTag.OTHER: UPos.OTHER,
}

# Base tag per class, used for unknown-word singletons.
BASE_TAG = {
    UPos.NOUN: PtbTag.NN,
    UPos.VERB: PtbTag.VB,
    UPos.ADJ: PtbTag.JJ,
    UPos.ADV: PtbTag.OTHER,
}

ELIGIBLE_UPOS = frozenset({UPos.NOUN, UPos.VERB, UPos.ADJ})


def ptb_to_upos(tag: PtbTag) -> UPos:
    """Map a PTB tag to its universal class via the fixed table."""
    return _PTB_TO_UPOS[tag]


def parse_ptb(text: str) -> PtbTag:
    """Read an external tag string; anything outside the vocabulary is OTHER.

    Accepts full PTB tagsets (DT, IN, RB, CD, ...) by collapsing them, so
    pre-tagged corpora using a standard tagger load without translation.
    """
    try:
        return PtbTag(text.upper())
    except ValueError:
        return PtbTag.OTHER


def parse_upos(text: str) -> UPos:
    try:
        return UPos(text.upper())
    except ValueError:
        return UPos.OTHER
