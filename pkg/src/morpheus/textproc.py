"""Reversible tokenization and part-of-speech tagging.

Tokenization peels punctuation off the edges of whitespace-separated chunks
and records whether each token was preceded by a space, so detokenize is an
exact inverse on single-spaced text. Substituting a token surface keeps the
spacing flags, which is how perturbed sentences stay well formed.

The builtin tagger is a lookup-plus-heuristics affair: closed-class table,
bundled paradigm and wordlist lookup, then morphological analysis and shape
fallbacks. It exists to make the pipeline self-contained; callers with
better tags can supply pre-tagged input, which is trusted verbatim.
"""
from __future__ import annotations

import dataclasses
import string
from typing import Iterable, Optional, Sequence, Union

from .lexicon import Lexicon, default_lexicon
from .tags import PtbTag, UPos, parse_ptb, ptb_to_upos

_PEEL = set(string.punctuation) | set("‘’“”«»…–—")


@dataclasses.dataclass(frozen=True)
class Token:
    surface: str
    index: int
    space_before: bool
    tag: Optional[PtbTag] = None
    upos: Optional[UPos] = None


@dataclasses.dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[Token, ...]
    original: str


def tokenize(text: str) -> TaggedSentence:
    """Split text into tokens; empty input gives an empty token list."""
    tokens: list[Token] = []
    for chunk in text.split():
        first_of_chunk = True
        lead: list[str] = []
        trail: list[str] = []
        core = chunk
        while core and core[0] in _PEEL:
            lead.append(core[0])
            core = core[1:]
        while core and core[-1] in _PEEL:
            trail.append(core[-1])
            core = core[:-1]
        for part in lead + ([core] if core else []) + trail[::-1]:
            space = bool(tokens) and first_of_chunk
            tokens.append(Token(part, len(tokens), space))
            first_of_chunk = False
    return TaggedSentence(tuple(tokens), text)


def detokenize(sent: Union[TaggedSentence, Sequence[Token]]) -> str:
    tokens = sent.tokens if isinstance(sent, TaggedSentence) else sent
    return "".join((" " if t.space_before else "") + t.surface for t in tokens)


def with_surface(sent: TaggedSentence, index: int, surface: str) -> TaggedSentence:
    """Copy of the sentence with one token surface replaced."""
    tokens = list(sent.tokens)
    tokens[index] = dataclasses.replace(tokens[index], surface=surface)
    return TaggedSentence(tuple(tokens), detokenize(tokens))


def from_pretagged(surfaces: Sequence[str], tags: Sequence[str]) -> TaggedSentence:
    """Build a sentence from external token/tag lists, trusted verbatim.

    Spacing is reconstructed heuristically (no space before trailing
    punctuation) since pre-tagged input carries none.
    """
    if len(surfaces) != len(tags):
        raise ValueError("tokens and tags differ in length")
    tokens = []
    for i, (surface, tag_s) in enumerate(zip(surfaces, tags)):
        space = i > 0 and surface not in {".", ",", "!", "?", ";", ":", ")",
                                          "]", "}", "'", "''", "%"}
        tag = parse_ptb(tag_s)
        tokens.append(Token(surface, i, space, tag, ptb_to_upos(tag)))
    return TaggedSentence(tuple(tokens), detokenize(tokens))


# Closed-class words map straight to OTHER; auxiliaries (be/have/do) are
# deliberately absent because they inflect and are attack targets.
_FUNCTION_WORDS = frozenset("""
the a an this that these those some any each every either neither no
i you he she it we they me him her us them my your his its our their
mine yours hers ours theirs myself yourself himself herself itself
ourselves yourselves themselves who whom whose which what when where why
how whoever whatever whichever there
and or but nor so if because although though while whereas unless until
till since before after as than whether once
of in on at by for with about against between among through during
without within along across behind beyond under above below over up down
off out into onto upon from to near next
can could will would shall should may might must ought
not never also just even only too very quite rather almost already still
yet again always often sometimes usually then now here
oh yes no please
""".split())

_BE_HAVE = frozenset({"be", "am", "is", "are", "was", "were", "been", "being",
                      "have", "has", "had", "having"})
_TO_MODAL_DO = frozenset({"to", "can", "could", "will", "would", "shall",
                          "should", "may", "might", "must", "do", "does",
                          "did", "don't", "doesn't", "didn't"})
_DETERMINERS = frozenset({"the", "a", "an", "this", "that", "these", "those",
                          "my", "your", "his", "her", "its", "our", "their",
                          "some", "any", "no", "each", "every"})


def tag_pos(sent: TaggedSentence, lexicon: Optional[Lexicon] = None) -> TaggedSentence:
    """Assign a PTB tag and universal class to every token."""
    lex = lexicon or default_lexicon()
    surfaces = [t.surface for t in sent.tokens]
    lowers = [s.lower() for s in surfaces]
    tagged = []
    for i, tok in enumerate(sent.tokens):
        tag = _tag_token(lex, surfaces, lowers, i)
        tagged.append(dataclasses.replace(tok, tag=tag, upos=ptb_to_upos(tag)))
    return TaggedSentence(tuple(tagged), sent.original)


def _tag_token(lex: Lexicon, surfaces: list[str], lowers: list[str], i: int) -> PtbTag:
    s, low = surfaces[i], lowers[i]
    if not any(ch.isalpha() for ch in s):
        return PtbTag.OTHER
    if "'" in s or "’" in s:
        return PtbTag.OTHER
    if low in _FUNCTION_WORDS:
        return PtbTag.OTHER
    word_tags = lex.word_tags(low)
    if word_tags:
        return _from_wordlist(word_tags, lowers, i)
    form_tag = lex.form_tag(low)
    if form_tag is not None:
        if form_tag in (PtbTag.VB, PtbTag.VBP):
            return PtbTag.VB if _verb_context(lowers, i) else PtbTag.VBP
        return form_tag
    tag = _analyze(lex, lowers, i)
    if tag is not None:
        return tag
    if s[:1].isupper():
        return PtbTag.NNP
    if low.endswith("ly"):
        return PtbTag.OTHER
    return PtbTag.NN


def _from_wordlist(word_tags: list[str], lowers: list[str], i: int) -> PtbTag:
    primary = word_tags[0]
    if "VB" in word_tags:
        if _verb_context(lowers, i):
            return PtbTag.VB
        if primary != "VB" and i > 0 and lowers[i - 1] in _DETERMINERS:
            return parse_ptb(primary)
        if primary == "VB":
            return PtbTag.VBP
    return parse_ptb(primary)


def _verb_context(lowers: list[str], i: int) -> bool:
    j = i - 1
    hops = 0
    while j >= 0 and hops < 2:
        w = lowers[j]
        if w in _TO_MODAL_DO:
            return True
        if w == "not" or w.endswith("ly"):
            j -= 1
            hops += 1
            continue
        return False
    return False


def _aux_before(lowers: list[str], i: int) -> bool:
    return any(w in _BE_HAVE for w in lowers[:i])


def _analyze(lex: Lexicon, lowers: list[str], i: int) -> Optional[PtbTag]:
    low = lowers[i]
    if low.endswith("ing") and lex.lemmatize(low, UPos.VERB) != low:
        return PtbTag.VBG
    if low.endswith("ed") and lex.lemmatize(low, UPos.VERB) != low:
        return PtbTag.VBN if _aux_before(lowers, i) else PtbTag.VBD
    if low.endswith("s"):
        noun_stem = lex.lemmatize(low, UPos.NOUN)
        if noun_stem != low:
            stem_tags = lex.word_tags(noun_stem)
            if not stem_tags or stem_tags[0] in ("NN", "NNP"):
                return PtbTag.NNPS if stem_tags[:1] == ["NNP"] else PtbTag.NNS
        verb_stem = lex.lemmatize(low, UPos.VERB)
        if verb_stem != low:
            return PtbTag.VBZ
        if noun_stem != low:
            return PtbTag.NNS
    if low.endswith("er") and lex.lemmatize(low, UPos.ADJ) != low:
        return PtbTag.JJR
    if low.endswith("est") and lex.lemmatize(low, UPos.ADJ) != low:
        return PtbTag.JJS
    return None
