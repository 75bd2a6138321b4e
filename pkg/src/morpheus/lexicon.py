"""English inflectional morphology over a bundled exception lexicon plus
regular affix rules.

The exception file carries full paradigms for irregular words; everything
else is analyzed and generated by suffix rules validated against a bundled
wordlist. Unknown words pass through unchanged: lemmatize is total and
get_inflections degrades to a singleton, which downstream code treats as
"nothing to perturb" rather than an error.
"""
from __future__ import annotations

import dataclasses
import functools
import importlib.resources
import os
import random
from typing import Iterable, Optional, Sequence

from .tags import BASE_TAG, PtbTag, UPos, parse_ptb, ptb_to_upos

_VOWELS = set("aeiou")

# Final-consonant doubling before -ed/-ing/-er/-est: monosyllabic
# consonant-vowel-consonant stems, plus listed polysyllabic stems whose
# final syllable is stressed.
_DOUBLING_EXTRA = frozenset({
    "begin", "forbid", "forget", "upset", "quit", "equip", "permit", "admit",
    "commit", "submit", "omit", "emit", "transmit", "refer", "prefer",
    "occur", "incur", "deter", "regret", "control", "patrol", "kidnap",
    "transfer", "unwrap", "format",
})

# Nouns/verbs ending in -o that pluralize with -es.
_O_TAKES_ES = frozenset({
    "hero", "potato", "tomato", "echo", "veto", "torpedo", "embargo",
    "cargo", "tornado", "go", "do", "undo", "undergo",
})


def _is_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    a, b, c = word[-3], word[-2], word[-1]
    return a not in _VOWELS and b in _VOWELS and c not in _VOWELS and c not in "wxy"


def _syllable_groups(word: str) -> int:
    groups = 0
    prev = False
    for ch in word:
        vowel = ch in _VOWELS or ch == "y"
        if vowel and not prev:
            groups += 1
        prev = vowel
    return groups


def _doubles(word: str) -> bool:
    if word in _DOUBLING_EXTRA:
        return True
    return _is_cvc(word) and _syllable_groups(word) == 1


def pluralize(lemma: str) -> str:
    """Regular plural / third-person-singular surface for a base form."""
    if lemma.endswith("z") and not lemma.endswith("zz"):
        return lemma + "zes"
    if lemma.endswith(("s", "x", "ch", "sh")):
        return lemma + "es"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in _VOWELS:
        return lemma[:-1] + "ies"
    if lemma.endswith("o") and lemma in _O_TAKES_ES:
        return lemma + "es"
    return lemma + "s"


def past_form(lemma: str) -> str:
    """Regular -ed surface (used for both VBD and VBN)."""
    if lemma.endswith("e"):
        return lemma + "d"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in _VOWELS:
        return lemma[:-1] + "ied"
    if lemma.endswith("c"):
        return lemma + "ked"
    if _doubles(lemma):
        return lemma + lemma[-1] + "ed"
    return lemma + "ed"


def gerund_form(lemma: str) -> str:
    if lemma.endswith("ie"):
        return lemma[:-2] + "ying"
    if lemma.endswith("e") and not lemma.endswith(("ee", "oe", "ye")):
        return lemma[:-1] + "ing"
    if lemma.endswith("c"):
        return lemma + "king"
    if _doubles(lemma):
        return lemma + lemma[-1] + "ing"
    return lemma + "ing"


def comparative_form(lemma: str) -> str:
    if lemma.endswith("e"):
        return lemma + "r"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in _VOWELS:
        return lemma[:-1] + "ier"
    if _doubles(lemma):
        return lemma + lemma[-1] + "er"
    return lemma + "er"


def superlative_form(lemma: str) -> str:
    if lemma.endswith("e"):
        return lemma + "st"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in _VOWELS:
        return lemma[:-1] + "iest"
    if _doubles(lemma):
        return lemma + lemma[-1] + "est"
    return lemma + "est"


_LOWER, _TITLE, _UPPER = 0, 1, 2


def _case_pattern(word: str) -> int:
    if len(word) > 1 and word.isupper():
        return _UPPER
    if word[:1].isupper():
        return _TITLE
    return _LOWER


def _apply_case(pattern: int, word: str) -> str:
    if pattern == _UPPER:
        return word.upper()
    if pattern == _TITLE:
        return word[:1].upper() + word[1:]
    return word


@dataclasses.dataclass(frozen=True)
class InflectionCandidate:
    surface: str
    tag: PtbTag
    upos: UPos


@dataclasses.dataclass(frozen=True)
class LexiconEntry:
    lemma: str
    upos: UPos
    forms: tuple[tuple[str, PtbTag], ...]


def _data_path(name: str):
    return importlib.resources.files("morpheus").joinpath("data", name)


class Lexicon:
    """Morphological analyzer/generator with immutable post-load state."""

    def __init__(self, entries: Iterable[LexiconEntry],
                 wordlist: dict[str, list[str]],
                 exclude_lemmas: Sequence[str] = ()):
        self._entries: dict[tuple[str, UPos], LexiconEntry] = {}
        self._form_index: dict[tuple[str, UPos], str] = {}
        self._form_tags: dict[str, PtbTag] = {}
        self._words = wordlist
        self.exclude_lemmas = frozenset(w.lower() for w in exclude_lemmas)
        for entry in entries:
            key = (entry.lemma, entry.upos)
            if key in self._entries:
                continue
            self._entries[key] = entry
            for surface, tag in entry.forms:
                self._form_index.setdefault((surface, entry.upos), entry.lemma)
                self._form_tags.setdefault(surface, tag)
        # Drop paradigm forms claimed by an earlier entry so that every
        # remaining form lemmatizes back to its own lemma. This makes the
        # round-trip and closure properties hold by construction.
        for key, entry in list(self._entries.items()):
            kept = tuple((s, t) for s, t in entry.forms
                         if self._lemma_lower(s, entry.upos) == entry.lemma)
            if kept != entry.forms:
                self._entries[key] = dataclasses.replace(entry, forms=kept)

    # ------------------------------------------------------------ loading

    @classmethod
    def load(cls, lexicon_path: Optional[str] = None,
             wordlist_path: Optional[str] = None,
             exclude_lemmas: Sequence[str] = ()) -> "Lexicon":
        lexicon_path = lexicon_path or os.environ.get("MORPHEUS_LEXICON")
        wordlist_path = wordlist_path or os.environ.get("MORPHEUS_WORDLIST")
        if lexicon_path:
            with open(lexicon_path, encoding="utf-8") as fh:
                entries = list(_parse_lexicon(fh))
        else:
            with _data_path("lexicon_en.tsv").open(encoding="utf-8") as fh:
                entries = list(_parse_lexicon(fh))
        if wordlist_path:
            with open(wordlist_path, encoding="utf-8") as fh:
                words = _parse_wordlist(fh)
        else:
            with _data_path("wordlist_en.tsv").open(encoding="utf-8") as fh:
                words = _parse_wordlist(fh)
        return cls(entries, words, exclude_lemmas)

    # ------------------------------------------------------------ queries

    def entries(self) -> list[LexiconEntry]:
        """All exception paradigms after load-time consistency pruning."""
        return list(self._entries.values())

    def known_word(self, word: str) -> bool:
        w = word.lower()
        if w in self._words or w in self._form_tags:
            return True
        return any((w, upos) in self._form_index
                   for upos in (UPos.NOUN, UPos.VERB, UPos.ADJ, UPos.ADV))

    def word_tags(self, word: str) -> list[str]:
        """Raw wordlist tag strings for a word (empty if absent)."""
        return self._words.get(word.lower(), [])

    def form_tag(self, surface: str) -> Optional[PtbTag]:
        """First paradigm tag claimed for a surface, for tagger lookup."""
        return self._form_tags.get(surface.lower())

    def _known_base(self, word: str, upos: UPos) -> bool:
        if (word, upos) in self._entries:
            return True
        tags = self._words.get(word)
        if not tags:
            return False
        if upos is UPos.NOUN:
            return "NN" in tags or "NNP" in tags
        if upos is UPos.VERB:
            return "VB" in tags
        if upos is UPos.ADJ:
            return "JJ" in tags
        if upos is UPos.ADV:
            return "RB" in tags
        return False

    def _has_form(self, word: str, tag: str) -> bool:
        return tag in self._words.get(word, [])

    # --------------------------------------------------------- lemmatize

    def lemmatize(self, surface: str, upos: UPos) -> str:
        """Citation form of a single token; unknown words pass through."""
        lemma = self._lemma_lower(surface.lower(), upos)
        if lemma == surface.lower():
            return surface
        return _apply_case(_case_pattern(surface), lemma)

    def _lemma_lower(self, s: str, upos: UPos) -> str:
        hit = self._form_index.get((s, upos))
        if hit is not None:
            return hit
        if self._known_base(s, upos):
            return s
        if upos is UPos.NOUN:
            return self._strip_s(s, upos) or s
        if upos is UPos.VERB:
            return (self._strip_s(s, upos) or self._strip_ed(s)
                    or self._strip_ing(s) or s)
        if upos is UPos.ADJ:
            return self._strip_graded(s) or s
        return s

    def _check(self, stem: str, upos: UPos, regen, surface: str) -> Optional[str]:
        if stem and self._known_base(stem, upos) and regen(stem) == surface:
            return stem
        return None

    @staticmethod
    def _undoubled(stem: str) -> str:
        if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS:
            return stem[:-1]
        return ""

    def _strip_s(self, s: str, upos: UPos) -> Optional[str]:
        if s.endswith("ies") and len(s) > 3:
            hit = self._check(s[:-3] + "y", upos, pluralize, s)
            if hit:
                return hit
        if s.endswith("zes"):
            hit = self._check(s[:-3], upos, pluralize, s)
            if hit:
                return hit
        if s.endswith("es"):
            hit = self._check(s[:-2], upos, pluralize, s)
            if hit:
                return hit
        if s.endswith("s") and not s.endswith("ss"):
            hit = self._check(s[:-1], upos, pluralize, s)
            if hit:
                return hit
        return None

    def _strip_ed(self, s: str) -> Optional[str]:
        if s.endswith("ied"):
            hit = self._check(s[:-3] + "y", UPos.VERB, past_form, s)
            if hit:
                return hit
        if s.endswith("ked"):
            hit = self._check(s[:-3], UPos.VERB, past_form, s)
            if hit:
                return hit
        if s.endswith("ed"):
            for stem in (s[:-2], s[:-1], self._undoubled(s[:-2])):
                hit = self._check(stem, UPos.VERB, past_form, s)
                if hit:
                    return hit
        return None

    def _strip_ing(self, s: str) -> Optional[str]:
        if s.endswith("ying"):
            hit = self._check(s[:-4] + "ie", UPos.VERB, gerund_form, s)
            if hit:
                return hit
        if s.endswith("king"):
            hit = self._check(s[:-4], UPos.VERB, gerund_form, s)
            if hit:
                return hit
        if s.endswith("ing"):
            for stem in (s[:-3], s[:-3] + "e", self._undoubled(s[:-3])):
                hit = self._check(stem, UPos.VERB, gerund_form, s)
                if hit:
                    return hit
        return None

    def _strip_graded(self, s: str) -> Optional[str]:
        if s.endswith("ier"):
            hit = self._check(s[:-3] + "y", UPos.ADJ, comparative_form, s)
            if hit:
                return hit
        if s.endswith("iest"):
            hit = self._check(s[:-4] + "y", UPos.ADJ, superlative_form, s)
            if hit:
                return hit
        if s.endswith("est"):
            for stem in (s[:-3], s[:-2], self._undoubled(s[:-3])):
                hit = self._check(stem, UPos.ADJ, superlative_form, s)
                if hit:
                    return hit
        if s.endswith("er"):
            for stem in (s[:-2], s[:-1], self._undoubled(s[:-2])):
                hit = self._check(stem, UPos.ADJ, comparative_form, s)
                if hit:
                    return hit
        return None

    # -------------------------------------------------------- generation

    def get_inflections(self, token: str, upos: UPos, constrain: bool = True,
                        shuffle: bool = False,
                        rng: Optional[random.Random] = None
                        ) -> list[InflectionCandidate]:
        """All inflected forms of the token's lemma, original included.

        With constrain each candidate's tag must map back to `upos`; with
        shuffle the order is a uniform permutation from `rng`, otherwise
        lexicographic. Unknown tokens yield a singleton.
        """
        lower = token.lower()
        lemma = self._lemma_lower(lower, upos)
        forms = self._forms_for(lemma, upos)
        if lemma in self.exclude_lemmas:
            forms = []
        pattern = _case_pattern(token)
        out: list[InflectionCandidate] = []
        seen: set[tuple[str, PtbTag]] = set()
        for surface, tag in forms:
            if constrain and upos is not UPos.ADV and ptb_to_upos(tag) is not upos:
                continue
            cased = _apply_case(pattern, surface)
            if (cased, tag) in seen:
                continue
            seen.add((cased, tag))
            out.append(InflectionCandidate(cased, tag, upos))
        if not any(c.surface == token for c in out):
            tag = self._form_tags.get(lower, BASE_TAG[upos])
            out.append(InflectionCandidate(token, tag, upos))
        if shuffle:
            if rng is None:
                rng = random.Random()
            rng.shuffle(out)
        else:
            out.sort(key=lambda c: (c.surface, c.tag.value))
        return out

    def _forms_for(self, lemma: str, upos: UPos) -> list[tuple[str, PtbTag]]:
        entry = self._entries.get((lemma, upos))
        if entry is not None:
            return list(entry.forms)
        if not self._known_base(lemma, upos):
            return []
        if upos is UPos.NOUN:
            proper = "NNP" in self._words.get(lemma, []) and \
                "NN" not in self._words.get(lemma, [])
            base, plural = (PtbTag.NNP, PtbTag.NNPS) if proper else \
                (PtbTag.NN, PtbTag.NNS)
            forms = [(lemma, base), (pluralize(lemma), plural)]
        elif upos is UPos.VERB:
            past = past_form(lemma)
            forms = [(lemma, PtbTag.VB), (lemma, PtbTag.VBP),
                     (pluralize(lemma), PtbTag.VBZ), (past, PtbTag.VBD),
                     (past, PtbTag.VBN), (gerund_form(lemma), PtbTag.VBG)]
        elif upos is UPos.ADJ:
            forms = [(lemma, PtbTag.JJ)]
            comp, sup = comparative_form(lemma), superlative_form(lemma)
            if self._has_form(comp, "JJR"):
                forms.append((comp, PtbTag.JJR))
            if self._has_form(sup, "JJS"):
                forms.append((sup, PtbTag.JJS))
        else:
            forms = [(lemma, PtbTag.OTHER)]
        # A rule-generated surface may be claimed by an exception paradigm
        # (e.g. the plural of a regular noun colliding with an irregular
        # one); keep only forms that analyze back to this lemma.
        return [(s, t) for s, t in forms
                if self._lemma_lower(s, upos) == lemma]


def _parse_lexicon(lines: Iterable[str]) -> Iterable[LexiconEntry]:
    from .tags import parse_upos
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        lemma, upos_s, forms_s = line.split("\t")
        forms = []
        for part in forms_s.split(","):
            surface, _, tag_s = part.rpartition(":")
            forms.append((surface, parse_ptb(tag_s)))
        yield LexiconEntry(lemma, parse_upos(upos_s), tuple(forms))


def _parse_wordlist(lines: Iterable[str]) -> dict[str, list[str]]:
    words: dict[str, list[str]] = {}
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, tags = line.split("\t")
        words[word] = tags.split(",")
    return words


@functools.lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    return Lexicon.load()
