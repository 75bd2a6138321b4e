import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_mixed_corpus
from morpheus.tags import PtbTag, UPos
from morpheus.textproc import (TaggedSentence, detokenize, from_pretagged,
                               tag_pos, tokenize, with_surface)


class TestTokenize:
    def test_question_token_count(self):
        sent = tokenize("When is the suspended team scheduled to return?")
        assert len(sent.tokens) == 9
        assert sent.tokens[-1].surface == "?"

    def test_empty_input(self):
        assert tokenize("").tokens == ()

    def test_terminal_punctuation_split(self):
        assert [t.surface for t in tokenize("duck.").tokens] == ["duck", "."]

    def test_quotes_and_parens_peel(self):
        got = [t.surface for t in tokenize('He said "stop" (twice).').tokens]
        assert got == ["He", "said", '"', "stop", '"', "(", "twice", ")", "."]

    def test_internal_apostrophe_kept(self):
        got = [t.surface for t in tokenize("They didn't go.").tokens]
        assert got == ["They", "didn't", "go", "."]

    def test_first_token_has_no_space(self):
        sent = tokenize("a b")
        assert sent.tokens[0].space_before is False
        assert sent.tokens[1].space_before is True


class TestDetokenize:
    def test_empty(self):
        assert detokenize(tokenize("")) == ""

    def test_exact_inverse_on_samples(self):
        for s in ["duck.", "When is the suspended team scheduled to return?",
                  'He said "stop" (twice).', "A 3.5% rise, by 1907 - twice!",
                  "They didn't go."]:
            assert detokenize(tokenize(s)) == s

    def test_exact_inverse_on_mixed_corpus(self):
        for s in make_mixed_corpus(200):
            assert detokenize(tokenize(s)) == s

    def test_substitution_inherits_spacing(self):
        sent = tokenize("When is the suspended team scheduled to return?")
        swapped = with_surface(sent, 1, "are")
        assert detokenize(swapped) == \
            "When are the suspended team scheduled to return?"


@settings(max_examples=300, deadline=None)
@given(st.lists(
    st.text(alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd"),
                                   whitelist_characters=".,!?'\"()-"),
            min_size=1, max_size=10).filter(lambda w: w.strip()),
    min_size=1, max_size=12))
def test_round_trip_on_single_spaced_text(words):
    text = " ".join(words)
    assert detokenize(tokenize(text)) == text


class TestTagPos:
    def tags_of(self, text):
        sent = tag_pos(tokenize(text))
        return {t.surface: t.tag for t in sent.tokens}

    def test_noun_reading_of_duck(self):
        tags = self.tags_of("There's a jumping duck")
        assert tags["duck"] == PtbTag.NN
        assert tags["jumping"] == PtbTag.VBG

    def test_participle_after_auxiliary(self):
        tags = self.tags_of("When is the suspended team scheduled to return?")
        assert tags["scheduled"] == PtbTag.VBN
        assert tags["suspended"] == PtbTag.VBN
        assert tags["is"] == PtbTag.VBZ
        assert tags["return"] == PtbTag.VB
        assert tags["team"] == PtbTag.NN

    def test_closed_class_is_other(self):
        tags = self.tags_of("When is the suspended team scheduled to return?")
        assert tags["the"] == PtbTag.OTHER
        assert tags["When"] == PtbTag.OTHER
        assert tags["to"] == PtbTag.OTHER

    def test_simple_past_without_auxiliary(self):
        tags = self.tags_of("He played football")
        assert tags["played"] == PtbTag.VBD

    def test_news_headline(self):
        tags = self.tags_of("Israeli warplanes struck a target inside the "
                            "Syrian port city of Latakia overnight.")
        assert tags["Israeli"] == PtbTag.JJ
        assert tags["warplanes"] == PtbTag.NNS
        assert tags["struck"] == PtbTag.VBD
        assert tags["target"] == PtbTag.NN
        assert tags["Latakia"] == PtbTag.NNP
        assert tags["overnight"] == PtbTag.OTHER

    def test_irregular_plural(self):
        assert self.tags_of("The children gave answers")["children"] == PtbTag.NNS

    def test_third_person_verb(self):
        assert self.tags_of("She confirms the report")["confirms"] == PtbTag.VBZ

    def test_tag_totality(self):
        for s in make_mixed_corpus(50):
            sent = tag_pos(tokenize(s))
            assert all(t.tag is not None and t.upos is not None
                       for t in sent.tokens)

    def test_punctuation_and_numbers_are_other(self):
        tags = self.tags_of("In 1907, costs rose 3.5%!")
        assert tags["1907"] == PtbTag.OTHER
        assert tags["%"] == PtbTag.OTHER
        assert tags[","] == PtbTag.OTHER


class TestPretagged:
    def test_trusted_verbatim(self):
        sent = from_pretagged(["Colorless", "ideas", "sleep", "."],
                              ["JJ", "NNS", "VBP", "."])
        assert [t.tag for t in sent.tokens] == \
            [PtbTag.JJ, PtbTag.NNS, PtbTag.VBP, PtbTag.OTHER]
        assert sent.original == "Colorless ideas sleep."

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            from_pretagged(["a", "b"], ["NN"])

    def test_upos_follows_tag(self):
        sent = from_pretagged(["dogs"], ["NNS"])
        assert sent.tokens[0].upos == UPos.NOUN
