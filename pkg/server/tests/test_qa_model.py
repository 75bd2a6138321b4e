from morpheus_server.qa_model import LexicalSpanPicker

PASSAGE = ("In 1911 the explorer Amund reached the frozen plateau. "
           "By the plateau, Borga sheltered during winter.")


class TestLexicalSpanPicker:
    def test_answers_clean_question(self):
        picker = LexicalSpanPicker()
        assert picker.predict("Who reached the frozen plateau?",
                              PASSAGE) == "Amund"

    def test_prediction_changes_under_perturbation(self):
        picker = LexicalSpanPicker()
        clean = picker.predict("Who reached the frozen plateau?", PASSAGE)
        adversarial = picker.predict("Who reaches the frozen plateaus?",
                                     PASSAGE)
        assert adversarial != clean

    def test_fully_perturbed_question_empties(self):
        # Breaking every keyword leaves no span above zero.
        picker = LexicalSpanPicker()
        assert picker.predict("Who zzz the yyy xxx?", PASSAGE) == ""

    def test_no_keywords(self):
        picker = LexicalSpanPicker()
        assert picker.predict("Who did what to whom?", "Some passage.") == ""

    def test_empty_passage(self):
        picker = LexicalSpanPicker()
        assert picker.predict("Who reached the plateau?", "") == ""

    def test_deterministic(self):
        picker = LexicalSpanPicker()
        outs = {picker.predict("Who reached the frozen plateau?", PASSAGE)
                for _ in range(5)}
        assert outs == {"Amund"}

    def test_span_never_longer_than_limit(self):
        picker = LexicalSpanPicker(max_span=2)
        span = picker.best_span("Who reached the frozen plateau?", PASSAGE)
        assert span.length <= 2
