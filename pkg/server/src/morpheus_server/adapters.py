"""Scoring adapters: turn a model plus an objective into batch scores.

Each adapter answers one question per candidate sentence: how well does
the model do when this candidate replaces the original input?  Scores and
their polarity (`lower_is_worse`) travel back over the wire verbatim.
"""
import dataclasses
import enum
from typing import Optional, Protocol, Sequence

from .qa_model import LexicalSpanPicker
from .scoring import sentence_bleu, sentence_chrf, token_f1


class TaskType(enum.Enum):
    QA = "qa"
    MT = "mt"

    def __str__(self) -> str:
        return self.value


class Objective(enum.Enum):
    LOSS = "loss"
    F1 = "f1"
    SENT_BLEU = "sent_bleu"
    CHRF = "chrf"

    def __str__(self) -> str:
        return self.value


_COMPATIBLE = {
    TaskType.QA: frozenset({Objective.LOSS, Objective.F1}),
    TaskType.MT: frozenset({Objective.SENT_BLEU, Objective.CHRF}),
}

BUILTIN_MODELS = ("echo", "lexical-qa", "copy-mt")


class ModelLoadError(Exception):
    """The configured model cannot be loaded in this environment."""


@dataclasses.dataclass(frozen=True)
class AdapterConfig:
    model: str = "echo"
    task: Optional[TaskType] = None
    objective: Optional[Objective] = None
    device: str = "cpu"
    max_batch: int = 256

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if self.task is not None and self.objective is not None \
                and self.objective not in _COMPATIBLE[self.task]:
            raise ValueError(
                f"objective {self.objective} is not valid for task "
                f"{self.task}")


class Adapter(Protocol):
    # None means any task value is accepted.
    accepted_tasks: Optional[frozenset[str]]

    def score(self, task: str, candidates: Sequence[str],
              passage: Optional[str], gold_answers: Optional[Sequence[str]],
              reference: Optional[str]) -> tuple[list[float], bool]: ...


class EchoAdapter:
    """Length-as-score stub for protocol and plumbing tests."""

    accepted_tasks = None

    def score(self, task, candidates, passage, gold_answers, reference):
        return [float(len(c)) for c in candidates], False


class QaAdapter:
    """Scores candidate questions by the reader's F1 against gold answers.

    The built-in reader exposes no logits, so the LOSS objective falls
    back to F1 scoring; either way the scores are quality-scaled and
    lower_is_worse is true.
    """

    accepted_tasks = frozenset({"qa"})

    def __init__(self, model: Optional[LexicalSpanPicker] = None,
                 objective: Objective = Objective.F1):
        if objective not in _COMPATIBLE[TaskType.QA]:
            raise ValueError(f"objective {objective} is not valid for QA")
        self.model = model or LexicalSpanPicker()
        self.objective = objective

    def predict(self, question: str, passage: str) -> str:
        return self.model.predict(question, passage)

    def score(self, task, candidates, passage, gold_answers, reference):
        scores = [token_f1(self.model.predict(c, passage), gold_answers)
                  for c in candidates]
        return scores, True


class CopyTranslator:
    """Identity translation: output equals input.

    Scoring then reduces to source-vs-reference overlap, which is exactly
    the surface a source-side inflection attack perturbs.
    """

    def translate(self, text: str) -> str:
        return text


class MtAdapter:
    """Scores candidate sources by translating and comparing to the
    reference with sentence BLEU or chrF."""

    accepted_tasks = frozenset({"mt"})

    def __init__(self, model: Optional[CopyTranslator] = None,
                 objective: Objective = Objective.SENT_BLEU):
        if objective not in _COMPATIBLE[TaskType.MT]:
            raise ValueError(f"objective {objective} is not valid for MT")
        self.model = model or CopyTranslator()
        self.metric = (sentence_bleu if objective is Objective.SENT_BLEU
                       else sentence_chrf)

    def score(self, task, candidates, passage, gold_answers, reference):
        scores = [self.metric(self.model.translate(c), reference)
                  for c in candidates]
        return scores, True


def build_adapter(config: AdapterConfig):
    """Instantiates the configured model; unknown identifiers fail loudly.

    Checkpoint paths are treated as opaque and unsupported here: only the
    built-in models load without external assets.
    """
    if config.model == "echo":
        return EchoAdapter()
    if config.model == "lexical-qa":
        if config.task not in (None, TaskType.QA):
            raise ValueError("lexical-qa serves task qa")
        return QaAdapter(objective=config.objective or Objective.F1)
    if config.model == "copy-mt":
        if config.task not in (None, TaskType.MT):
            raise ValueError("copy-mt serves task mt")
        return MtAdapter(objective=config.objective or Objective.SENT_BLEU)
    raise ModelLoadError(
        f"unknown model {config.model!r}; built-ins: "
        + ", ".join(BUILTIN_MODELS))
