"""Model adapters behind the POST /score sentence-scoring protocol."""

from .adapters import (Adapter, AdapterConfig, BUILTIN_MODELS, CopyTranslator,
                       EchoAdapter, ModelLoadError, MtAdapter, Objective,
                       QaAdapter, TaskType, build_adapter)
from .app import ScoreRequest, ScoreResponse, build_app
from .qa_model import LexicalSpanPicker, Span
from .scoring import normalize_answer, sentence_bleu, sentence_chrf, token_f1

__version__ = "0.1.0"

__all__ = [
    "Adapter",
    "AdapterConfig",
    "BUILTIN_MODELS",
    "CopyTranslator",
    "EchoAdapter",
    "ModelLoadError",
    "MtAdapter",
    "Objective",
    "QaAdapter",
    "TaskType",
    "build_adapter",
    "ScoreRequest",
    "ScoreResponse",
    "build_app",
    "LexicalSpanPicker",
    "Span",
    "normalize_answer",
    "sentence_bleu",
    "sentence_chrf",
    "token_f1",
    "__version__",
]
