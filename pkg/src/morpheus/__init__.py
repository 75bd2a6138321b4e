"""Inflectional perturbation attacks against black-box NLP models."""

from .tags import ELIGIBLE_UPOS, PtbTag, UPos, ptb_to_upos
from .lexicon import InflectionCandidate, Lexicon, default_lexicon
from .textproc import (TaggedSentence, Token, detokenize, tag_pos, tokenize,
                       with_surface)
from .metrics import (CorpusScore, Metric, QaScore, bleu, chrf, qa_score,
                      relative_decrease, sentence_bleu, sentence_chrf)
from .oracle import (BagOfTagsOracle, HTTPOracle, KeywordOracle,
                     MetricReplayOracle, Oracle, OracleError, OracleRequest,
                     OracleResponse, ProtocolError, StdioOracle, Task,
                     TaskContext, TransportError, objective, parse_oracle_spec)
from .search import (AttackConfig, AttackMode, AttackResult, CorpusReport,
                     CorpusRun, Substitution, attack, attack_corpus,
                     example_rng, max_inflected, random_baseline,
                     result_from_json, result_to_json, summarize)
from .augment import (InflectionDistribution, TrainsetRecord,
                      compute_distribution, generate_trainset, random_inflect,
                      record_rng)

__version__ = "0.1.0"

__all__ = [
    "ELIGIBLE_UPOS",
    "PtbTag",
    "UPos",
    "ptb_to_upos",
    "InflectionCandidate",
    "Lexicon",
    "default_lexicon",
    "TaggedSentence",
    "Token",
    "tokenize",
    "detokenize",
    "tag_pos",
    "with_surface",
    "Metric",
    "QaScore",
    "CorpusScore",
    "qa_score",
    "bleu",
    "sentence_bleu",
    "chrf",
    "sentence_chrf",
    "relative_decrease",
    "Task",
    "TaskContext",
    "Oracle",
    "OracleRequest",
    "OracleResponse",
    "OracleError",
    "TransportError",
    "ProtocolError",
    "objective",
    "BagOfTagsOracle",
    "KeywordOracle",
    "MetricReplayOracle",
    "HTTPOracle",
    "StdioOracle",
    "parse_oracle_spec",
    "AttackMode",
    "AttackConfig",
    "Substitution",
    "AttackResult",
    "CorpusReport",
    "CorpusRun",
    "attack",
    "attack_corpus",
    "random_baseline",
    "max_inflected",
    "example_rng",
    "summarize",
    "result_to_json",
    "result_from_json",
    "InflectionDistribution",
    "TrainsetRecord",
    "compute_distribution",
    "random_inflect",
    "generate_trainset",
    "record_rng",
    "__version__",
]
