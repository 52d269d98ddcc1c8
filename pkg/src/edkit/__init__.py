"""Entity disambiguation with description-enriched candidate representations.

The package covers the whole pipeline: ingesting entity descriptions from a
Wikidata dump, reading disambiguation datasets, building "title: description"
candidate surfaces, two decoding formulations (trie-constrained generation
and extractive span scoring), reference scorers, a JSON-lines bridge to
external model processes, and evaluation with significance testing.
"""

from __future__ import annotations

from .bridge import BridgeProcess
from .datasets import (
    DatasetStats,
    ReadCounters,
    TrainIndex,
    build_train_index,
    collapse_whitespace,
    compute_stats,
    read_dataset,
    write_dataset,
)
from .errors import (
    BridgeError,
    BudgetTooSmallError,
    CorruptStreamError,
    DatasetParseError,
    EDKitError,
    EmptyCandidateSetError,
    EmptyRecordSetError,
    EmptyTitleError,
    InvalidPrefixError,
    InvalidSpanError,
    MisalignedRecordsError,
    MissingGoldError,
    NoOverlapError,
    NoTokensError,
    ScorerFailure,
    TokenizerRoundTripError,
    UnknownDatasetError,
)
from .evaluation import (
    EvaluationReport,
    FrequencyClassReport,
    McNemarResult,
    PredictionRecord,
    aggregate,
    build_records,
    classify,
    evaluation_report,
    frequency_class_report,
    mcnemar,
    micro_f1,
)
from .extractive import AssembledInput, ExtractResult, SpanScorer, assemble, extract, resolve_span
from .generative import DEFAULT_BEAM, DecodeResult, TokenScorer, decode, decode_batch
from .representation import make_representation, make_representations, representation_length_stats
from .scorers import (
    NGramScorer,
    OracleScorer,
    OverlapSpanScorer,
    WhitespaceTokenizer,
    ngram_scorer,
    oracle_scorer,
    overlap_span_scorer,
)
from .trie import CandidateTrie, allowed_next, build_trie
from .types import (
    CandidateRepresentation,
    EDInstance,
    MentionSpan,
    Tokenizer,
    mark_mention,
    normalize_title,
    strip_mention_markers,
)
from .wikidata import DescriptionMap, IngestStats, ingest_dump, ingest_dump_to_tsv, lookup

__version__ = "0.1.0"

__all__ = [
    "AssembledInput",
    "BridgeError",
    "BridgeProcess",
    "BudgetTooSmallError",
    "CandidateRepresentation",
    "CandidateTrie",
    "CorruptStreamError",
    "DEFAULT_BEAM",
    "DatasetParseError",
    "DatasetStats",
    "DecodeResult",
    "DescriptionMap",
    "EDInstance",
    "EDKitError",
    "EmptyCandidateSetError",
    "EmptyRecordSetError",
    "EmptyTitleError",
    "EvaluationReport",
    "ExtractResult",
    "FrequencyClassReport",
    "IngestStats",
    "InvalidPrefixError",
    "InvalidSpanError",
    "McNemarResult",
    "MentionSpan",
    "MisalignedRecordsError",
    "MissingGoldError",
    "NGramScorer",
    "NoOverlapError",
    "NoTokensError",
    "OracleScorer",
    "OverlapSpanScorer",
    "PredictionRecord",
    "ReadCounters",
    "ScorerFailure",
    "SpanScorer",
    "TokenScorer",
    "Tokenizer",
    "TokenizerRoundTripError",
    "TrainIndex",
    "UnknownDatasetError",
    "WhitespaceTokenizer",
    "aggregate",
    "allowed_next",
    "assemble",
    "build_records",
    "build_train_index",
    "build_trie",
    "classify",
    "collapse_whitespace",
    "compute_stats",
    "decode",
    "decode_batch",
    "evaluation_report",
    "extract",
    "frequency_class_report",
    "ingest_dump",
    "ingest_dump_to_tsv",
    "lookup",
    "make_representation",
    "make_representations",
    "mark_mention",
    "mcnemar",
    "micro_f1",
    "normalize_title",
    "oracle_scorer",
    "overlap_span_scorer",
    "ngram_scorer",
    "read_dataset",
    "representation_length_stats",
    "resolve_span",
    "strip_mention_markers",
    "write_dataset",
]
