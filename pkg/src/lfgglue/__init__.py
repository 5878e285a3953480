"""Glue-semantics derivations over LFG f-structures with resource sharing."""

from .fstruct import FStructure, FStructureError, extract_r_relations, parse_fstructure, path_sets
from .glue import parse_glue
from .lexicon import Lexicon, LexiconError, PremiseSet, instantiate_entries, parse_lexicon
from .meaning import alpha_equal, normalize, parse_term
from .prover import (
    NoReadingError,
    Reading,
    SearchLimits,
    StepLimitExceeded,
    derive_readings,
    enumerate_derivations,
    validate_trace,
)
from .syntax import ParseError

__all__ = [
    "FStructure", "FStructureError", "Lexicon", "LexiconError", "NoReadingError", "ParseError",
    "PremiseSet", "Reading", "SearchLimits", "StepLimitExceeded", "alpha_equal", "derive_readings",
    "enumerate_derivations", "extract_r_relations", "instantiate_entries", "normalize",
    "parse_fstructure", "parse_glue", "parse_lexicon", "parse_term", "path_sets", "validate_trace",
]
