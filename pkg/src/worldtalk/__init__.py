"""worldtalk: converse with generative world models.

A Scheme-flavored probabilistic language with per-world memoization, a
rejection-sampling inference engine with cumulative dialogue semantics, a
pluggable English-to-program translator, five bundled world models, and an
HTTP/CLI dialogue service.
"""

from .engine import (
    PosteriorSamples,
    PosteriorSummary,
    SamplingBudget,
    Session,
    add_condition,
    add_definition,
    rejection_sample,
    run_query,
    summarize,
)
from .errors import (
    BackendError,
    ChurchEvalError,
    ChurchParseError,
    NoValidCandidateError,
    WorldtalkError,
    ZeroAcceptanceError,
)
from .meaning import HttpBackend, MockBackend, Utterance, build_prompt, translate, validate_candidate
from .rng import derive_chain_seed
from .compiler import compile_expr, compile_program, evaluate, run_program
from .runtime import WorldTrace
from .sexpr import parse, parse_one, print_form, strip_prompt_forms
from .worlds import WORLD_IDS, check_world_statistics, list_worlds, load_world, sample_world_state

__version__ = "0.1.0"
