"""A fixed recursive function e and, for any h on the positive integers, an
injective coding c with c(h(n)) = e(c(n))."""

from .coder import Coder, CodingMap, brute_force_oracle, verify_conjugacy
from .dsl import parse, render
from .errors import (
    BudgetExceeded,
    CacheError,
    ClassificationError,
    DSLSyntaxError,
    EvaluationError,
    InjectivityError,
    UnivCodeError,
    UnknownOrbitError,
)
from .graph import FunctionSpec, classify_component, enumerate_components, orbit
from .numeral import Numeral
from .sigma import SigmaTable, beta, eval_e, extend_to, kth_cycle

__version__ = "0.1.0"
