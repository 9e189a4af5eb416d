"""Executable denotational semantics for small imperative languages with
refinement checking between program versions and a KAT decision engine."""

from .kernel import BACKEND, DEFAULT_BOUND, LassoSet, StateTraceSet, TracedRel, ValueDomain
from .syntax import parse_cfg_module, parse_module, parse_stmt, show

__all__ = [
    "BACKEND", "DEFAULT_BOUND", "LassoSet", "StateTraceSet", "TracedRel", "ValueDomain",
    "parse_cfg_module", "parse_module", "parse_stmt", "show",
]
__version__ = "0.1.0"
