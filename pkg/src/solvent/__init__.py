"""solvent: SMT-based verification of liquidity properties for a purified
Solidity fragment."""

from .ast import Contract, Property, check_wellformed, pretty_print, pretty_print_property
from .driver import (
    HoldsBounded, HoldsUnbounded, RunReport, SuiteOptions, Unknown, Violated, verify,
    verify_suite,
)
from .interp import (
    ConcreteState, FiniteDomains, Transaction, apply_tx, bruteforce_liquid, eval_post,
    eval_pre, run_trace,
)
from .parser import load_source, parse_file, tokenize
from .solvers import SolverConfig, cross_check, run_query

__all__ = [
    "Contract", "Property", "check_wellformed", "pretty_print", "pretty_print_property",
    "HoldsBounded", "HoldsUnbounded", "RunReport", "SuiteOptions", "Unknown", "Violated",
    "verify", "verify_suite",
    "ConcreteState", "FiniteDomains", "Transaction", "apply_tx", "bruteforce_liquid",
    "eval_post", "eval_pre", "run_trace",
    "load_source", "parse_file", "tokenize",
    "SolverConfig", "cross_check", "run_query",
]

__version__ = "0.1.0"
