"""DEMONIC: a probabilistic language for Szilard-box thermodynamics.

States are records ``(X, A, I, w)``; statements transform them into exact
finite distributions.  The package provides the parser, an exact small-step
interpreter, the basic operations, an invariant/Kelvin verifier and a bounded
search over compositions of basic operations.
"""
from .kernels import BACKEND
from .oplib import (BASIC_OPS, OP_NAMES, PistonParams, SearchExhausted, basic_op,
                    compose_ops, derive_wc, nreset, nreset_reduced, prelude_env)
from .semantics import Config, TraceTree, run, run_dist, step, tau_lift, trace
from .synthesis import (AbstractionError, TauMap, abstract_tau, compose,
                        min_erasure_cost, min_reset_cost, search_for)
from .syntax import (DemonicSyntaxError, Program, UndefinedMacro, expand, parse,
                     parse_statement, pretty)
from .thermo import (EPS, BoxState, Dist, DistError, binary_entropy, merge, phi,
                     point, w_zero)
from .verifier import (audit_kelvin, check_all_basic, check_invariance,
                       check_points, classify, kelvin_sweep, ledger, verdict)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BASIC_OPS", "OP_NAMES", "PistonParams", "SearchExhausted",
    "basic_op", "compose_ops", "derive_wc", "nreset", "nreset_reduced", "prelude_env",
    "Config", "TraceTree", "run", "run_dist", "step", "tau_lift", "trace",
    "AbstractionError", "TauMap", "abstract_tau", "compose", "min_erasure_cost",
    "min_reset_cost", "search_for",
    "DemonicSyntaxError", "Program", "UndefinedMacro", "expand", "parse",
    "parse_statement", "pretty",
    "EPS", "BoxState", "Dist", "DistError", "binary_entropy", "merge", "phi",
    "point", "w_zero",
    "audit_kelvin", "check_all_basic", "check_invariance", "check_points",
    "classify", "kelvin_sweep", "ledger", "verdict",
]
