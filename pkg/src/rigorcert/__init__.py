"""Rigorous verification of nonlinear inequalities on boxes and of LP infeasibility.

The prover searches for a certificate using interval arithmetic with directed
decimal rounding and second-order Taylor enclosures; the checker replays it.
Linear systems are certified infeasible by exact Farkas multipliers.
"""
from .cert import Certificate, Verdict, check, deserialize, serialize
from .expr import Expr, differentiate, eval_exact, eval_natural
from .interval import Interval
from .kernel import BACKEND
from .lp import LinearSystem, check_infeasible, find_dual_approx, modify_dual, relax
from .numeric import pi_enclosure, rational_sqrt_exact, round_dir
from .prover import ProofFailure, ProverConfig, batch_prove, prove, prove_sharp
from .syntax import InequalitySpec, parse_spec, print_spec
from .taylor import monotone_directions, taylor_enclose

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Certificate", "Expr", "InequalitySpec", "Interval", "LinearSystem", "ProofFailure",
    "ProverConfig", "Verdict", "batch_prove", "check", "check_infeasible", "deserialize",
    "differentiate", "eval_exact", "eval_natural", "find_dual_approx", "modify_dual",
    "monotone_directions", "parse_spec", "pi_enclosure", "print_spec", "prove", "prove_sharp",
    "rational_sqrt_exact", "relax", "round_dir", "serialize", "taylor_enclose",
]
