"""Evolve compact if-then rule-list policies for classic control tasks.

The hot rollout loop lives in a compiled extension (``ruleevo._ckernel``); a
pure-Python twin is used when the extension is missing or when the
``RULEEVO_PURE_PYTHON`` environment variable is set. ``ruleevo.kernel.BACKEND``
names the active one.
"""

from .engine import RunConfig, RunResult, run_evolution
from .envs import Environment, get_spec, make_env
from .fitness import FitnessReport, evaluate
from .policy import Op, Policy, Predicate, Rule, complexity, descriptor, eval_policy, format_policy, parse_policy
from .qd import Archive, GridSpec

__version__ = "0.1.0"

__all__ = [
    "Archive", "Environment", "FitnessReport", "GridSpec", "Op", "Policy", "Predicate", "Rule", "RunConfig",
    "RunResult", "complexity", "descriptor", "eval_policy", "evaluate", "format_policy", "get_spec", "make_env",
    "parse_policy", "run_evolution",
]
