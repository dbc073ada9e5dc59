"""Rule-list policies.

A policy is an ordered list of rules followed by a fallback action.  Each rule
is a conjunction of strict threshold comparisons on single state dimensions.
Evaluation is first-match: the action of the first rule whose predicates all
hold is returned, otherwise the fallback action.

Text form, one rule per line::

    if s[2] > -0.02 and s[3] > -0.30 then action = 1
    else action = 0
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from .errors import PolicySyntaxError, PolicyValidationError, StructuralError


class Op(str, enum.Enum):
    LT = "<"
    GT = ">"


@dataclass(frozen=True)
class Predicate:
    dim: int
    op: Op
    threshold: float

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 0:
            raise PolicyValidationError(f"predicate dim must be a non-negative integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "op", Op(self.op))
        th = float(self.threshold)
        if not math.isfinite(th):
            raise PolicyValidationError(f"threshold must be finite, got {th!r}")
        # +0.0 folds a negative zero so the text form never shows "-0.00"
        object.__setattr__(self, "threshold", th + 0.0)

    def holds(self, state: Sequence[float]) -> bool:
        v = state[self.dim]
        return v < self.threshold if self.op is Op.LT else v > self.threshold

    def __str__(self) -> str:
        return f"s[{self.dim}] {self.op.value} {_fmt_threshold(self.threshold)}"


@dataclass(frozen=True)
class Rule:
    predicates: tuple[Predicate, ...]
    action: int

    def __post_init__(self):
        object.__setattr__(self, "predicates", tuple(self.predicates))
        if not self.predicates:
            raise PolicyValidationError("a rule needs at least one predicate")
        if not isinstance(self.action, (int, np.integer)) or self.action < 0:
            raise PolicyValidationError(f"rule action must be a non-negative integer, got {self.action!r}")
        object.__setattr__(self, "action", int(self.action))

    def matches(self, state: Sequence[float]) -> bool:
        return all(p.holds(state) for p in self.predicates)

    def __str__(self) -> str:
        conds = " and ".join(str(p) for p in self.predicates)
        return f"if {conds} then action = {self.action}"


@dataclass(frozen=True)
class Descriptor:
    rule_count: int
    mean_abs_threshold: float


@dataclass(frozen=True)
class Policy:
    rules: tuple[Rule, ...]
    fallback_action: int = 0
    # lazily built flat arrays for the rollout kernels; not part of equality
    _flat: Any = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise PolicyValidationError("a policy needs at least one rule")
        if not isinstance(self.fallback_action, (int, np.integer)) or self.fallback_action < 0:
            raise PolicyValidationError(f"fallback action must be a non-negative integer, got {self.fallback_action!r}")
        object.__setattr__(self, "fallback_action", int(self.fallback_action))

    @property
    def max_dim(self) -> int:
        return max(p.dim for r in self.rules for p in r.predicates)

    @property
    def max_action(self) -> int:
        return max(self.fallback_action, *(r.action for r in self.rules))

    def validate(self, obs_dim: int, action_count: int, max_rules: int | None = None,
                 max_predicates_per_rule: int | None = None) -> "Policy":
        """Check the policy against an environment's shape and optional size caps."""
        if self.max_dim >= obs_dim:
            raise PolicyValidationError(f"predicate dimension {self.max_dim} out of range for obs_dim {obs_dim}")
        if self.max_action >= action_count:
            raise PolicyValidationError(f"action {self.max_action} out of range for {action_count} actions")
        if max_rules is not None and len(self.rules) > max_rules:
            raise PolicyValidationError(f"{len(self.rules)} rules exceeds max_rules={max_rules}")
        if max_predicates_per_rule is not None:
            worst = max(len(r.predicates) for r in self.rules)
            if worst > max_predicates_per_rule:
                raise PolicyValidationError(
                    f"rule with {worst} predicates exceeds max_predicates_per_rule={max_predicates_per_rule}")
        return self

    def flat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
        """(rule_start, dims, is_gt, thresholds, actions, fallback) arrays for the kernels."""
        if self._flat is None:
            starts, dims, gts, ths = [0], [], [], []
            for r in self.rules:
                for p in r.predicates:
                    dims.append(p.dim)
                    gts.append(1 if p.op is Op.GT else 0)
                    ths.append(p.threshold)
                starts.append(len(dims))
            flat = (
                np.asarray(starts, dtype=np.int32),
                np.asarray(dims, dtype=np.int32),
                np.asarray(gts, dtype=np.int8),
                np.asarray(ths, dtype=np.float64),
                np.asarray([r.action for r in self.rules], dtype=np.int32),
                self.fallback_action,
            )
            object.__setattr__(self, "_flat", flat)
        return self._flat

    def dedup(self) -> "Policy":
        """Drop exact duplicate predicates inside each rule, keeping first occurrences."""
        rules = []
        for r in self.rules:
            seen: dict[Predicate, None] = dict.fromkeys(r.predicates)
            rules.append(Rule(tuple(seen), r.action))
        return Policy(tuple(rules), self.fallback_action)

    def __str__(self) -> str:
        return format_policy(self)

    def to_dict(self) -> dict:
        return {
            "rules": [
                {
                    "predicates": [{"dim": p.dim, "op": p.op.value, "threshold": p.threshold} for p in r.predicates],
                    "action": r.action,
                }
                for r in self.rules
            ],
            "fallback_action": self.fallback_action,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Policy":
        try:
            rules = tuple(
                Rule(tuple(Predicate(p["dim"], p["op"], p["threshold"]) for p in r["predicates"]), r["action"])
                for r in doc["rules"]
            )
            return cls(rules, doc.get("fallback_action", 0))
        except (KeyError, TypeError) as exc:
            raise PolicyValidationError(f"malformed policy document: {exc!r}") from exc


def eval_policy(policy: Policy, state: Sequence[float]) -> int:
    """Return the action of the first fully satisfied rule, else the fallback."""
    n = len(state)
    if policy.max_dim >= n:
        raise StructuralError(f"policy reads s[{policy.max_dim}] but the state has {n} components")
    for rule in policy.rules:
        for p in rule.predicates:
            v = state[p.dim]
            if p.op is Op.LT:
                if not v < p.threshold:
                    break
            elif not v > p.threshold:
                break
        else:
            return rule.action
    return policy.fallback_action


def complexity(policy: Policy) -> int:
    return sum(len(r.predicates) for r in policy.rules)


def descriptor(policy: Policy) -> Descriptor:
    ths = [abs(p.threshold) for r in policy.rules for p in r.predicates]
    return Descriptor(len(policy.rules), math.fsum(ths) / len(ths))


def _fmt_threshold(th: float) -> str:
    text = f"{th:.2f}"
    return "0.00" if text == "-0.00" else text


def format_policy(policy: Policy) -> str:
    lines = [str(r) for r in policy.rules]
    lines.append(f"else action = {policy.fallback_action}")
    return "\n".join(lines)


_INT = r"(0|[1-9][0-9]*)"
_FLOAT = r"[-+]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][-+]?[0-9]+)?"
_PRED_RE = re.compile(r"s\[" + _INT + r"\] ([<>]) (" + _FLOAT + r")")
_ACTION_RE = re.compile(r" then action = " + _INT + r"$")
_FALLBACK_RE = re.compile(r"else action = " + _INT + r"$")


def _parse_rule(line: str, lineno: int) -> Rule:
    if not line.startswith("if "):
        raise PolicySyntaxError("expected 'if ' or 'else action = N'", lineno, 1)
    pos = 3
    preds = []
    while True:
        m = _PRED_RE.match(line, pos)
        if m is None:
            raise PolicySyntaxError("expected predicate 's[INT] <|> FLOAT'", lineno, pos + 1)
        preds.append(Predicate(int(m.group(1)), Op(m.group(2)), float(m.group(3))))
        pos = m.end()
        if line.startswith(" and ", pos):
            pos += 5
            continue
        m = _ACTION_RE.match(line, pos)
        if m is None:
            raise PolicySyntaxError("expected ' and ' or ' then action = INT'", lineno, pos + 1)
        return Rule(tuple(preds), int(m.group(1)))


def parse_policy(text: str, obs_dim: int | None = None, action_count: int | None = None) -> Policy:
    """Parse the text form.  With ``obs_dim``/``action_count`` also range-check it."""
    lines = text.split("\n")
    while lines and lines[-1].strip() == "":
        lines.pop()
    if not lines:
        raise PolicySyntaxError("empty policy text", 1, 1)
    rules = []
    for lineno, raw in enumerate(lines[:-1], start=1):
        rules.append(_parse_rule(raw.rstrip("\r"), lineno))
    last = lines[-1].rstrip("\r")
    m = _FALLBACK_RE.match(last)
    if m is None:
        raise PolicySyntaxError("policy must end with 'else action = INT'", len(lines), 1)
    if not rules:
        raise PolicyValidationError("a policy needs at least one rule")
    policy = Policy(tuple(rules), int(m.group(1)))
    if obs_dim is not None and policy.max_dim >= obs_dim:
        raise PolicyValidationError(f"predicate dimension {policy.max_dim} out of range for obs_dim {obs_dim}")
    if action_count is not None and policy.max_action >= action_count:
        raise PolicyValidationError(f"action {policy.max_action} out of range for {action_count} actions")
    return policy
