"""Rules, rulebooks and the pre-order they induce on realizations.

A realization is anything a rule can score.  The core never looks inside a
realization: it only needs an id (``str`` realizations are their own id,
anything else must expose ``.id``) and the rules' violation values.

Given a rulebook and two violation profiles ``x`` and ``y``, ``x`` is at
least as good as ``y`` when every rule preferring ``y`` is overridden by a
strictly higher-priority rule preferring ``x``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .errors import EvaluationError, NotAChainError, ProfileError, RulebookError
from .preorder import PreorderedSet

__all__ = [
    "Rule",
    "Rulebook",
    "ViolationProfile",
    "Verdict",
    "realization_id",
    "profile",
    "induced_leq",
    "compare",
    "minimal_set",
    "lex_rank",
]


def realization_id(x: Any) -> str:
    if isinstance(x, str):
        return x
    try:
        return x.id
    except AttributeError:
        raise RulebookError(f"realization {x!r} has no id") from None


@dataclass(frozen=True, eq=False)
class Rule:
    """A violation metric: maps a realization to a non-negative real.

    ``spec`` records how the rule was built (builtin kind and parameters) so
    it can be written back to a rulebook file.  Aggregated rules keep their
    ``sources`` and the ``aggregator`` combining them.
    """

    id: str
    violation: Callable[[Any], float]
    description: str = ""
    spec: tuple[str, tuple[tuple[str, Any], ...]] | None = None
    sources: tuple["Rule", ...] = ()
    aggregator: Any = None

    def __call__(self, x) -> float:
        return self.violation(x)

    def __repr__(self) -> str:
        return f"Rule({self.id!r})"

    def leaves(self) -> tuple["Rule", ...]:
        """The non-aggregated rules this rule was ultimately built from."""
        if not self.sources:
            return (self,)
        return tuple(leaf for s in self.sources for leaf in s.leaves())


@dataclass(frozen=True)
class ViolationProfile:
    realization: str
    values: Mapping[str, float]

    def __getitem__(self, rule_id: str) -> float:
        return self.values[rule_id]


class Verdict(enum.Enum):
    LESS_THAN = "<"
    GREATER_THAN = ">"
    EQUIVALENT = "~"
    INCOMPARABLE = "||"

    def flipped(self) -> "Verdict":
        return _FLIP[self]


_FLIP = {
    Verdict.LESS_THAN: Verdict.GREATER_THAN,
    Verdict.GREATER_THAN: Verdict.LESS_THAN,
    Verdict.EQUIVALENT: Verdict.EQUIVALENT,
    Verdict.INCOMPARABLE: Verdict.INCOMPARABLE,
}


@dataclass(frozen=True, eq=False)
class Rulebook:
    """A finite, non-empty set of rules pre-ordered by priority.

    ``order`` uses the edge convention ``lower -> higher``.  ``epsilon`` is
    the absolute tolerance under which two violation values count as equal.
    """

    rules: Mapping[str, Rule]
    order: PreorderedSet
    epsilon: float = 0.0
    _above: Mapping[str, tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.rules:
            raise RulebookError("rulebook must contain at least one rule")
        for rid, rule in self.rules.items():
            if rid != rule.id:
                raise RulebookError(f"rule keyed {rid!r} has id {rule.id!r}")
        if set(self.rules) != set(self.order.elements):
            raise RulebookError(
                "order elements must equal the rule ids; mismatch: "
                f"{sorted(set(self.rules) ^ set(self.order.elements))}"
            )
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise RulebookError(f"epsilon must be a finite non-negative number, got {self.epsilon}")
        above = {r: self.order.strictly_above(r) for r in self.order.elements}
        object.__setattr__(self, "_above", above)

    @classmethod
    def build(
        cls,
        rules: Iterable[Rule],
        edges: Iterable[tuple[str, str]] = (),
        groups: Iterable[Iterable[str]] = (),
        epsilon: float = 0.0,
    ) -> "Rulebook":
        """Assemble a rulebook from rules, ``lower < higher`` edges and equivalence groups."""
        rules = list(rules)
        table: dict[str, Rule] = {}
        for r in rules:
            if r.id in table:
                raise RulebookError(f"duplicate rule id {r.id!r}")
            table[r.id] = r
        edges = list(edges)
        for g in groups:
            g = list(g)
            for a, b in zip(g, g[1:] + g[:1]):
                if a != b:
                    edges.append((a, b))
        return cls(table, PreorderedSet(table, edges), epsilon)

    @property
    def ids(self) -> tuple[str, ...]:
        return self.order.elements

    def __len__(self) -> int:
        return len(self.rules)

    def __contains__(self, rid) -> bool:
        return rid in self.rules

    def strictly_above(self, rid: str) -> tuple[str, ...]:
        return self._above[rid]

    def is_chain(self) -> bool:
        return self.order.is_chain()

    def with_epsilon(self, epsilon: float) -> "Rulebook":
        return Rulebook(self.rules, self.order, epsilon)

    def priority_levels(self) -> list[tuple[str, ...]]:
        """Equivalence classes sorted from highest to lowest priority (chain rulebooks)."""
        classes = self.order.equivalence_classes()

        def cmp(a, b):
            if self.order.lt(a[0], b[0]):
                return 1
            if self.order.lt(b[0], a[0]):
                return -1
            return 0

        return sorted(classes, key=functools.cmp_to_key(cmp))


def profile(rb: Rulebook, x: Any) -> ViolationProfile:
    """Evaluate every rule of ``rb`` on realization ``x``."""
    xid = realization_id(x)
    values = {}
    for rid in rb.ids:
        try:
            v = float(rb.rules[rid].violation(x))
        except EvaluationError:
            raise
        except Exception as exc:
            raise EvaluationError(
                f"rule {rid!r} failed on realization {xid!r}: {exc}", rule=rid, realization=xid
            ) from exc
        if not math.isfinite(v) or v < 0:
            raise EvaluationError(
                f"rule {rid!r} returned {v!r} on realization {xid!r}; violations must be finite and >= 0",
                rule=rid,
                realization=xid,
            )
        values[rid] = v
    return ViolationProfile(xid, values)


def _check_total(rb: Rulebook, p: ViolationProfile) -> None:
    for rid in rb.ids:
        if rid not in p.values:
            raise ProfileError(f"profile of {p.realization!r} has no value for rule {rid!r}")


def induced_leq(rb: Rulebook, x: ViolationProfile, y: ViolationProfile) -> bool:
    """True iff ``x`` is at least as good as ``y`` under ``rb``."""
    _check_total(rb, x)
    _check_total(rb, y)
    return _leq(rb, x.values, y.values)


def _leq(rb: Rulebook, xv: Mapping[str, float], yv: Mapping[str, float]) -> bool:
    eps = rb.epsilon
    for r in rb.ids:
        if yv[r] < xv[r] - eps:
            if not any(xv[s] < yv[s] - eps for s in rb.strictly_above(r)):
                return False
    return True


def compare(rb: Rulebook, x: ViolationProfile, y: ViolationProfile) -> Verdict:
    _check_total(rb, x)
    _check_total(rb, y)
    xy = _leq(rb, x.values, y.values)
    yx = _leq(rb, y.values, x.values)
    if xy and yx:
        return Verdict.EQUIVALENT
    if xy:
        return Verdict.LESS_THAN
    if yx:
        return Verdict.GREATER_THAN
    return Verdict.INCOMPARABLE


def minimal_set(
    rb: Rulebook, candidates: Sequence[ViolationProfile], all_equivalent: bool = False
) -> list[str]:
    """Ids of the candidates no other candidate is strictly better than.

    Equivalent minimal candidates are collapsed to the smallest id unless
    ``all_equivalent`` is set.
    """
    if not candidates:
        raise RulebookError("minimal_set needs at least one candidate")
    for p in candidates:
        _check_total(rb, p)
    minimal = [
        x
        for x in candidates
        if not any(compare(rb, y, x) is Verdict.LESS_THAN for y in candidates if y is not x)
    ]
    minimal.sort(key=lambda p: p.realization)
    if all_equivalent:
        return [p.realization for p in minimal]
    kept: list[ViolationProfile] = []
    for p in minimal:
        if not any(compare(rb, q, p) is Verdict.EQUIVALENT for q in kept):
            kept.append(p)
    return [p.realization for p in kept]


def lex_rank(rb: Rulebook, candidates: Sequence[ViolationProfile]) -> list[str]:
    """Sort candidates lexicographically, highest-priority rule first.

    Only defined for chain rulebooks; ties are broken by realization id.
    """
    if not rb.is_chain():
        raise NotAChainError(
            "lex_rank needs a rulebook whose priorities form a chain; "
            "use minimal_set for partial priorities"
        )
    for p in candidates:
        _check_total(rb, p)
    levels = [lvl[0] for lvl in rb.priority_levels()]
    eps = rb.epsilon

    def cmp(p: ViolationProfile, q: ViolationProfile) -> int:
        for r in levels:
            a, b = p.values[r], q.values[r]
            if a < b - eps:
                return -1
            if b < a - eps:
                return 1
        return (p.realization > q.realization) - (p.realization < q.realization)

    return [p.realization for p in sorted(candidates, key=functools.cmp_to_key(cmp))]
