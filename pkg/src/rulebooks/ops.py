"""Rulebook manipulation: priority refinement, rule aggregation, rule augmentation.

Each operation returns a new rulebook whose induced strict order extends the
old one.  :func:`certify_strict_refinement` checks that claim exhaustively on
a finite sample of realizations, and :func:`forbidden_op_demos` builds the
three ways of adding a rule that do *not* preserve it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .core import Rule, Rulebook, Verdict, ViolationProfile, compare, profile, realization_id
from .errors import OperationError, TransportError, UnknownIdError
from .preorder import OrderMap, PreorderedSet, refines

__all__ = [
    "LinearPositive",
    "Max",
    "Custom",
    "AggregatorCheck",
    "validate_aggregator",
    "priority_refine",
    "aggregate",
    "augment",
    "insert_rule",
    "RefinementCertificate",
    "certify_strict_refinement",
    "ForbiddenDemo",
    "forbidden_op_demos",
]


# -- aggregators -------------------------------------------------------------


@dataclass(frozen=True)
class LinearPositive:
    """``sum(w_i * v_i)`` with every weight strictly positive."""

    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        for w in self.weights:
            if not (w > 0 and math.isfinite(w)):
                raise OperationError(f"linear aggregation weights must be positive, got {w}")

    def __call__(self, values: Sequence[float]) -> float:
        if len(values) != len(self.weights):
            raise OperationError(f"expected {len(self.weights)} values, got {len(values)}")
        return sum(w * v for w, v in zip(self.weights, values))


@dataclass(frozen=True)
class Max:
    """Maximum of the values.  Not strictly monotone, so usually rejected."""

    def __call__(self, values: Sequence[float]) -> float:
        return max(values)


@dataclass(frozen=True)
class Custom:
    """User-supplied combiner.  Accepted only if declared monotone and it passes sample validation."""

    fn: Callable[[Sequence[float]], float]
    monotone: bool = False

    def __call__(self, values: Sequence[float]) -> float:
        return float(self.fn(values))


@dataclass(frozen=True)
class AggregatorCheck:
    ok: bool
    counterexample: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _product_leq(a, b) -> bool:
    return all(u <= v for u, v in zip(a, b))


def validate_aggregator(agg, sample: Iterable[Sequence[float]]) -> AggregatorCheck:
    """Check that ``agg`` embeds the product order of ``sample`` into the reals.

    For every pair ``a <= b`` (componentwise) the aggregate must satisfy
    ``agg(a) <= agg(b)``, with strict inequality when ``a != b``.  The first
    offending pair ``(a, b)`` is returned as the counterexample.
    """
    if isinstance(agg, Custom) and not agg.monotone:
        return AggregatorCheck(False, None, "custom aggregator not declared monotone")
    tuples = list(dict.fromkeys(tuple(float(v) for v in t) for t in sample))
    values = {t: agg(t) for t in tuples}
    for a in tuples:
        for b in tuples:
            if a == b or not _product_leq(a, b):
                continue
            # a < b in the product order
            if not values[a] < values[b]:
                return AggregatorCheck(
                    False,
                    (a, b),
                    f"{a} < {b} componentwise but aggregate gives {values[a]} vs {values[b]}",
                )
    return AggregatorCheck(True)


# -- the three operations ----------------------------------------------------


def priority_refine(rb: Rulebook, lower: str, higher: str) -> Rulebook:
    """Add ``lower <= higher`` to the priority order."""
    for rid in (lower, higher):
        if rid not in rb.rules:
            raise UnknownIdError(rid, "rulebook")
    order = rb.order.add_relation(lower, higher)
    if not refines(rb.order, order):
        raise OperationError(
            f"adding {lower} <= {higher} collapses the strict priority {higher} < {lower}; "
            "the result would not refine the original order"
        )
    return Rulebook(rb.rules, order, rb.epsilon)


def _aggregated_rule(new_id: str, sources: tuple[Rule, ...], agg) -> Rule:
    fns = tuple(r.violation for r in sources)

    def violation(x):
        return agg(tuple(f(x) for f in fns))

    desc = f"aggregate of {', '.join(r.id for r in sources)}"
    return Rule(new_id, violation, desc, sources=sources, aggregator=agg)


def aggregate(
    rb: Rulebook,
    ids: Sequence[str],
    new_id: str,
    agg,
    sample: Iterable[Any] | None = None,
) -> Rulebook:
    """Collapse mutually equivalent rules ``ids`` into a single rule ``new_id``.

    ``agg`` receives the source values in ``ids`` order.  Non-linear
    aggregators must be validated on ``sample`` (realizations); linear ones
    with positive weights are admissible on any sample.
    """
    ids = list(ids)
    if not ids:
        raise OperationError("aggregate needs at least one rule")
    if len(set(ids)) != len(ids):
        raise OperationError(f"duplicate ids in aggregate: {ids}")
    for rid in ids:
        if rid not in rb.rules:
            raise UnknownIdError(rid, "rulebook")
    for a in ids[1:]:
        if not rb.order.equiv(ids[0], a):
            raise OperationError(
                f"rules {ids[0]!r} and {a!r} are not in the same equivalence class; "
                "only equally ranked rules may be aggregated"
            )
    if new_id in rb.rules and new_id not in ids:
        raise OperationError(f"aggregate id {new_id!r} already names another rule")
    if isinstance(agg, LinearPositive) and len(agg.weights) != len(ids):
        raise OperationError(f"{len(agg.weights)} weights given for {len(ids)} rules")

    sources = tuple(rb.rules[r] for r in ids)
    if sample is not None:
        tuples = [tuple(s.violation(x) for s in sources) for x in sample]
        check = validate_aggregator(agg, tuples)
        if not check:
            raise OperationError(f"aggregator rejected: {check.reason}; counterexample {check.counterexample}")
    elif not isinstance(agg, LinearPositive):
        raise OperationError("non-linear aggregators need a sample to validate against")

    collapsed = set(ids)
    new_rule = _aggregated_rule(new_id, sources, agg)
    rules = {rid: r for rid, r in rb.rules.items() if rid not in collapsed}
    rules[new_id] = new_rule
    elements = [e for e in rb.order.elements if e not in collapsed] + [new_id]

    def rename(e):
        return new_id if e in collapsed else e

    edges = []
    for a, b in rb.order.edges:
        a, b = rename(a), rename(b)
        if a != b:
            edges.append((a, b))
    return Rulebook(rules, PreorderedSet(elements, edges), rb.epsilon)


def augment(rb: Rulebook, new_rule: Rule) -> Rulebook:
    """Add ``new_rule`` strictly below every existing rule."""
    if new_rule.id in rb.rules:
        raise OperationError(f"rule id {new_rule.id!r} already in rulebook")
    return insert_rule(rb, new_rule, below=(), above=rb.ids)


def insert_rule(
    rb: Rulebook, new_rule: Rule, below: Iterable[str] = (), above: Iterable[str] = ()
) -> Rulebook:
    """Add a rule anywhere: ``new_rule <= a`` for ``a`` in ``above``, ``b <= new_rule`` for ``b`` in ``below``.

    Only the placement used by :func:`augment` is guaranteed to preserve the
    strict induced order.
    """
    if new_rule.id in rb.rules:
        raise OperationError(f"rule id {new_rule.id!r} already in rulebook")
    rules = dict(rb.rules)
    rules[new_rule.id] = new_rule
    return Rulebook(rules, rb.order.add_element(new_rule.id, below=below, above=above), rb.epsilon)


# -- certification -----------------------------------------------------------


@dataclass(frozen=True)
class RefinementCertificate:
    """Evidence that ``after`` strictly refines ``before`` on a finite sample.

    ``id_map`` sends each rule of ``before`` to the rule of ``after`` that
    carries it (itself, or the aggregate it was collapsed into).
    ``counterexample`` is the first pair ``(x, y)`` with ``x < y`` (or
    ``x <= y`` when only ``full_preserved`` fails) before but not after.
    """

    before: Rulebook
    after: Rulebook
    id_map: Mapping[str, str]
    profiles_before: Mapping[str, ViolationProfile]
    profiles_after: Mapping[str, ViolationProfile]
    pairs_checked: int
    strict_preserved: bool
    full_preserved: bool
    counterexample: tuple[str, str] | None = None
    counterexample_verdicts: tuple[Verdict, Verdict] | None = None
    weak_counterexample: tuple[str, str] | None = None
    map_is_embedding: bool | None = None
    operation: str = ""
    notes: tuple[str, ...] = field(default=())

    def summary(self) -> str:
        lines = [
            f"operation: {self.operation or 'unspecified'}",
            f"pairs checked: {self.pairs_checked}",
            f"strict order preserved: {'yes' if self.strict_preserved else 'NO'}",
            f"full order preserved: {'yes' if self.full_preserved else 'no'}",
        ]
        if self.map_is_embedding is not None:
            lines.append(f"rule map is an order embedding: {'yes' if self.map_is_embedding else 'no'}")
        if self.counterexample:
            x, y = self.counterexample
            vb, va = self.counterexample_verdicts
            lines.append(f"counterexample: {x} {vb.value} {y} before, {x} {va.value} {y} after")
        elif self.weak_counterexample:
            x, y = self.weak_counterexample
            lines.append(f"weak counterexample: {x} <= {y} before but not after")
        lines.extend(self.notes)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "operation": self.operation,
            "pairs_checked": self.pairs_checked,
            "strict_preserved": self.strict_preserved,
            "full_preserved": self.full_preserved,
            "map_is_embedding": self.map_is_embedding,
            "id_map": dict(sorted(self.id_map.items())),
            "counterexample": list(self.counterexample) if self.counterexample else None,
            "counterexample_verdicts": (
                [v.name for v in self.counterexample_verdicts] if self.counterexample_verdicts else None
            ),
            "weak_counterexample": list(self.weak_counterexample) if self.weak_counterexample else None,
        }


def transport_map(before: Rulebook, after: Rulebook) -> dict[str, str]:
    """Match every rule of ``before`` to the rule of ``after`` carrying it."""
    carried: dict[str, str] = {}
    for rid, rule in after.rules.items():
        for src in _all_sources(rule):
            carried.setdefault(src.id, rid)
    id_map = {}
    missing = []
    for rid in before.ids:
        if rid in after.rules:
            id_map[rid] = rid
        elif rid in carried:
            id_map[rid] = carried[rid]
        else:
            missing.append(rid)
    if missing:
        raise TransportError(
            f"rules {missing} of the original rulebook are neither present in nor aggregated into the new one"
        )
    return id_map


def _all_sources(rule: Rule):
    for s in rule.sources:
        yield s
        yield from _all_sources(s)


def certify_strict_refinement(
    before: Rulebook,
    after: Rulebook,
    sample: Sequence[Any],
    operation: str = "",
    id_map: Mapping[str, str] | None = None,
) -> RefinementCertificate:
    """Exhaustively check, over all ordered pairs of ``sample``, that the strict order survives."""
    if id_map is None:
        id_map = transport_map(before, after)
    else:
        for rid in before.ids:
            if rid not in id_map or id_map[rid] not in after.rules:
                raise TransportError(f"id map has no valid image for rule {rid!r}")
    pb = {realization_id(x): profile(before, x) for x in sample}
    pa = {realization_id(x): profile(after, x) for x in sample}

    embedding = None
    if set(id_map.values()) <= set(after.ids):
        embedding = OrderMap(before.order, after.order, id_map).is_embedding()

    strict = full = True
    counter = verdicts = weak = None
    ids = list(pb)
    n = 0
    for x, y in itertools.permutations(ids, 2):
        n += 1
        vb = compare(before, pb[x], pb[y])
        if vb not in (Verdict.LESS_THAN, Verdict.EQUIVALENT):
            continue
        va = compare(after, pa[x], pa[y])
        if vb is Verdict.LESS_THAN and va is not Verdict.LESS_THAN:
            strict = full = False
            if counter is None:
                counter, verdicts = (x, y), (vb, va)
        elif va not in (Verdict.LESS_THAN, Verdict.EQUIVALENT):
            full = False
            if weak is None:
                weak = (x, y)
    return RefinementCertificate(
        before=before,
        after=after,
        id_map=dict(id_map),
        profiles_before=pb,
        profiles_after=pa,
        pairs_checked=n,
        strict_preserved=strict,
        full_preserved=full,
        counterexample=counter,
        counterexample_verdicts=verdicts,
        weak_counterexample=weak,
        map_is_embedding=embedding,
        operation=operation,
    )


# -- counterexamples ---------------------------------------------------------


def table_rule(rid: str, table: Mapping[str, float], description: str = "") -> Rule:
    """A rule given by an explicit realization-id -> value table."""
    table = dict(table)

    def violation(x):
        xid = realization_id(x)
        try:
            return table[xid]
        except KeyError:
            raise KeyError(f"table rule {rid!r} has no entry for realization {xid!r}") from None

    params = tuple(sorted(table.items()))
    return Rule(rid, violation, description or "explicit table", spec=("table", params))


@dataclass(frozen=True)
class ForbiddenDemo:
    name: str
    description: str
    before: Rulebook
    after: Rulebook
    sample: tuple[str, ...]
    certificate: RefinementCertificate


def forbidden_op_demos() -> list[ForbiddenDemo]:
    """Three rule insertions that break the strict induced order.

    * ``top``: a new rule above everything reverses a strict pair.
    * ``middle``: a new rule between two existing rules reverses a pair.
    * ``incomparable``: a rule unrelated to the existing one makes a strict
      pair incomparable.
    """
    sample = ("x", "y")
    demos = []

    u = table_rule("u", {"x": 0, "y": 1})
    r = table_rule("r", {"x": 1, "y": 0})
    before = Rulebook.build([u])
    after = insert_rule(before, r, below=["u"])
    demos.append(
        ForbiddenDemo(
            "top",
            "new rule r above every rule: u(x) < u(y) gives x < y, r(y) < r(x) then forces y < x",
            before,
            after,
            sample,
            certify_strict_refinement(before, after, sample, operation="insert r above u"),
        )
    )

    w = table_rule("w", {"x": 0, "y": 0})
    before = Rulebook.build([u, w], edges=[("u", "w")])
    after = insert_rule(before, r, below=["u"], above=["w"])
    demos.append(
        ForbiddenDemo(
            "middle",
            "new rule r with u < r < w: x, y tie on w, u prefers x, r prefers y; order reverted",
            before,
            after,
            sample,
            certify_strict_refinement(before, after, sample, operation="insert r between u and w"),
        )
    )

    before = Rulebook.build([u])
    after = insert_rule(before, r)
    demos.append(
        ForbiddenDemo(
            "incomparable",
            "new rule r incomparable to u: u prefers x, r prefers y; x and y become incomparable",
            before,
            after,
            sample,
            certify_strict_refinement(before, after, sample, operation="insert r incomparable to u"),
        )
    )
    return demos
