"""Randomized property suites runnable from the command line.

Every suite is deterministic given its seed, so a failure can be replayed
with ``rulebooks fuzz --seed N``.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field

from .core import Rulebook, Verdict, compare, profile
from .dsl import AggregateDecl, RuleDecl, RulebookDoc, parse_rulebook, serialize_rulebook
from .ops import (
    LinearPositive,
    aggregate,
    augment,
    certify_strict_refinement,
    priority_refine,
    table_rule,
    validate_aggregator,
)

__all__ = [
    "SuiteResult",
    "random_rulebook",
    "random_doc",
    "preorder_axioms",
    "refinement_theorems",
    "linear_aggregators",
    "format_roundtrip",
    "SUITES",
]


@dataclass
class SuiteResult:
    name: str
    seed: int
    cases: int
    checks: dict[str, list[int]] = field(default_factory=dict)  # property -> [passed, total]
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def record(self, prop: str, ok: bool, detail: str = "") -> None:
        tally = self.checks.setdefault(prop, [0, 0])
        tally[1] += 1
        if ok:
            tally[0] += 1
        elif len(self.failures) < 10:
            self.failures.append(f"{prop}: {detail}")

    @property
    def ok(self) -> bool:
        return all(p == t for p, t in self.checks.values())

    def report(self) -> str:
        lines = [f"{self.name}: {self.cases} cases, seed {self.seed}, {self.seconds:.2f}s"]
        for prop, (p, t) in self.checks.items():
            lines.append(f"  {prop}: {p}/{t}")
        lines.extend(f"  FAIL {f}" for f in self.failures)
        return "\n".join(lines)


# -- generators --------------------------------------------------------------


def _realization_ids(rng: random.Random, max_n: int = 8) -> list[str]:
    return [f"x{i}" for i in range(rng.randint(1, max_n))]


def random_rulebook(
    rng: random.Random,
    xs: list[str],
    max_rules: int = 6,
    group_prob: float = 0.0,
    edge_prob: float = 0.4,
    max_value: int = 3,
) -> Rulebook:
    """Table rules with integer values and a random DAG of priorities.

    With ``group_prob > 0`` some nodes of the DAG are classes of two or three
    equally ranked rules.
    """
    n = rng.randint(1, max_rules)
    rules = [table_rule(f"r{i}", {x: rng.randint(0, max_value) for x in xs}) for i in range(n)]
    ids = [r.id for r in rules]
    rng.shuffle(ids)
    classes: list[list[str]] = []
    i = 0
    while i < n:
        size = 1
        if rng.random() < group_prob:
            size = rng.randint(2, 3)
        classes.append(ids[i : i + size])
        i += size
    edges = []
    # classes are listed in a topological order: only lower -> higher index edges
    for a, b in itertools.combinations(range(len(classes)), 2):
        if rng.random() < edge_prob:
            edges.append((rng.choice(classes[a]), rng.choice(classes[b])))
    groups = [c for c in classes if len(c) > 1]
    return Rulebook.build(rules, edges, groups)


def random_chain(rng: random.Random, xs: list[str], max_rules: int = 6, max_value: int = 3) -> Rulebook:
    n = rng.randint(1, max_rules)
    rules = [table_rule(f"r{i}", {x: rng.randint(0, max_value) for x in xs}) for i in range(n)]
    ids = [r.id for r in rules]
    rng.shuffle(ids)
    return Rulebook.build(rules, list(zip(ids, ids[1:])))


# -- suites ------------------------------------------------------------------


def preorder_axioms(cases: int = 10_000, seed: int = 0) -> SuiteResult:
    """Reflexivity, transitivity, equivalence iff equal values, chains agree with lexicographic order."""
    rng = random.Random(seed)
    res = SuiteResult("preorder-axioms", seed, cases)
    t0 = time.perf_counter()
    for case in range(cases):
        xs = _realization_ids(rng)
        rb = random_rulebook(rng, xs)
        prof = [profile(rb, x) for x in xs]
        n = len(xs)
        verdict = [[compare(rb, prof[i], prof[j]) for j in range(n)] for i in range(n)]
        leq = [[v in (Verdict.LESS_THAN, Verdict.EQUIVALENT) for v in row] for row in verdict]
        res.record("reflexive", all(leq[i][i] for i in range(n)), f"case {case}")
        trans = all(
            leq[i][k] for i in range(n) for j in range(n) if leq[i][j] for k in range(n) if leq[j][k]
        )
        res.record("transitive", trans, f"case {case}")
        eq_ok = all(
            (verdict[i][j] is Verdict.EQUIVALENT) == (prof[i].values == prof[j].values)
            for i in range(n)
            for j in range(n)
        )
        res.record("equivalent iff equal", eq_ok, f"case {case}")

        chain = random_chain(rng, xs)
        levels = [lvl[0] for lvl in chain.priority_levels()]
        cp = [profile(chain, x) for x in xs]
        lex_ok = True
        for i, j in itertools.product(range(n), repeat=2):
            a = tuple(cp[i][r] for r in levels)
            b = tuple(cp[j][r] for r in levels)
            expected = Verdict.LESS_THAN if a < b else Verdict.GREATER_THAN if a > b else Verdict.EQUIVALENT
            if compare(chain, cp[i], cp[j]) is not expected:
                lex_ok = False
                break
        res.record("chain = lexicographic", lex_ok, f"case {case}")
    res.seconds = time.perf_counter() - t0
    return res


def _random_step(rng: random.Random, rb: Rulebook, xs: list[str], counter: itertools.count):
    """Apply one admissible operation; returns ``(name, rulebook)`` or ``None`` if none applies."""
    choices = ["refine", "aggregate", "augment"]
    rng.shuffle(choices)
    for op in choices:
        if op == "refine":
            pairs = [(a, b) for a, b in itertools.permutations(rb.ids, 2) if not rb.order.comparable(a, b)]
            if pairs:
                a, b = rng.choice(pairs)
                return f"refine {a}<{b}", priority_refine(rb, a, b)
        elif op == "aggregate":
            classes = [c for c in rb.order.equivalence_classes() if len(c) > 1]
            if classes:
                cls = list(rng.choice(classes))
                k = rng.randint(2, len(cls))
                ids = rng.sample(cls, k)
                weights = tuple(rng.choice((0.5, 1.0, 2.0, 3.0)) for _ in ids)
                new_id = f"g{next(counter)}"
                return f"aggregate {'+'.join(ids)}->{new_id}", aggregate(rb, ids, new_id, LinearPositive(weights))
        else:
            new = table_rule(f"n{next(counter)}", {x: rng.randint(0, 3) for x in xs})
            return f"augment {new.id}", augment(rb, new)
    return None


def refinement_theorems(cases: int = 2_000, seed: int = 0, max_ops: int = 4) -> SuiteResult:
    """Random sequences of admissible operations never break the strict induced order."""
    rng = random.Random(seed)
    res = SuiteResult("refinement-theorems", seed, cases)
    t0 = time.perf_counter()
    for case in range(cases):
        xs = _realization_ids(rng)
        before = random_rulebook(rng, xs, group_prob=0.5)
        rb = before
        counter = itertools.count()
        names = []
        for _ in range(rng.randint(1, max_ops)):
            step = _random_step(rng, rb, xs, counter)
            if step is None:
                break
            names.append(step[0])
            rb = step[1]
        cert = certify_strict_refinement(before, rb, xs, operation="; ".join(names))
        detail = f"case {case}: {cert.operation} counterexample {cert.counterexample}"
        res.record("strict order preserved", cert.strict_preserved, detail)
        if not any(n.startswith("augment") for n in names):
            res.record("full order preserved (refine/aggregate only)", cert.full_preserved, detail)
    res.seconds = time.perf_counter() - t0
    return res


def linear_aggregators(cases: int = 1_000, seed: int = 0) -> SuiteResult:
    """Positive linear maps are strictly monotone on arbitrary samples."""
    rng = random.Random(seed)
    res = SuiteResult("linear-aggregators", seed, cases)
    t0 = time.perf_counter()
    for case in range(cases):
        dim = rng.randint(1, 4)
        weights = tuple(rng.uniform(0.01, 10.0) for _ in range(dim))
        sample = [tuple(float(rng.randint(0, 3)) for _ in range(dim)) for _ in range(rng.randint(1, 12))]
        check = validate_aggregator(LinearPositive(weights), sample)
        res.record("linear positive passes", check.ok, f"case {case}: {check.counterexample}")
    res.seconds = time.perf_counter() - t0
    return res


_ID_ALPHABET = "abcdefghijklmnopqrstuvwxyzαβγδκλμζτ_"


def _random_ident(rng: random.Random, taken: set[str]) -> str:
    while True:
        head = rng.choice(_ID_ALPHABET.replace("_", ""))
        ident = head + "".join(rng.choice(_ID_ALPHABET + "0123456789") for _ in range(rng.randint(0, 6)))
        if ident not in taken and ident not in ("rulebook", "rule", "group", "aggregate", "linear", "epsilon"):
            taken.add(ident)
            return ident


def random_doc(rng: random.Random) -> RulebookDoc:
    """A valid rulebook document using only ``table`` rules (parameters are realization ids)."""
    taken: set[str] = set()
    name = _random_ident(rng, taken)
    n = rng.randint(1, 7)
    ids = [_random_ident(rng, taken) for _ in range(n)]
    xs = [_random_ident(rng, set()) for _ in range(rng.randint(0, 3))]
    rules = tuple(
        RuleDecl(i, "table", tuple(sorted({x: float(rng.randint(0, 5)) / rng.choice((1, 2, 4)) for x in xs}.items())))
        for i in ids
    )
    order = ids[:]
    rng.shuffle(order)
    classes, i = [], 0
    while i < n:
        size = rng.randint(2, 3) if rng.random() < 0.3 else 1
        classes.append(order[i : i + size])
        i += size
    groups = tuple(tuple(c) for c in classes if len(c) > 1)
    aggregates = []
    owner = {}
    for c in classes:
        if len(c) > 1 and rng.random() < 0.5:
            aid = _random_ident(rng, taken)
            aggregates.append(AggregateDecl(aid, tuple((s, rng.choice((0.25, 1.0, 1.5, 7.0))) for s in c)))
            owner.update({s: aid for s in c})
    priorities = []
    for a, b in itertools.combinations(range(len(classes)), 2):
        if rng.random() < 0.4:
            lo, hi = rng.choice(classes[a]), rng.choice(classes[b])
            # edges may name either a source rule or its aggregate
            if lo in owner and rng.random() < 0.5:
                lo = owner[lo]
            if hi in owner and rng.random() < 0.5:
                hi = owner[hi]
            priorities.append((lo, hi))
    eps = rng.choice((None, 0.0, 1e-9, 0.125))
    return RulebookDoc(name, eps, rules, groups, tuple(priorities), tuple(aggregates))


def format_roundtrip(cases: int = 500, seed: int = 0) -> SuiteResult:
    """``parse(serialize(d))`` equals the canonical form of ``d``."""
    rng = random.Random(seed)
    res = SuiteResult("format-roundtrip", seed, cases)
    t0 = time.perf_counter()
    for case in range(cases):
        doc = random_doc(rng)
        text = serialize_rulebook(doc)
        try:
            back = parse_rulebook(text)
            ok = back == doc.canonical() and serialize_rulebook(back) == text
            detail = f"case {case}:\n{text}"
        except Exception as exc:  # noqa: BLE001 - any failure is a finding
            ok, detail = False, f"case {case}: {exc}\n{text}"
        res.record("parse . serialize = id", ok, detail)
    res.seconds = time.perf_counter() - t0
    return res


SUITES = {
    "preorder": (preorder_axioms, 10_000),
    "refinement": (refinement_theorems, 2_000),
    "aggregators": (linear_aggregators, 1_000),
    "roundtrip": (format_roundtrip, 500),
}
