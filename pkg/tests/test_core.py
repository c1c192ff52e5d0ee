import itertools
import math

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulebooks.core import (
    Rule,
    Rulebook,
    Verdict,
    ViolationProfile,
    compare,
    induced_leq,
    lex_rank,
    minimal_set,
    profile,
)
from rulebooks.errors import EvaluationError, NotAChainError, ProfileError, RulebookError
from rulebooks.ops import table_rule

TABLES = {
    "alpha": {"a": 1, "b": 2, "c": 3, "d": 4},
    "beta": {"a": 1, "b": 0, "c": 0, "d": 0},
    "kappa": {"a": 1, "b": 1, "c": 0, "d": 0},
    "lambda": {"a": 0, "b": 0, "c": 1, "d": 1},
}
PARTIAL = [("alpha", "kappa"), ("alpha", "lambda"), ("kappa", "beta"), ("lambda", "beta")]


def example3(edges=PARTIAL):
    return Rulebook.build([table_rule(k, v) for k, v in TABLES.items()], edges)


def profiles(rb, ids="abcd"):
    return {x: profile(rb, x) for x in ids}


# -- oracle: literal transcription of the definition -------------------------


def oracle_leq(rules, edges, xv, yv):
    g = nx.DiGraph()
    g.add_nodes_from(rules)
    g.add_edges_from(edges)
    reach = {r: nx.descendants(g, r) | {r} for r in rules}

    def strictly_below(r, s):
        return s in reach[r] and r not in reach[s]

    for r in rules:
        if yv[r] < xv[r]:
            if not any(strictly_below(r, s) and xv[s] < yv[s] for s in rules):
                return False
    return True


def oracle_verdict(rules, edges, xv, yv):
    a = oracle_leq(rules, edges, xv, yv)
    b = oracle_leq(rules, edges, yv, xv)
    return {(True, True): Verdict.EQUIVALENT, (True, False): Verdict.LESS_THAN,
            (False, True): Verdict.GREATER_THAN, (False, False): Verdict.INCOMPARABLE}[(a, b)]


# -- examples ---------------------------------------------------------------


def test_example3_leq():
    rb = example3()
    p = profiles(rb)
    assert induced_leq(rb, p["b"], p["a"]) and not induced_leq(rb, p["a"], p["b"])
    assert not induced_leq(rb, p["b"], p["c"]) and not induced_leq(rb, p["c"], p["b"])
    assert compare(rb, p["c"], p["d"]) is Verdict.LESS_THAN


def test_zero_profile_is_below_everything():
    rb = example3()
    zero = ViolationProfile("z", {k: 0.0 for k in TABLES})
    for p in profiles(rb).values():
        assert induced_leq(rb, zero, p)


def test_identical_profiles_equivalent():
    rb = example3()
    p = profile(rb, "a")
    assert compare(rb, p, ViolationProfile("a2", dict(p.values))) is Verdict.EQUIVALENT


def test_minimal_sets_and_chains():
    rb = example3()
    assert minimal_set(rb, list(profiles(rb).values())) == ["b", "c"]
    kl = example3([("alpha", "kappa"), ("kappa", "lambda"), ("lambda", "beta")])
    lk = example3([("alpha", "lambda"), ("lambda", "kappa"), ("kappa", "beta")])
    assert minimal_set(kl, list(profiles(kl).values())) == ["b"]
    assert minimal_set(lk, list(profiles(lk).values())) == ["c"]
    assert lex_rank(kl, list(profiles(kl).values())) == ["b", "c", "d", "a"]
    assert lex_rank(lk, list(profiles(lk).values())) == ["c", "d", "b", "a"]


def test_minimal_set_equivalent_representatives():
    rb = Rulebook.build([table_rule("r", {"x": 0, "y": 0, "z": 1})])
    ps = [profile(rb, i) for i in "zyx"]
    assert minimal_set(rb, ps) == ["x"]
    assert minimal_set(rb, ps, all_equivalent=True) == ["x", "y"]


def test_minimal_set_empty():
    with pytest.raises(RulebookError):
        minimal_set(example3(), [])


def test_lex_rank_requires_chain():
    rb = example3()
    with pytest.raises(NotAChainError, match="minimal_set"):
        lex_rank(rb, list(profiles(rb).values()))


def test_single_rule_lex_rank_sorts_values():
    rb = Rulebook.build([table_rule("r", {"p": 3, "q": 1, "s": 2})])
    assert lex_rank(rb, [profile(rb, i) for i in "pqs"]) == ["q", "s", "p"]


def test_profile_example3_a():
    rb = example3()
    assert profile(rb, "a").values == {"alpha": 1, "beta": 1, "kappa": 1, "lambda": 0}


def test_profile_errors():
    bad = Rule("neg", lambda x: -1.0)
    with pytest.raises(EvaluationError, match="neg"):
        profile(Rulebook.build([bad]), "x")
    nan = Rule("nan", lambda x: math.nan)
    with pytest.raises(EvaluationError):
        profile(Rulebook.build([nan]), "x")
    boom = Rule("boom", lambda x: 1 / 0)
    with pytest.raises(EvaluationError, match="boom"):
        profile(Rulebook.build([boom]), "x")


def test_missing_rule_in_profile():
    rb = example3()
    partial = ViolationProfile("q", {"alpha": 0})
    with pytest.raises(ProfileError, match="beta|kappa|lambda"):
        compare(rb, partial, profile(rb, "a"))


def test_rulebook_invariants():
    with pytest.raises(RulebookError):
        Rulebook.build([])
    with pytest.raises(RulebookError):
        Rulebook.build([table_rule("a", {}), table_rule("a", {})])
    with pytest.raises(RulebookError):
        Rulebook.build([table_rule("a", {})], epsilon=-1)


def test_epsilon_tolerance():
    r = Rule("r", lambda x: {"x": 1.0, "y": 1.0 + 1e-12}[x])
    exact = Rulebook.build([r])
    loose = exact.with_epsilon(1e-9)
    assert compare(exact, profile(exact, "x"), profile(exact, "y")) is Verdict.LESS_THAN
    assert compare(loose, profile(loose, "x"), profile(loose, "y")) is Verdict.EQUIVALENT


# -- properties -------------------------------------------------------------


@st.composite
def instances(draw, max_rules=6, max_x=8):
    n = draw(st.integers(1, max_rules))
    rules = [f"r{i}" for i in range(n)]
    perm = draw(st.permutations(rules))
    edges = [
        (perm[i], perm[j])
        for i, j in itertools.combinations(range(n), 2)
        if draw(st.booleans())
    ]
    # occasionally tie two rules into one class
    if n >= 2 and draw(st.booleans()):
        edges += [(perm[0], perm[1]), (perm[1], perm[0])]
    m = draw(st.integers(1, max_x))
    xs = [f"x{i}" for i in range(m)]
    tables = {r: {x: draw(st.integers(0, 3)) for x in xs} for r in rules}
    return rules, edges, xs, tables


@settings(max_examples=300, deadline=None)
@given(instances())
def test_compare_matches_oracle(inst):
    rules, edges, xs, tables = inst
    rb = Rulebook.build([table_rule(r, tables[r]) for r in rules], edges)
    ps = {x: profile(rb, x) for x in xs}
    for x, y in itertools.product(xs, repeat=2):
        expected = oracle_verdict(rules, edges, ps[x].values, ps[y].values)
        assert compare(rb, ps[x], ps[y]) is expected
        assert compare(rb, ps[y], ps[x]) is expected.flipped()


@settings(max_examples=200, deadline=None)
@given(instances())
def test_transitivity_witness(inst):
    rules, edges, xs, tables = inst
    rb = Rulebook.build([table_rule(r, tables[r]) for r in rules], edges)
    ps = {x: profile(rb, x).values for x in xs}
    order = rb.order
    for x, y, z in itertools.product(xs, repeat=3):
        if not (induced_leq(rb, profile(rb, x), profile(rb, y)) and induced_leq(rb, profile(rb, y), profile(rb, z))):
            continue
        for r in rules:
            if ps[z][r] < ps[x][r]:
                assert any(order.leq(r, s) and ps[x][s] < ps[z][s] for s in rules)


@settings(max_examples=200, deadline=None)
@given(instances())
def test_minimal_set_matches_bruteforce(inst):
    rules, edges, xs, tables = inst
    rb = Rulebook.build([table_rule(r, tables[r]) for r in rules], edges)
    ps = [profile(rb, x) for x in xs]
    minimal = [
        p.realization
        for p in ps
        if not any(oracle_verdict(rules, edges, q.values, p.values) is Verdict.LESS_THAN for q in ps)
    ]
    got = minimal_set(rb, ps, all_equivalent=True)
    assert got == sorted(minimal)
    reps = minimal_set(rb, ps)
    assert set(reps) <= set(got)
    # one representative per class of equal profiles
    assert len(reps) == len({tuple(sorted(p.values.items())) for p in ps if p.realization in got})


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(1, 8), st.data())
def test_chain_lex_rank_consistent_with_compare(n, m, data):
    rules = data.draw(st.permutations([f"r{i}" for i in range(n)]))
    xs = [f"x{i}" for i in range(m)]
    rb = Rulebook.build(
        [table_rule(r, {x: data.draw(st.integers(0, 3)) for x in xs}) for r in rules],
        list(zip(rules, rules[1:])),
    )
    ps = {x: profile(rb, x) for x in xs}
    ranked = lex_rank(rb, list(ps.values()))
    for a, b in zip(ranked, ranked[1:]):
        assert compare(rb, ps[a], ps[b]) in (Verdict.LESS_THAN, Verdict.EQUIVALENT)
    high_first = list(reversed(rules))
    for x, y in itertools.product(xs, repeat=2):
        vx = tuple(ps[x][r] for r in high_first)
        vy = tuple(ps[y][r] for r in high_first)
        want = Verdict.LESS_THAN if vx < vy else Verdict.GREATER_THAN if vx > vy else Verdict.EQUIVALENT
        assert compare(rb, ps[x], ps[y]) is want
