import itertools
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import shipped_rulebook
from rulebooks.cli import data_path
from rulebooks.core import Rule, Rulebook, Verdict, compare, lex_rank, profile
from rulebooks.errors import EvaluationError, RulebookError
from rulebooks.fuzz import random_chain, random_rulebook
from rulebooks.ops import table_rule
from rulebooks.planner import CandidateSet, rank, select
from rulebooks.scenario import load_scenario


def test_example3_report(avoidance):
    rb = shipped_rulebook("example3.rbk", avoidance)
    rep = rank(rb, avoidance.realizations())
    assert set(rep.hasse_edges) == {("b", "a"), ("c", "d"), ("d", "a")}
    assert rep.minimal == ("b", "c")
    assert rep.selected == "b"
    assert rep.total_order is None
    for x, y in itertools.product(rep.ids, repeat=2):
        assert rep.verdict(x, y) is rep.verdict(y, x).flipped()


def test_collision_liability_selects_inlane():
    sc = load_scenario(data_path("collision.json"))
    rb = shipped_rulebook("collision_liability.rbk", sc)
    assert rank(rb, sc.realizations()).minimal == ("inlane",)


def test_single_candidate():
    rb = Rulebook.build([table_rule("r", {"only": 3})])
    assert rank(rb, ["only"]).minimal == ("only",)
    assert select(rb, ["only"]) == "only"


def test_all_equivalent_picks_smallest_id():
    rb = Rulebook.build([table_rule("r", {"q": 1, "p": 1, "z": 1})])
    assert select(rb, ["z", "q", "p"]) == "p"
    assert rank(rb, ["z", "q", "p"], all_equivalent=True).minimal == ("p", "q", "z")


def test_chain_hasse():
    rb = shipped_rulebook("example3_chain_kl.rbk")
    rep = rank(rb, list("abcd"))
    assert rep.hasse_edges == (("b", "c"), ("c", "d"), ("d", "a"))
    assert rep.total_order == ("b", "c", "d", "a")


def test_antichain_hasse():
    rb = Rulebook.build([table_rule("r", {"x": 0, "y": 1}), table_rule("s", {"x": 1, "y": 0})])
    assert rank(rb, ["x", "y"]).hasse_edges == ()


def test_candidate_set_invariants():
    with pytest.raises(RulebookError):
        CandidateSet(())
    with pytest.raises(RulebookError, match="duplicate"):
        CandidateSet(("a", "a"))


def test_evaluation_error_names_candidate():
    def bad(x):
        if x == "boom":
            raise ValueError("nope")
        return 0.0

    rb = Rulebook.build([Rule("r", bad)])
    with pytest.raises(EvaluationError) as info:
        rank(rb, ["fine", "boom"])
    assert info.value.realization == "boom" and info.value.rule == "r"


def test_report_dict_round_trips_json():
    import json

    rb = shipped_rulebook("example3_table.rbk")
    d = rank(rb, list("abcd")).to_dict()
    assert json.loads(json.dumps(d)) == d
    assert d["selected"] == "b"


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_permutation_invariance_and_hasse_closure(seed):
    rng = random.Random(seed)
    xs = [f"x{i}" for i in range(rng.randint(1, 8))]
    rb = random_rulebook(rng, xs, group_prob=0.3)
    rep = rank(rb, xs)
    shuffled = xs[:]
    rng.shuffle(shuffled)
    assert rank(rb, shuffled).to_dict() == rep.to_dict()
    # closure of the Hasse edges equals the strict order among class representatives
    reps = sorted({min(y for y in rep.ids if rep.verdict(x, y) is Verdict.EQUIVALENT) for x in rep.ids})
    g = nx.DiGraph()
    g.add_nodes_from(reps)
    g.add_edges_from(rep.hasse_edges)
    closure = nx.transitive_closure_dag(g)
    for a, b in itertools.permutations(reps, 2):
        assert closure.has_edge(a, b) == (rep.verdict(a, b) is Verdict.LESS_THAN)
    assert set(nx.transitive_reduction(closure).edges) == set(g.edges)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_chain_select_is_lex_head(seed):
    rng = random.Random(seed)
    xs = [f"x{i}" for i in range(rng.randint(1, 8))]
    rb = random_chain(rng, xs)
    head = lex_rank(rb, [profile(rb, x) for x in xs])[0]
    assert select(rb, xs) == head


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adding_candidate_keeps_minimal_unless_dominated(seed):
    rng = random.Random(seed)
    xs = [f"x{i}" for i in range(rng.randint(2, 8))]
    rb = random_rulebook(rng, xs, group_prob=0.3)
    old, new = xs[:-1], xs[-1]
    before = set(rank(rb, old, all_equivalent=True).minimal)
    after = set(rank(rb, xs, all_equivalent=True).minimal)
    pn = profile(rb, new)
    for m in before - after:
        assert compare(rb, pn, profile(rb, m)) is Verdict.LESS_THAN
