import itertools
from collections import deque

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulebooks.errors import RulebookError, UnknownIdError
from rulebooks.preorder import OrderMap, PreorderedSet, is_embedding, refines

# rulebook graph with seven rules: r1 and r2 on top, r3~r4 below r1, r6 at the bottom
FIG = PreorderedSet(
    [f"r{i}" for i in range(1, 8)],
    [("r5", "r1"), ("r5", "r2"), ("r3", "r4"), ("r4", "r3"), ("r3", "r1"), ("r6", "r3"), ("r7", "r5")],
)


def bfs_leq(elements, edges, a, b):
    succ = {e: [] for e in elements}
    for u, v in edges:
        succ[u].append(v)
    seen, todo = {a}, deque([a])
    while todo:
        u = todo.popleft()
        for v in succ[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return b in seen


@st.composite
def edge_sets(draw, max_n=8, max_edges=20):
    n = draw(st.integers(1, max_n))
    elems = [f"e{i}" for i in range(n)]
    edges = draw(st.lists(st.tuples(st.sampled_from(elems), st.sampled_from(elems)), max_size=max_edges))
    return elems, edges


def test_singleton_reflexive():
    p = PreorderedSet(["e"], [])
    assert p.leq("e", "e")
    assert not p.lt("e", "e")


def test_figure_relations():
    assert FIG.leq("r6", "r1")
    assert not FIG.leq("r5", "r3") and not FIG.leq("r3", "r5")
    assert not FIG.lt("r3", "r4") and FIG.equiv("r3", "r4")
    assert not FIG.comparable("r1", "r2")
    for r in ("r5", "r2", "r7"):
        assert not FIG.comparable("r3", r)


def test_chain_strict():
    p = PreorderedSet("abc", [("a", "b"), ("b", "c")])
    assert p.lt("a", "c")
    assert p.is_chain() and p.is_total()


def test_unknown_id_named():
    with pytest.raises(UnknownIdError, match="zz"):
        FIG.leq("r1", "zz")
    with pytest.raises(UnknownIdError, match="nope"):
        PreorderedSet(["a"], [("a", "nope")])


def test_duplicate_elements_rejected():
    with pytest.raises(RulebookError):
        PreorderedSet(["a", "a"], [])


def test_equivalence_classes_examples():
    assert sorted(map(sorted, PreorderedSet("ab", []).equivalence_classes())) == [["a"], ["b"]]
    p = PreorderedSet(["r3", "r4"], [("r3", "r4"), ("r4", "r3")])
    assert [sorted(c) for c in p.equivalence_classes()] == [["r3", "r4"]]


def test_dag_plus_two_cycle_matches_scc():
    edges = [("n0", "n1"), ("n1", "n2"), ("n0", "n3"), ("n3", "n4"), ("n4", "n3"), ("n2", "n5")]
    p = PreorderedSet([f"n{i}" for i in range(6)], edges)
    g = nx.DiGraph(edges)
    expected = sorted(sorted(c) for c in nx.strongly_connected_components(g))
    assert sorted(sorted(c) for c in p.equivalence_classes()) == expected


@settings(max_examples=300, deadline=None)
@given(edge_sets())
def test_leq_matches_bfs(data):
    elems, edges = data
    p = PreorderedSet(elems, edges)
    for a, b in itertools.product(elems, repeat=2):
        assert p.leq(a, b) == bfs_leq(elems, edges, a, b)


@settings(max_examples=300, deadline=None)
@given(edge_sets())
def test_classes_match_networkx(data):
    elems, edges = data
    p = PreorderedSet(elems, edges)
    g = nx.DiGraph()
    g.add_nodes_from(elems)
    g.add_edges_from(edges)
    assert sorted(sorted(c) for c in p.equivalence_classes()) == sorted(
        sorted(c) for c in nx.strongly_connected_components(g)
    )


@settings(max_examples=200, deadline=None)
@given(edge_sets())
def test_axioms_and_class_structure(data):
    elems, edges = data
    p = PreorderedSet(elems, edges)
    for a in elems:
        assert p.leq(a, a)
    for a, b, c in itertools.product(elems, repeat=3):
        if p.leq(a, b) and p.leq(b, c):
            assert p.leq(a, c)
    classes = p.equivalence_classes()
    for cls in classes:
        for a, b in itertools.product(cls, repeat=2):
            assert p.leq(a, b)
    for c1, c2 in itertools.combinations(classes, 2):
        rel = {(p.leq(a, b), p.leq(b, a)) for a in c1 for b in c2}
        assert len(rel) == 1 and rel != {(True, True)}


@settings(max_examples=200, deadline=None)
@given(edge_sets(), st.data())
def test_add_relation_refines_when_legal(data, draw):
    elems, edges = data
    p = PreorderedSet(elems, edges)
    a = draw.draw(st.sampled_from(elems))
    b = draw.draw(st.sampled_from(elems))
    q = p.add_relation(a, b)
    assert q.leq(a, b)
    assert p.edges == PreorderedSet(elems, edges).edges  # original untouched
    # legal means the new edge does not reverse a strict pair
    assert refines(p, q) == (not p.lt(b, a))


def test_add_relation_examples():
    p = PreorderedSet("ab", []).add_relation("a", "b")
    assert p.lt("a", "b")
    q = p.add_relation("b", "a")
    assert q.equiv("a", "b")
    ex3 = PreorderedSet(
        ["alpha", "beta", "kappa", "lambda"],
        [("alpha", "kappa"), ("alpha", "lambda"), ("kappa", "beta"), ("lambda", "beta")],
    )
    total = ex3.add_relation("kappa", "lambda")
    assert total.is_total()
    assert total.lt("alpha", "kappa") and total.lt("kappa", "lambda") and total.lt("lambda", "beta")


def test_add_element():
    p = PreorderedSet("ab", [("a", "b")]).add_element("z", above=["a", "b"])
    assert p.lt("z", "a") and p.lt("z", "b")


def test_embeddings():
    p = FIG
    assert is_embedding(OrderMap(p, p, {e: e for e in p.elements}))
    ab = PreorderedSet("ab", [("a", "b")])
    single = PreorderedSet("c", [])
    assert not is_embedding(OrderMap(ab, single, {"a": "c", "b": "c"}))
    src = PreorderedSet(["alpha", "kappa", "lambda"], [("alpha", "kappa"), ("alpha", "lambda")])
    dst = PreorderedSet(["alpha", "kappa", "lambda"], [("alpha", "kappa"), ("kappa", "lambda")])
    m = OrderMap(src, dst, {e: e for e in src.elements})
    # exhaustive check over the nine ordered pairs
    expected = all(
        (not src.leq(a, b) or dst.leq(a, b)) and (not src.lt(a, b) or dst.lt(a, b))
        for a in src.elements
        for b in src.elements
    )
    assert expected and is_embedding(m)


def test_order_map_must_be_total():
    with pytest.raises(RulebookError):
        OrderMap(PreorderedSet("ab", []), PreorderedSet("ab", []), {"a": "a"})
    with pytest.raises(RulebookError):
        OrderMap(PreorderedSet("a", []), PreorderedSet("b", []), {"a": "x"})


def test_refines_examples():
    assert refines(FIG, FIG)
    assert refines(PreorderedSet("ab", []), PreorderedSet("ab", [("a", "b")]))
    assert not refines(PreorderedSet("ab", [("a", "b")]), PreorderedSet("ab", [("b", "a")]))
    with pytest.raises(RulebookError):
        refines(PreorderedSet("ab", []), PreorderedSet("abc", []))


def test_hasse_edges_of_chain():
    p = PreorderedSet("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    assert sorted(p.hasse_edges()) == [("a", "b"), ("b", "c")]


def test_incomparable_pairs():
    pairs = FIG.incomparable_pairs()
    assert ("r1", "r2") in pairs or ("r2", "r1") in pairs
