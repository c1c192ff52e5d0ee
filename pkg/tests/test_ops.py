import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulebooks.core import Rulebook, Verdict, compare, profile
from rulebooks.errors import OperationError, TransportError, UnknownIdError
from rulebooks.fuzz import random_rulebook
from rulebooks.ops import (
    Custom,
    LinearPositive,
    Max,
    aggregate,
    augment,
    certify_strict_refinement,
    forbidden_op_demos,
    insert_rule,
    priority_refine,
    table_rule,
    transport_map,
    validate_aggregator,
)

TABLES = {
    "alpha": {"a": 1, "b": 2, "c": 3, "d": 4},
    "beta": {"a": 1, "b": 0, "c": 0, "d": 0},
    "kappa": {"a": 1, "b": 1, "c": 0, "d": 0},
    "lambda": {"a": 0, "b": 0, "c": 1, "d": 1},
}
EX3 = Rulebook.build(
    [table_rule(k, v) for k, v in TABLES.items()],
    [("alpha", "kappa"), ("alpha", "lambda"), ("kappa", "beta"), ("lambda", "beta")],
)


def verdicts(rb, xs):
    ps = {x: profile(rb, x) for x in xs}
    return {(x, y): compare(rb, ps[x], ps[y]) for x, y in itertools.permutations(xs, 2)}


def test_refine_example3_to_chain():
    rb = priority_refine(EX3, "kappa", "lambda")
    assert rb.is_chain()
    v = verdicts(rb, "abcd")
    assert v[("b", "c")] is v[("c", "d")] is v[("d", "a")] is Verdict.LESS_THAN


def test_refine_implied_relation_is_noop():
    rb = Rulebook.build([table_rule(i, {}) for i in "abc"], [("a", "b"), ("b", "c")])
    assert priority_refine(rb, "a", "c").order == rb.order


def test_refine_errors():
    with pytest.raises(UnknownIdError):
        priority_refine(EX3, "alpha", "zeta")
    with pytest.raises(OperationError, match="refine"):
        priority_refine(EX3, "beta", "alpha")


def test_aggregate_linear_value():
    zeta = table_rule("zeta", {"p": 20.0, "q": 30.0})
    tau = table_rule("tau", {"p": 0.9, "q": 0.4})
    rb = Rulebook.build([zeta, tau], groups=[["zeta", "tau"]])
    out = aggregate(rb, ["zeta", "tau"], "r_zt", LinearPositive((1.0, 100.0)))
    assert out.ids == ("r_zt",)
    assert out.rules["r_zt"]("p") == pytest.approx(20.0 + 100.0 * 0.9)
    assert out.rules["r_zt"]("q") == pytest.approx(30.0 + 100.0 * 0.4)


def test_aggregate_keeps_position():
    rb = Rulebook.build(
        [table_rule(i, {}) for i in ("lo", "m1", "m2", "hi")],
        [("lo", "m1"), ("m2", "hi")],
        groups=[["m1", "m2"]],
    )
    out = aggregate(rb, ["m1", "m2"], "m", LinearPositive((1, 1)))
    assert out.order.lt("lo", "m") and out.order.lt("m", "hi")


def test_aggregate_singleton_class_is_isomorphic():
    out = aggregate(EX3, ["kappa"], "kappa2", LinearPositive((1.0,)))
    before = verdicts(EX3, "abcd")
    after = verdicts(out, "abcd")
    assert before == after


def test_aggregate_requires_equivalence():
    with pytest.raises(OperationError, match="same equivalence class"):
        aggregate(EX3, ["kappa", "lambda"], "kl", LinearPositive((1, 1)))


def test_aggregate_rejects_max_with_counterexample():
    r1 = table_rule("r1", {"x": 0, "y": 1})
    r2 = table_rule("r2", {"x": 2, "y": 2})
    rb = Rulebook.build([r1, r2], groups=[["r1", "r2"]])
    with pytest.raises(OperationError, match=r"\(0\.0, 2\.0\).*\(1\.0, 2\.0\)"):
        aggregate(rb, ["r1", "r2"], "m", Max(), sample=["x", "y"])
    with pytest.raises(OperationError, match="sample"):
        aggregate(rb, ["r1", "r2"], "m", Max())
    # the same pair stays strictly ordered under a positive linear map
    out = aggregate(rb, ["r1", "r2"], "s", LinearPositive((1, 1)))
    assert out.rules["s"]("x") == 2 and out.rules["s"]("y") == 3
    assert compare(out, profile(out, "x"), profile(out, "y")) is Verdict.LESS_THAN


def test_validate_aggregator_examples():
    check = validate_aggregator(Max(), [(0, 2), (1, 2)])
    assert not check and check.counterexample == ((0.0, 2.0), (1.0, 2.0))
    assert validate_aggregator(LinearPositive((1, 3)), [(0, 2), (1, 2), (5, 0)])
    assert not validate_aggregator(Custom(lambda v: 1.0, monotone=True), [(0, 0), (0, 1)])
    assert not validate_aggregator(Custom(sum, monotone=False), [(0, 0)])
    assert validate_aggregator(Custom(sum, monotone=True), [(0, 0), (0, 1)])


def test_linear_weights_positive():
    with pytest.raises(OperationError):
        LinearPositive((1.0, 0.0))
    with pytest.raises(OperationError):
        LinearPositive((-1.0,))


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.floats(0.01, 100), min_size=1, max_size=4).flatmap(
        lambda w: st.tuples(
            st.just(tuple(w)),
            st.lists(st.tuples(*[st.integers(0, 5).map(float) for _ in w]), min_size=1, max_size=10),
        )
    )
)
def test_linear_always_valid_and_counterexamples_genuine(data):
    weights, sample = data
    assert validate_aggregator(LinearPositive(weights), sample)
    # a deliberately broken aggregator: only the first coordinate counts
    check = validate_aggregator(Custom(lambda v: v[0], monotone=True), sample)
    if not check:
        a, b = check.counterexample
        assert all(x <= y for x, y in zip(a, b)) and a != b and not a[0] < b[0]


def test_augment_single_rule():
    u = table_rule("u", {"x": 0, "y": 1, "z": 0})
    r = table_rule("r", {"x": 1, "y": 0, "z": 0})
    before = Rulebook.build([u])
    after = augment(before, r)
    assert after.order.lt("r", "u")
    cert = certify_strict_refinement(before, after, ["x", "y", "z"])
    assert cert.strict_preserved and not cert.full_preserved
    # x ~ z before, separated by r afterwards
    assert compare(after, profile(after, "z"), profile(after, "x")) is Verdict.LESS_THAN


def test_augment_constant_rule_keeps_order():
    const = table_rule("k", {x: 2 for x in "abcd"})
    assert verdicts(augment(EX3, const), "abcd") == verdicts(EX3, "abcd")


def test_augment_duplicate_id():
    with pytest.raises(OperationError):
        augment(EX3, table_rule("beta", {}))


def test_certificate_identity_and_transport():
    cert = certify_strict_refinement(EX3, EX3, "abcd")
    assert cert.strict_preserved and cert.full_preserved and cert.pairs_checked == 12
    other = Rulebook.build([table_rule("q", {x: 0 for x in "abcd"})])
    with pytest.raises(TransportError, match="alpha"):
        certify_strict_refinement(EX3, other, "abcd")


def test_transport_through_nested_aggregation():
    rb = Rulebook.build([table_rule(i, {"x": 1}) for i in "abc"], groups=[["a", "b", "c"]])
    step = aggregate(rb, ["a", "b"], "ab", LinearPositive((1, 1)))
    final = aggregate(step, ["ab", "c"], "abc", LinearPositive((1, 2)))
    assert transport_map(rb, final) == {"a": "abc", "b": "abc", "c": "abc"}


def test_certificate_reports_counterexample():
    top = insert_rule(EX3, table_rule("t", {"a": 0, "b": 1, "c": 1, "d": 1}), below=EX3.ids)
    cert = certify_strict_refinement(EX3, top, "abcd")
    assert not cert.strict_preserved
    x, y = cert.counterexample
    assert compare(EX3, profile(EX3, x), profile(EX3, y)) is Verdict.LESS_THAN
    assert compare(top, profile(top, x), profile(top, y)) is not Verdict.LESS_THAN
    assert cert.to_dict()["counterexample"] == [x, y]
    assert "counterexample" in cert.summary()


def test_forbidden_demos():
    demos = {d.name: d for d in forbidden_op_demos()}
    assert set(demos) == {"top", "middle", "incomparable"}
    for d in demos.values():
        cert = d.certificate
        assert not cert.strict_preserved
        x, y = cert.counterexample
        # re-validate the pair from scratch
        px, py = profile(d.before, x), profile(d.before, y)
        assert compare(d.before, px, py) is Verdict.LESS_THAN
        assert compare(d.after, profile(d.after, x), profile(d.after, y)) is not Verdict.LESS_THAN
    c = demos["top"].certificate
    assert c.counterexample_verdicts[1] is Verdict.GREATER_THAN
    assert demos["middle"].certificate.counterexample_verdicts[1] is Verdict.GREATER_THAN
    assert demos["incomparable"].certificate.counterexample_verdicts[1] is Verdict.INCOMPARABLE


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_operations_preserve_strict_verdicts(seed):
    rng = random.Random(seed)
    xs = [f"x{i}" for i in range(rng.randint(2, 6))]
    rb = random_rulebook(rng, xs, group_prob=0.5)
    before = verdicts(rb, xs)
    # refine an incomparable pair if any
    pairs = [(a, b) for a, b in itertools.permutations(rb.ids, 2) if not rb.order.comparable(a, b)]
    if pairs:
        ref = priority_refine(rb, *rng.choice(pairs))
        after = verdicts(ref, xs)
        for k, v in before.items():
            if v in (Verdict.LESS_THAN, Verdict.GREATER_THAN, Verdict.EQUIVALENT):
                assert after[k] is v
    classes = [c for c in rb.order.equivalence_classes() if len(c) > 1]
    if classes:
        cls = list(classes[0])
        agg = aggregate(rb, cls, "agg", LinearPositive(tuple(rng.uniform(0.1, 5) for _ in cls)))
        after = verdicts(agg, xs)
        for k, v in before.items():
            if v in (Verdict.LESS_THAN, Verdict.GREATER_THAN):
                assert after[k] is v
    aug = augment(rb, table_rule("new", {x: rng.randint(0, 3) for x in xs}))
    after = verdicts(aug, xs)
    for k, v in before.items():
        if v is Verdict.LESS_THAN:
            assert after[k] is Verdict.LESS_THAN
        if v is Verdict.INCOMPARABLE:
            assert after[k] is Verdict.INCOMPARABLE


def test_insert_at_top_can_break_strict_order():
    # sanity check that the certificate machinery is able to fail
    rng = random.Random(7)
    failures = 0
    for _ in range(200):
        xs = [f"x{i}" for i in range(4)]
        rb = random_rulebook(rng, xs)
        new = table_rule("top", {x: rng.randint(0, 3) for x in xs})
        after = insert_rule(rb, new, below=rb.ids)
        failures += not certify_strict_refinement(rb, after, xs).strict_preserved
    assert failures > 0
