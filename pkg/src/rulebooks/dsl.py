"""The ``.rbk`` rulebook format.

One statement per line, ``#`` starts a comment::

    rulebook avoidance
    epsilon 1e-9
    rule beta = blockage()
    rule kappa = clearance(c0=1.0, variant=binary)
    group {zeta, tau}
    aggregate r_zt = linear(zeta: 1, tau: 0.5)
    alpha < kappa

``a < b`` declares that ``b`` has *higher* priority than ``a`` (the edge
points from the less important rule to the more important one).  Rule kinds
are the builtins of :mod:`rulebooks.driving` plus ``table``, whose
parameters map realization ids to violation values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Any

from .core import Rulebook
from .driving import BUILTIN_KINDS, DrivingParams, builtin_rule
from .errors import RulebookError
from .ops import LinearPositive, aggregate
from .preorder import PreorderedSet

__all__ = [
    "RuleDecl",
    "AggregateDecl",
    "RulebookDoc",
    "RbkError",
    "RbkSyntaxError",
    "RbkSemanticError",
    "parse_rulebook",
    "serialize_rulebook",
    "build_rulebook",
    "load_rulebook",
    "rulebook_to_doc",
]

KEYWORDS = frozenset({"rulebook", "rule", "group", "aggregate", "linear", "epsilon"})

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\f\v]+)
  | (?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[^\W\d]\w*)
  | (?P<punct>[(){},:<=])
    """,
    re.VERBOSE,
)


class RbkError(RulebookError):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"line {line}, col {col}: {message}")


class RbkSyntaxError(RbkError):
    def __init__(self, line: int, col: int, expected: list[str], found: str):
        self.expected = expected
        self.found = found
        super().__init__(f"expected {' or '.join(expected)}, found {found}", line, col)


class RbkSemanticError(RbkError):
    pass


@dataclass(frozen=True)
class RuleDecl:
    id: str
    kind: str
    params: tuple[tuple[str, Any], ...] = ()


@dataclass(frozen=True)
class AggregateDecl:
    id: str
    weights: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class RulebookDoc:
    name: str
    epsilon: float | None = None
    rules: tuple[RuleDecl, ...] = ()
    groups: tuple[tuple[str, ...], ...] = ()
    priorities: tuple[tuple[str, str], ...] = ()
    aggregates: tuple[AggregateDecl, ...] = ()

    def canonical(self) -> "RulebookDoc":
        return replace(
            self,
            rules=tuple(
                sorted((replace(r, params=tuple(sorted(r.params))) for r in self.rules), key=lambda r: r.id)
            ),
            groups=tuple(sorted(tuple(sorted(g)) for g in self.groups)),
            priorities=tuple(sorted(set(self.priorities))),
            aggregates=tuple(
                sorted((replace(a, weights=tuple(sorted(a.weights))) for a in self.aggregates), key=lambda a: a.id)
            ),
        )

    def with_priority(self, lower: str, higher: str) -> "RulebookDoc":
        return replace(self, priorities=self.priorities + ((lower, higher),))


# -- lexing ------------------------------------------------------------------


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident, number, punct, eol
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "eol":
            return "end of line"
        return repr(self.text)


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        if line[pos] == "#":
            break
        m = _TOKEN.match(line, pos)
        if m is None:
            raise RbkSyntaxError(lineno, pos + 1, ["a token"], repr(line[pos]))
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), lineno, pos + 1))
        pos = m.end()
    toks.append(_Tok("eol", "", lineno, pos + 1))
    return toks


class _Line:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eol":
            self.i += 1
        return t

    def fail(self, *expected: str):
        t = self.peek()
        raise RbkSyntaxError(t.line, t.col, list(expected), t.describe())

    def punct(self, ch: str) -> _Tok:
        t = self.peek()
        if t.kind == "punct" and t.text == ch:
            return self.next()
        self.fail(repr(ch))

    def keyword(self, kw: str) -> _Tok:
        t = self.peek()
        if t.kind == "ident" and t.text == kw:
            return self.next()
        self.fail(repr(kw))

    def ident(self, what: str = "identifier") -> _Tok:
        t = self.peek()
        if t.kind == "ident" and t.text not in KEYWORDS:
            return self.next()
        self.fail(what)

    def number(self) -> _Tok:
        t = self.peek()
        if t.kind == "number":
            return self.next()
        self.fail("number")

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def end(self):
        if not self.at("eol"):
            self.fail("end of line")


# -- parsing -----------------------------------------------------------------


def _split_lines(text: str) -> list[str]:
    if text.startswith("﻿"):
        text = text[1:]
    return text.splitlines()


def parse_rulebook(text: str) -> RulebookDoc:
    """Parse ``.rbk`` text; raise :class:`RbkSyntaxError` or :class:`RbkSemanticError` on the first problem."""
    name = None
    epsilon = None
    rules: list[RuleDecl] = []
    groups: list[tuple[str, ...]] = []
    priorities: list[tuple[str, str]] = []
    aggregates: list[AggregateDecl] = []
    declared: dict[str, str] = {}  # id -> "rule" | "aggregate"
    where: dict[Any, tuple[int, int]] = {}
    header_line = 1
    last_line = 1

    def need(tok: _Tok, allow_aggregate: bool = True):
        if tok.text not in declared:
            raise RbkSemanticError(f"undeclared id {tok.text!r}", tok.line, tok.col)
        if not allow_aggregate and declared[tok.text] != "rule":
            raise RbkSemanticError(
                f"{tok.text!r} is an aggregate; only plain rules may appear here", tok.line, tok.col
            )

    def declare(tok: _Tok, kind: str):
        if tok.text in declared:
            raise RbkSemanticError(f"duplicate id {tok.text!r}", tok.line, tok.col)
        declared[tok.text] = kind

    for lineno, raw in enumerate(_split_lines(text), start=1):
        toks = _tokenize(raw, lineno)
        if toks[0].kind == "eol":
            continue
        last_line = lineno
        ln = _Line(toks)
        if name is None:
            ln.keyword("rulebook")
            name = ln.ident("rulebook name").text
            ln.end()
            header_line = lineno
            continue
        head = ln.peek()
        if head.kind == "ident" and head.text == "rule":
            ln.next()
            rid = ln.ident("rule id")
            ln.punct("=")
            kind = ln.ident("rule kind")
            ln.punct("(")
            params: list[tuple[str, Any]] = []
            seen_keys: set[str] = set()
            if not ln.at("punct", ")"):
                while True:
                    key = ln.ident("parameter name")
                    ln.punct("=")
                    t = ln.peek()
                    if t.kind == "number":
                        value: Any = float(ln.next().text)
                    elif t.kind == "ident":
                        value = ln.next().text
                    else:
                        ln.fail("number", "identifier")
                    if key.text in seen_keys:
                        raise RbkSemanticError(f"duplicate parameter {key.text!r}", key.line, key.col)
                    seen_keys.add(key.text)
                    params.append((key.text, value))
                    if ln.at("punct", ","):
                        ln.next()
                        continue
                    break
            ln.punct(")")
            ln.end()
            if kind.text not in BUILTIN_KINDS:
                raise RbkSemanticError(
                    f"unknown rule kind {kind.text!r}; expected one of {', '.join(BUILTIN_KINDS)}",
                    kind.line,
                    kind.col,
                )
            try:
                builtin_rule(rid.text, kind.text, dict(params))
            except RulebookError as exc:
                raise RbkSemanticError(str(exc), kind.line, kind.col) from None
            declare(rid, "rule")
            rules.append(RuleDecl(rid.text, kind.text, tuple(params)))
            where[("rule", rid.text)] = (rid.line, rid.col)
        elif head.kind == "ident" and head.text == "group":
            ln.next()
            ln.punct("{")
            members = [ln.ident("rule id")]
            while ln.at("punct", ","):
                ln.next()
                members.append(ln.ident("rule id"))
            ln.punct("}")
            ln.end()
            for m in members:
                need(m, allow_aggregate=False)
            ids = tuple(m.text for m in members)
            if len(set(ids)) != len(ids):
                raise RbkSemanticError("group lists a rule twice", head.line, head.col)
            groups.append(ids)
        elif head.kind == "ident" and head.text == "aggregate":
            ln.next()
            aid = ln.ident("aggregate id")
            ln.punct("=")
            ln.keyword("linear")
            ln.punct("(")
            weights = []
            src_toks = []
            while True:
                src = ln.ident("rule id")
                ln.punct(":")
                w = ln.number()
                weights.append((src.text, float(w.text), w))
                src_toks.append(src)
                if ln.at("punct", ","):
                    ln.next()
                    continue
                break
            ln.punct(")")
            ln.end()
            for src in src_toks:
                need(src, allow_aggregate=False)
            for src_id, w, wt in weights:
                if not w > 0:
                    raise RbkSemanticError(f"linear weight for {src_id!r} must be positive", wt.line, wt.col)
            if len({s for s, _, _ in weights}) != len(weights):
                raise RbkSemanticError("aggregate lists a rule twice", aid.line, aid.col)
            for prev in aggregates:
                shared = {s for s, _ in prev.weights} & {s for s, _, _ in weights}
                if shared:
                    raise RbkSemanticError(
                        f"rules {sorted(shared)} are already aggregated into {prev.id!r}", aid.line, aid.col
                    )
            declare(aid, "aggregate")
            aggregates.append(AggregateDecl(aid.text, tuple((s, w) for s, w, _ in weights)))
            where[("aggregate", aid.text)] = (aid.line, aid.col)
        elif head.kind == "ident" and head.text == "epsilon":
            ln.next()
            num = ln.number()
            ln.end()
            if epsilon is not None:
                raise RbkSemanticError("epsilon declared twice", head.line, head.col)
            epsilon = float(num.text)
            if epsilon < 0:
                raise RbkSemanticError("epsilon must be non-negative", num.line, num.col)
        elif head.kind == "ident" and head.text not in KEYWORDS:
            lo = ln.next()
            ln.punct("<")
            hi = ln.ident("rule id")
            ln.end()
            need(lo)
            need(hi)
            priorities.append((lo.text, hi.text))
            where[("priority", lo.text, hi.text)] = (lo.line, lo.col)
        else:
            ln.fail("'rule'", "'group'", "'aggregate'", "'epsilon'", "priority 'a < b'")

    if name is None:
        raise RbkSyntaxError(last_line, 1, ["'rulebook'"], "end of input")
    if not rules:
        raise RbkSemanticError("rulebook must contain at least one rule", header_line, 1)

    doc = RulebookDoc(name, epsilon, tuple(rules), tuple(groups), tuple(priorities), tuple(aggregates))
    _check_order(doc, where)
    return doc


def _check_order(doc: RulebookDoc, where) -> None:
    rule_ids = [r.id for r in doc.rules]
    rule_set = set(rule_ids)
    group_edges = [(a, b) for g in doc.groups for a, b in zip(g, g[1:] + g[:1]) if a != b]
    grouped = PreorderedSet(rule_ids, group_edges)
    base_prio = [(a, b) for a, b in doc.priorities if a in rule_set and b in rule_set]
    full = PreorderedSet(rule_ids, group_edges + base_prio)
    # report the edge that closes the first cycle, in source order
    for i, (a, b) in enumerate(base_prio):
        if not full.equiv(a, b) or grouped.equiv(a, b):
            continue
        prefix = PreorderedSet(rule_ids, group_edges + base_prio[: i + 1])
        if not any(prefix.equiv(x, y) and not grouped.equiv(x, y) for x, y in base_prio[: i + 1]):
            continue
        line, col = where[("priority", a, b)]
        raise RbkSemanticError(
            f"priorities form a cycle through {a!r} and {b!r}; declare equally ranked rules with a group",
            line,
            col,
        )
    for agg in doc.aggregates:
        srcs = [s for s, _ in agg.weights]
        for s in srcs[1:]:
            if not full.equiv(srcs[0], s):
                line, col = where[("aggregate", agg.id)]
                raise RbkSemanticError(
                    f"aggregate {agg.id!r}: {srcs[0]!r} and {s!r} are not in the same equivalence class "
                    "(group them first)",
                    line,
                    col,
                )
    # the edges touching aggregates must not create cycles either
    owner = {s: a.id for a in doc.aggregates for s, _ in a.weights}
    collapsed = [e for e in rule_ids if e not in owner] + [a.id for a in doc.aggregates]
    rename = lambda e: owner.get(e, e)  # noqa: E731
    edges = []
    for a, b in group_edges + list(doc.priorities):
        a, b = rename(a), rename(b)
        if a != b:
            edges.append((a, b))
    after = PreorderedSet(collapsed, edges)
    after_grouped = PreorderedSet(
        collapsed, [(rename(a), rename(b)) for a, b in group_edges if rename(a) != rename(b)]
    )
    for a, b in doc.priorities:
        ra, rb_ = rename(a), rename(b)
        if ra != rb_ and after.equiv(ra, rb_) and not after_grouped.equiv(ra, rb_):
            line, col = where[("priority", a, b)]
            raise RbkSemanticError(
                f"priorities form a cycle through {a!r} and {b!r}; declare equally ranked rules with a group",
                line,
                col,
            )


# -- serialization -----------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


def serialize_rulebook(doc: RulebookDoc) -> str:
    """Canonical text: rules, groups, aggregates and priorities each sorted."""
    d = doc.canonical()
    out = [f"rulebook {d.name}"]
    if d.epsilon is not None:
        out.append(f"epsilon {_fmt(d.epsilon)}")
    for r in d.rules:
        params = ", ".join(f"{k}={_fmt(v)}" for k, v in r.params)
        out.append(f"rule {r.id} = {r.kind}({params})")
    for g in d.groups:
        out.append("group {" + ", ".join(g) + "}")
    for a in d.aggregates:
        ws = ", ".join(f"{s}: {_fmt(w)}" for s, w in a.weights)
        out.append(f"aggregate {a.id} = linear({ws})")
    for lo, hi in d.priorities:
        out.append(f"{lo} < {hi}")
    return "\n".join(out) + "\n"


# -- building ----------------------------------------------------------------


def build_rulebook(doc: RulebookDoc, dp: DrivingParams | None = None, epsilon: float | None = None) -> Rulebook:
    """Instantiate the rules of ``doc`` and assemble the rulebook.

    ``epsilon`` overrides the file's value; the default is 0.
    """
    dp = dp or DrivingParams()
    eps = epsilon if epsilon is not None else (doc.epsilon if doc.epsilon is not None else 0.0)
    rules = [builtin_rule(r.id, r.kind, dict(r.params), dp) for r in doc.rules]
    rule_set = {r.id for r in doc.rules}
    base = [(a, b) for a, b in doc.priorities if a in rule_set and b in rule_set]
    rb = Rulebook.build(rules, edges=base, groups=doc.groups, epsilon=eps)
    owner = {}
    for agg in doc.aggregates:
        ids = [s for s, _ in agg.weights]
        rb = aggregate(rb, ids, agg.id, LinearPositive(tuple(w for _, w in agg.weights)))
        owner.update({s: agg.id for s in ids})
    # edges between plain rules were re-parented by aggregate(); the rest mention aggregate ids
    late = [(owner.get(a, a), owner.get(b, b)) for a, b in doc.priorities if (a, b) not in base]
    order = rb.order
    for a, b in late:
        if a != b and not order.leq(a, b):
            order = order.add_relation(a, b)
    return Rulebook(rb.rules, order, rb.epsilon)


def load_rulebook(path, dp: DrivingParams | None = None, epsilon: float | None = None) -> Rulebook:
    with open(path, encoding="utf-8") as fh:
        return build_rulebook(parse_rulebook(fh.read()), dp, epsilon)


def _linear_leaves(rule) -> list[tuple[Any, float]]:
    if not rule.sources:
        return [(rule, 1.0)]
    if not isinstance(rule.aggregator, LinearPositive):
        raise RulebookError(f"rule {rule.id!r} uses a non-linear aggregator; it cannot be written as .rbk")
    out = []
    for src, w in zip(rule.sources, rule.aggregator.weights):
        out.extend((leaf, w * lw) for leaf, lw in _linear_leaves(src))
    return out


def rulebook_to_doc(rb: Rulebook, name: str) -> RulebookDoc:
    """Describe a rulebook as a document (builtin and linearly aggregated rules only)."""
    rules: list[RuleDecl] = []
    groups: list[tuple[str, ...]] = []
    aggs: list[AggregateDecl] = []
    for rid in rb.ids:
        rule = rb.rules[rid]
        if rule.sources:
            leaves = _linear_leaves(rule)
            for leaf, _ in leaves:
                if leaf.spec is None:
                    raise RulebookError(f"rule {leaf.id!r} has no builtin description")
                rules.append(RuleDecl(leaf.id, leaf.spec[0], leaf.spec[1]))
            if len(leaves) > 1:
                groups.append(tuple(leaf.id for leaf, _ in leaves))
            aggs.append(AggregateDecl(rid, tuple((leaf.id, w) for leaf, w in leaves)))
        else:
            if rule.spec is None:
                raise RulebookError(f"rule {rid!r} has no builtin description")
            rules.append(RuleDecl(rid, rule.spec[0], rule.spec[1]))
    for cls in rb.order.equivalence_classes():
        if len(cls) > 1:
            if any(rb.rules[c].sources for c in cls):
                raise RulebookError(f"aggregated rule shares a priority class with others: {cls}")
            groups.append(tuple(cls))
    prio = [(a, b) for a, b in rb.order.edges if not rb.order.equiv(a, b)]
    return RulebookDoc(name, rb.epsilon or None, tuple(rules), tuple(groups), tuple(prio), tuple(aggs)).canonical()
