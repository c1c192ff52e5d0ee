"""Finite pre-ordered sets over string ids.

Edges follow the convention ``a -> b`` meaning ``a <= b``: the target of an
edge is the *higher* element.  In a rulebook this reads "b has higher
priority than a".  Everything here is immutable; operations that change the
relation return a new :class:`PreorderedSet`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import RulebookError, UnknownIdError

__all__ = ["PreorderedSet", "OrderMap", "is_embedding", "refines"]


def _closure(n: int, succ: Sequence[Iterable[int]]) -> list[int]:
    # reach[i] is a bitmask of every j with i <= j (reflexive-transitive)
    reach = [1 << i for i in range(n)]
    for i in range(n):
        for j in succ[i]:
            reach[i] |= 1 << j
    for k in range(n):
        bit = 1 << k
        rk = reach[k]
        for i in range(n):
            if reach[i] & bit:
                reach[i] |= rk
    return reach


class PreorderedSet:
    """A finite preorder stored as its generating edges plus a cached closure."""

    __slots__ = ("_elements", "_index", "_edges", "_reach")

    def __init__(self, elements: Iterable[str], edges: Iterable[tuple[str, str]] = ()):
        elements = tuple(elements)
        index: dict[str, int] = {}
        for e in elements:
            if not isinstance(e, str):
                raise RulebookError(f"element ids must be strings, got {e!r}")
            if e in index:
                raise RulebookError(f"duplicate element id {e!r}")
            index[e] = len(index)
        uniq: dict[tuple[str, str], None] = {}
        for a, b in edges:
            for v in (a, b):
                if v not in index:
                    raise UnknownIdError(v)
            uniq[(a, b)] = None
        succ: list[list[int]] = [[] for _ in elements]
        for a, b in uniq:
            succ[index[a]].append(index[b])
        self._elements = elements
        self._index = index
        self._edges = tuple(uniq)
        self._reach = tuple(_closure(len(elements), succ))

    @property
    def elements(self) -> tuple[str, ...]:
        return self._elements

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        """The user-given generating edges (not the closure)."""
        return self._edges

    def __len__(self) -> int:
        return len(self._elements)

    def __contains__(self, e) -> bool:
        return e in self._index

    def __iter__(self):
        return iter(self._elements)

    def __eq__(self, other) -> bool:
        # Two preorders are equal when they relate the same elements the same
        # way; the generating edge lists may differ.
        if not isinstance(other, PreorderedSet):
            return NotImplemented
        if set(self._elements) != set(other._elements):
            return False
        return all(
            self.leq(a, b) == other.leq(a, b) for a in self._elements for b in self._elements
        )

    def __hash__(self):
        return hash(frozenset(self._elements))

    def __repr__(self) -> str:
        return f"PreorderedSet({list(self._elements)!r}, {list(self._edges)!r})"

    def _idx(self, e: str) -> int:
        try:
            return self._index[e]
        except KeyError:
            raise UnknownIdError(e) from None

    def leq(self, a: str, b: str) -> bool:
        return bool(self._reach[self._idx(a)] >> self._idx(b) & 1)

    def lt(self, a: str, b: str) -> bool:
        return self.leq(a, b) and not self.leq(b, a)

    def equiv(self, a: str, b: str) -> bool:
        return self.leq(a, b) and self.leq(b, a)

    def comparable(self, a: str, b: str) -> bool:
        return self.leq(a, b) or self.leq(b, a)

    def up_set(self, a: str) -> tuple[str, ...]:
        """All b with a <= b (including a itself)."""
        mask = self._reach[self._idx(a)]
        return tuple(e for i, e in enumerate(self._elements) if mask >> i & 1)

    def strictly_above(self, a: str) -> tuple[str, ...]:
        return tuple(b for b in self.up_set(a) if not self.leq(b, a))

    def equivalence_classes(self) -> list[tuple[str, ...]]:
        """Blocks of mutually-related elements, in first-occurrence order."""
        seen: set[str] = set()
        blocks = []
        for a in self._elements:
            if a in seen:
                continue
            block = tuple(b for b in self.up_set(a) if self.leq(b, a))
            seen.update(block)
            blocks.append(block)
        return blocks

    def is_total(self) -> bool:
        els = self._elements
        return all(self.comparable(a, b) for i, a in enumerate(els) for b in els[i + 1 :])

    def is_chain(self) -> bool:
        """Total and antisymmetric (every class is a singleton)."""
        return self.is_total() and all(len(c) == 1 for c in self.equivalence_classes())

    def incomparable_pairs(self) -> list[tuple[str, str]]:
        els = self._elements
        return [
            (a, b)
            for i, a in enumerate(els)
            for b in els[i + 1 :]
            if not self.comparable(a, b)
        ]

    def add_relation(self, a: str, b: str) -> "PreorderedSet":
        """Return a copy with ``a <= b`` added."""
        self._idx(a)
        self._idx(b)
        return PreorderedSet(self._elements, self._edges + ((a, b),))

    def add_element(self, e: str, below: Iterable[str] = (), above: Iterable[str] = ()) -> "PreorderedSet":
        """Return a copy with ``e`` added, ``e <= x`` for x in ``above`` and ``y <= e`` for y in ``below``."""
        new_edges = [(e, x) for x in above] + [(y, e) for y in below]
        return PreorderedSet(self._elements + (e,), self._edges + tuple(new_edges))

    def hasse_edges(self) -> list[tuple[str, str]]:
        """Covering relation between equivalence classes, one representative each.

        The representative of a class is its first element in ``elements``
        order.
        """
        reps = [c[0] for c in self.equivalence_classes()]
        edges = []
        for a in reps:
            for b in reps:
                if a == b or not self.lt(a, b):
                    continue
                if not any(self.lt(a, c) and self.lt(c, b) for c in reps):
                    edges.append((a, b))
        return edges


@dataclass(frozen=True)
class OrderMap:
    """A total map between the elements of two preorders."""

    source: PreorderedSet
    target: PreorderedSet
    mapping: Mapping[str, str]

    def __post_init__(self):
        for e in self.source.elements:
            if e not in self.mapping:
                raise RulebookError(f"order map is not total: no image for {e!r}")
            if self.mapping[e] not in self.target:
                raise UnknownIdError(self.mapping[e], "map target")

    def __call__(self, e: str) -> str:
        return self.mapping[e]

    def is_embedding(self) -> bool:
        return is_embedding(self)

    def is_surjective(self) -> bool:
        return set(self.mapping[e] for e in self.source.elements) == set(self.target.elements)


def is_embedding(m: OrderMap) -> bool:
    """``a <= b`` implies ``f(a) <= f(b)`` and ``a < b`` implies ``f(a) < f(b)``."""
    src, dst, f = m.source, m.target, m.mapping
    for a in src.elements:
        for b in src.elements:
            if src.leq(a, b):
                if not dst.leq(f[a], f[b]):
                    return False
                if not src.leq(b, a) and not dst.lt(f[a], f[b]):
                    return False
    return True


def refines(coarse: PreorderedSet, fine: PreorderedSet) -> bool:
    """True iff the identity map is an embedding from ``coarse`` into ``fine``."""
    if set(coarse.elements) != set(fine.elements):
        raise RulebookError(
            "refines() needs identical element sets; "
            f"differing ids: {sorted(set(coarse.elements) ^ set(fine.elements))}"
        )
    return is_embedding(OrderMap(coarse, fine, {e: e for e in coarse.elements}))
