"""Minimum-violation selection over a finite set of candidate realizations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .core import (
    Rulebook,
    Verdict,
    ViolationProfile,
    compare,
    lex_rank,
    minimal_set,
    profile,
    realization_id,
)
from .errors import RulebookError

__all__ = ["CandidateSet", "RankingReport", "rank", "select", "hasse"]


@dataclass(frozen=True)
class CandidateSet:
    realizations: tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "realizations", tuple(self.realizations))
        if not self.realizations:
            raise RulebookError("candidate set is empty")
        ids = [realization_id(x) for x in self.realizations]
        dup = sorted({i for i in ids if ids.count(i) > 1})
        if dup:
            raise RulebookError(f"duplicate candidate ids: {dup}")

    @property
    def ids(self) -> list[str]:
        return [realization_id(x) for x in self.realizations]


@dataclass(frozen=True)
class RankingReport:
    ids: tuple[str, ...]
    rule_ids: tuple[str, ...]
    profiles: Mapping[str, ViolationProfile]
    verdicts: Mapping[tuple[str, str], Verdict]
    minimal: tuple[str, ...]
    total_order: tuple[str, ...] | None
    hasse_edges: tuple[tuple[str, str], ...]

    @property
    def selected(self) -> str:
        return self.minimal[0]

    def verdict(self, x: str, y: str) -> Verdict:
        return self.verdicts[(x, y)]

    def to_dict(self) -> dict:
        return {
            "candidates": list(self.ids),
            "rules": list(self.rule_ids),
            "profiles": {i: {r: self.profiles[i][r] for r in self.rule_ids} for i in self.ids},
            "verdicts": {f"{x},{y}": v.name for (x, y), v in sorted(self.verdicts.items())},
            "minimal": list(self.minimal),
            "total_order": list(self.total_order) if self.total_order else None,
            "hasse": [list(e) for e in self.hasse_edges],
            "selected": self.selected,
        }


def rank(rb: Rulebook, cs: CandidateSet | Sequence[Any], all_equivalent: bool = False) -> RankingReport:
    """Profile every candidate once and compare all pairs."""
    if not isinstance(cs, CandidateSet):
        cs = CandidateSet(tuple(cs))
    # candidate order must not influence the report
    ids = tuple(sorted(cs.ids))
    by_id = dict(zip(cs.ids, cs.realizations))
    profiles = {i: profile(rb, by_id[i]) for i in ids}
    verdicts = {}
    for i, x in enumerate(ids):
        verdicts[(x, x)] = Verdict.EQUIVALENT
        for y in ids[i + 1 :]:
            v = compare(rb, profiles[x], profiles[y])
            verdicts[(x, y)] = v
            verdicts[(y, x)] = v.flipped()
    plist = [profiles[i] for i in ids]
    minimal = tuple(minimal_set(rb, plist, all_equivalent=all_equivalent))
    total = tuple(lex_rank(rb, plist)) if rb.is_chain() else None
    report = RankingReport(ids, rb.ids, profiles, verdicts, minimal, total, ())
    return RankingReport(ids, rb.ids, profiles, verdicts, minimal, total, tuple(hasse(report)))


def select(rb: Rulebook, cs: CandidateSet | Sequence[Any]) -> str:
    """Smallest id among the minimal candidates."""
    return rank(rb, cs).selected


def hasse(report: RankingReport) -> list[tuple[str, str]]:
    """Covering pairs ``(x, y)`` with ``x < y`` between equivalence-class representatives.

    The representative of a class is its smallest id.
    """
    reps: list[str] = []
    for x in report.ids:
        if not any(report.verdicts[(r, x)] is Verdict.EQUIVALENT for r in reps):
            reps.append(x)

    def lt(a, b):
        return report.verdicts[(a, b)] is Verdict.LESS_THAN

    return [
        (a, b)
        for a in reps
        for b in reps
        if lt(a, b) and not any(lt(a, c) and lt(c, b) for c in reps)
    ]
