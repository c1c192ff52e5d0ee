"""Command-line driver.

Exit codes::

    0  success (compare: strict order preserved; fuzz: all properties hold)
    1  rulebook syntax error
    2  semantic error, invalid scenario, unreadable file, or rule-id mapping failure
    3  a rule could not be evaluated on a candidate
    4  compare found a pair whose strict order is not preserved
    5  fuzz found a property violation

Paths starting with ``@`` name files shipped in the package data directory,
e.g. ``@example3.rbk`` or ``@avoidance.json``.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .core import Rulebook
from .dsl import RbkSemanticError, RbkSyntaxError, build_rulebook, parse_rulebook
from .errors import EvaluationError, RulebookError, TransportError
from .fuzz import SUITES
from .ops import certify_strict_refinement
from .planner import RankingReport, rank
from .render import profiles_csv, scenario_svg
from .scenario import ScenarioDoc, ScenarioError, parse_scenario

EXIT_OK = 0
EXIT_SYNTAX = 1
EXIT_SEMANTIC = 2
EXIT_EVAL = 3
EXIT_NOT_PRESERVED = 4
EXIT_FUZZ = 5

DEMOS = {
    "collision": ("collision.json", (("single", "collision_single.rbk"), ("liability", "collision_liability.rbk"))),
    "overtake": ("overtake.json", (("R1", "overtake_r1.rbk"), ("R2", "overtake_r2.rbk"))),
    "lanechange": ("lanechange.json", (("c_tau=0", "lanechange_ctau0.rbk"), ("c_tau=100", "lanechange_ctau.rbk"))),
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def data_path(name: str) -> Path:
    return Path(str(resources.files("rulebooks") / "data" / name))


def _read(path: str) -> str:
    p = data_path(path[1:]) if path.startswith("@") else Path(path)
    try:
        return p.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_SEMANTIC) from None


def _load_doc(path: str):
    text = _read(path)
    try:
        return parse_rulebook(text)
    except RbkSyntaxError as exc:
        raise CliError(f"{path}:{exc.line}:{exc.col}: syntax error: {exc.message}", EXIT_SYNTAX) from None
    except RbkSemanticError as exc:
        raise CliError(f"{path}:{exc.line}:{exc.col}: error: {exc.message}", EXIT_SEMANTIC) from None


def _load_rulebook(path: str, scenario: ScenarioDoc | None, epsilon: float | None) -> Rulebook:
    doc = _load_doc(path)
    try:
        return build_rulebook(doc, scenario.params if scenario else None, epsilon)
    except RulebookError as exc:
        raise CliError(f"{path}: error: {exc}", EXIT_SEMANTIC) from None


def _load_scenario(path: str) -> ScenarioDoc:
    try:
        return parse_scenario(_read(path))
    except ScenarioError as exc:
        raise CliError(f"{path}: {exc}", EXIT_SEMANTIC) from None


def _rank(rb: Rulebook, scenario: ScenarioDoc, all_equivalent: bool = False) -> RankingReport:
    try:
        return rank(rb, scenario.realizations(), all_equivalent=all_equivalent)
    except EvaluationError as exc:
        raise CliError(f"evaluation error: {exc}", EXIT_EVAL) from None
    except RulebookError as exc:
        raise CliError(f"error: {exc}", EXIT_EVAL) from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    return [fmt(header)] + [fmt(r) for r in rows]


def report_text(report: RankingReport) -> str:
    lines = ["profiles:"]
    lines += [
        "  " + ln
        for ln in _table(
            ["candidate"] + list(report.rule_ids),
            [[c] + [_fmt(report.profiles[c][r]) for r in report.rule_ids] for c in report.ids],
        )
    ]
    lines.append("verdicts (row vs column):")
    lines += [
        "  " + ln
        for ln in _table(
            [""] + list(report.ids),
            [[x] + [report.verdict(x, y).value for y in report.ids] for x in report.ids],
        )
    ]
    lines.append("minimal: " + ", ".join(report.minimal))
    if report.total_order:
        lines.append("total order: " + " < ".join(report.total_order))
    lines.append("hasse: " + (", ".join(f"{a} < {b}" for a, b in report.hasse_edges) or "none"))
    lines.append(f"selected: {report.selected}")
    return "\n".join(lines) + "\n"


# -- subcommands -------------------------------------------------------------


def cmd_check(args) -> int:
    doc = _load_doc(args.rulebook)
    try:
        rb = build_rulebook(doc, epsilon=args.epsilon)
    except RulebookError as exc:
        raise CliError(f"{args.rulebook}: error: {exc}", EXIT_SEMANTIC) from None
    order = rb.order
    ordered_pairs = [(a, b) for a in rb.ids for b in rb.ids if a != b and not order.comparable(a, b)]
    involved = sorted({x for p in ordered_pairs for x in p})
    classes = order.equivalence_classes()
    if args.output == "json-report":
        data = {
            "name": doc.name,
            "rules": len(rb.ids),
            "edges": len(doc.priorities),
            "equivalence_classes": [sorted(c) for c in classes],
            "incomparable_pairs": len(ordered_pairs),
            "order": "total" if order.is_total() else "partial",
        }
        _emit(json.dumps(data, indent=2) + "\n", args.out)
        return EXIT_OK
    lines = [f"rulebook {doc.name}: {len(rb.ids)} rules, {len(doc.priorities)} edges"]
    if ordered_pairs:
        lines.append(f"{len(ordered_pairs)} incomparable pairs among {{{', '.join(involved)}}}")
    else:
        lines.append("0 incomparable pairs")
    lines.append(
        f"equivalence classes ({len(classes)}): " + " ".join("{" + ", ".join(sorted(c)) + "}" for c in classes)
    )
    lines.append(f"order: {'total' if order.is_total() else 'partial'}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    scenario = _load_scenario(args.scenario)
    rb = _load_rulebook(args.rulebook, scenario, args.epsilon)
    report = _rank(rb, scenario, args.all_equivalent)
    if args.output == "csv":
        text = profiles_csv(report)
    elif args.output == "svg":
        text = scenario_svg(scenario, report, title=f"{scenario.name}: selected {report.selected}")
    elif args.output == "json-report":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    else:
        text = report_text(report)
    _emit(text, args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _load_scenario(args.scenario)
    before = _load_rulebook(args.before, scenario, args.epsilon)
    after = _load_rulebook(args.after, scenario, args.epsilon)
    try:
        cert = certify_strict_refinement(before, after, scenario.realizations(), operation=f"{args.before} -> {args.after}")
    except TransportError as exc:
        raise CliError(f"rule mapping failed: {exc}", EXIT_SEMANTIC) from None
    except EvaluationError as exc:
        raise CliError(f"evaluation error: {exc}", EXIT_EVAL) from None
    if args.output == "json-report":
        _emit(json.dumps(cert.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(cert.summary() + "\n", args.out)
    return EXIT_OK if cert.strict_preserved else EXIT_NOT_PRESERVED


def run_demo(name: str):
    """Rank the demo scenario under each of its rulebook variants."""
    scenario_file, variants = DEMOS[name]
    scenario = parse_scenario(data_path(scenario_file).read_text(encoding="utf-8"))
    results = []
    for label, rbk in variants:
        rb = build_rulebook(parse_rulebook(data_path(rbk).read_text(encoding="utf-8")), scenario.params)
        results.append((label, rbk, rank(rb, scenario.realizations())))
    return scenario, results


def cmd_demo(args) -> int:
    scenario, results = run_demo(args.name)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"demo {args.name}: {scenario.description}"]
    header = ["variant", "rulebook", "selected", "ranking"]
    rows = []
    for label, rbk, report in results:
        ranking = " < ".join(report.total_order) if report.total_order else ", ".join(report.minimal) + " minimal"
        rows.append([label, rbk, report.selected, ranking])
    lines += _table(header, rows)
    lines.append("")
    for label, rbk, report in results:
        stem = f"{args.name}_{label.replace('=', '')}"
        (out_dir / f"{stem}.csv").write_text(profiles_csv(report), encoding="utf-8")
        svg = scenario_svg(scenario, report, title=f"{args.name} ({label}): selected {report.selected}")
        (out_dir / f"{stem}.svg").write_text(svg, encoding="utf-8")
        lines.append(f"[{label}]")
        lines.append(report_text(report).rstrip("\n"))
        lines.append(f"wrote {out_dir / (stem + '.csv')} and {out_dir / (stem + '.svg')}")
        lines.append("")
    sys.stdout.write("\n".join(lines))
    return EXIT_OK


def cmd_fuzz(args) -> int:
    names = [args.suite] if args.suite else list(SUITES)
    ok = True
    for name in names:
        fn, default_cases = SUITES[name]
        res = fn(args.cases or default_cases, seed=args.seed)
        print(res.report())
        ok &= res.ok
    return EXIT_OK if ok else EXIT_FUZZ


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rulebooks", description="Rank trajectories with prioritized rule sets.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=float, default=None, help="tolerance for equal violations (overrides the file)")
    common.add_argument("--out", help="write output to this path (demo: a directory)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="parse and validate a rulebook")
    c.add_argument("rulebook")
    c.add_argument("--output", choices=["text", "json-report"], default="text")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("rank", parents=[common], help="rank the candidates of a scenario")
    r.add_argument("rulebook")
    r.add_argument("scenario")
    r.add_argument("--output", choices=["text", "csv", "svg", "json-report"], default="text")
    r.add_argument("--all-equivalent", action="store_true", help="list every member of minimal equivalence classes")
    r.set_defaults(func=cmd_rank)

    m = sub.add_parser("compare", parents=[common], help="certify that a new rulebook keeps the strict order")
    m.add_argument("before")
    m.add_argument("after")
    m.add_argument("scenario")
    m.add_argument("--output", choices=["text", "json-report"], default="text")
    m.set_defaults(func=cmd_compare)

    d = sub.add_parser("demo", help="run a built-in experiment with both rulebook variants")
    d.add_argument("name", choices=sorted(DEMOS))
    d.add_argument("--out", help="directory for CSV and SVG files (default: current directory)")
    d.set_defaults(func=cmd_demo)

    f = sub.add_parser("fuzz", help="run the randomized property suites")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--suite", choices=sorted(SUITES))
    f.add_argument("--cases", type=int, default=None, help="override the number of cases per suite")
    f.set_defaults(func=cmd_fuzz)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
