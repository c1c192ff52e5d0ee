"""CSV and SVG output for ranking reports."""

from __future__ import annotations

import csv
import io
import xml.etree.ElementTree as ET

from .geometry import obb_corners
from .planner import RankingReport
from .scenario import ScenarioDoc

__all__ = ["PX_PER_M", "profiles_csv", "scenario_svg"]

PX_PER_M = 20.0
MARGIN_M = 2.0

_STYLE = """
.lane { fill: #eeeeee; stroke: none; }
.boundary { fill: none; stroke: #555555; stroke-width: 2; }
.boundary.dashed { stroke-dasharray: 12 8; }
.boundary.double_solid { stroke-width: 5; stroke: #c8a000; }
.intersection { fill: #dde6f0; stroke: #8899aa; stroke-width: 1; }
.obstacle { fill: #884444; stroke: #441111; stroke-width: 1; }
.agent { fill: #446688; stroke: #112244; stroke-width: 1; }
.candidate { fill: none; stroke: #999999; stroke-width: 3; }
.candidate.selected { stroke: #1a9a1a; stroke-width: 5; }
.label { font-family: sans-serif; font-size: 12px; fill: #222222; }
"""


def _num(v: float) -> str:
    return repr(float(v))


def profiles_csv(report: RankingReport) -> str:
    """One ``candidate,rule,value`` row per candidate and rule, in sorted candidate order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["candidate", "rule", "value"])
    for cid in report.ids:
        for rid in report.rule_ids:
            w.writerow([cid, rid, _num(report.profiles[cid][rid])])
    return buf.getvalue()


def _bounds(doc: ScenarioDoc):
    pts = []
    for lane in doc.world.lanes:
        pts.extend(lane.left)
        pts.extend(lane.right)
    for poly in doc.world.intersections:
        pts.extend(poly)
    for o in doc.world.obstacles:
        pts.extend(o.corners())
    for a in doc.world.agents:
        pts.extend((s[1], s[2]) for s in a.trajectory.samples)
    for t in doc.candidates:
        pts.extend((s[1], s[2]) for s in t.samples)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return min(xs) - MARGIN_M, min(ys) - MARGIN_M, max(xs) + MARGIN_M, max(ys) + MARGIN_M


def scenario_svg(doc: ScenarioDoc, report: RankingReport | None = None, title: str = "") -> str:
    """Top-down view of the world with every candidate drawn as one ``<path>``.

    The selected candidate (if a report is given) carries the ``selected`` class.
    """
    x0, y0, x1, y1 = _bounds(doc)
    width = (x1 - x0) * PX_PER_M
    height = (y1 - y0) * PX_PER_M

    def px(p):
        # SVG y grows downwards
        return f"{(p[0] - x0) * PX_PER_M:.2f},{(y1 - p[1]) * PX_PER_M:.2f}"

    def points(poly):
        return " ".join(px(p) for p in poly)

    svg = ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "width": f"{width:.2f}",
            "height": f"{height:.2f}",
            "viewBox": f"0 0 {width:.2f} {height:.2f}",
        },
    )
    ET.SubElement(svg, "style").text = _STYLE
    if title:
        ET.SubElement(svg, "title").text = title

    g = ET.SubElement(svg, "g", {"id": "world"})
    for lane in doc.world.lanes:
        ET.SubElement(g, "polygon", {"class": "lane", "id": f"lane-{lane.id}", "points": points(lane.polygon)})
    for poly in doc.world.intersections:
        ET.SubElement(g, "polygon", {"class": "intersection", "points": points(poly)})
    for lane in doc.world.lanes:
        for line, kind in ((lane.left, lane.left_kind), (lane.right, lane.right_kind)):
            ET.SubElement(g, "polyline", {"class": f"boundary {kind}", "points": points(line)})
    for o in doc.world.obstacles:
        ET.SubElement(g, "polygon", {"class": "obstacle", "id": f"obstacle-{o.id}", "points": points(o.corners())})
    for a in doc.world.agents:
        _, x, y, h, _ = a.trajectory.samples[0]
        corners = obb_corners(x, y, h, a.length, a.width)
        ET.SubElement(g, "polygon", {"class": "agent", "id": f"agent-{a.id}", "points": points(corners)})

    selected = report.selected if report is not None else None
    c = ET.SubElement(svg, "g", {"id": "candidates"})
    # draw the selected path last so it sits on top
    order = sorted(doc.candidates, key=lambda t: (t.id == selected, t.id))
    for t in order:
        d = "M " + " L ".join(px((s[1], s[2])) for s in t.samples)
        cls = "candidate selected" if t.id == selected else "candidate"
        ET.SubElement(c, "path", {"class": cls, "id": f"candidate-{t.id}", "d": d})
        lx, ly = px(t.samples[-1][1:3]).split(",")
        ET.SubElement(c, "text", {"class": "label", "x": lx, "y": ly}).text = t.id
    ET.indent(svg)
    return ET.tostring(svg, encoding="unicode", xml_declaration=False) + "\n"
