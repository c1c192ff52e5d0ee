"""JSON scenario files (``"format": "rbk-scenario/1"``).

A scenario bundles a world, the ego footprint, driving parameters and the
candidate ego trajectories to rank.  Trajectory samples are
``[t, x, y, heading, speed]`` rows; polylines are ``[x, y]`` rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import jsonschema

from .driving import Agent, DrivingParams, Lane, OrientedBox, Realization, Trajectory, World
from .errors import GeometryError, RulebookError

__all__ = ["FORMAT_TAG", "SCHEMA", "ScenarioDoc", "ScenarioError", "parse_scenario", "load_scenario", "scenario_to_json"]

FORMAT_TAG = "rbk-scenario/1"

_point = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_polyline = {"type": "array", "items": _point, "minItems": 2}
_samples = {
    "type": "array",
    "items": {"type": "array", "items": {"type": "number"}, "minItems": 5, "maxItems": 5},
    "minItems": 1,
}
_kind = {"enum": ["vehicle", "human"]}
_boundary = {"enum": ["dashed", "solid", "double_solid"]}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["format", "world", "ego", "candidates"],
    "additionalProperties": False,
    "properties": {
        "format": {"const": FORMAT_TAG},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                k: {"type": "number"}
                for k in ("c0", "d_lc", "a_max", "speed_limit", "c_tau", "collision_step", "ego_mass")
            },
        },
        "world": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lanes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "centerline", "left", "right"],
                        "additionalProperties": False,
                        "properties": {
                            "id": {"type": "string"},
                            "centerline": _polyline,
                            "left": _polyline,
                            "right": _polyline,
                            "left_kind": _boundary,
                            "right_kind": _boundary,
                        },
                    },
                },
                "intersections": {"type": "array", "items": {"type": "array", "items": _point, "minItems": 3}},
                "obstacles": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "center", "length", "width"],
                        "additionalProperties": False,
                        "properties": {
                            "id": {"type": "string"},
                            "center": _point,
                            "heading": {"type": "number"},
                            "length": {"type": "number"},
                            "width": {"type": "number"},
                            "class": _kind,
                        },
                    },
                },
                "agents": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "length", "width", "trajectory"],
                        "additionalProperties": False,
                        "properties": {
                            "id": {"type": "string"},
                            "length": {"type": "number"},
                            "width": {"type": "number"},
                            "class": _kind,
                            "trajectory": _samples,
                        },
                    },
                },
            },
        },
        "ego": {
            "type": "object",
            "required": ["length", "width"],
            "additionalProperties": False,
            "properties": {"length": {"type": "number"}, "width": {"type": "number"}},
        },
        "candidates": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "samples"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "description": {"type": "string"},
                    "samples": _samples,
                },
            },
        },
    },
}


class ScenarioError(RulebookError):
    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"at {pointer}: {message}" if pointer else message)


@dataclass(frozen=True)
class ScenarioDoc:
    name: str
    world: World
    ego_length: float
    ego_width: float
    params: DrivingParams
    candidates: tuple[Trajectory, ...]
    description: str = ""

    def realizations(self) -> list[Realization]:
        return [Realization(t, self.ego_length, self.ego_width, self.world) for t in self.candidates]

    def realization(self, cid: str) -> Realization:
        for r in self.realizations():
            if r.id == cid:
                return r
        raise KeyError(cid)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def _schema_error(err: jsonschema.ValidationError) -> ScenarioError:
    path = list(err.absolute_path)
    if err.validator == "required":
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            return ScenarioError(f"missing required property {missing[0]!r}", _pointer(path + [missing[0]]))
    return ScenarioError(err.message, _pointer(path))


def parse_scenario(text: str) -> ScenarioDoc:
    """Parse and validate scenario JSON."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (line {exc.lineno}, col {exc.colno})", "") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        raise _schema_error(errors[0])

    try:
        params = DrivingParams(**data.get("params", {}))
    except RulebookError as exc:
        raise ScenarioError(str(exc), "/params") from None

    w = data["world"]
    lanes = tuple(
        Lane(
            l["id"],
            tuple(map(tuple, l["centerline"])),
            tuple(map(tuple, l["left"])),
            tuple(map(tuple, l["right"])),
            l.get("left_kind", "dashed"),
            l.get("right_kind", "solid"),
        )
        for l in w.get("lanes", [])
    )
    obstacles = tuple(
        OrientedBox(
            o["id"], o["center"][0], o["center"][1], o.get("heading", 0.0), o["length"], o["width"], o.get("class", "vehicle")
        )
        for o in w.get("obstacles", [])
    )
    agents = tuple(
        Agent(a["id"], a["length"], a["width"], Trajectory(a["id"], tuple(map(tuple, a["trajectory"]))), a.get("class", "vehicle"))
        for a in w.get("agents", [])
    )
    intersections = tuple(tuple(map(tuple, p)) for p in w.get("intersections", []))
    world = World(lanes, intersections, obstacles, agents)

    checks = [(f"/world/lanes/{i}", lane.validate) for i, lane in enumerate(lanes)]
    checks += [(f"/world/obstacles/{i}", o.validate) for i, o in enumerate(obstacles)]
    checks += [(f"/world/agents/{i}", a.validate) for i, a in enumerate(agents)]
    checks.append(("/world/intersections", World((), intersections).validate))
    for ptr, check in checks:
        try:
            check()
        except GeometryError as exc:
            raise ScenarioError(str(exc), ptr) from None

    ego = data["ego"]
    if not (ego["length"] > 0 and ego["width"] > 0):
        raise ScenarioError("ego footprint needs positive extents", "/ego")
    ids = [c["id"] for c in data["candidates"]]
    seen = set()
    for i, cid in enumerate(ids):
        if cid in seen:
            raise ScenarioError(f"duplicate candidate id {cid!r}", f"/candidates/{i}/id")
        seen.add(cid)
    cands = []
    for i, c in enumerate(data["candidates"]):
        traj = Trajectory(c["id"], tuple(map(tuple, c["samples"])))
        try:
            traj.validate()
        except GeometryError as exc:
            raise ScenarioError(str(exc), f"/candidates/{i}/samples") from None
        cands.append(traj)
    return ScenarioDoc(
        data.get("name", ""), world, float(ego["length"]), float(ego["width"]), params, tuple(cands), data.get("description", "")
    )


def load_scenario(path) -> ScenarioDoc:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _r(v: float) -> float:
    return round(float(v), 6)


def scenario_to_json(doc: ScenarioDoc) -> str:
    """Serialize back to ``rbk-scenario/1`` JSON (coordinates rounded to 1 µm)."""
    p = doc.params
    data = {
        "format": FORMAT_TAG,
        "name": doc.name,
        "description": doc.description,
        "params": {
            "c0": p.c0,
            "d_lc": p.d_lc,
            "a_max": p.a_max,
            "speed_limit": p.speed_limit,
            "c_tau": p.c_tau,
            "collision_step": p.collision_step,
            "ego_mass": p.ego_mass,
        },
        "world": {
            "lanes": [
                {
                    "id": l.id,
                    "centerline": [[_r(x), _r(y)] for x, y in l.centerline],
                    "left": [[_r(x), _r(y)] for x, y in l.left],
                    "right": [[_r(x), _r(y)] for x, y in l.right],
                    "left_kind": l.left_kind,
                    "right_kind": l.right_kind,
                }
                for l in doc.world.lanes
            ],
            "intersections": [[[_r(x), _r(y)] for x, y in poly] for poly in doc.world.intersections],
            "obstacles": [
                {
                    "id": o.id,
                    "center": [_r(o.x), _r(o.y)],
                    "heading": _r(o.heading),
                    "length": o.length,
                    "width": o.width,
                    "class": o.kind,
                }
                for o in doc.world.obstacles
            ],
            "agents": [
                {
                    "id": a.id,
                    "length": a.length,
                    "width": a.width,
                    "class": a.kind,
                    "trajectory": [[_r(v) for v in s] for s in a.trajectory.samples],
                }
                for a in doc.world.agents
            ],
        },
        "ego": {"length": doc.ego_length, "width": doc.ego_width},
        "candidates": [{"id": t.id, "samples": [[_r(v) for v in s] for s in t.samples]} for t in doc.candidates],
    }
    return json.dumps(data, indent=1) + "\n"
