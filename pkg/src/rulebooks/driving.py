"""Top-down 2D driving realizations and the rule library evaluated on them.

Units are SI throughout: metres, seconds, radians, m/s.  A lane's centerline
is listed in its nominal direction of travel; "left" and "right" boundaries
are relative to that direction.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from . import geometry as geo
from .core import Rule
from .errors import GeometryError, RulebookError
from .ops import table_rule

BOUNDARY_KINDS = ("dashed", "solid", "double_solid")
AGENT_CLASSES = ("vehicle", "human")

# spacing of geometric (time-free) resampling of the ego path
PATH_SPACING = 0.05


# -- world model -------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Ordered samples ``(t, x, y, heading, speed)``."""

    id: str
    samples: tuple[tuple[float, float, float, float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(tuple(float(v) for v in s) for s in self.samples))

    def validate(self, speed_tolerance: float = 0.10) -> None:
        if not self.samples:
            raise GeometryError(f"trajectory {self.id!r} has no samples")
        for s in self.samples:
            if len(s) != 5 or not all(math.isfinite(v) for v in s):
                raise GeometryError(f"trajectory {self.id!r}: malformed sample {s}")
            if s[4] < 0:
                raise GeometryError(f"trajectory {self.id!r}: negative speed {s[4]} at t={s[0]}")
        for a, b in zip(self.samples, self.samples[1:]):
            dt = b[0] - a[0]
            if dt <= 0:
                raise GeometryError(
                    f"trajectory {self.id!r}: timestamps not strictly increasing at t={b[0]}"
                )
            moved = math.hypot(b[1] - a[1], b[2] - a[2])
            expected = 0.5 * (a[4] + b[4]) * dt
            if abs(moved - expected) > speed_tolerance * max(moved, expected) + 1e-3:
                raise GeometryError(
                    f"trajectory {self.id!r}: moved {moved:.3f} m in {dt:.3f} s between "
                    f"t={a[0]} and t={b[0]} but speeds imply {expected:.3f} m"
                )

    @property
    def times(self) -> list[float]:
        return [s[0] for s in self.samples]

    @property
    def points(self) -> list[geo.Point]:
        return [(s[1], s[2]) for s in self.samples]

    @property
    def start(self):
        return self.samples[0]

    def arc_path(self) -> geo.ArcPath:
        return geo.ArcPath(self.points, [s[3] for s in self.samples])

    def pose_at_time(self, t: float) -> tuple[float, float, float]:
        """Linearly interpolated pose; held constant outside the sampled interval."""
        ss = self.samples
        if t <= ss[0][0]:
            return ss[0][1], ss[0][2], ss[0][3]
        if t >= ss[-1][0]:
            return ss[-1][1], ss[-1][2], ss[-1][3]
        lo, hi = 0, len(ss) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ss[mid][0] <= t:
                lo = mid
            else:
                hi = mid
        a, b = ss[lo], ss[hi]
        f = (t - a[0]) / (b[0] - a[0])
        return a[1] + f * (b[1] - a[1]), a[2] + f * (b[2] - a[2]), a[3] + f * geo.wrap_angle(b[3] - a[3])

    def velocity_at_time(self, t: float) -> tuple[float, float]:
        ss = self.samples
        if len(ss) < 2 or t < ss[0][0] or t > ss[-1][0]:
            return 0.0, 0.0
        for a, b in zip(ss, ss[1:]):
            if a[0] <= t <= b[0]:
                dt = b[0] - a[0]
                return (b[1] - a[1]) / dt, (b[2] - a[2]) / dt
        return 0.0, 0.0


@dataclass(frozen=True)
class OrientedBox:
    id: str
    x: float
    y: float
    heading: float
    length: float
    width: float
    kind: str = "vehicle"

    def validate(self) -> None:
        if not (self.length > 0 and self.width > 0):
            raise GeometryError(f"box {self.id!r} needs positive extents")
        if self.kind not in AGENT_CLASSES:
            raise GeometryError(f"box {self.id!r}: unknown class {self.kind!r}")

    def corners(self) -> list[geo.Point]:
        return geo.obb_corners(self.x, self.y, self.heading, self.length, self.width)


@dataclass(frozen=True)
class Agent:
    """A moving object: box extents plus its own trajectory."""

    id: str
    length: float
    width: float
    trajectory: Trajectory
    kind: str = "vehicle"

    def validate(self) -> None:
        if not (self.length > 0 and self.width > 0):
            raise GeometryError(f"agent {self.id!r} needs positive extents")
        if self.kind not in AGENT_CLASSES:
            raise GeometryError(f"agent {self.id!r}: unknown class {self.kind!r}")
        self.trajectory.validate()

    def corners_at(self, t: float) -> list[geo.Point]:
        x, y, h = self.trajectory.pose_at_time(t)
        return geo.obb_corners(x, y, h, self.length, self.width)


@dataclass(frozen=True)
class Lane:
    id: str
    centerline: tuple[geo.Point, ...]
    left: tuple[geo.Point, ...]
    right: tuple[geo.Point, ...]
    left_kind: str = "dashed"
    right_kind: str = "solid"

    def __post_init__(self):
        for name in ("centerline", "left", "right"):
            object.__setattr__(self, name, tuple(tuple(map(float, p)) for p in getattr(self, name)))

    def validate(self) -> None:
        for name in ("centerline", "left", "right"):
            line = getattr(self, name)
            if len(line) < 2:
                raise GeometryError(f"lane {self.id!r}: {name} needs at least two points")
            if geo.polyline_self_intersects(line):
                raise GeometryError(f"lane {self.id!r}: {name} polyline self-intersects")
        for kind in (self.left_kind, self.right_kind):
            if kind not in BOUNDARY_KINDS:
                raise GeometryError(f"lane {self.id!r}: unknown boundary kind {kind!r}")

    @functools.cached_property
    def polygon(self) -> list[geo.Point]:
        return list(self.left) + list(reversed(self.right))

    def boundaries(self):
        return ((self.left, self.left_kind), (self.right, self.right_kind))

    def contains(self, pt: geo.Point) -> bool:
        return geo.point_in_polygon(pt, self.polygon)

    def contains_box(self, corners) -> bool:
        return all(self.contains(c) for c in corners) and not any(
            geo.polygon_crosses_polyline(corners, b) for b, _ in self.boundaries()
        )

    def heading_at(self, pt: geo.Point) -> float:
        return geo.project_onto_polyline(pt, self.centerline)[1]


@dataclass(frozen=True)
class World:
    lanes: tuple[Lane, ...] = ()
    intersections: tuple[tuple[geo.Point, ...], ...] = ()
    obstacles: tuple[OrientedBox, ...] = ()
    agents: tuple[Agent, ...] = ()

    def validate(self) -> None:
        for lane in self.lanes:
            lane.validate()
        for poly in self.intersections:
            if len(poly) < 3:
                raise GeometryError("intersection polygons need at least three vertices")
            if geo.polyline_self_intersects(list(poly) + [poly[0]]):
                raise GeometryError("intersection polygon self-intersects")
        for ob in self.obstacles:
            ob.validate()
        for ag in self.agents:
            ag.validate()


@dataclass(frozen=True)
class Realization:
    """The ego trajectory and footprint inside a world."""

    ego: Trajectory
    ego_length: float
    ego_width: float
    world: World = field(default_factory=World)

    @property
    def id(self) -> str:
        return self.ego.id

    def validate(self) -> None:
        if not (self.ego_length > 0 and self.ego_width > 0):
            raise GeometryError("ego footprint needs positive extents")
        self.ego.validate()
        self.world.validate()

    def ego_corners(self, x: float, y: float, h: float) -> list[geo.Point]:
        return geo.obb_corners(x, y, h, self.ego_length, self.ego_width)

    def path_poses(self, spacing: float = PATH_SPACING):
        return self.ego.arc_path().resample(spacing)


@dataclass(frozen=True)
class DrivingParams:
    c0: float = 1.0
    d_lc: float = 30.0
    a_max: float = 3.5
    speed_limit: float = 45 / 3.6
    c_tau: float = 1.0
    collision_step: float = 0.01
    ego_mass: float = 1500.0

    def __post_init__(self):
        for name in ("c0", "d_lc", "a_max", "speed_limit", "collision_step", "ego_mass"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise RulebookError(f"driving parameter {name} must be positive, got {v}")
        if not (self.c_tau >= 0 and math.isfinite(self.c_tau)):
            raise RulebookError(f"c_tau must be non-negative, got {self.c_tau}")
        if self.collision_step > 0.1:
            raise RulebookError(f"collision_step must be <= 0.1 s, got {self.collision_step}")


# -- helpers -----------------------------------------------------------------


def active_lane(x: Realization) -> Lane:
    """The lane containing the first ego sample."""
    p = (x.ego.start[1], x.ego.start[2])
    for lane in x.world.lanes:
        if lane.contains(p):
            return lane
    raise GeometryError(f"ego of {x.id!r} does not start on any lane")


def _static_boxes(x: Realization):
    return [(ob, ob.corners()) for ob in x.world.obstacles]


# -- rules -------------------------------------------------------------------


def blockage(x: Realization, p: DrivingParams | None = None) -> float:
    """1 if the ego footprint ever overlaps an obstacle or agent, else 0."""
    p = p or DrivingParams()
    statics = _static_boxes(x)
    if statics:
        for px, py, ph in x.path_poses():
            ego = x.ego_corners(px, py, ph)
            if any(geo.convex_overlap(ego, c) for _, c in statics):
                return 1.0
    if x.world.agents:
        t0, t1 = x.ego.samples[0][0], x.ego.samples[-1][0]
        n = max(1, math.ceil((t1 - t0) / p.collision_step))
        for k in range(n + 1):
            t = min(t1, t0 + k * p.collision_step)
            ego = x.ego_corners(*x.ego.pose_at_time(t))
            if any(geo.convex_overlap(ego, a.corners_at(t)) for a in x.world.agents):
                return 1.0
    return 0.0


def lane_keeping(x: Realization) -> float:
    """1 if the ego footprint touches or leaves its starting lane's boundary."""
    lane = active_lane(x)
    for px, py, ph in x.path_poses():
        if not lane.contains_box(x.ego_corners(px, py, ph)):
            return 1.0
    return 0.0


def _interval(poly, axis):
    vals = [px * axis[0] + py * axis[1] for px, py in poly]
    return min(vals), max(vals)


def footprint_gap(ego, other, heading: float | None) -> float:
    """Separation of two footprints in the lane frame given by ``heading``.

    When the footprints overlap along the lane direction the gap is their
    separation across it; otherwise (or without a lane) the Euclidean distance.
    """
    if heading is not None:
        u = (math.cos(heading), math.sin(heading))
        n = (-u[1], u[0])
        a0, a1 = _interval(ego, u)
        b0, b1 = _interval(other, u)
        if a0 <= b1 and b0 <= a1:
            c0, c1 = _interval(ego, n)
            d0, d1 = _interval(other, n)
            return max(0.0, c0 - d1, d0 - c1)
    return geo.convex_distance(ego, other)


def min_clearance(x: Realization) -> float:
    """Smallest lateral footprint-to-obstacle gap along the path (inf without obstacles)."""
    statics = _static_boxes(x)
    if not statics:
        return math.inf
    try:
        lane = active_lane(x)
    except GeometryError:
        lane = None
    headings = [lane.heading_at((ob.x, ob.y)) if lane else None for ob, _ in statics]
    best = math.inf
    for px, py, ph in x.path_poses():
        ego = x.ego_corners(px, py, ph)
        for (_, c), h in zip(statics, headings):
            best = min(best, footprint_gap(ego, c, h))
    return best


def clearance(x: Realization, c0: float, binary: bool = False) -> float:
    """``max(0, c0 - gap)``; the binary variant is 1 iff ``gap < c0``."""
    gap = min_clearance(x)
    if gap == math.inf:
        return 0.0
    if binary:
        return 1.0 if gap < c0 else 0.0
    return max(0.0, c0 - gap)


def path_length(x: Realization) -> float:
    if len(x.ego.samples) < 2:
        raise GeometryError(f"path length of {x.id!r} needs at least two samples")
    return geo.polyline_length(x.ego.points)


def speeding_time(traj: Trajectory, limit: float) -> float:
    """Time spent strictly above ``limit``; each sample's speed holds until the next sample."""
    ss = traj.samples
    return sum(b[0] - a[0] for a, b in zip(ss, ss[1:]) if a[4] > limit)


def speed_limit(x: Realization, limit: float, weighted: bool = False) -> float:
    t = speeding_time(x.ego, limit)
    if not weighted or t == 0:
        return t
    vmax = max(s[4] for s in x.ego.samples)
    return t * (vmax - limit)


class Fault(enum.Enum):
    NONE = "none"
    EGO_AT_FAULT = "ego_at_fault"
    THIRD_PARTY = "third_party"


@dataclass(frozen=True)
class CollisionOutcome:
    speed: float
    fault: Fault
    time: float | None = None
    struck: str | None = None


def _braking_state(v0: float, a: float, tau: float) -> tuple[float, float]:
    """Arc length travelled and speed after braking at ``a`` for ``tau`` seconds."""
    t_stop = v0 / a
    tau = min(tau, t_stop)
    return v0 * tau - 0.5 * a * tau * tau, v0 - a * tau


def _contact(x: Realization, a_max: float, step: float, objects) -> tuple[float, Any] | None:
    """First time (after ``x``'s first sample) the braking ego touches one of ``objects``."""
    path = x.ego.arc_path()
    t0, v0 = x.ego.start[0], x.ego.start[4]
    t_stop = v0 / a_max
    ego_r = 0.5 * math.hypot(x.ego_length, x.ego_width)

    def touching(tau):
        s, _ = _braking_state(v0, a_max, tau)
        px, py, ph = path.pose_at(s)
        ego = x.ego_corners(px, py, ph)
        for obj in objects:
            if isinstance(obj, Agent):
                ox, oy, _ = obj.trajectory.pose_at_time(t0 + tau)
                r = 0.5 * math.hypot(obj.length, obj.width)
                if math.hypot(ox - px, oy - py) > ego_r + r:
                    continue
                if geo.convex_overlap(ego, obj.corners_at(t0 + tau)):
                    return obj
            else:
                r = 0.5 * math.hypot(obj.length, obj.width)
                if math.hypot(obj.x - px, obj.y - py) > ego_r + r:
                    continue
                if geo.convex_overlap(ego, obj.corners()):
                    return obj
        return None

    hit = touching(0.0)
    if hit is not None:
        return 0.0, hit
    n = max(1, math.ceil(t_stop / step))
    prev = 0.0
    for k in range(1, n + 1):
        tau = min(t_stop, k * step)
        hit = touching(tau)
        if hit is not None:
            lo, hi = prev, tau
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                h = touching(mid)
                if h is not None:
                    hi, hit = mid, h
                else:
                    lo = mid
            return hi, hit
        prev = tau
    return None


def _crossed_solid_before(x: Realization, lane: Lane, s_limit: float) -> bool:
    path = x.ego.arc_path()
    solid = [b for b, kind in lane.boundaries() if kind != "dashed"]
    if not solid:
        return False
    n = max(1, math.ceil(s_limit / PATH_SPACING))
    for k in range(n + 1):
        px, py, ph = path.pose_at(s_limit * k / n)
        ego = x.ego_corners(px, py, ph)
        if any(geo.polygon_crosses_polyline(ego, b) for b in solid):
            return True
    return False


def classify_fault(x: Realization, tau: float, struck, a_max: float) -> Fault:
    """Illustrative liability model.

    The ego is at fault when, at contact, its footprint is not inside its
    starting lane or it has crossed a solid boundary on the way.  Otherwise
    the struck party is at fault if it moves against its lane's direction or
    started outside the ego's lane.  Anything else (e.g. a static object in
    the ego's lane) is the ego's fault.
    """
    lane = active_lane(x)
    t0, v0 = x.ego.start[0], x.ego.start[4]
    s, _ = _braking_state(v0, a_max, tau)
    px, py, ph = x.ego.arc_path().pose_at(s)
    if not lane.contains_box(x.ego_corners(px, py, ph)):
        return Fault.EGO_AT_FAULT
    if _crossed_solid_before(x, lane, s):
        return Fault.EGO_AT_FAULT
    if isinstance(struck, Agent):
        ox, oy, _ = struck.trajectory.pose_at_time(t0 + tau)
        vx, vy = struck.trajectory.velocity_at_time(t0 + tau)
        h = lane.heading_at((ox, oy))
        if vx * math.cos(h) + vy * math.sin(h) < 0:
            return Fault.THIRD_PARTY
        sx, sy, _ = struck.trajectory.pose_at_time(t0)
        if not lane.contains((sx, sy)):
            return Fault.THIRD_PARTY
    return Fault.EGO_AT_FAULT


@functools.lru_cache(maxsize=512)
def collision_outcome(x: Realization, a_max: float, step: float) -> CollisionOutcome:
    """Speed at first contact when braking at ``a_max`` from the first sample along the path."""
    if a_max <= 0:
        raise RulebookError("a_max must be positive")
    objects = list(x.world.obstacles) + list(x.world.agents)
    found = _contact(x, a_max, step, objects)
    if found is None:
        return CollisionOutcome(0.0, Fault.NONE)
    tau, hit = found
    _, v = _braking_state(x.ego.start[4], a_max, tau)
    return CollisionOutcome(max(v, 0.0), classify_fault(x, tau, hit, a_max), tau, hit.id)


def collision_speed(x: Realization, p: DrivingParams) -> tuple[float, Fault]:
    out = collision_outcome(x, p.a_max, p.collision_step)
    return out.speed, out.fault


def collision(x: Realization, p: DrivingParams, which: str = "any") -> float:
    out = collision_outcome(x, p.a_max, p.collision_step)
    if which == "any":
        return out.speed
    if which == "at_fault":
        return out.speed if out.fault is Fault.EGO_AT_FAULT else 0.0
    if which == "third_party":
        return out.speed if out.fault is Fault.THIRD_PARTY else 0.0
    raise ValueError(which)


def kinetic_energy(x: Realization, p: DrivingParams, mass: float | None = None) -> float:
    """Sum over human-class objects of 1/2 m v^2 at the braking ego's first contact with each."""
    m = p.ego_mass if mass is None else mass
    total = 0.0
    humans = [o for o in list(x.world.obstacles) + list(x.world.agents) if o.kind == "human"]
    for h in humans:
        found = _contact(x, p.a_max, p.collision_step, [h])
        if found is not None:
            _, v = _braking_state(x.ego.start[4], p.a_max, found[0])
            total += 0.5 * m * v * v
    return total


def boundary_crossings(x: Realization) -> list[geo.Point]:
    """Points where the ego reference path crosses its starting lane's boundaries."""
    lane = active_lane(x)
    pts = x.ego.points
    hits: list[geo.Point] = []
    for boundary, _ in lane.boundaries():
        for i in range(len(pts) - 1):
            for j in range(len(boundary) - 1):
                q = geo.segment_intersection_point(pts[i], pts[i + 1], boundary[j], boundary[j + 1])
                if q is not None and not any(math.dist(q, h) < 1e-9 for h in hits):
                    hits.append(q)
    return hits


def distance_to_intersection(x: Realization, pt: geo.Point) -> float:
    if not x.world.intersections:
        return math.inf
    return min(geo.point_polygon_distance(pt, poly) for poly in x.world.intersections)


def lane_change_near_intersection(x: Realization, d_lc: float) -> float:
    hits = boundary_crossings(x)
    if not hits:
        return 0.0
    if len(hits) > 1:
        raise GeometryError(
            f"trajectory {x.id!r} crosses the lane boundary {len(hits)} times; "
            "the lane-change rule assumes a single crossing"
        )
    return max(0.0, d_lc - distance_to_intersection(x, hits[0]))


def turning(x: Realization) -> float:
    """Discrete L1 norm of the heading deviation from the active lane centerline."""
    if not x.world.lanes:
        return 0.0
    lane = active_lane(x)
    total = 0.0
    ss = x.ego.samples
    for a, b in zip(ss, ss[1:]):
        total += abs(geo.wrap_angle(a[3] - lane.heading_at((a[1], a[2])))) * (b[0] - a[0])
    return total


# -- rule factory ------------------------------------------------------------

BUILTIN_KINDS = (
    "blockage",
    "lane_keeping",
    "clearance",
    "path_length",
    "speed_limit",
    "collision",
    "collision_at_fault",
    "collision_third_party",
    "lane_change_near_intersection",
    "turning",
    "kinetic_energy",
    "table",
)

_ALLOWED_PARAMS = {
    "blockage": set(),
    "lane_keeping": set(),
    "clearance": {"c0", "variant"},
    "path_length": set(),
    "speed_limit": {"limit", "variant"},
    "collision": set(),
    "collision_at_fault": set(),
    "collision_third_party": set(),
    "lane_change_near_intersection": {"d_lc"},
    "turning": set(),
    "kinetic_energy": {"mass"},
}


def _num(params, key, default):
    v = params.get(key, default)
    if isinstance(v, str):
        raise RulebookError(f"parameter {key} must be a number, got {v!r}")
    return float(v)


def _variant(params, choices):
    v = params.get("variant", choices[0])
    if v not in choices:
        raise RulebookError(f"variant must be one of {choices}, got {v!r}")
    return v


def builtin_rule(
    rule_id: str, kind: str, params: Mapping[str, Any] | None = None, dp: DrivingParams | None = None
) -> Rule:
    """Instantiate one of the builtin rule kinds.

    Parameters given explicitly override the scenario's :class:`DrivingParams`.
    """
    params = dict(params or {})
    dp = dp or DrivingParams()
    if kind not in BUILTIN_KINDS:
        raise RulebookError(f"unknown rule kind {kind!r}; expected one of {', '.join(BUILTIN_KINDS)}")
    if kind == "table":
        bad = [k for k, v in params.items() if isinstance(v, str)]
        if bad:
            raise RulebookError(f"table values must be numbers: {bad}")
        for k, v in params.items():
            if v < 0:
                raise RulebookError(f"table value for {k!r} is negative")
        return table_rule(rule_id, params)
    extra = set(params) - _ALLOWED_PARAMS[kind]
    if extra:
        raise RulebookError(f"rule kind {kind!r} does not accept parameters {sorted(extra)}")
    spec = (kind, tuple(sorted(params.items())))

    if kind == "blockage":
        fn, desc = (lambda x: blockage(x, dp)), "1 if blocked by an obstacle"
    elif kind == "lane_keeping":
        fn, desc = lane_keeping, "1 if the footprint crosses the lane boundary"
    elif kind == "clearance":
        c0 = _num(params, "c0", dp.c0)
        binary = _variant(params, ("continuous", "binary")) == "binary"
        if c0 <= 0:
            raise RulebookError("clearance c0 must be positive")
        fn, desc = (lambda x: clearance(x, c0, binary)), f"clearance below {c0} m"
    elif kind == "path_length":
        fn, desc = path_length, "length of the trajectory"
    elif kind == "speed_limit":
        limit = _num(params, "limit", dp.speed_limit)
        weighted = _variant(params, ("plain", "weighted")) == "weighted"
        fn, desc = (lambda x: speed_limit(x, limit, weighted)), f"time above {limit} m/s"
    elif kind == "collision":
        fn, desc = (lambda x: collision(x, dp)), "speed at collision"
    elif kind == "collision_at_fault":
        fn, desc = (lambda x: collision(x, dp, "at_fault")), "speed at collision, ego at fault"
    elif kind == "collision_third_party":
        fn, desc = (lambda x: collision(x, dp, "third_party")), "speed at collision, third party at fault"
    elif kind == "lane_change_near_intersection":
        d_lc = _num(params, "d_lc", dp.d_lc)
        fn, desc = (lambda x: lane_change_near_intersection(x, d_lc)), "lane change too close to intersection"
    elif kind == "turning":
        fn, desc = turning, "heading deviation from lane direction"
    else:
        mass = _num(params, "mass", dp.ego_mass)
        fn, desc = (lambda x: kinetic_energy(x, dp, mass)), "kinetic energy transferred to humans"
    return Rule(rule_id, fn, desc, spec=spec)
