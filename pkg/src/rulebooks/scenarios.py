"""Builders for the shipped scenario fixtures.

The worlds use left-hand traffic: the ego drives along +x in the lane
``y in [0, 3.5]``; the lane to its right (``y < 0``) carries oncoming traffic.
The JSON files under ``rulebooks/data`` are generated from these functions
(``python -m rulebooks.scenarios``) and checked against them by the tests.
"""

from __future__ import annotations

import bisect
import math
from pathlib import Path
from typing import Callable

from .driving import Agent, DrivingParams, Lane, OrientedBox, Trajectory, World
from .scenario import ScenarioDoc, scenario_to_json

LANE_WIDTH = 3.5
EGO_LENGTH = 4.0
EGO_WIDTH = 1.7
DATA_DIR = Path(__file__).with_name("data")


def smoothstep(u: float) -> float:
    u = min(1.0, max(0.0, u))
    return u * u * (3 - 2 * u)


def shift(y0: float, dy: float, x_start: float, x_end: float) -> Callable[[float], float]:
    """Lateral offset moving smoothly from ``y0`` to ``y0 + dy`` between two stations."""
    return lambda x: y0 + dy * smoothstep((x - x_start) / (x_end - x_start))


def out_and_back(y0: float, dy: float, x0: float, x1: float, x2: float, x3: float) -> Callable[[float], float]:
    """Shift by ``dy`` over ``[x0, x1]``, hold, and return over ``[x2, x3]``."""
    return lambda x: y0 + dy * (smoothstep((x - x0) / (x1 - x0)) - smoothstep((x - x2) / (x3 - x2)))


def build_trajectory(
    tid: str,
    y_of_x: Callable[[float], float],
    x_start: float,
    x_end: float,
    speed: Callable[[float], float] | float,
    dt: float = 0.1,
    t0: float = 0.0,
) -> Trajectory:
    """Sample a path ``y = y_of_x(x)`` driven at ``speed`` (constant or a function of x)."""
    v_of_x = speed if callable(speed) else (lambda x: float(speed))
    n = max(2, int((x_end - x_start) / 0.01))
    xs = [x_start + (x_end - x_start) * i / n for i in range(n + 1)]
    ys = [y_of_x(x) for x in xs]
    s = [0.0]
    t = [0.0]
    for i in range(n):
        ds = math.hypot(xs[i + 1] - xs[i], ys[i + 1] - ys[i])
        s.append(s[-1] + ds)
        v = 0.5 * (v_of_x(xs[i]) + v_of_x(xs[i + 1]))
        t.append(t[-1] + ds / v)
    samples = []
    times = [k * dt for k in range(int(t[-1] / dt + 1e-9) + 1)]
    if t[-1] - times[-1] > 0.02 * dt:
        times.append(t[-1])  # keep the true end point
    for tk in times:
        j = min(bisect.bisect_right(t, tk) - 1, n - 1)
        f = (tk - t[j]) / (t[j + 1] - t[j])
        x = xs[j] + f * (xs[j + 1] - xs[j])
        y = ys[j] + f * (ys[j + 1] - ys[j])
        h = math.atan2(ys[j + 1] - ys[j], xs[j + 1] - xs[j])
        samples.append((round(t0 + tk, 6), round(x, 6), round(y, 6), round(h, 6), round(v_of_x(x), 6)))
    return Trajectory(tid, tuple(samples))


def straight_agent(aid: str, x: float, y: float, vx: float, duration: float, dt: float = 0.1,
                   length: float = 4.0, width: float = 1.8, kind: str = "vehicle") -> Agent:
    heading = 0.0 if vx >= 0 else math.pi
    steps = int(round(duration / dt))
    samples = tuple(
        (round(k * dt, 6), round(x + vx * k * dt, 6), y, round(heading, 6), abs(vx)) for k in range(steps + 1)
    )
    return Agent(aid, length, width, Trajectory(aid, samples), kind)


def two_way_road(x0: float, x1: float, divider: str = "dashed") -> tuple[Lane, Lane]:
    """Ego lane (``y in [0, 3.5]``, +x) and the oncoming lane to its right (``y in [-3.5, 0]``, -x)."""
    w = LANE_WIDTH
    ego = Lane(
        "ego_lane",
        ((x0, w / 2), (x1, w / 2)),
        left=((x0, w), (x1, w)),
        right=((x0, 0.0), (x1, 0.0)),
        left_kind="solid",
        right_kind=divider,
    )
    oncoming = Lane(
        "oncoming_lane",
        ((x1, -w / 2), (x0, -w / 2)),
        left=((x1, -w), (x0, -w)),
        right=((x1, 0.0), (x0, 0.0)),
        left_kind="solid",
        right_kind=divider,
    )
    return ego, oncoming


# -- avoidance / overtake ----------------------------------------------------

PARKED = OrientedBox("parked", 30.0, 3.0, 0.0, 4.0, 1.7)


def _avoidance_candidates():
    yc = LANE_WIDTH / 2
    return {
        # runs straight into the parked vehicle
        "a": build_trajectory("a", lambda x: yc, 0.0, 26.5, 8.0),
        # squeezes past inside the lane, 0.4 m from the parked vehicle
        "b": build_trajectory("b", out_and_back(yc, -0.85, 5, 20, 40, 55), 0.0, 60.0, 8.0),
        # crosses the dashed divider, 1.5 m clearance
        "c": build_trajectory("c", out_and_back(yc, -1.95, 5, 20, 40, 55), 0.0, 60.0, 8.0),
        # wide swerve well into the oncoming lane
        "d": build_trajectory("d", out_and_back(yc, -2.95, 5, 20, 40, 55), 0.0, 60.0, 8.0),
    }


def avoidance_scenario() -> ScenarioDoc:
    c = _avoidance_candidates()
    return ScenarioDoc(
        "avoidance",
        World(two_way_road(-10.0, 100.0), (), (PARKED,), ()),
        EGO_LENGTH,
        EGO_WIDTH,
        DrivingParams(c0=1.0),
        (c["a"], c["b"], c["c"], c["d"]),
        "four representative trajectories around a parked vehicle",
    )


def overtake_scenario() -> ScenarioDoc:
    c = _avoidance_candidates()
    return ScenarioDoc(
        "overtake",
        World(two_way_road(-10.0, 100.0), (), (PARKED,), ()),
        EGO_LENGTH,
        EGO_WIDTH,
        DrivingParams(c0=1.0),
        (
            Trajectory("straight", c["a"].samples),
            Trajectory("inlane", c["b"].samples),
            Trajectory("cross", c["c"].samples),
        ),
        "overtaking a stationary vehicle: stay in lane or cross the divider",
    )


# -- unavoidable collision ---------------------------------------------------

EGO_SPEED = 9.5
A_MAX = 3.5
APPROACH_SPEED = 1.0
GAP = 12.0


def collision_scenario() -> ScenarioDoc:
    yc = LANE_WIDTH / 2
    front = EGO_LENGTH / 2
    agent_len = 4.0
    wrong_way = straight_agent("wrong_way", front + GAP + agent_len / 2, yc, -APPROACH_SPEED, 6.0)
    oncoming = straight_agent("oncoming", front + GAP + 1.0 + agent_len / 2, -yc, -APPROACH_SPEED, 6.0)
    inlane = build_trajectory("inlane", lambda x: yc, 0.0, 30.0, EGO_SPEED)
    swerve = build_trajectory("swerve", shift(yc, -LANE_WIDTH, 0.0, 12.0), 0.0, 30.0, EGO_SPEED)
    return ScenarioDoc(
        "collision",
        World(two_way_road(-10.0, 100.0, divider="double_solid"), (), (), (wrong_way, oncoming)),
        EGO_LENGTH,
        EGO_WIDTH,
        DrivingParams(a_max=A_MAX, collision_step=0.01),
        (inlane, swerve),
        "two vehicles appear ~12 m ahead closing at 1 m/s; collision cannot be avoided",
    )


# -- lane change near an intersection ----------------------------------------

INTERSECTION_X = 100.0
D_LC = 50.0


def lanechange_scenario() -> ScenarioDoc:
    w = LANE_WIDTH
    x0, x1 = -10.0, INTERSECTION_X
    right_lane = Lane(
        "through_lane", ((x0, w / 2), (x1, w / 2)), left=((x0, w), (x1, w)), right=((x0, 0.0), (x1, 0.0)),
        left_kind="dashed", right_kind="solid",
    )
    turn_lane = Lane(
        "turn_lane", ((x0, 1.5 * w), (x1, 1.5 * w)), left=((x0, 2 * w), (x1, 2 * w)), right=((x0, w), (x1, w)),
        left_kind="solid", right_kind="dashed",
    )
    box = ((INTERSECTION_X, -5.0), (INTERSECTION_X + 20.0, -5.0), (INTERSECTION_X + 20.0, 12.0), (INTERSECTION_X, 12.0))
    stopped = OrientedBox("stopped", 60.0, 1.5 * w, 0.0, 4.0, 1.7)
    yc = w / 2

    def slow_for_sharp(x):
        # brake from 8 to 4 m/s before the tight manoeuvre
        if x < 40:
            return 8.0
        if x < 60:
            return 8.0 - 4.0 * (x - 40) / 20
        return 4.0

    early = build_trajectory("early", shift(yc, w, 30.0, 50.0), 0.0, 98.0, 8.0)
    sharp = build_trajectory("sharp", shift(yc, w, 66.0, 76.0), 0.0, 98.0, slow_for_sharp)
    smooth = build_trajectory("smooth", shift(yc, w, 66.0, 96.0), 0.0, 98.0, 8.0)
    return ScenarioDoc(
        "lanechange",
        World((right_lane, turn_lane), (box,), (stopped,), ()),
        EGO_LENGTH,
        EGO_WIDTH,
        DrivingParams(d_lc=D_LC, c_tau=C_TAU),
        (early, sharp, smooth),
        "reach the turn lane before the intersection; a stopped vehicle blocks the early gap",
    )


C_TAU = 100.0

BUILDERS = {
    "avoidance": avoidance_scenario,
    "overtake": overtake_scenario,
    "collision": collision_scenario,
    "lanechange": lanechange_scenario,
}


def write_all(directory: Path = DATA_DIR) -> None:
    for name, build in BUILDERS.items():
        (directory / f"{name}.json").write_text(scenario_to_json(build()), encoding="utf-8")


if __name__ == "__main__":
    write_all()
