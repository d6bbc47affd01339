"""Deterministic closed-loop 2D simulator.

Loads scenario files (static walls, scripted obstacles, start/goal, sensor),
runs the belief/urgency/planner pipeline in a receding-horizon loop with a
sector field-of-view sensor, and records a per-step trial log. The vehicle
tracks planned trajectories perfectly; obstacles follow waypoint scripts at
constant speed, optionally gated by a position trigger.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import belief as belief_mod
from .belief import BeliefParams, BeliefState, Detection, init_belief
from .grid import OccupancyGrid, SectorRegion, line_of_sight, sector_visible_mask, wrap_angle
from .planner import CostReport, OptimizeBudget, PlannerWeights, optimize
from .trajectory import Trajectory, straight_line
from .urgency import SensorFov, UrgencyParams, build_urgency_field, select_yaw

SCENARIO_FORMAT_VERSION = 1
VARIANTS = ("spot", "spot-star", "baseline")

_SCENARIO_FIELDS = {
    "format_version",
    "map_extent",
    "resolution",
    "walls",
    "start",
    "goal",
    "obstacles",
    "sensor",
    "duration",
    "seed",
}
_OBSTACLE_FIELDS = {"radius", "speed", "path", "mode", "trigger"}


@dataclass
class ObstacleScript:
    """Scripted mover: waypoint polyline at constant speed."""

    radius: float
    speed: float
    path: np.ndarray  # (k, 2) waypoints
    mode: str = "loop"  # loop: ping-pong between endpoints; once: stop at end
    trigger: dict | None = None  # {"axis": "x"|"y", "threshold": float}

    def __post_init__(self) -> None:
        self.path = np.asarray(self.path, dtype=float)
        if self.speed <= 0 or self.radius <= 0:
            raise ValueError("obstacle speed and radius must be > 0")
        if self.path.ndim != 2 or self.path.shape[0] < 1 or self.path.shape[1] != 2:
            raise ValueError("obstacle path must be a list of [x, y] waypoints")
        if self.mode not in ("loop", "once"):
            raise ValueError(f"unknown obstacle mode {self.mode!r}")

    def segment_lengths(self) -> np.ndarray:
        if len(self.path) < 2:
            return np.zeros(0)
        return np.linalg.norm(np.diff(self.path, axis=0), axis=1)

    def state_at(self, arc: float) -> tuple[np.ndarray, np.ndarray]:
        """(position, velocity) at a travelled arc length along the script."""
        seg = self.segment_lengths()
        total = float(seg.sum())
        if total == 0.0:
            return self.path[0].copy(), np.zeros(2)
        if self.mode == "once":
            s = min(arc, total)
            forward = True
            moving = arc < total
        else:
            cycle = math.fmod(arc, 2.0 * total)
            forward = cycle < total
            s = cycle if forward else 2.0 * total - cycle
            moving = True
        acc = 0.0
        for i, length in enumerate(seg):
            if s <= acc + length or i == len(seg) - 1:
                frac = (s - acc) / length if length > 0 else 0.0
                frac = min(max(frac, 0.0), 1.0)
                pos = self.path[i] * (1 - frac) + self.path[i + 1] * frac
                direction = (self.path[i + 1] - self.path[i]) / length if length > 0 else np.zeros(2)
                vel = direction * self.speed * (1.0 if forward else -1.0) if moving else np.zeros(2)
                return pos, vel
            acc += length
        return self.path[-1].copy(), np.zeros(2)


@dataclass
class ScenarioSpec:
    """Scenario file contents; see the bundled scenarios for the layout."""

    map_extent: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax
    resolution: float
    walls: list[tuple[float, float, float, float]]
    start: np.ndarray
    goal: np.ndarray
    obstacles: list[ObstacleScript]
    sensor: SensorFov
    duration: float
    seed: int

    def __post_init__(self) -> None:
        self.start = np.asarray(self.start, dtype=float)
        self.goal = np.asarray(self.goal, dtype=float)
        xmin, ymin, xmax, ymax = self.map_extent
        if not (xmax > xmin and ymax > ymin):
            raise ValueError("map_extent must be [xmin, ymin, xmax, ymax] with positive size")
        if self.resolution <= 0:
            raise ValueError("resolution must be > 0")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        for p, name in ((self.start, "start"), (self.goal, "goal")):
            if not (xmin <= p[0] <= xmax and ymin <= p[1] <= ymax):
                raise ValueError(f"{name} {p.tolist()} lies outside map_extent")
        for ob in self.obstacles:
            trig = ob.trigger
            if trig is not None:
                axis = trig.get("axis")
                if axis not in ("x", "y"):
                    raise ValueError(f"trigger axis must be 'x' or 'y', got {axis!r}")
                lo, hi = (xmin, xmax) if axis == "x" else (ymin, ymax)
                if not (lo <= float(trig["threshold"]) <= hi):
                    raise ValueError("trigger threshold lies outside map_extent")

    def occupancy(self) -> OccupancyGrid:
        """Rasterize the wall rectangles onto the scenario grid."""
        xmin, ymin, xmax, ymax = self.map_extent
        res = self.resolution
        width = int(round((xmax - xmin) / res))
        height = int(round((ymax - ymin) / res))
        origin = np.array([xmin + res / 2.0, ymin + res / 2.0])
        occ = np.zeros((height, width), dtype=bool)
        xs = origin[0] + np.arange(width) * res
        ys = origin[1] + np.arange(height) * res
        x, y = np.meshgrid(xs, ys)
        for x0, y0, x1, y1 in self.walls:
            occ |= (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        return OccupancyGrid(origin, res, occ)

    def grid_shape(self) -> tuple[int, int]:
        xmin, ymin, xmax, ymax = self.map_extent
        return (
            int(round((xmax - xmin) / self.resolution)),
            int(round((ymax - ymin) / self.resolution)),
        )

    def grid_origin(self) -> np.ndarray:
        xmin, ymin, _, _ = self.map_extent
        return np.array([xmin + self.resolution / 2.0, ymin + self.resolution / 2.0])


def load_scenario(path: str | Path) -> ScenarioSpec:
    """Parse and validate a scenario JSON file.

    Raises:
        ValueError: unknown fields, missing fields, or invalid geometry.
    """
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError("scenario file must hold a JSON object")
    unknown = set(raw) - _SCENARIO_FIELDS
    if unknown:
        raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
    missing = _SCENARIO_FIELDS - set(raw)
    if missing:
        raise ValueError(f"missing scenario fields: {sorted(missing)}")
    if raw["format_version"] != SCENARIO_FORMAT_VERSION:
        raise ValueError(
            f"unsupported format_version {raw['format_version']!r}, expected {SCENARIO_FORMAT_VERSION}"
        )
    obstacles = []
    for i, ob in enumerate(raw["obstacles"]):
        unknown = set(ob) - _OBSTACLE_FIELDS
        if unknown:
            raise ValueError(f"obstacle {i}: unknown fields {sorted(unknown)}")
        obstacles.append(
            ObstacleScript(
                radius=float(ob["radius"]),
                speed=float(ob["speed"]),
                path=ob["path"],
                mode=ob.get("mode", "loop"),
                trigger=ob.get("trigger"),
            )
        )
    sensor_raw = dict(raw["sensor"])
    unknown = set(sensor_raw) - {"half_angle", "range"}
    if unknown:
        raise ValueError(f"sensor: unknown fields {sorted(unknown)}")
    sensor = SensorFov(yaw=0.0, half_angle=float(sensor_raw["half_angle"]), range=float(sensor_raw["range"]))
    return ScenarioSpec(
        map_extent=tuple(float(v) for v in raw["map_extent"]),
        resolution=float(raw["resolution"]),
        walls=[tuple(float(v) for v in w) for w in raw["walls"]],
        start=raw["start"],
        goal=raw["goal"],
        obstacles=obstacles,
        sensor=sensor,
        duration=float(raw["duration"]),
        seed=int(raw["seed"]),
    )


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (corner, street, museum)."""
    return Path(__file__).parent / "scenarios" / f"{name}.json"


@dataclass
class ObstacleState:
    position: np.ndarray
    velocity: np.ndarray
    active: bool
    arc: float = 0.0


@dataclass
class SimState:
    """World state between steps; carries the trajectory being tracked."""

    t: float
    uav_position: np.ndarray
    uav_velocity: np.ndarray
    obstacles: list[ObstacleState]
    trajectory: Trajectory | None = None


def init_sim(scenario: ScenarioSpec) -> SimState:
    obstacles = []
    for ob in scenario.obstacles:
        pos, vel = ob.state_at(0.0)
        active = ob.trigger is None
        obstacles.append(ObstacleState(pos, vel if active else np.zeros(2), active))
    return SimState(
        t=0.0,
        uav_position=scenario.start.copy(),
        uav_velocity=np.zeros(2),
        obstacles=obstacles,
    )


def advance(sim: SimState, scenario: ScenarioSpec, dt: float) -> SimState:
    """One physics step: move obstacles along scripts, track the trajectory.

    Triggered obstacles stay parked at their first waypoint until the
    vehicle has crossed the trigger threshold (checked after the vehicle
    moves; once active, always active).
    """
    if sim.trajectory is not None:
        offset = sim.t + dt - sim.trajectory.t0
        uav_pos = sim.trajectory.position_xy(offset)
        uav_vel = sim.trajectory.velocity_xy(offset)
    else:
        uav_pos = sim.uav_position.copy()
        uav_vel = sim.uav_velocity.copy()

    obstacles = []
    for ob, st in zip(scenario.obstacles, sim.obstacles):
        active = st.active
        arc = st.arc
        if active:
            arc += ob.speed * dt
        pos, vel = ob.state_at(arc)
        if not active:
            vel = np.zeros(2)
            trig = ob.trigger
            if trig is not None and uav_pos[0 if trig["axis"] == "x" else 1] > float(trig["threshold"]):
                active = True
        obstacles.append(ObstacleState(pos, vel, active, arc))
    return SimState(
        t=sim.t + dt,
        uav_position=np.asarray(uav_pos, dtype=float),
        uav_velocity=np.asarray(uav_vel, dtype=float),
        obstacles=obstacles,
        trajectory=sim.trajectory,
    )


def sense_indexed(
    sim: SimState,
    scenario: ScenarioSpec,
    yaw: float,
    occ: OccupancyGrid | None = None,
    rng: np.random.Generator | None = None,
    noise_sigma: float = 0.0,
) -> list[tuple[int, Detection]]:
    """(obstacle index, detection) pairs for obstacles inside the sector
    with clear line of sight. Optional zero-mean Gaussian position noise,
    drawn from the caller's generator."""
    occ = occ if occ is not None else scenario.occupancy()
    sector = SectorRegion(sim.uav_position, yaw, scenario.sensor.half_angle, scenario.sensor.range)
    out = []
    for i, (ob, st) in enumerate(zip(scenario.obstacles, sim.obstacles)):
        if not sector.contains(st.position):
            continue
        if not line_of_sight(occ, sim.uav_position, st.position):
            continue
        pos = st.position.copy()
        if noise_sigma > 0.0 and rng is not None:
            pos = pos + rng.normal(0.0, noise_sigma, 2)
        out.append((i, Detection(pos, st.velocity.copy(), ob.radius)))
    return out


def sense(
    sim: SimState,
    scenario: ScenarioSpec,
    yaw: float,
    occ: OccupancyGrid | None = None,
    rng: np.random.Generator | None = None,
    noise_sigma: float = 0.0,
) -> list[Detection]:
    return [d for _, d in sense_indexed(sim, scenario, yaw, occ, rng, noise_sigma)]


# ---------------------------------------------------------------------------
# routing (static shortest path for local-goal selection)


def _inflate(occ: OccupancyGrid, margin: float) -> np.ndarray:
    """Occupied mask grown by a clearance margin (cells within margin of a wall)."""
    from scipy import ndimage

    if not occ.occupied.any():
        return occ.occupied.copy()
    dist = ndimage.distance_transform_edt(~occ.occupied) * occ.resolution
    return dist <= margin


def plan_route(occ: OccupancyGrid, start, goal, clearance: float) -> np.ndarray:
    """Shortest 8-connected grid path on the clearance-inflated map, then
    line-of-sight shortcutting. Returns a world-coordinate polyline
    (falls back to the straight segment when no route exists)."""
    ref = occ.as_grid()
    blocked = _inflate(occ, clearance)
    start_c = ref.cell_of(start)
    goal_c = ref.cell_of(goal)

    def clamp(c):
        return (min(max(c[0], 0), occ.width - 1), min(max(c[1], 0), occ.height - 1))

    start_c, goal_c = clamp(start_c), clamp(goal_c)
    # free the endpoint cells: the vehicle may legitimately sit at clearance
    for c in (start_c, goal_c):
        blocked[c[1], c[0]] = False

    steps = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    costs = {s: math.hypot(*s) for s in steps}

    def heuristic(c):
        dx, dy = abs(c[0] - goal_c[0]), abs(c[1] - goal_c[1])
        return max(dx, dy) + (math.sqrt(2) - 1) * min(dx, dy)

    open_heap = [(heuristic(start_c), 0, 0.0, start_c)]
    came: dict[tuple[int, int], tuple[int, int] | None] = {start_c: None}
    g_cost = {start_c: 0.0}
    tie = 1
    found = False
    while open_heap:
        _, _, g, cur = heapq.heappop(open_heap)
        if cur == goal_c:
            found = True
            break
        if g > g_cost.get(cur, np.inf):
            continue
        for s in steps:
            nxt = (cur[0] + s[0], cur[1] + s[1])
            if not (0 <= nxt[0] < occ.width and 0 <= nxt[1] < occ.height):
                continue
            if blocked[nxt[1], nxt[0]]:
                continue
            ng = g + costs[s]
            if ng < g_cost.get(nxt, np.inf):
                g_cost[nxt] = ng
                came[nxt] = cur
                heapq.heappush(open_heap, (ng + heuristic(nxt), tie, ng, nxt))
                tie += 1
    if not found:
        return np.array([np.asarray(start, float), np.asarray(goal, float)])

    cells = []
    cur: tuple[int, int] | None = goal_c
    while cur is not None:
        cells.append(cur)
        cur = came[cur]
    cells.reverse()
    pts = np.array([ref.cell_center(ix, iy) for ix, iy in cells])
    pts[0] = np.asarray(start, float)
    pts[-1] = np.asarray(goal, float)

    # shortcut: greedily skip ahead while the inflated map stays clear
    shadow = OccupancyGrid(occ.origin.copy(), occ.resolution, blocked)
    out = [pts[0]]
    i = 0
    while i < len(pts) - 1:
        j = len(pts) - 1
        while j > i + 1 and not line_of_sight(shadow, pts[i], pts[j]):
            j -= 1
        out.append(pts[j])
        i = j
    return np.array(out)


def route_local_goal(route: np.ndarray, position, lookahead: float) -> np.ndarray:
    """Point on the route a lookahead distance past the nearest route point."""
    pos = np.asarray(position, float)
    seg = np.diff(route, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    # project the position onto the polyline
    best_s, best_d = 0.0, np.inf
    for i, length in enumerate(seg_len):
        if length == 0:
            continue
        t = np.clip(np.dot(pos - route[i], seg[i]) / length**2, 0.0, 1.0)
        p = route[i] + t * seg[i]
        d = np.linalg.norm(pos - p)
        if d < best_d:
            best_d = d
            best_s = cum[i] + t * length
    target_s = min(best_s + lookahead, cum[-1])
    i = int(np.searchsorted(cum, target_s, side="right") - 1)
    i = min(i, len(seg_len) - 1)
    rem = target_s - cum[i]
    if seg_len[i] == 0:
        return route[i].copy()
    return route[i] + seg[i] * (rem / seg_len[i])


# ---------------------------------------------------------------------------
# one replanning cycle


@dataclass
class PlannerVariant:
    """Behavior knobs distinguishing the compared methods."""

    name: str
    use_observation_cost: bool
    urgency_yaw: bool


def planner_variant(name: str) -> PlannerVariant:
    if name == "spot":
        return PlannerVariant(name, True, True)
    if name == "spot-star":
        return PlannerVariant(name, False, True)
    if name == "baseline":
        return PlannerVariant(name, False, False)
    raise ValueError(f"unknown planner variant {name!r}; expected one of {VARIANTS}")


@dataclass
class PlanContext:
    """Everything one replanning cycle needs."""

    scenario: ScenarioSpec
    occ: OccupancyGrid
    route: np.ndarray
    belief: BeliefState
    belief_params: BeliefParams
    urgency_params: UrgencyParams
    weights: PlannerWeights
    variant: PlannerVariant
    budget: OptimizeBudget
    t: float
    uav_position: np.ndarray
    uav_velocity: np.ndarray
    yaw: float
    previous: Trajectory | None
    n_points: int = 20
    dt_knot: float = 0.1
    cruise_fraction: float = 0.8


def _initial_guess(ctx: PlanContext) -> Trajectory:
    """Shifted previous solution when available, else a straight run at the
    local goal; the tail is re-aimed along the route each cycle."""
    lookahead = ctx.cruise_fraction * ctx.weights.v_max * (ctx.n_points - 1) * ctx.dt_knot
    local_goal = route_local_goal(ctx.route, ctx.uav_position, lookahead)
    if ctx.previous is None:
        return straight_line(ctx.uav_position, local_goal, ctx.n_points, ctx.dt_knot, t0=ctx.t)
    shift = ctx.t - ctx.previous.t0
    offsets = shift + np.arange(ctx.n_points) * ctx.dt_knot
    xy = ctx.previous.position_xy(offsets)
    # blend the clamped tail toward the local goal so the horizon keeps moving
    overrun = offsets > ctx.previous.span
    if overrun.any():
        k = int(np.argmax(overrun))
        tail = np.linspace(0.0, 1.0, ctx.n_points - k + 1)[1:, None]
        xy[k:] = xy[k:] * (1 - tail) + local_goal[None, :] * tail
    xy[-1] = local_goal
    pts = np.column_stack([xy, np.full(ctx.n_points, 1.0)])
    pts[0, :2] = ctx.uav_position
    return Trajectory(pts, ctx.dt_knot, ctx.t)


def plan_step(ctx: PlanContext) -> tuple[Trajectory, float, CostReport]:
    """One receding-horizon cycle: optimize the trajectory, then point the
    camera at the most urgent reachable sector (or along the velocity for
    the decoupled baseline)."""
    guess = _initial_guess(ctx)
    weights = ctx.weights
    if not ctx.variant.use_observation_cost:
        weights = replace(weights, lambda_v=0.0)
    traj, report = optimize(
        guess,
        ctx.belief,
        ctx.occ,
        weights,
        ctx.urgency_params,
        ctx.budget,
        belief_params=ctx.belief_params,
        sensing_range=ctx.scenario.sensor.range,
        pin_goal=True,
    )
    if ctx.variant.urgency_yaw:
        fov = SensorFov(yaw=ctx.yaw, half_angle=ctx.scenario.sensor.half_angle, range=ctx.scenario.sensor.range)
        field = build_urgency_field(ctx.belief, traj, ctx.urgency_params, ctx.belief_params)
        yaw = select_yaw(field, ctx.uav_position, fov, ctx.belief.tracks)
    else:
        speed = float(np.linalg.norm(ctx.uav_velocity))
        yaw = float(np.arctan2(ctx.uav_velocity[1], ctx.uav_velocity[0])) if speed > 1e-6 else ctx.yaw
    return traj, yaw, report


# ---------------------------------------------------------------------------
# trial loop


@dataclass
class StepRecord:
    t: float
    uav: list
    uav_velocity: list
    yaw: float
    obstacles: list
    detections: list
    min_clearance: float
    cost: dict | None


@dataclass
class TrialLog:
    scenario_seed: int
    variant: str
    seed: int
    dt: float
    status: str  # reached-goal | collision | timeout | failed
    steps: list[StepRecord] = field(default_factory=list)
    failure: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "variant": self.variant,
            "seed": self.seed,
            "dt": self.dt,
            "status": self.status,
            "failure": self.failure,
            "steps": [
                {
                    "t": s.t,
                    "uav": s.uav,
                    "uav_velocity": s.uav_velocity,
                    "yaw": s.yaw,
                    "obstacles": s.obstacles,
                    "detections": s.detections,
                    "min_clearance": s.min_clearance,
                    "cost": s.cost,
                }
                for s in self.steps
            ],
        }


def _rect_distance(p: np.ndarray, rect) -> float:
    x0, y0, x1, y1 = rect
    dx = max(x0 - p[0], 0.0, p[0] - x1)
    dy = max(y0 - p[1], 0.0, p[1] - y1)
    return math.hypot(dx, dy)


def min_clearance(sim: SimState, scenario: ScenarioSpec) -> float:
    """Smallest clearance to any obstacle footprint or wall rectangle."""
    best = np.inf
    for ob, st in zip(scenario.obstacles, sim.obstacles):
        best = min(best, float(np.linalg.norm(sim.uav_position - st.position)) - ob.radius)
    for rect in scenario.walls:
        best = min(best, _rect_distance(sim.uav_position, rect))
    return best


GOAL_TOLERANCE = 0.3


def run_trial(
    scenario: ScenarioSpec,
    variant_name: str,
    seed: int,
    *,
    noise_sigma: float = 0.0,
    weights: PlannerWeights | None = None,
    belief_params: BeliefParams | None = None,
    urgency_params: UrgencyParams | None = None,
    budget: OptimizeBudget | None = None,
    log_costs: bool = True,
) -> TrialLog:
    """Closed loop at the belief step rate until goal, collision, or timeout.

    The replanning cadence (80 ms of simulated time) rounds to the nearest
    whole step, so a plan is refreshed every step at dt = 0.1 s. A planner
    exception marks the trial failed without crashing the run.
    """
    variant = planner_variant(variant_name)
    bp = belief_params or BeliefParams()
    up = urgency_params or UrgencyParams()
    w = weights or PlannerWeights()
    budget = budget or OptimizeBudget()
    rng = np.random.default_rng(seed)

    occ = scenario.occupancy()
    route = plan_route(occ, scenario.start, scenario.goal, max(w.d_safe, 0.3))
    width, height = scenario.grid_shape()
    state = init_belief(bp, (width, height), origin=scenario.grid_origin(), resolution=scenario.resolution)

    sim = init_sim(scenario)
    to_goal = scenario.goal - scenario.start
    yaw = float(np.arctan2(to_goal[1], to_goal[0]))
    log = TrialLog(scenario_seed=scenario.seed, variant=variant.name, seed=seed, dt=bp.dt, status="timeout")
    previous: Trajectory | None = None
    replan_every = max(1, int(round(0.08 / bp.dt)))

    n_steps = int(round(scenario.duration / bp.dt))
    for k in range(n_steps + 1):
        indexed = sense_indexed(sim, scenario, yaw, occ, rng, noise_sigma)
        detections = [d for _, d in indexed]
        detected_ids = {i for i, _ in indexed}
        fov_sector = SectorRegion(sim.uav_position, yaw, scenario.sensor.half_angle, scenario.sensor.range)
        visible = sector_visible_mask(occ, fov_sector)
        for det in detections:
            ix, iy = state.m_p.cell_of(det.position)
            if state.m_p.in_bounds(ix, iy):
                visible[iy, ix] = True
        state = belief_mod.step(state, visible, detections, bp)

        report = None
        if k % replan_every == 0:
            ctx = PlanContext(
                scenario=scenario,
                occ=occ,
                route=route,
                belief=state,
                belief_params=bp,
                urgency_params=up,
                weights=w,
                variant=variant,
                budget=budget,
                t=sim.t,
                uav_position=sim.uav_position,
                uav_velocity=sim.uav_velocity,
                yaw=yaw,
                previous=previous,
            )
            try:
                traj, yaw, report = plan_step(ctx)
            except Exception as exc:  # noqa: BLE001 - trial failure, not a crash
                log.status = "failed"
                log.failure = f"{type(exc).__name__}: {exc}"
                return log
            previous = traj
            sim.trajectory = traj

        clearance = min_clearance(sim, scenario)
        log.steps.append(
            StepRecord(
                t=round(sim.t, 9),
                uav=[float(sim.uav_position[0]), float(sim.uav_position[1])],
                uav_velocity=[float(sim.uav_velocity[0]), float(sim.uav_velocity[1])],
                yaw=float(yaw),
                obstacles=[
                    {
                        "position": [float(s.position[0]), float(s.position[1])],
                        "velocity": [float(s.velocity[0]), float(s.velocity[1])],
                        "active": bool(s.active),
                        "detected": i in detected_ids,
                        "radius": ob.radius,
                    }
                    for i, (ob, s) in enumerate(zip(scenario.obstacles, sim.obstacles))
                ],
                detections=[
                    {"position": [float(d.position[0]), float(d.position[1])], "radius": d.radius}
                    for d in detections
                ],
                min_clearance=float(clearance),
                cost=None
                if report is None or not log_costs
                else {
                    "total": report.total,
                    "j_v": report.j_v,
                    "j_c": report.j_c,
                    "j_s": report.j_s,
                    "j_d": report.j_d,
                    "iterations": report.iterations,
                    "status": report.status,
                },
            )
        )

        if clearance <= 0.0:
            log.status = "collision"
            return log
        if float(np.linalg.norm(sim.uav_position - scenario.goal)) <= GOAL_TOLERANCE:
            log.status = "reached-goal"
            return log
        if k == n_steps:
            break
        sim = advance(sim, scenario, bp.dt)

    log.status = "timeout"
    return log
