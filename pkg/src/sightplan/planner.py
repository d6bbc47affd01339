"""Sensing-augmented trajectory optimization.

Assembles a weighted objective over control points: an observation term
(negated urgency captured by each point's sensing disk), a collision term
(cubic hinge on clearance to predicted obstacles and static structure),
smoothness (squared acceleration/jerk differences), and soft kinematic
feasibility penalties. Gradients are analytic throughout; the observation
gradient is the boundary line integral of the frozen urgency field around
each sensing disk. Minimization is limited-memory BFGS over the free
control points with the first (and optionally last) point pinned.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import optimize as sciopt
from scipy.spatial import cKDTree

from .belief import BeliefParams, BeliefState
from .grid import BeliefGrid, DiskRegion, OccupancyGrid, integrate_disk, sample_bilinear
from .trajectory import Trajectory
from .urgency import UrgencyParams, build_urgency_field

N_BOUNDARY_SAMPLES = 64


@dataclass
class PlannerWeights:
    """Objective weights, kinematic limits, and clearance margin."""

    lambda_v: float = 0.25
    lambda_c: float = 0.5
    lambda_s: float = 1.0
    lambda_d: float = 0.03
    v_max: float = 1.5
    a_max: float = 4.0
    j_max: float = 10.0
    d_safe: float = 0.4
    omega_v: float = 1.0
    omega_a: float = 1.0
    omega_j: float = 1.0

    def __post_init__(self) -> None:
        for name in ("lambda_v", "lambda_c", "lambda_s", "lambda_d", "omega_v", "omega_a", "omega_j"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("v_max", "a_max", "j_max", "d_safe"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class OptimizeBudget:
    """Stopping limits for one replanning solve.

    ``max_wall_time_s`` is opt-in: wall-clock cutoffs break run-to-run
    determinism, so closed-loop simulation uses iterations only.
    """

    max_iterations: int = 60
    max_wall_time_s: float | None = None
    grad_tol: float = 1e-4


@dataclass
class CostReport:
    """Cost breakdown at the returned trajectory."""

    total: float
    j_v: float
    j_c: float
    j_s: float
    j_d: float
    gradient: np.ndarray  # (n, 2) of the weighted total wrt each point
    iterations: int
    wall_time_ms: float
    status: str = "converged"


class _BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# observation cost


def observation_cost_on_field(traj: Trajectory, u_p: BeliefGrid, sensing_range: float) -> tuple[float, np.ndarray]:
    """Observation cost and gradient against a frozen urgency raster.

    Value: minus the disk integral of the raster around each control point
    (cell-center membership). Gradient per point: the divergence-theorem
    boundary line integral of the bilinearly interpolated raster around the
    sensing circle, with the field held fixed.
    """
    n = len(traj)
    total = 0.0
    grad = np.zeros((n, 2))
    # midpoint rule on the parameterized circle: exact differentials
    # (r cos, r sin) dtheta avoid the chord's sinc(pi/n) bias
    theta = 2.0 * np.pi * (np.arange(N_BOUNDARY_SAMPLES) + 0.5) / N_BOUNDARY_SAMPLES
    d_theta = 2.0 * np.pi / N_BOUNDARY_SAMPLES
    dx_w = -sensing_range * np.sin(theta) * d_theta
    dy_w = sensing_range * np.cos(theta) * d_theta
    offsets = sensing_range * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    for i in range(n):
        region = DiskRegion(traj.xy[i], sensing_range)
        total -= integrate_disk(u_p, region)
        u = sample_bilinear(u_p, region.center + offsets)
        flux_y = float(np.sum(u * dy_w))  # circulation of u dy
        flux_x = float(np.sum(u * dx_w))  # circulation of u dx
        grad[i, 0] = -flux_y
        grad[i, 1] = flux_x
    return total, grad


def cost_observation(
    traj: Trajectory,
    belief: BeliefState,
    urgency_params: UrgencyParams,
    sensing_range: float,
    belief_params: BeliefParams | None = None,
) -> tuple[float, np.ndarray]:
    """Build the potential-urgency field for this trajectory, then score it."""
    bp = belief_params if belief_params is not None else BeliefParams()
    f = build_urgency_field(belief, traj, urgency_params, bp)
    return observation_cost_on_field(traj, f.u_p, sensing_range)


# ---------------------------------------------------------------------------
# collision cost


class StaticObstacles:
    """Nearest static structure queries from an occupancy grid.

    Distances run to the nearest occupied cell center minus half a cell; a
    KD-tree keeps the distance field exact and smooth away from Voronoi
    boundaries, which analytic differentiation needs.
    """

    def __init__(self, occ: OccupancyGrid | None):
        self._half_cell = 0.0
        self._tree = None
        if occ is not None and occ.occupied.any():
            ref = occ.as_grid()
            iy, ix = np.nonzero(occ.occupied)
            centers = np.column_stack([
                ref.origin[0] + ix * ref.resolution,
                ref.origin[1] + iy * ref.resolution,
            ])
            self._tree = cKDTree(centers)
            self._half_cell = 0.5 * occ.resolution

    def clearance(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(distance, unit direction away from the obstacle) per point."""
        pts = np.atleast_2d(points)
        if self._tree is None:
            return np.full(len(pts), np.inf), np.zeros((len(pts), 2))
        dist, idx = self._tree.query(pts)
        nearest = self._tree.data[idx]
        away = pts - nearest
        norm = np.linalg.norm(away, axis=1, keepdims=True)
        away = np.divide(away, norm, out=np.zeros_like(away), where=norm > 0)
        return dist - self._half_cell, away


def _hinge(d: np.ndarray, d_safe: float) -> tuple[np.ndarray, np.ndarray]:
    """Cubic clearance hinge (d_safe - d)^3 below d_safe, and d/dd."""
    gap = np.maximum(d_safe - d, 0.0)
    return gap**3, -3.0 * gap**2


def cost_collision(
    traj: Trajectory,
    belief: BeliefState,
    occ: OccupancyGrid | None,
    weights: PlannerWeights,
    static_obstacles: StaticObstacles | None = None,
) -> tuple[float, np.ndarray]:
    """Clearance penalty against propagated tracks and static structure.

    Tracks run at constant velocity to each knot's time; their footprint
    radius is subtracted from the center distance. The vehicle is a point;
    d_safe carries its margin.
    """
    statics = static_obstacles if static_obstacles is not None else StaticObstacles(occ)
    pts = traj.xy
    n = len(traj)
    knot_dt = traj.knot_times()
    total = 0.0
    grad = np.zeros((n, 2))

    for tr in belief.tracks:
        centers = tr.position[None, :] + np.outer(knot_dt, tr.velocity)
        delta = pts - centers
        dist = np.hypot(delta[:, 0], delta[:, 1])
        h, dh = _hinge(dist - tr.radius, weights.d_safe)
        total += float(np.sum(h))
        with np.errstate(invalid="ignore"):
            direction = np.divide(delta, dist[:, None], out=np.zeros_like(delta), where=dist[:, None] > 0)
        grad += dh[:, None] * direction

    dist, away = statics.clearance(pts)
    finite = np.isfinite(dist)
    if finite.any():
        h, dh = _hinge(dist[finite], weights.d_safe)
        total += float(np.sum(h))
        grad[finite] += dh[:, None] * away[finite]
    return total, grad


# ---------------------------------------------------------------------------
# smoothness and feasibility


def cost_smoothness(traj: Trajectory) -> tuple[float, np.ndarray]:
    """Sum of squared second and third control-point differences.

    Raw differences, not divided by the knot time: dividing by dt^2/dt^3
    inflates this term by 4-6 orders of magnitude against the cubic-meter
    collision hinge, at which point the weighted objective prefers
    penetration over avoidance. Raw differences are the convention of the
    control-point planner family these weights come from and keep the
    default weights balanced. Zero for collinear equally spaced points.
    """
    p = traj.xy
    acc = p[2:] - 2 * p[1:-1] + p[:-2]
    jerk = p[3:] - 3 * p[2:-1] + 3 * p[1:-2] - p[:-3]
    total = float(np.sum(acc**2) + np.sum(jerk**2))
    grad = np.zeros_like(p)
    # d/dp of sum ||A_i||^2, A_i = p_{i+2} - 2 p_{i+1} + p_i
    c = 2.0 * acc
    grad[0:-2] += c
    grad[1:-1] += -2.0 * c
    grad[2:] += c
    # d/dp of sum ||J_i||^2, J_i = p_{i+3} - 3 p_{i+2} + 3 p_{i+1} - p_i
    cj = 2.0 * jerk
    grad[0:-3] += -cj
    grad[1:-2] += 3.0 * cj
    grad[2:-1] += -3.0 * cj
    grad[3:] += cj
    return total, grad


def _limit_penalty(x: np.ndarray, limit: float) -> tuple[float, np.ndarray]:
    """Per-axis cubic hinge above |x| = limit, with gradient wrt x."""
    over = np.abs(x) - limit
    mask = over > 0
    val = float(np.sum(np.where(mask, over**3, 0.0)))
    grad = np.where(mask, 3.0 * over**2 * np.sign(x), 0.0)
    return val, grad


def cost_feasibility(traj: Trajectory, weights: PlannerWeights) -> tuple[float, np.ndarray]:
    """Soft penalties on per-axis velocity/acceleration/jerk limit violations."""
    p = traj.xy
    dt = traj.dt_knot
    vel = (p[1:] - p[:-1]) / dt
    acc = (p[2:] - 2 * p[1:-1] + p[:-2]) / dt**2
    jerk = (p[3:] - 3 * p[2:-1] + 3 * p[1:-2] - p[:-3]) / dt**3

    total = 0.0
    grad = np.zeros_like(p)

    val, g = _limit_penalty(vel, weights.v_max)
    total += weights.omega_v * val
    gv = weights.omega_v * g / dt
    grad[1:] += gv
    grad[:-1] -= gv

    val, g = _limit_penalty(acc, weights.a_max)
    total += weights.omega_a * val
    ga = weights.omega_a * g / dt**2
    grad[:-2] += ga
    grad[1:-1] += -2.0 * ga
    grad[2:] += ga

    val, g = _limit_penalty(jerk, weights.j_max)
    total += weights.omega_j * val
    gj = weights.omega_j * g / dt**3
    grad[:-3] += -gj
    grad[1:-2] += 3.0 * gj
    grad[2:-1] += -3.0 * gj
    grad[3:] += gj
    return total, grad


# ---------------------------------------------------------------------------
# assembly and minimization


@dataclass
class PlanningProblem:
    """Frozen inputs for one optimization solve."""

    belief: BeliefState
    occ: OccupancyGrid | None
    weights: PlannerWeights
    urgency_params: UrgencyParams
    belief_params: BeliefParams
    sensing_range: float
    pin_goal: bool = True
    u_p: BeliefGrid | None = None  # frozen observation field; None disables J_v
    statics: StaticObstacles | None = None

    def __post_init__(self) -> None:
        if self.statics is None:
            self.statics = StaticObstacles(self.occ)


def evaluate_costs(traj: Trajectory, problem: PlanningProblem) -> CostReport:
    """All four terms and the weighted gradient at a trajectory."""
    w = problem.weights
    if problem.u_p is not None and w.lambda_v > 0:
        j_v, g_v = observation_cost_on_field(traj, problem.u_p, problem.sensing_range)
    else:
        j_v, g_v = 0.0, np.zeros((len(traj), 2))
    j_c, g_c = cost_collision(traj, problem.belief, problem.occ, w, problem.statics)
    j_s, g_s = cost_smoothness(traj)
    j_d, g_d = cost_feasibility(traj, w)
    total = w.lambda_v * j_v + w.lambda_c * j_c + w.lambda_s * j_s + w.lambda_d * j_d
    grad = w.lambda_v * g_v + w.lambda_c * g_c + w.lambda_s * g_s + w.lambda_d * g_d
    return CostReport(total, j_v, j_c, j_s, j_d, grad, 0, 0.0)


def optimize(
    traj0: Trajectory,
    belief: BeliefState,
    occ: OccupancyGrid | None,
    weights: PlannerWeights,
    urgency_params: UrgencyParams,
    budget: OptimizeBudget | None = None,
    *,
    belief_params: BeliefParams | None = None,
    sensing_range: float | None = None,
    pin_goal: bool = True,
    refresh_field: bool = False,
) -> tuple[Trajectory, CostReport]:
    """Minimize the weighted objective over the free control points.

    The observation field is built once from the initial guess and held
    fixed during the solve (field lag); pass ``refresh_field`` to rebuild it
    every iteration. The first point is always pinned, the last when
    ``pin_goal``. The best iterate seen is returned, so the result never
    costs more than the initial guess.

    Raises:
        ValueError: the initial cost is not finite.
    """
    budget = budget or OptimizeBudget()
    bp = belief_params if belief_params is not None else BeliefParams()
    r_sense = sensing_range if sensing_range is not None else 5.0

    u_p = None
    if weights.lambda_v > 0:
        u_p = build_urgency_field(belief, traj0, urgency_params, bp).u_p
    problem = PlanningProblem(belief, occ, weights, urgency_params, bp, r_sense, pin_goal, u_p)

    n = len(traj0)
    free_lo = 1
    free_hi = n - 1 if pin_goal else n
    if free_hi <= free_lo:
        raise ValueError("no free control points to optimize")

    start = time.perf_counter()
    report0 = evaluate_costs(traj0, problem)
    if not np.isfinite(report0.total):
        raise ValueError(
            f"initial cost is not finite: total={report0.total} "
            f"(j_v={report0.j_v}, j_c={report0.j_c}, j_s={report0.j_s}, j_d={report0.j_d})"
        )

    if budget.max_iterations <= 0:
        report0.status = "budget_exhausted"
        report0.wall_time_ms = (time.perf_counter() - start) * 1e3
        return traj0, report0

    template = traj0.points.copy()
    best = {"x": template[free_lo:free_hi, :2].ravel().copy(), "f": report0.total}
    n_evals = [0]

    def with_free(x: np.ndarray) -> Trajectory:
        pts = template.copy()
        pts[free_lo:free_hi, :2] = x.reshape(-1, 2)
        return Trajectory(pts, traj0.dt_knot, traj0.t0)

    def objective(x: np.ndarray):
        if budget.max_wall_time_s is not None and time.perf_counter() - start > budget.max_wall_time_s:
            raise _BudgetExceeded
        n_evals[0] += 1
        t = with_free(x)
        if refresh_field and weights.lambda_v > 0:
            problem.u_p = build_urgency_field(belief, t, urgency_params, bp).u_p
        rep = evaluate_costs(t, problem)
        if rep.total < best["f"]:
            best["f"] = rep.total
            best["x"] = x.copy()
        return rep.total, rep.gradient[free_lo:free_hi].ravel()

    status = "converged"
    iterations = 0
    try:
        res = sciopt.minimize(
            objective,
            best["x"],
            jac=True,
            method="L-BFGS-B",
            options={
                "maxcor": 8,
                "maxiter": budget.max_iterations,
                "gtol": budget.grad_tol,
                "ftol": 1e-12,
            },
        )
        iterations = int(res.nit)
        if not res.success:
            msg = str(res.message or "").lower()
            status = "line_search_failed" if "lnsrch" in msg or "line search" in msg else "max_iterations"
    except _BudgetExceeded:
        status = "budget_exhausted"

    out = with_free(best["x"])
    report = evaluate_costs(out, problem)
    report.iterations = iterations
    report.wall_time_ms = (time.perf_counter() - start) * 1e3
    report.status = status
    return out, report
