"""Observation urgency: time-integrated collision risk for potential and
recognized obstacles, and camera-yaw selection from it.

The point-wise urgency of a location is the midpoint-rule integral, over the
planning horizon, of (belief density) x (Gaussian likelihood that an obstacle
there could reach the planned path) x (a velocity- or acceleration-space
Jacobian correction), with a non-negative time weighting.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .belief import BeliefParams, BeliefState, ObstacleTrack
from .grid import BeliefGrid, DiskRegion, SectorRegion, integrate_disk, integrate_sector, wrap_angle
from .trajectory import Trajectory

# horizontal field of view of a small stereo depth module (~87 deg total)
DEFAULT_HALF_ANGLE = np.deg2rad(43.5)
DEFAULT_RANGE = 5.0


@dataclass
class UrgencyParams:
    """Horizon, integration cutoff, and term weights.

    ``weight_shape`` selects the time weighting: "constant" uses the bare
    scalars, "exponential" discounts by exp(-t / decay_time).
    """

    horizon: float = 2.0
    t_min: float = 0.1
    lambda_p: float = 1.0
    lambda_r: float = 6.0
    weight_shape: str = "constant"
    decay_time: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.t_min < self.horizon):
            raise ValueError(f"need 0 < t_min < horizon, got {self.t_min}, {self.horizon}")
        if self.lambda_p < 0 or self.lambda_r < 0:
            raise ValueError("weights must be >= 0")
        if self.weight_shape not in ("constant", "exponential"):
            raise ValueError(f"unknown weight_shape {self.weight_shape!r}")

    def weight(self, base: float, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.weight_shape == "constant":
            return np.full_like(t, base)
        return base * np.exp(-t / self.decay_time)


@dataclass
class SensorFov:
    """Steerable camera: current yaw plus the sector geometry it sweeps."""

    yaw: float = 0.0
    half_angle: float = DEFAULT_HALF_ANGLE
    range: float = DEFAULT_RANGE


@dataclass
class UrgencyField:
    """Point-wise potential urgency raster plus per-track urgency scores."""

    u_p: BeliefGrid
    u_r: dict[int, float] = field(default_factory=dict)
    t0: float = 0.0


def _quadrature_times(lo: float, hi: float, dt: float) -> np.ndarray:
    """Midpoint samples of [lo, hi] at step dt (full steps only)."""
    n = int(round((hi - lo) / dt))
    if n <= 0:
        return np.zeros(0)
    return lo + (np.arange(n) + 0.5) * dt


def potential_risk_kernel(
    points: np.ndarray,
    traj: Trajectory,
    params: UrgencyParams,
    belief_params: BeliefParams,
    quad_dt: float | None = None,
) -> np.ndarray:
    """Potential-obstacle urgency per unit belief density at each point.

    For a candidate location p, integrates over future time t the Gaussian
    density of the velocity an obstacle at p would need to meet the path at
    t, expressed in position space (variance grows with the velocity spread
    law), times |d/dt| of that required speed. Point-coincident samples
    contribute zero Jacobian.

    Args:
        points: (m, 2) world locations.
        quad_dt: integration step; defaults to the belief step.

    Returns:
        (m,) non-negative kernel values; multiply by the belief density to
        get the urgency.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dt = belief_params.dt if quad_dt is None else quad_dt
    ts = _quadrature_times(params.t_min, params.horizon, dt)
    floor = belief_params.sigma_floor**2
    acc = np.zeros(len(pts))
    for t in ts:
        tau = traj.position_xy(t)
        tau_dot = traj.velocity_xy(t)
        e = tau - pts
        en = np.hypot(e[:, 0], e[:, 1])
        var = max(float(belief_params.spread_variance_vel(t)), floor)
        phi = np.exp(-0.5 * en**2 / var) / (2.0 * np.pi * var)
        with np.errstate(invalid="ignore", divide="ignore"):
            jac = (e @ tau_dot) / (t * en) - en / t**2
        jac = np.where(en > 0.0, jac, 0.0)
        acc += float(params.weight(params.lambda_p, t)) * phi * np.abs(jac) * dt
    return acc


def urgency_potential(
    p,
    traj: Trajectory,
    m_p_value: float,
    params: UrgencyParams,
    belief_params: BeliefParams,
    quad_dt: float | None = None,
) -> float:
    """Urgency of a single location holding belief density ``m_p_value``."""
    if m_p_value < 0:
        raise ValueError(f"belief density must be >= 0, got {m_p_value}")
    kernel = potential_risk_kernel(np.asarray(p, dtype=float)[None, :], traj, params, belief_params, quad_dt)
    return float(m_p_value * kernel[0])


def urgency_recognized(
    track: ObstacleTrack,
    traj: Trajectory,
    params: UrgencyParams,
    belief_params: BeliefParams,
    quad_dt: float | None = None,
) -> float:
    """Urgency of a recognized track over the horizon.

    The track's predicted position runs at its recorded velocity; the
    likelihood that acceleration noise carries it onto the path uses the
    acceleration spread law at (t - staleness), with the integrand cut off
    where that lag drops below t_min.
    """
    dt = belief_params.dt if quad_dt is None else quad_dt
    lo = track.time_since_observed + params.t_min
    ts = _quadrature_times(lo, params.horizon, dt)
    if ts.size == 0:
        return 0.0
    floor = belief_params.sigma_floor**2
    t_o = track.time_since_observed
    total = 0.0
    tau = traj.position_xy(ts)
    tau_dot = traj.velocity_xy(ts)
    p_obs = track.position[None, :] + np.outer(ts, track.velocity)
    e = tau - p_obs
    en = np.hypot(e[:, 0], e[:, 1])
    q = ts - t_o
    var = np.maximum(belief_params.spread_variance_acc(q), floor)
    phi = np.exp(-0.5 * en**2 / var) / (2.0 * np.pi * var)
    e_dot = tau_dot - track.velocity[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        jac = 2.0 * np.sum(e * e_dot, axis=1) / (en * q**2) - 4.0 * en / q**3
    jac = np.where(en > 0.0, jac, 0.0)
    total = float(np.sum(params.weight(params.lambda_r, ts) * phi * np.abs(jac) * dt))
    return total


def build_urgency_field(
    state: BeliefState,
    traj: Trajectory,
    params: UrgencyParams,
    belief_params: BeliefParams,
) -> UrgencyField:
    """Evaluate point-wise potential urgency at every cell plus per-track scores."""
    grid = state.m_p
    x, y = grid.cell_centers()
    pts = np.column_stack([x.ravel(), y.ravel()])
    kernel = potential_risk_kernel(pts, traj, params, belief_params)
    u_p = grid.like((grid.values.ravel() * kernel).reshape(grid.values.shape))
    u_r = {tr.id: urgency_recognized(tr, traj, params, belief_params) for tr in state.tracks}
    return UrgencyField(u_p=u_p, u_r=u_r, t0=traj.t0)


def region_urgency(field: UrgencyField, region, tracks: list[ObstacleTrack]) -> float:
    """Aggregate urgency over a region: raster integral plus in-region tracks."""
    if isinstance(region, SectorRegion):
        total = integrate_sector(field.u_p, region)
    elif isinstance(region, DiskRegion):
        total = integrate_disk(field.u_p, region)
    else:
        raise TypeError(f"unsupported region type {type(region).__name__}")
    for tr in tracks:
        if region.contains(tr.position):
            total += field.u_r.get(tr.id, 0.0)
    return total


def yaw_candidates(n: int) -> np.ndarray:
    """Uniform absolute yaw grid, wrapped to (-pi, pi]."""
    return wrap_angle(2.0 * np.pi * np.arange(n) / n)


def select_yaw(
    field: UrgencyField,
    pose,
    sensor: SensorFov,
    tracks: list[ObstacleTrack],
    n_candidates: int = 72,
) -> float:
    """Yaw (from a uniform candidate grid) maximizing in-sector urgency.

    Ties break toward the smallest angular distance to the sensor's current
    yaw, then toward the numerically smallest candidate.
    """
    if n_candidates < 8:
        raise ValueError(f"need at least 8 yaw candidates, got {n_candidates}")
    pose = np.asarray(pose, dtype=float)
    grid = field.u_p
    x, y = grid.cell_centers()
    dx = (x - pose[0]).ravel()
    dy = (y - pose[1]).ravel()
    dist = np.hypot(dx, dy)
    in_range = dist <= sensor.range
    bearing = np.arctan2(dy[in_range], dx[in_range])
    apex_cells = dist[in_range] < 1e-12
    vals = grid.values.ravel()[in_range]
    res2 = grid.resolution**2

    track_pos = np.array([tr.position for tr in tracks]).reshape(-1, 2)
    track_scores = np.array([field.u_r.get(tr.id, 0.0) for tr in tracks])
    tdx = track_pos[:, 0] - pose[0]
    tdy = track_pos[:, 1] - pose[1]
    tdist = np.hypot(tdx, tdy)
    tbearing = np.arctan2(tdy, tdx)

    candidates = yaw_candidates(n_candidates)
    best_score = -np.inf
    best_yaw = candidates[0]
    best_key = (np.inf, np.inf)
    for cand in candidates:
        sel = (np.abs(wrap_angle(bearing - cand)) <= sensor.half_angle) | apex_cells
        score = float(np.sum(vals[sel]) * res2)
        t_in = (tdist <= sensor.range) & (
            (np.abs(wrap_angle(tbearing - cand)) <= sensor.half_angle) | (tdist < 1e-12)
        )
        for j in np.flatnonzero(t_in):
            score += float(track_scores[j])
        key = (abs(float(wrap_angle(cand - sensor.yaw))), float(cand))
        if score > best_score or (score == best_score and key < best_key):
            best_score = score
            best_yaw = float(cand)
            best_key = key
    return best_yaw
