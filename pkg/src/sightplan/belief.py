"""Recursive obstacle belief: diffusing potential-obstacle density plus
recognized-obstacle tracks.

The potential map holds, per cell, the probability that an undetected
dynamic obstacle occupies it. Prediction diffuses it with a Gaussian motion
kernel and advances tracks by their velocities; observation zeroes the
density inside the observed region and replaces in-region tracks wholesale
with fresh detections.

States are values: every operation returns a new ``BeliefState``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import BeliefGrid, SectorRegion, gaussian_blur


@dataclass
class BeliefParams:
    """Belief evolution parameters.

    ``variance_law`` picks how positional uncertainty scales with elapsed
    time: "diffusion" treats motion noise as white (variance grows like t
    for velocity-driven spread and t^2 for acceleration-driven spread, the
    default), "kinematic" treats the sampled velocity/acceleration as held
    constant over the interval (t^2 / t^4).
    """

    p_prior: float = 0.2
    sigma_vel: float = 2.0
    sigma_acc: float = 10.0
    dt: float = 0.1
    variance_law: str = "diffusion"
    # std-dev floor for rendered/urgency Gaussians: one map cell, so a fresh
    # track is a sharp bump rather than a delta spike
    sigma_floor: float = 0.1

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.p_prior < 0 or self.sigma_vel <= 0 or self.sigma_acc <= 0:
            raise ValueError("p_prior must be >= 0, sigma_vel/sigma_acc > 0")
        if self.sigma_floor <= 0:
            raise ValueError("sigma_floor must be > 0")
        if self.variance_law not in ("diffusion", "kinematic"):
            raise ValueError(f"unknown variance_law {self.variance_law!r}")

    def blur_covariance(self) -> np.ndarray:
        """Per-step diffusion covariance for the potential map."""
        if self.variance_law == "diffusion":
            return self.sigma_vel**2 * self.dt * np.eye(2)
        return self.sigma_vel**2 * self.dt**2 * np.eye(2)

    def spread_variance_vel(self, t) -> np.ndarray:
        """Isotropic variance of velocity-driven spread after time t."""
        t = np.asarray(t, dtype=float)
        if self.variance_law == "diffusion":
            return self.sigma_vel**2 * t
        return self.sigma_vel**2 * t**2

    def spread_variance_acc(self, t) -> np.ndarray:
        """Isotropic variance of acceleration-driven spread after time t."""
        t = np.asarray(t, dtype=float)
        if self.variance_law == "diffusion":
            return 0.5 * self.sigma_acc**2 * t**2
        return 0.25 * self.sigma_acc**2 * t**4


@dataclass
class ObstacleTrack:
    """State of a recognized dynamic obstacle."""

    id: int
    position: np.ndarray
    velocity: np.ndarray
    time_since_observed: float
    radius: float

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        if self.time_since_observed < 0:
            raise ValueError("time_since_observed must be >= 0")
        if self.radius <= 0:
            raise ValueError("radius must be > 0")


@dataclass
class Detection:
    """One obstacle observed inside the current field of view."""

    position: np.ndarray
    velocity: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)


@dataclass
class BeliefState:
    """Potential-obstacle density map plus recognized tracks at time t."""

    m_p: BeliefGrid
    tracks: list[ObstacleTrack] = field(default_factory=list)
    t: float = 0.0
    next_track_id: int = 0


def init_belief(params: BeliefParams, grid_shape: tuple[int, int], *, origin=(0.05, 0.05), resolution: float = 0.1) -> BeliefState:
    """Uniform prior density, no tracks, t = 0.

    Args:
        grid_shape: (width, height) in cells.
        origin: world position of the (0, 0) cell center.
    """
    width, height = grid_shape
    m_p = BeliefGrid(np.asarray(origin, dtype=float), resolution, np.full((height, width), float(params.p_prior)))
    return BeliefState(m_p=m_p, tracks=[], t=0.0, next_track_id=0)


def predict(state: BeliefState, params: BeliefParams) -> BeliefState:
    """One prediction step: diffuse the potential map, propagate tracks.

    The diffusion sees a constant exterior at the prior density, so cleared
    space near the map edge refills from the unexplored frontier. The map is
    clipped to [0, p_prior]; diffusion of a field bounded by the prior with
    prior-valued exterior cannot exceed it, the clip just pins the bound
    under floating point.
    """
    blurred = gaussian_blur(state.m_p, params.blur_covariance(), exterior=params.p_prior)
    np.clip(blurred.values, 0.0, params.p_prior, out=blurred.values)
    tracks = [
        replace(
            tr,
            position=tr.position + tr.velocity * params.dt,
            time_since_observed=tr.time_since_observed + params.dt,
        )
        for tr in state.tracks
    ]
    return BeliefState(m_p=blurred, tracks=tracks, t=state.t + params.dt, next_track_id=state.next_track_id)


def _region_mask(state: BeliefState, fov) -> np.ndarray:
    """Cell mask of the observed region; fov is a SectorRegion or bool mask."""
    if isinstance(fov, SectorRegion):
        from .grid import rasterize_sector

        return rasterize_sector(state.m_p, fov)
    mask = np.asarray(fov, dtype=bool)
    if mask.shape != state.m_p.values.shape:
        raise ValueError(f"fov mask shape {mask.shape} != grid shape {state.m_p.values.shape}")
    return mask


def _in_region(state: BeliefState, fov, point: np.ndarray) -> bool:
    if isinstance(fov, SectorRegion):
        return bool(fov.contains(point))
    ix, iy = state.m_p.cell_of(point)
    if not state.m_p.in_bounds(ix, iy):
        return False
    mask = np.asarray(fov, dtype=bool)
    return bool(mask[iy, ix])


def observe(state: BeliefState, fov, detections: list[Detection], params: BeliefParams) -> BeliefState:
    """Observation update for the region ``fov``.

    Zeroes the potential density inside the region, deletes tracks whose
    position lies inside it, and creates one fresh track per detection.
    ``fov`` may be a SectorRegion (geometric field of view) or a boolean
    cell mask (e.g. an occlusion-limited view); None means no observation.

    Raises:
        ValueError: a detection lies outside the observed region.
    """
    if fov is None:
        if detections:
            raise ValueError("detections supplied without a field of view")
        return state

    for d in detections:
        if not _in_region(state, fov, d.position):
            raise ValueError(f"detection at {d.position} lies outside the observed region")

    mask = _region_mask(state, fov)
    m_p = state.m_p.copy()
    m_p.values[mask] = 0.0

    kept = [tr for tr in state.tracks if not _in_region(state, fov, tr.position)]
    next_id = state.next_track_id
    new_tracks = []
    for d in detections:
        new_tracks.append(
            ObstacleTrack(
                id=next_id,
                position=d.position.copy(),
                velocity=d.velocity.copy(),
                time_since_observed=0.0,
                radius=d.radius,
            )
        )
        next_id += 1
    return BeliefState(m_p=m_p, tracks=kept + new_tracks, t=state.t, next_track_id=next_id)


def step(state: BeliefState, fov, detections: list[Detection], params: BeliefParams) -> BeliefState:
    """One recursive update: predict, then observe."""
    return observe(predict(state, params), fov, detections, params)


def render_m_r(state: BeliefState, params: BeliefParams) -> BeliefGrid:
    """Raster of the recognized-obstacle belief.

    One Gaussian density per track, mean at its position, isotropic variance
    from the acceleration spread law at its staleness, sampled at cell
    centers and scaled by cell area. The variance is floored at
    sigma_floor^2 so a freshly observed track is a sharp unit bump, not a
    delta spike.
    """
    grid = state.m_p
    out = np.zeros_like(grid.values)
    if state.tracks:
        x, y = grid.cell_centers()
        for tr in state.tracks:
            var = max(float(params.spread_variance_acc(tr.time_since_observed)), params.sigma_floor**2)
            q = (x - tr.position[0]) ** 2 + (y - tr.position[1]) ** 2
            out += np.exp(-0.5 * q / var) / (2.0 * np.pi * var)
    return grid.like(out * grid.resolution**2)
