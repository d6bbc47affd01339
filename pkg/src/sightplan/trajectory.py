"""Timed control-point trajectory with ground-plane projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Trajectory:
    """Sequence of control points at a fixed knot spacing.

    Points are 3D with the altitude carried but held constant; planning and
    risk evaluation use the xy projection. The first point is the vehicle's
    current state at time ``t0``.
    """

    points: np.ndarray  # (n, 3)
    dt_knot: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError(f"points must be (n, 3), got {self.points.shape}")
        if len(self.points) < 4:
            raise ValueError("need at least 4 control points for jerk differences")
        if self.dt_knot <= 0:
            raise ValueError(f"dt_knot must be > 0, got {self.dt_knot}")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def xy(self) -> np.ndarray:
        return self.points[:, :2]

    @property
    def span(self) -> float:
        """Time covered by the control points."""
        return (len(self.points) - 1) * self.dt_knot

    def position_xy(self, t_offset) -> np.ndarray:
        """Linear interpolation of the xy path at offsets from t0, clamped
        to [0, span]."""
        t = np.clip(np.asarray(t_offset, dtype=float), 0.0, self.span)
        s = t / self.dt_knot
        i = np.minimum(s.astype(int), len(self.points) - 2)
        frac = (s - i)[..., None]
        return self.xy[i] * (1.0 - frac) + self.xy[i + 1] * frac

    def velocity_xy(self, t_offset) -> np.ndarray:
        """Segment (finite-difference) xy velocity at offsets from t0.

        Piecewise constant per knot interval; offsets beyond the end use the
        last segment's velocity.
        """
        t = np.clip(np.asarray(t_offset, dtype=float), 0.0, self.span)
        s = t / self.dt_knot
        i = np.minimum(s.astype(int), len(self.points) - 2)
        return (self.xy[i + 1] - self.xy[i]) / self.dt_knot

    def knot_times(self) -> np.ndarray:
        """Offsets of the knots from t0."""
        return np.arange(len(self.points)) * self.dt_knot


def straight_line(start_xy, end_xy, n_points: int, dt_knot: float, z: float = 1.0, t0: float = 0.0) -> Trajectory:
    """Uniformly spaced straight segment from start to end."""
    start_xy = np.asarray(start_xy, dtype=float)
    end_xy = np.asarray(end_xy, dtype=float)
    frac = np.linspace(0.0, 1.0, n_points)[:, None]
    xy = start_xy * (1.0 - frac) + end_xy * frac
    pts = np.column_stack([xy, np.full(n_points, z)])
    return Trajectory(pts, dt_knot, t0)
