"""Uniform-grid scalar fields and the geometry primitives built on them.

Everything here is a pure function of its inputs: Gaussian diffusion of a
field, rasterization of sector/disk regions by cell-center membership,
region integrals, boundary sampling of circles for line integrals, and
supercover ray casting for line-of-sight tests.

Conventions: a grid stores ``values[iy, ix]`` with the world position of
cell ``(ix, iy)`` center at ``origin + (ix, iy) * resolution``. Angles are
radians in (-pi, pi].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


@dataclass
class BeliefGrid:
    """Non-negative scalar field on a uniform 2D grid.

    Args:
        origin: world coordinates (m) of the (0, 0) cell center.
        resolution: cell edge length (m).
        values: (height, width) float array, finite and >= 0.
    """

    origin: np.ndarray
    resolution: float
    values: np.ndarray

    def __post_init__(self) -> None:
        self.origin = np.asarray(self.origin, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.resolution <= 0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")
        if self.values.ndim != 2 or min(self.values.shape) < 1:
            raise ValueError(f"values must be a 2D array, got shape {self.values.shape}")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "BeliefGrid":
        return BeliefGrid(self.origin.copy(), self.resolution, self.values.copy())

    def like(self, values: np.ndarray) -> "BeliefGrid":
        """New grid with the same geometry and the given values."""
        return BeliefGrid(self.origin.copy(), self.resolution, values)

    def cell_of(self, point) -> tuple[int, int]:
        """(ix, iy) of the cell containing a world point (may be out of bounds)."""
        p = np.asarray(point, dtype=float)
        ij = np.floor((p - self.origin) / self.resolution + 0.5).astype(int)
        return int(ij[0]), int(ij[1])

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def cell_center(self, ix: int, iy: int) -> np.ndarray:
        return self.origin + np.array([ix, iy], dtype=float) * self.resolution

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid (X, Y) of cell-center world coordinates, each (height, width)."""
        xs = self.origin[0] + np.arange(self.width) * self.resolution
        ys = self.origin[1] + np.arange(self.height) * self.resolution
        return np.meshgrid(xs, ys)


@dataclass
class OccupancyGrid:
    """Binary static-structure grid sharing the BeliefGrid layout."""

    origin: np.ndarray
    resolution: float
    occupied: np.ndarray  # (height, width) bool

    def __post_init__(self) -> None:
        self.origin = np.asarray(self.origin, dtype=float)
        self.occupied = np.asarray(self.occupied, dtype=bool)
        if self.resolution <= 0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")

    @property
    def height(self) -> int:
        return self.occupied.shape[0]

    @property
    def width(self) -> int:
        return self.occupied.shape[1]

    def as_grid(self) -> BeliefGrid:
        return BeliefGrid(self.origin.copy(), self.resolution, self.occupied.astype(float))


@dataclass
class SectorRegion:
    """Fan-shaped observation region: apex, central yaw, half-angle, range."""

    apex: np.ndarray
    yaw: float
    half_angle: float
    range: float

    def __post_init__(self) -> None:
        self.apex = np.asarray(self.apex, dtype=float)
        if not (0.0 < self.half_angle <= np.pi):
            raise ValueError(f"half_angle must be in (0, pi], got {self.half_angle}")
        if self.range <= 0:
            raise ValueError(f"range must be > 0, got {self.range}")

    def contains(self, points) -> np.ndarray:
        """Membership test for world points, shape (..., 2) -> bool array."""
        p = np.asarray(points, dtype=float)
        d = p - self.apex
        dist = np.hypot(d[..., 0], d[..., 1])
        bearing = np.arctan2(d[..., 1], d[..., 0])
        rel = np.abs(wrap_angle(bearing - self.yaw))
        # the apex itself has no bearing; it always belongs to the sector
        return (dist <= self.range) & ((rel <= self.half_angle) | (dist < 1e-12))


@dataclass
class DiskRegion:
    """Circular region (sensing footprint): center and radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        self.center = np.asarray(self.center, dtype=float)
        if self.radius <= 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        d = p - self.center
        return np.hypot(d[..., 0], d[..., 1]) <= self.radius


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a), 2.0 * np.pi)


def _axis_kernel(sigma_cells: float) -> np.ndarray:
    """1D Gaussian taps truncated at 3 sigma and normalized to sum 1.

    Below half a cell the kernel degenerates to the identity so that a
    vanishing covariance leaves the field bit-for-bit unchanged.
    """
    if sigma_cells < 0.5:
        return np.array([1.0])
    radius = int(np.ceil(3.0 * sigma_cells))
    taps = np.exp(-0.5 * (np.arange(-radius, radius + 1) / sigma_cells) ** 2)
    return taps / taps.sum()


def gaussian_blur(grid: BeliefGrid, covariance, exterior: float = 0.0) -> BeliefGrid:
    """Convolve a field with a sampled bivariate Gaussian kernel.

    The kernel is the Gaussian density sampled at cell offsets, truncated at
    3 sigma per axis and renormalized to unit sum (mass-conserving in the
    interior). Cells beyond the map edge are treated as holding the constant
    ``exterior`` value, so mass diffuses in from unexplored boundary.

    Diagonal covariances run as two separable 1D passes; with a constant
    exterior that is exactly equal to the dense 2D convolution because the
    exterior is constant along entire rows and columns.

    Args:
        grid: input field.
        covariance: 2x2 symmetric positive-definite matrix (m^2).
        exterior: field value assumed outside the map.

    Raises:
        ValueError: covariance not symmetric positive definite.
    """
    cov = np.asarray(covariance, dtype=float)
    if cov.shape != (2, 2) or not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be a symmetric 2x2 matrix")
    if np.linalg.det(cov) <= 0 or cov[0, 0] <= 0 or cov[1, 1] <= 0:
        raise ValueError("covariance must be positive definite")

    res = grid.resolution
    sx = np.sqrt(cov[0, 0]) / res
    sy = np.sqrt(cov[1, 1]) / res
    if abs(cov[0, 1]) > 1e-15 * max(cov[0, 0], cov[1, 1]):
        return grid.like(_dense_blur(grid.values, cov, res, exterior))

    out = grid.values
    kx = _axis_kernel(sx)
    if kx.size > 1:
        out = ndimage.convolve1d(out, kx, axis=1, mode="constant", cval=exterior)
    ky = _axis_kernel(sy)
    if ky.size > 1:
        out = ndimage.convolve1d(out, ky, axis=0, mode="constant", cval=exterior)
    if out is grid.values:
        out = out.copy()
    return grid.like(out)


def _dense_blur(values: np.ndarray, cov: np.ndarray, res: float, exterior: float) -> np.ndarray:
    """Full 2D kernel path for correlated covariances."""
    sx = np.sqrt(cov[0, 0]) / res
    sy = np.sqrt(cov[1, 1]) / res
    if sx < 0.5 and sy < 0.5:
        return values.copy()
    rx = int(np.ceil(3.0 * max(sx, 0.5)))
    ry = int(np.ceil(3.0 * max(sy, 0.5)))
    ox, oy = np.meshgrid(np.arange(-rx, rx + 1), np.arange(-ry, ry + 1))
    offsets = np.stack([ox, oy], axis=-1) * res
    inv = np.linalg.inv(cov)
    quad = np.einsum("...i,ij,...j->...", offsets, inv, offsets)
    kernel = np.exp(-0.5 * quad)
    kernel /= kernel.sum()
    return ndimage.convolve(values, kernel, mode="constant", cval=exterior)


def rasterize_sector(grid: BeliefGrid | OccupancyGrid, region: SectorRegion) -> np.ndarray:
    """Boolean mask of cells whose centers lie inside the sector."""
    ref = grid.as_grid() if isinstance(grid, OccupancyGrid) else grid
    x, y = ref.cell_centers()
    pts = np.stack([x, y], axis=-1)
    return region.contains(pts)


def rasterize_disk(grid: BeliefGrid, region: DiskRegion) -> np.ndarray:
    """Boolean mask of cells whose centers lie inside the disk."""
    x, y = grid.cell_centers()
    return (x - region.center[0]) ** 2 + (y - region.center[1]) ** 2 <= region.radius**2


def integrate_disk(grid: BeliefGrid, region: DiskRegion) -> float:
    """Sum of cell values inside the disk times cell area.

    Cells outside the map contribute nothing; membership is by cell center.
    """
    res = grid.resolution
    # clip the scan to the disk's bounding box for speed
    lo = grid.cell_of(region.center - region.radius)
    hi = grid.cell_of(region.center + region.radius)
    x0, y0 = max(lo[0], 0), max(lo[1], 0)
    x1, y1 = min(hi[0], grid.width - 1), min(hi[1], grid.height - 1)
    if x1 < x0 or y1 < y0:
        return 0.0
    xs = grid.origin[0] + np.arange(x0, x1 + 1) * res
    ys = grid.origin[1] + np.arange(y0, y1 + 1) * res
    x, y = np.meshgrid(xs, ys)
    inside = (x - region.center[0]) ** 2 + (y - region.center[1]) ** 2 <= region.radius**2
    return float(np.sum(grid.values[y0 : y1 + 1, x0 : x1 + 1][inside]) * res**2)


def integrate_sector(grid: BeliefGrid, region: SectorRegion) -> float:
    """Sum of cell values inside the sector times cell area."""
    mask = rasterize_sector(grid, region)
    return float(np.sum(grid.values[mask]) * grid.resolution**2)


def boundary_samples(region: DiskRegion, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Counter-clockwise polygonal sampling of the disk boundary.

    Returns ``(points, increments)`` where ``points[k]`` sits at angle
    2*pi*k/n and ``increments[k] = points[k+1] - points[k]`` (wrapping), so
    both increment columns telescope to zero: the curve is closed.

    Args:
        n: number of segments, >= 8 for a usable quadrature (4 is accepted
           for degenerate geometry checks).
    """
    if n < 4:
        raise ValueError(f"need at least 4 boundary samples, got {n}")
    angles = 2.0 * np.pi * np.arange(n) / n
    points = region.center + region.radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    increments = np.roll(points, -1, axis=0) - points
    return points, increments


def arc_midpoints(region: DiskRegion, n: int) -> np.ndarray:
    """Circle points midway (in angle) between consecutive boundary samples.

    Sampling the field here instead of at the vertices keeps the line
    integral's structural error at ~pi^2/(6 n^2) instead of 4x that.
    """
    angles = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    return region.center + region.radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def sample_bilinear(grid: BeliefGrid, points) -> np.ndarray:
    """Bilinear interpolation of the raster at world points, edge-clamped."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    u = (p[:, 0] - grid.origin[0]) / grid.resolution
    v = (p[:, 1] - grid.origin[1]) / grid.resolution
    u = np.clip(u, 0.0, grid.width - 1.0)
    v = np.clip(v, 0.0, grid.height - 1.0)
    u0 = np.minimum(np.floor(u).astype(int), grid.width - 2) if grid.width > 1 else np.zeros_like(u, dtype=int)
    v0 = np.minimum(np.floor(v).astype(int), grid.height - 2) if grid.height > 1 else np.zeros_like(v, dtype=int)
    fu = u - u0
    fv = v - v0
    vals = grid.values
    if grid.width == 1:
        z00 = z01 = vals[v0, 0]
        z10 = z11 = vals[np.minimum(v0 + 1, grid.height - 1), 0]
        return z00 * (1 - fv) + z10 * fv
    if grid.height == 1:
        z00 = vals[0, u0]
        z01 = vals[0, u0 + 1]
        return z00 * (1 - fu) + z01 * fu
    z00 = vals[v0, u0]
    z01 = vals[v0, u0 + 1]
    z10 = vals[v0 + 1, u0]
    z11 = vals[v0 + 1, u0 + 1]
    return (
        z00 * (1 - fu) * (1 - fv)
        + z01 * fu * (1 - fv)
        + z10 * (1 - fu) * fv
        + z11 * fu * fv
    )


def line_of_sight(occ: OccupancyGrid, a, b) -> bool:
    """True iff the supercover grid ray from a to b crosses no occupied cell.

    Supercover traversal also visits the two cells adjacent to an exactly
    crossed corner, so corner-grazing rays are conservatively blocked.
    Endpoints are ordered canonically so the test is symmetric in (a, b).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if (a[0], a[1]) > (b[0], b[1]):
        a, b = b, a
    for ix, iy in _supercover_cells(occ, a, b):
        if 0 <= ix < occ.width and 0 <= iy < occ.height and occ.occupied[iy, ix]:
            return False
    return True


def _supercover_cells(occ: OccupancyGrid, a: np.ndarray, b: np.ndarray):
    """Yield (ix, iy) cells traversed by the segment a->b, corners included."""
    res = occ.resolution
    # continuous cell coordinates: cell (ix, iy) spans [ix, ix+1) x [iy, iy+1)
    u0 = (a - occ.origin) / res + 0.5
    u1 = (b - occ.origin) / res + 0.5
    ix, iy = int(np.floor(u0[0])), int(np.floor(u0[1]))
    jx, jy = int(np.floor(u1[0])), int(np.floor(u1[1]))
    yield ix, iy
    dx = u1[0] - u0[0]
    dy = u1[1] - u0[1]
    step_x = 1 if dx > 0 else -1
    step_y = 1 if dy > 0 else -1
    t_max_x = ((ix + (step_x > 0)) - u0[0]) / dx if dx != 0 else np.inf
    t_max_y = ((iy + (step_y > 0)) - u0[1]) / dy if dy != 0 else np.inf
    t_delta_x = abs(1.0 / dx) if dx != 0 else np.inf
    t_delta_y = abs(1.0 / dy) if dy != 0 else np.inf
    eps = 1e-12
    for _ in range(2 * (abs(jx - ix) + abs(jy - iy)) + 4):
        if ix == jx and iy == jy:
            return
        if abs(t_max_x - t_max_y) < eps:
            # exact corner crossing: include both side cells, then step diagonally
            yield ix + step_x, iy
            yield ix, iy + step_y
            ix += step_x
            iy += step_y
            t_max_x += t_delta_x
            t_max_y += t_delta_y
        elif t_max_x < t_max_y:
            ix += step_x
            t_max_x += t_delta_x
        else:
            iy += step_y
            t_max_y += t_delta_y
        yield ix, iy


def sector_visible_mask(occ: OccupancyGrid, region: SectorRegion, n_bins: int = 1440) -> np.ndarray:
    """Cells of the sector actually visible from the apex given static walls.

    Builds a polar shadow map: every occupied cell within range shadows the
    angular interval it subtends beyond its own distance. A sector cell is
    visible when it is not farther than the nearest shadow in its bearing
    bin (plus half a cell so the blocking wall face itself stays visible).
    """
    ref = occ.as_grid()
    x, y = ref.cell_centers()
    dx = x - region.apex[0]
    dy = y - region.apex[1]
    dist = np.hypot(dx, dy)
    bearing = np.arctan2(dy, dx)
    rel = np.abs(wrap_angle(bearing - region.yaw))
    sector = (dist <= region.range) & ((rel <= region.half_angle) | (dist < 1e-12))

    walls = occ.occupied & (dist <= region.range + occ.resolution)
    if not walls.any():
        return sector

    bin_width = 2.0 * np.pi / n_bins
    shadow = np.full(n_bins, np.inf)
    wd = dist[walls]
    wb = bearing[walls]
    half_sub = np.arctan2(0.75 * occ.resolution, np.maximum(wd, occ.resolution))
    b_lo = np.floor((wb - half_sub + np.pi) / bin_width).astype(int)
    b_hi = np.floor((wb + half_sub + np.pi) / bin_width).astype(int)
    spans = b_hi - b_lo + 1
    idx = (np.repeat(b_lo, spans) + _ranges(spans)) % n_bins
    np.minimum.at(shadow, idx, np.repeat(wd, spans))

    cell_bins = np.floor((bearing + np.pi) / bin_width).astype(int) % n_bins
    visible = dist <= shadow[cell_bins] + 0.5 * occ.resolution
    return sector & visible


def _ranges(counts: np.ndarray) -> np.ndarray:
    """Concatenated [0..c) ranges for each count, vectorized."""
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=int)
    out = np.ones(total, dtype=int)
    out[0] = 0
    starts = np.cumsum(counts)[:-1]
    out[starts] = 1 - counts[:-1]
    return np.cumsum(out)
