"""r-duals, maximality, greedy diametrical completion, antipodal pairs and widths.

The dual of a cloud C is the set of points within distance r of every point of
C. Continuous duals are discretized on axis-aligned grids whose nodes are
integer multiples of the step ``h``.
"""
from __future__ import annotations

import heapq
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError, ResourceError
from .geometry import (
    Norm,
    PointCloud,
    diameter,
    directed_hausdorff,
    farthest_distances,
    nearest_distances,
    support_values,
)

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000_000
DEFAULT_STEPS = {2: 400, 3: 120}


class CoarseGridWarning(UserWarning):
    """The discrete dual came out empty although the cloud is r-bounded."""


def _eps(r: float, h: float) -> float:
    return 1e-9 * max(r, h)


@dataclass(frozen=True)
class GridDomain:
    """Axis-aligned box with nodes ``index * h`` (indices between ``lo`` and ``hi`` inclusive)."""

    lo: tuple
    hi: tuple
    h: float
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("grid step h must be positive")
        object.__setattr__(self, "lo", tuple(int(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(int(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or any(b < a for a, b in zip(self.lo, self.hi)):
            raise DomainError("grid bounds are inconsistent")
        if self.count > self.budget:
            raise ResourceError(f"grid has {self.count} nodes, budget is {self.budget}")

    @classmethod
    def around(cls, c: PointCloud, r: float, h: float | None = None, budget: int = DEFAULT_BUDGET,
               steps: int | None = None) -> "GridDomain":
        """Smallest node-aligned box strictly containing the cloud inflated by r on every axis.

        When ``h`` is omitted it is chosen so the box spans at most ``steps``
        cells per axis (400 in the plane, 120 in space by default).
        """
        pts = c.points
        lo_f = pts.min(axis=0) - r
        hi_f = pts.max(axis=0) + r
        if h is None:
            if steps is None:
                steps = DEFAULT_STEPS.get(c.dim, 60)
            h = float(np.max(hi_f - lo_f)) / (steps - 2)
        lo = np.floor(lo_f / h).astype(int) - 1
        hi = np.ceil(hi_f / h).astype(int) + 1
        return cls(tuple(lo), tuple(hi), float(h), budget)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def count(self) -> int:
        return int(np.prod([b - a + 1 for a, b in zip(self.lo, self.hi)], dtype=np.int64))

    def axis(self, k: int, start: int | None = None, stop: int | None = None) -> np.ndarray:
        a = self.lo[k] if start is None else max(start, self.lo[k])
        b = self.hi[k] if stop is None else min(stop, self.hi[k])
        return np.arange(a, b + 1) * self.h

    def quantization(self, norm: Norm) -> float:
        """Diameter of one grid cell: h*sqrt(n) in the Euclidean norm, h in the max norm."""
        return self.h * (math.sqrt(self.dim) if norm is Norm.EUCLIDEAN else 1.0)


def cell_bound(grid: GridDomain, norm: Norm) -> float:
    return grid.quantization(norm)


@dataclass
class _DualGrid:
    """Nodes of the pruned sub-box, in lexicographic (C) order, with their d_plus values."""

    axes: list
    shape: tuple
    points: np.ndarray
    dplus: np.ndarray
    inside: np.ndarray


def _dual_grid(c: PointCloud, r: float, grid: GridDomain) -> _DualGrid:
    if len(c) == 0:
        raise DomainError("r-dual of an empty cloud")
    if c.dim != grid.dim:
        raise DomainError(f"cloud dimension {c.dim} does not match grid dimension {grid.dim}")
    eps = _eps(r, grid.h)
    # every coordinate of a dual point is within r of every coordinate of C
    low = c.points.max(axis=0) - r - eps
    high = c.points.min(axis=0) + r + eps
    axes = []
    for k in range(grid.dim):
        axes.append(grid.axis(k, math.ceil(low[k] / grid.h) - 1, math.floor(high[k] / grid.h) + 1))
    shape = tuple(len(a) for a in axes)
    if 0 in shape:
        empty = np.zeros((0, grid.dim))
        return _DualGrid(axes, shape, empty, np.zeros(0), np.zeros(0, dtype=bool))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    dplus = farthest_distances(pts, c)
    return _DualGrid(axes, shape, pts, dplus, dplus <= r + eps)


def r_dual(c: PointCloud, r: float, grid: GridDomain) -> PointCloud:
    """Grid nodes y with d_plus(c, y) <= r, i.e. the intersection of the closed r-balls around c.

    Raises
    ------
    PreconditionError
        If ``diameter(c) > r + h``.
    """
    if r <= 0:
        raise DomainError("r must be positive")
    if diameter(c) > r + grid.h:
        raise PreconditionError(f"cloud diameter {diameter(c):.6g} exceeds r + h = {r + grid.h:.6g}")
    dg = _dual_grid(c, r, grid)
    pts = dg.points[dg.inside]
    if len(pts) == 0:
        warnings.warn("discrete r-dual is empty; the grid is too coarse", CoarseGridWarning, stacklevel=2)
    return PointCloud(pts.reshape(-1, c.dim), c.norm)


@dataclass(frozen=True)
class MaximalityResult:
    maximal: bool
    distance: float
    bound: float
    witness: np.ndarray | None

    def __bool__(self):
        return self.maximal


def is_r_maximal(c: PointCloud, r: float, grid: GridDomain, tol: float) -> MaximalityResult:
    """Compare a cloud with its discrete r-dual in the Hausdorff metric.

    The cloud passes when the distance is at most ``tol`` plus one grid-cell
    diameter. On failure the witness is the dual node farthest from the cloud.
    """
    dual = r_dual(c, r, grid)
    bound = tol + grid.quantization(c.norm)
    if len(dual) == 0:
        return MaximalityResult(False, math.inf, bound, None)
    d_dual, i = directed_hausdorff(dual, c)
    d_cloud, _ = directed_hausdorff(c, dual)
    dist = max(d_dual, d_cloud)
    ok = dist <= bound
    return MaximalityResult(bool(ok), float(dist), float(bound), None if ok else dual.points[i].copy())


def complete_to_maximal(c: PointCloud, r: float, grid: GridDomain) -> PointCloud:
    """Greedily enlarge an r-bounded cloud until its discrete dual is covered.

    Each step adds the dual node farthest from the current set (ties to the
    lexicographically smallest node) and stops once that distance is at most
    one grid-cell diameter. The returned cloud starts with the rows of ``c``.
    """
    if r <= 0:
        raise DomainError("r must be positive")
    diam = diameter(c)
    if diam > r + _eps(r, grid.h):
        raise PreconditionError(f"cloud diameter {diam:.6g} exceeds r = {r:.6g}")
    eps = _eps(r, grid.h)
    thr = grid.quantization(c.norm)
    dg = _dual_grid(c, r, grid)
    if not dg.inside.any():
        warnings.warn("discrete r-dual is empty; the grid is too coarse", CoarseGridWarning, stacklevel=2)
        return c
    shape = dg.shape
    pts = dg.points
    inside = dg.inside.copy()
    dmin = np.full(len(pts), -np.inf)
    dmin[inside] = nearest_distances(pts[inside], c)
    dplus = dg.dplus.copy()
    # when the dual itself is r-bounded nothing we add can shrink it
    dual_bounded = diameter(PointCloud(pts[inside], c.norm)) <= r + eps
    dmin_nd = dmin.reshape(shape)
    pts_nd = pts.reshape(shape + (c.dim,))
    flat = np.flatnonzero(inside)
    heap = list(zip((-dmin[flat]).tolist(), flat.tolist()))
    heapq.heapify(heap)
    added = []
    while heap:
        neg, i = heapq.heappop(heap)
        if not inside[i]:
            continue
        cur = dmin[i]
        if cur < -neg:
            heapq.heappush(heap, (-cur, i))
            continue
        if cur <= thr:
            break
        y = pts[i]
        added.append(i)
        # only nodes closer to y than their current gap (<= cur) can change
        idx = np.unravel_index(i, shape)
        w = int(math.ceil(cur / grid.h)) + 1
        sl = tuple(slice(max(0, j - w), min(s, j + w + 1)) for j, s in zip(idx, shape))
        block = dmin_nd[sl]
        dist = c.norm(pts_nd[sl] - y)
        np.minimum(block, dist, out=block, where=np.isfinite(block))
        dmin[i] = 0.0
        if not dual_bounded:
            dplus = np.maximum(dplus, c.norm(pts - y))
            gone = inside & (dplus > r + eps)
            if gone.any():
                inside[gone] = False
                dmin[gone] = -np.inf
    logger.debug("completion added %d grid nodes", len(added))
    if not added:
        return c
    return PointCloud(np.vstack([c.points, pts[added]]), c.norm)


def completion_gap(d: PointCloud, r: float, grid: GridDomain) -> float:
    """Largest distance from a node of the discrete dual of d to d (0 when the dual is empty)."""
    dg = _dual_grid(d, r, grid)
    if not dg.inside.any():
        return 0.0
    return float(nearest_distances(dg.points[dg.inside], d).max())


def linf_box_completion(c: PointCloud, r: float):
    """Closed-form max-norm completion: the cube of side r centered on the coordinate ranges.

    Under the max norm the r-maximal sets are exactly the cubes of side r, so
    a completion is any such cube containing the cloud. The centered one is
    returned as ``(low, high)`` corner vectors.
    """
    lo, hi = c.points.min(axis=0), c.points.max(axis=0)
    if np.any(hi - lo > r + 1e-12 * r):
        raise PreconditionError("a coordinate range exceeds r; the cloud is not r-bounded")
    mid = 0.5 * (lo + hi)
    return mid - 0.5 * r, mid + 0.5 * r


def box_nodes(low, high, grid: GridDomain) -> np.ndarray:
    """Grid nodes inside the box [low, high] (inclusive up to rounding)."""
    eps = _eps(float(np.max(np.asarray(high) - np.asarray(low))), grid.h)
    axes = [grid.axis(k, math.ceil((low[k] - eps) / grid.h), math.floor((high[k] + eps) / grid.h))
            for k in range(grid.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


# --------------------------------------------------------------------------- antipodes and widths

@dataclass(frozen=True)
class AntipodalRelation:
    pairs: np.ndarray
    r: float
    tol: float

    def partners(self, i: int) -> np.ndarray:
        return self.pairs[self.pairs[:, 0] == i, 1]

    def to_json(self) -> dict:
        return {"r": self.r, "tol": self.tol, "pairs": self.pairs.tolist()}


def antipodal_relation(c: PointCloud, r: float, tol: float) -> AntipodalRelation:
    """All ordered index pairs (i, j), i != j, whose distance is within tol of r."""
    pts = c.points
    m = len(pts)
    out = []
    step = max(1, 2048 * 256 // max(m, 1))
    for s in range(0, m, step):
        d = c.norm(pts[s:s + step, None, :] - pts[None, :, :])
        ii, jj = np.nonzero(np.abs(d - r) <= tol)
        ii = ii + s
        keep = ii != jj
        out.append(np.column_stack([ii[keep], jj[keep]]))
    pairs = np.vstack(out) if out else np.zeros((0, 2), dtype=int)
    return AntipodalRelation(pairs.astype(int), float(r), float(tol))


def check_antipodal_condition(boundary: PointCloud, r: float, tol: float):
    """Every boundary point needs a partner at distance r (within tol).

    Returns ``(ok, violators)`` where ``violators`` indexes the failing points.
    """
    far = farthest_distances(boundary.points, boundary)
    bad = np.flatnonzero(np.abs(far - r) > tol)
    return len(bad) == 0, bad


def _require_euclidean(c: PointCloud):
    if c.norm is not Norm.EUCLIDEAN:
        raise DomainError("widths along a direction are defined through the Euclidean inner product")


def omega_diameter(c: PointCloud, u) -> float:
    """Width of the cloud along u: max minus min of the projections x.u."""
    _require_euclidean(c)
    u = np.asarray(u, dtype=float)
    return float(support_values(c, u[None, :])[0] + support_values(c, -u[None, :])[0])


def omega_diameters(c: PointCloud, directions) -> np.ndarray:
    _require_euclidean(c)
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    return support_values(c, dirs) + support_values(c, -dirs)


@dataclass(frozen=True)
class WidthResult:
    constant: bool
    worst_direction: np.ndarray
    worst_deviation: float

    def __bool__(self):
        return self.constant


def is_constant_diameter(c: PointCloud, r: float, directions, tol: float) -> WidthResult:
    """Check |width(u) - r| <= tol for every direction and report the worst one."""
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    dev = np.abs(omega_diameters(c, dirs) - r)
    k = int(np.argmax(dev))
    return WidthResult(bool(dev[k] <= tol), dirs[k].copy(), float(dev[k]))
