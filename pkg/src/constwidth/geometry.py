"""Norm-aware point primitives, sphere sampling, a Jacobi eigensolver and set distances.

Every continuous set handled by the package is represented by a finite sample,
so all operations here are exact over finite clouds.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial import QhullError

from .errors import ConfigurationError, DomainError

_CHUNK = 2048


class Norm(enum.Enum):
    EUCLIDEAN = "euclidean"
    LINF = "linf"

    @property
    def p(self) -> float:
        """Minkowski exponent understood by ``cKDTree``."""
        return 2.0 if self is Norm.EUCLIDEAN else math.inf

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if self is Norm.EUCLIDEAN:
            return np.sqrt(np.sum(v * v, axis=-1))
        return np.max(np.abs(v), axis=-1)

    @classmethod
    def parse(cls, value) -> "Norm":
        if isinstance(value, Norm):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {"euclidean": cls.EUCLIDEAN, "l2": cls.EUCLIDEAN,
                   "linf": cls.LINF, "linfinity": cls.LINF, "max": cls.LINF, "sup": cls.LINF}
        try:
            return aliases[key]
        except KeyError:
            raise ConfigurationError(f"unknown norm {value!r}; expected 'euclidean' or 'linf'") from None


class SphereScheme(enum.Enum):
    UNIFORM_ANGLE_2D = "uniform"
    FIBONACCI = "fibonacci"
    ICOSAHEDRON = "icosahedron"
    RANDOM = "random"

    @classmethod
    def parse(cls, value) -> "SphereScheme":
        if isinstance(value, SphereScheme):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        aliases = {"uniformangle2d": cls.UNIFORM_ANGLE_2D, "fibonaccilattice": cls.FIBONACCI,
                   "subdividedicosahedron": cls.ICOSAHEDRON}
        try:
            return aliases[key.replace("_", "")]
        except KeyError:
            raise ConfigurationError(f"unknown sphere scheme {value!r}") from None


@dataclass(frozen=True)
class PointCloud:
    """A finite set of points in R^n measured with a fixed norm."""

    points: np.ndarray
    norm: Norm = Norm.EUCLIDEAN

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1) if pts.size else pts.reshape(0, 0)
        if pts.ndim != 2:
            raise DomainError(f"points must be an (m, n) array, got shape {pts.shape}")
        if pts.size and not np.all(np.isfinite(pts)):
            raise DomainError("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "norm", Norm.parse(self.norm))

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_points(self, points) -> "PointCloud":
        return PointCloud(points, self.norm)

    def union(self, other) -> "PointCloud":
        if isinstance(other, PointCloud):
            if other.norm is not self.norm:
                raise DomainError(f"norm mismatch: {self.norm.value} vs {other.norm.value}")
            other_pts = other.points
        else:
            other_pts = np.atleast_2d(other)
        return PointCloud(np.vstack([self.points, other_pts]), self.norm)


def _require_nonempty(c: PointCloud):
    if len(c) == 0:
        raise DomainError("operation needs a nonempty point cloud")


def normalize(v) -> np.ndarray:
    """Scale vectors (last axis) to unit Euclidean length."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise DomainError("cannot normalize the zero vector")
    return v / n


# --------------------------------------------------------------------------- sphere sampling

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def _icosahedron():
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = []
    for a in (-1.0, 1.0):
        for b in (-phi, phi):
            verts += [(0.0, a, b), (a, b, 0.0), (b, 0.0, a)]
    verts = normalize(np.array(verts))
    faces = ConvexHull(verts).simplices
    return verts, faces


def _subdivide(verts, faces):
    verts = list(map(tuple, verts))
    cache = {}

    def midpoint(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            m = normalize(np.add(verts[i], verts[j]))
            cache[key] = len(verts)
            verts.append(tuple(m))
        return cache[key]

    new_faces = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
    return np.array(verts), np.array(new_faces)


def icosphere(level: int) -> np.ndarray:
    """Vertices of the icosahedron after ``level`` midpoint subdivisions (10*4**level + 2 points)."""
    verts, faces = _icosahedron()
    for _ in range(level):
        verts, faces = _subdivide(verts, faces)
    return verts


def _fibonacci_half(m: int) -> np.ndarray:
    # area-uniform lattice on the open upper hemisphere
    i = np.arange(m)
    z = 1.0 - (i + 0.5) / m
    rho = np.sqrt(1.0 - z * z)
    phi = i * _GOLDEN_ANGLE
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def sample_sphere(n: int, count: int, scheme="fibonacci", seed: int | None = 0) -> np.ndarray:
    """Antipode-closed unit directions on the sphere S^(n-1).

    Parameters
    ----------
    n : int
        Ambient dimension (>= 2).
    count : int
        Requested number of directions. Must be even for every scheme except
        ``icosahedron``, which returns the subdivision level whose vertex count
        is nearest to ``count``.
    scheme : {"uniform", "fibonacci", "icosahedron", "random"}
        ``uniform`` is the equally spaced circle (n = 2 only), ``fibonacci`` and
        ``icosahedron`` need n = 3, ``random`` works in any dimension and draws
        Gaussian directions from ``seed``.

    Returns
    -------
    ndarray, shape (count, n)
        Row ``i + count//2`` is the antipode of row ``i`` (except for the
        icosahedron, whose vertex set is centrally symmetric as a set).
    """
    scheme = SphereScheme.parse(scheme)
    if n < 2:
        raise ConfigurationError("sphere sampling needs n >= 2")
    if count < 1:
        raise ConfigurationError("count must be positive")
    if scheme is SphereScheme.ICOSAHEDRON:
        if n != 3:
            raise ConfigurationError("the subdivided icosahedron exists only for n = 3")
        level = min(range(8), key=lambda k: (abs(10 * 4**k + 2 - count), k))
        return icosphere(level)
    if count % 2:
        raise ConfigurationError(f"antipode-closed sampling needs an even count, got {count}")
    half = count // 2
    if scheme is SphereScheme.UNIFORM_ANGLE_2D:
        if n != 2:
            raise ConfigurationError("uniform angle sampling exists only for n = 2")
        t = 2.0 * math.pi * np.arange(count) / count
        u = np.column_stack([np.cos(t), np.sin(t)])
        # exact antipodes: row i + half is -row i
        u[half:] = -u[:half]
        return u
    if scheme is SphereScheme.FIBONACCI:
        if n != 3:
            raise ConfigurationError("the Fibonacci lattice is implemented for n = 3")
        h = _fibonacci_half(half)
        return np.vstack([h, -h])
    rng = np.random.default_rng(seed)
    h = normalize(rng.standard_normal((half, n)))
    return np.vstack([h, -h])


def angle_grid(count: int) -> np.ndarray:
    """Angles 2 pi k / count, k = 0..count-1."""
    return 2.0 * math.pi * np.arange(count) / count


# --------------------------------------------------------------------------- eigensolver

def symmetrize(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def jacobi_eigh(m, tol: float = 1e-12, max_sweeps: int = 60):
    """Cyclic Jacobi diagonalization of one symmetric matrix or a stack of them.

    Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
    below ``tol * (||diag|| + 1)`` for every matrix in the stack.

    Returns
    -------
    values : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    vectors : ndarray, shape (..., n, n)
        Orthogonal matrices with ``m = Q diag(values) Q^T``.
    """
    a = symmetrize(m).copy()
    single = a.ndim == 2
    if single:
        a = a[None]
    k, n, _ = a.shape
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a[:, offmask] ** 2, axis=1))
        dn = np.sqrt(np.sum(np.diagonal(a, axis1=1, axis2=2) ** 2, axis=1))
        if np.all(off < tol * (dn + 1.0)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = apq != 0.0
                if not np.any(active):
                    continue
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    theta = np.where(active, (a[:, q, q] - a[:, p, p]) / (2.0 * np.where(active, apq, 1.0)), 0.0)
                    sgn = np.where(theta >= 0.0, 1.0, -1.0)
                    t = sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(active & np.isfinite(t), t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                c3, s3 = c[:, None], s[:, None]
                cp, cq = a[:, :, p].copy(), a[:, :, q].copy()
                a[:, :, p] = c3 * cp - s3 * cq
                a[:, :, q] = s3 * cp + c3 * cq
                rp, rq = a[:, p, :].copy(), a[:, q, :].copy()
                a[:, p, :] = c3 * rp - s3 * rq
                a[:, q, :] = s3 * rp + c3 * rq
                vp, vq = v[:, :, p].copy(), v[:, :, q].copy()
                v[:, :, p] = c3 * vp - s3 * vq
                v[:, :, q] = s3 * vp + c3 * vq
    vals = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    if single:
        return vals[0], v[0]
    return vals, v


def symmetric_eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix (or stack) by cyclic Jacobi."""
    return jacobi_eigh(m)[0]


# --------------------------------------------------------------------------- convex hulls

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points) -> np.ndarray:
    """Indices of the hull vertices in counterclockwise order (Andrew's monotone chain).

    Collinear boundary points are dropped. Fewer than three distinct points
    give the distinct points themselves.
    """
    pts = np.asarray(points, dtype=float)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    uniq = []
    for i in order:
        if not uniq or not np.array_equal(pts[uniq[-1]], pts[i]):
            uniq.append(int(i))
    if len(uniq) < 3:
        return np.array(uniq, dtype=int)
    lower, upper = [], []
    for i in uniq:
        while len(lower) >= 2 and _cross(pts[lower[-2]], pts[lower[-1]], pts[i]) <= 0.0:
            lower.pop()
        lower.append(i)
    for i in reversed(uniq):
        while len(upper) >= 2 and _cross(pts[upper[-2]], pts[upper[-1]], pts[i]) <= 0.0:
            upper.pop()
        upper.append(i)
    return np.array(lower[:-1] + upper[:-1], dtype=int)


def hull_vertex_indices(points) -> np.ndarray:
    """Hull vertex indices for n in {2, 3}; every index when the cloud is degenerate or n > 3."""
    pts = np.asarray(points, dtype=float)
    m, n = pts.shape
    if m <= n + 1:
        return np.arange(m)
    if n == 2:
        idx = convex_hull_2d(pts)
        return idx if len(idx) >= 3 else np.arange(m)
    if n == 3:
        try:
            return np.sort(ConvexHull(pts).vertices)
        except (QhullError, ValueError):
            return np.arange(m)
    return np.arange(m)


# --------------------------------------------------------------------------- distances

def _pairwise_argmax(a: np.ndarray, b: np.ndarray, norm: Norm) -> np.ndarray:
    """For each row of a, the index of a farthest row of b.

    Euclidean candidates come from squared distances assembled from a Gram
    product, which is much faster than differencing; callers recompute the
    winning distance exactly.
    """
    out = np.empty(len(a), dtype=np.int64)
    if norm is Norm.EUCLIDEAN:
        bb = np.einsum("ij,ij->i", b, b)
        step = max(1, _CHUNK * 2048 // max(len(b), 1))
        for s in range(0, len(a), step):
            sq = bb[None, :] - 2.0 * (a[s:s + step] @ b.T)
            out[s:s + step] = np.argmax(sq, axis=1)
        return out
    step = max(1, _CHUNK * 256 // max(len(b), 1))
    for s in range(0, len(a), step):
        out[s:s + step] = np.argmax(norm(a[s:s + step, None, :] - b[None, :, :]), axis=1)
    return out


def _pairwise_max(a: np.ndarray, b: np.ndarray, norm: Norm) -> np.ndarray:
    """For each row of a, the maximal distance to the rows of b."""
    j = _pairwise_argmax(a, b, norm)
    return norm(a - b[j])


def diameter(c: PointCloud) -> float:
    """Maximal pairwise distance, exact.

    Under the max norm this is the largest coordinate range; under the
    Euclidean norm the scan runs over hull vertices only, which is exact
    because the farthest point from any point of a set is an extreme point.
    """
    _require_nonempty(c)
    pts = c.points
    if c.norm is Norm.LINF:
        return float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    pts = pts[hull_vertex_indices(pts)]
    return float(_pairwise_max(pts, pts, c.norm).max())


def diameter_pair(c: PointCloud):
    """Indices (i, j) of a pair realizing the diameter (lexicographically first scan)."""
    _require_nonempty(c)
    pts = c.points
    idx = hull_vertex_indices(pts) if c.norm is Norm.EUCLIDEAN else np.arange(len(pts))
    sub = pts[idx]
    far = _pairwise_argmax(sub, sub, c.norm)
    d = c.norm(sub - sub[far])
    i = int(np.argmax(d))
    return (int(idx[i]), int(idx[far[i]])), float(d[i])


def _check_compatible(a: PointCloud, b: PointCloud):
    _require_nonempty(a)
    _require_nonempty(b)
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.norm is not b.norm:
        raise DomainError(f"norm mismatch: {a.norm.value} vs {b.norm.value}")


def nearest_distances(points, c: PointCloud) -> np.ndarray:
    """d_minus(c, x) for every row x of ``points``."""
    _require_nonempty(c)
    tree = cKDTree(c.points)
    d, _ = tree.query(np.atleast_2d(np.asarray(points, dtype=float)), p=c.norm.p)
    return np.asarray(d, dtype=float)


def farthest_distances(points, c: PointCloud) -> np.ndarray:
    """d_plus(c, x) for every row x of ``points``."""
    _require_nonempty(c)
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if c.norm is Norm.LINF:
        lo, hi = c.points.min(axis=0), c.points.max(axis=0)
        return np.max(np.maximum(np.abs(x - lo), np.abs(hi - x)), axis=1)
    ext = c.points[hull_vertex_indices(c.points)]
    return _pairwise_max(x, ext, c.norm)


def d_plus(c: PointCloud, x) -> float:
    """Largest distance from x to a point of c."""
    return float(farthest_distances(np.asarray(x, dtype=float)[None, :], c)[0])


def d_minus(c: PointCloud, x) -> float:
    """Smallest distance from x to a point of c."""
    return float(nearest_distances(np.asarray(x, dtype=float)[None, :], c)[0])


def directed_hausdorff(a: PointCloud, b: PointCloud):
    """sup over a of the distance to b, with the index of the maximizing point of a."""
    _check_compatible(a, b)
    d = nearest_distances(a.points, b)
    i = int(np.argmax(d))
    return float(d[i]), i


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    """Symmetric Hausdorff distance between two finite clouds."""
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def support(c: PointCloud, u):
    """Maximum of x -> u.x over the cloud and its maximizer.

    Exact ties go to the lexicographically smallest point.
    """
    _require_nonempty(c)
    u = np.asarray(u, dtype=float)
    vals = c.points @ u
    best = vals.max()
    ties = np.flatnonzero(vals == best)
    if len(ties) > 1:
        cand = c.points[ties]
        ties = ties[np.lexsort(cand.T[::-1])]
    return float(best), c.points[ties[0]].copy()


def support_values(c: PointCloud, directions) -> np.ndarray:
    """Support function of the cloud evaluated at each row of ``directions``."""
    _require_nonempty(c)
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    out = np.empty(len(dirs))
    ext = c.points[hull_vertex_indices(c.points)]
    step = max(1, _CHUNK * 256 // len(ext))
    for s in range(0, len(dirs), step):
        out[s:s + step] = (dirs[s:s + step] @ ext.T).max(axis=1)
    return out


def aligned_rms_rotation(a, b) -> np.ndarray:
    """Orthogonal matrix R (det +1) minimizing sum |R a_i - b_i|^2 for centered, corresponded rows."""
    h = np.asarray(a).T @ np.asarray(b)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T)) or 1.0
    corr = np.eye(h.shape[0])
    corr[-1, -1] = d
    return vt.T @ corr @ u.T


def procrustes_align(a, b):
    """Rigidly move ``a`` onto ``b`` (row-corresponded): centroids matched, rotation by SVD."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ca, cb = a.mean(axis=0), b.mean(axis=0)
    rot = aligned_rms_rotation(a - ca, b - cb)
    return (a - ca) @ rot.T + cb
