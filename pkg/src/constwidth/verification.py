"""Numerical checks of the defining invariants, collected into JSON-serializable reports."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import __version__
from .dual import check_antipodal_condition, omega_diameters
from .geometry import (PointCloud, convex_hull_2d, diameter_pair, farthest_distances, hausdorff_distance,
                       sample_sphere, support_values)

SCHEMA = "constwidth.report/1"
_CHUNK = 1 << 20


def _plain(x):
    """Convert numpy containers and scalars into JSON-native values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else repr(v)
    return x


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    witness: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return _plain({"name": self.name, "passed": self.passed, "residual": self.residual,
                       "tolerance": self.tolerance, "witness": self.witness})


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        prov = {"version": __version__, **self.provenance}
        return {"schema": SCHEMA, "passed": self.passed,
                "checks": [c.to_json() for c in self.checks], "provenance": _plain(prov)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            lines.append(f"{tag}  {c.name:<20} residual={c.residual:.3e}  tol={c.tolerance:.3e}")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def input_hash(*parts) -> str:
    """sha256 over arrays (as float64 bytes) and JSON-encoded scalars."""
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, PointCloud):
            p = p.points
        if isinstance(p, np.ndarray):
            a = np.ascontiguousarray(p, dtype=float)
            h.update(str(a.shape).encode())
            h.update(a.tobytes())
        else:
            h.update(json.dumps(_plain(p), sort_keys=True).encode())
    return h.hexdigest()


# --------------------------------------------------------------------------- constant width

def verify_constant_width(boundary: PointCloud, r: float, directions, tol: float) -> CheckResult:
    """Widths along every direction equal r, and the diameter does not exceed r.

    The residual is the larger of the worst width deviation and the
    diameter excess; the witness names the worst direction.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    widths = omega_diameters(boundary, dirs)
    dev = np.abs(widths - r)
    k = int(np.argmax(dev))
    (i, j), diam = diameter_pair(boundary)
    excess = diam - r
    residual = max(float(dev[k]), float(excess), 0.0)
    return CheckResult("constant_width", bool(dev[k] <= tol and excess <= tol), residual, float(tol), {
        "width_deviation": float(dev[k]), "worst_direction": dirs[k], "worst_width": float(widths[k]),
        "diameter": float(diam), "diameter_pair": [int(i), int(j)], "directions": len(dirs),
        "samples": len(boundary)})


def verify_antipodal(boundary: PointCloud, r: float, tol: float) -> CheckResult:
    """Every sample has a partner at distance r within tol."""
    ok, bad = check_antipodal_condition(boundary, r, tol)
    far = farthest_distances(boundary.points, boundary)
    dev = np.abs(far - r)
    k = int(np.argmax(dev))
    return CheckResult("antipodal", bool(ok), float(dev[k]), float(tol),
                       {"worst_index": k, "violators": int(len(bad))})


# --------------------------------------------------------------------------- convexity

@dataclass
class _Hull:
    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray

    def signed(self, x):
        """max_f (n_f.x - b_f): positive outside, minus the depth inside."""
        x = np.atleast_2d(x)
        out = np.empty(len(x))
        step = max(1, _CHUNK // max(len(self.normals), 1))
        for s in range(0, len(x), step):
            out[s:s + step] = np.max(x[s:s + step] @ self.normals.T - self.offsets, axis=1)
        return out


def _affine_rank(points, tol) -> int:
    if len(points) < 2:
        return 0
    sv = np.linalg.svd(points - points.mean(axis=0), compute_uv=False)
    return int(np.sum(sv > tol * max(sv[0], 1e-300)))


def _hull(points) -> _Hull | None:
    n = points.shape[1]
    if _affine_rank(points, 1e-12) < n:
        return None
    if n == 2:
        idx = convex_hull_2d(points)
        v = points[idx]
        e = np.roll(v, -1, axis=0) - v
        nrm = np.column_stack([e[:, 1], -e[:, 0]])
        nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
        return _Hull(nrm, np.einsum("ij,ij->i", nrm, v), idx)
    if n == 3:
        try:
            h = ConvexHull(points)
        except QhullError:
            return None
        return _Hull(h.equations[:, :-1], -h.equations[:, -1], h.vertices)
    raise ValueError("convexity checks need a 2D or 3D cloud")


def _curvature_proxy(points, hull: _Hull) -> float:
    """Smallest turning angle per unit length at a 2D hull vertex."""
    if points.shape[1] != 2 or len(hull.vertices) < 3:
        return float("nan")
    v = points[hull.vertices]
    e = np.roll(v, -1, axis=0) - v
    ang = np.arctan2(e[:, 1], e[:, 0])
    turn = np.mod(ang - np.roll(ang, 1), 2 * np.pi)
    lens = np.linalg.norm(e, axis=1)
    return float(np.min(turn / (0.5 * (lens + np.roll(lens, 1)))))


def verify_convexity(boundary: PointCloud, tol: float) -> CheckResult:
    """Every boundary sample lies on the hull boundary within tol.

    A sample deeper than tol inside the hull of the cloud is a witness of
    non-convexity. Affinely degenerate clouds are reported as failing with
    ``degenerate`` set in the witness.
    """
    pts = boundary.points
    hull = _hull(pts)
    if hull is None:
        return CheckResult("convexity", False, float("inf"), float(tol),
                           {"degenerate": True, "affine_rank": _affine_rank(pts, 1e-12)})
    depth = -hull.signed(pts)
    k = int(np.argmax(depth))
    return CheckResult("convexity", bool(depth[k] <= tol), float(max(depth[k], 0.0)), float(tol), {
        "degenerate": False, "deepest_index": k, "deepest_point": pts[k],
        "hull_vertices": int(len(hull.vertices)), "min_curvature_proxy": _curvature_proxy(pts, hull)})


def _arc_points(p, q, center, r, samples):
    a = p - center
    b = q - center
    ang = np.arccos(np.clip(np.einsum("ij,ij->i", a, b) / (r * r), -1.0, 1.0))
    # orthonormal frame (e1 along a, e2 toward b) in the plane of the arc
    e1 = a / r
    w = b - np.einsum("ij,ij->i", b, e1)[:, None] * e1
    wn = np.linalg.norm(w, axis=1, keepdims=True)
    e2 = np.divide(w, wn, out=np.zeros_like(w), where=wn > 0)
    s = np.linspace(0.0, 1.0, samples)[None, :] * ang[:, None]
    return center[:, None, :] + r * (np.cos(s)[..., None] * e1[:, None, :] + np.sin(s)[..., None] * e2[:, None, :])


def arc_sampling_bound(points, hull: _Hull, r: float) -> float:
    """Twice the sagitta e^2 / (8 r) of a radius-r arc over the longest hull edge.

    Between two samples the hull is a chord, while an arc of radius r through
    nearby boundary points may rise above it by up to that sagitta.
    """
    if points.shape[1] == 2:
        v = points[hull.vertices]
        e = float(np.max(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))
    else:
        h = ConvexHull(points)
        tri = points[h.simplices]
        e = float(np.max(np.linalg.norm(tri - np.roll(tri, 1, axis=1), axis=2)))
    return e * e / (4.0 * r)


def verify_r_convexity(boundary: PointCloud, r: float, pair_budget: int = 20000, tol: float = 1e-9,
                       arc_samples: int = 16, seed: int = 0) -> CheckResult:
    """Radius-r arcs between close sample pairs stay inside the hull.

    Pairs at distance below r are drawn at random (``seed``); for each, both
    minor arcs of radius r through the pair are sampled and tested against
    the hull. In 3D the arcs lie in the plane through the pair and the
    centroid of the cloud. The witness reports the fraction of eligible
    pairs that were tested.
    """
    pts = boundary.points
    m, n = pts.shape
    hull = _hull(pts)
    if hull is None:
        return CheckResult("r_convexity", False, float("inf"), float(tol), {"degenerate": True})
    rng = np.random.default_rng(seed)
    draw = min(max(4 * pair_budget, 1000), m * (m - 1) // 2 * 4 + 4)
    i = rng.integers(0, m, draw)
    j = rng.integers(0, m, draw)
    d = np.linalg.norm(pts[i] - pts[j], axis=1)
    eligible = (i != j) & (d < r) & (d > 0)
    frac_eligible = float(np.mean(eligible)) if draw else 0.0
    sel = np.flatnonzero(eligible)[:pair_budget]
    total_eligible = frac_eligible * m * (m - 1)
    coverage = float(min(1.0, len(sel) / total_eligible)) if total_eligible > 0 else 1.0
    if len(sel) == 0:
        return CheckResult("r_convexity", True, 0.0, float(tol), {"pairs": 0, "coverage": coverage})
    p, q = pts[i[sel]], pts[j[sel]]
    mid = 0.5 * (p + q)
    chord = q - p
    half = 0.5 * d[sel]
    if n == 2:
        perp = np.column_stack([-chord[:, 1], chord[:, 0]])
    else:
        perp = pts.mean(axis=0) - mid
        perp -= (np.einsum("ij,ij->i", perp, chord) / np.einsum("ij,ij->i", chord, chord))[:, None] * chord
        bad = np.linalg.norm(perp, axis=1) < 1e-12
        if np.any(bad):
            alt = np.cross(chord[bad], np.eye(3)[np.argmin(np.abs(chord[bad]), axis=1)])
            perp[bad] = alt
    perp /= np.linalg.norm(perp, axis=1, keepdims=True)
    off = np.sqrt(np.maximum(r * r - half * half, 0.0))[:, None]
    sag = arc_sampling_bound(pts, hull, r)
    tol = tol + sag
    worst, wit = -np.inf, None
    for sgn in (1.0, -1.0):
        center = mid + sgn * off * perp
        arc = _arc_points(p, q, center, r, arc_samples)
        out = hull.signed(arc.reshape(-1, n)).reshape(len(sel), arc_samples)
        k = np.unravel_index(int(np.argmax(out)), out.shape)
        if out[k] > worst:
            worst = float(out[k])
            wit = {"pair": [int(i[sel][k[0]]), int(j[sel][k[0]])], "arc_point": arc[k]}
    return CheckResult("r_convexity", bool(worst <= tol), float(max(worst, 0.0)), float(tol),
                       {"pairs": int(len(sel)), "coverage": coverage, "arc_samples": arc_samples,
                        "sampling_bound": sag, **wit})


# --------------------------------------------------------------------------- families

def verify_family_continuity(bodies: Sequence, lambdas: Sequence[float], margin: float = 1e-9) -> CheckResult:
    """Consecutive Hausdorff distances obey d <= L * dlam with L = max |H| of the unit seed.

    When the lambda grid is uniform with an even number of intervals, the
    maximal consecutive distance on the grid of every other lambda must be
    about twice the fine one (ratio within 10% of 1/2). That ratio uses the
    support-function distance max_u |h_A(u) - h_B(u)| over the shared
    directions, which is free of the tangential sampling offset that
    dominates point-cloud distances between nearby bodies.
    """
    lams = np.asarray(lambdas, dtype=float)
    if len(bodies) != len(lams) or len(lams) < 2:
        raise ValueError("need at least two bodies, one per lambda")
    ref = int(np.argmax(np.abs(lams)))
    L = float(np.max(np.linalg.norm(bodies[ref].median, axis=1)) / abs(lams[ref])) if lams[ref] else 0.0
    clouds = [b.cloud for b in bodies]
    dist = np.array([hausdorff_distance(a, b) for a, b in zip(clouds, clouds[1:])])
    dirs = bodies[0].directions
    supp = [support_values(c, dirs) for c in clouds]
    bound = L * np.abs(np.diff(lams)) + margin
    excess = dist - bound
    k = int(np.argmax(excess))
    ok = bool(np.all(excess <= 0.0))
    witness = {"lipschitz": L, "max_distance": float(dist.max()), "worst_step": k,
               "distances": dist, "margin": margin}
    steps = np.diff(lams)
    if len(steps) >= 2 and len(steps) % 2 == 0 and np.allclose(steps, steps[0], rtol=1e-9):
        fine = max(float(np.max(np.abs(a - b))) for a, b in zip(supp, supp[1:]))
        cmax = max(float(np.max(np.abs(a - b))) for a, b in zip(supp[::2], supp[2::2]))
        if cmax <= margin:
            ratio = None
        else:
            ratio = fine / cmax
            ok = ok and 0.45 <= ratio <= 0.55
        witness["refinement_ratio"] = ratio
    return CheckResult("family_continuity", ok, float(max(excess[k], 0.0)), float(margin), witness)


# --------------------------------------------------------------------------- bundles

def verify_body(body, directions=None, tol: float = 1e-6, convexity_tol: float | None = None,
                r_convexity: bool = False, pair_budget: int = 2000, seed: int = 0) -> VerificationReport:
    """Constant width (tol + sampling bound), antipodal condition and convexity of a constructed body."""
    dirs = body.directions if directions is None else np.atleast_2d(directions)
    bound = float(body.sampling_bound(dirs))
    cloud = body.cloud
    rep = VerificationReport(provenance={
        "input_hash": input_hash(cloud, body.r), "boundary_samples": len(cloud),
        "width_directions": len(dirs), "sampling_bound": bound, "r": body.r,
        "certified": bool(body.certified)})
    rep.add(verify_constant_width(cloud, body.r, dirs, tol + bound))
    rep.add(verify_antipodal(cloud, body.r, tol + bound))
    ctol = 1e-9 * body.r if convexity_tol is None else convexity_tol
    rep.add(verify_convexity(cloud, ctol))
    if r_convexity:
        rep.add(verify_r_convexity(cloud, body.r, pair_budget, ctol, seed=seed))
    return rep


def cloud_sampling_bound(cloud: PointCloud, r: float) -> float:
    """Width allowance for a boundary sample read without construction metadata.

    In the plane, a convex curve through consecutive hull vertices p_i, p_i+1
    lies in the triangle cut off by the chord and the lines of the two
    neighbouring edges; its height e sin(a) sin(b) / sin(a + b), with a, b the
    turning angles at the chord ends, bounds how far the curve can pass the
    polygon. Twice the largest height bounds the width deficit. The result is
    inf when a triangle is unbounded (too few samples). In space the
    heuristic (longest hull edge)^2 / r is used.
    """
    pts = cloud.points
    hull = _hull(pts)
    if hull is None:
        return float("inf")
    if cloud.dim != 2:
        return arc_sampling_bound(pts, hull, r) * 4.0
    v = pts[hull.vertices]
    e = np.roll(v, -1, axis=0) - v
    ang = np.arctan2(e[:, 1], e[:, 0])
    turn = np.mod(ang - np.roll(ang, 1), 2 * np.pi)  # turning angle at vertex i
    a, b = turn, np.roll(turn, -1)
    if np.any(a + b >= np.pi):
        return float("inf")
    h = np.linalg.norm(e, axis=1) * np.sin(a) * np.sin(b) / np.sin(a + b)
    return float(2.0 * np.max(h))


def verify_cloud(cloud: PointCloud, r: float, tol: float = 1e-6, directions=None) -> VerificationReport:
    """Checks for a boundary sample read from disk (no construction metadata)."""
    if directions is None:
        directions = sample_sphere(cloud.dim, 4096 if cloud.dim == 2 else 2048,
                                   "uniform" if cloud.dim == 2 else "fibonacci")
    bound = cloud_sampling_bound(cloud, r)
    rep = VerificationReport(provenance={
        "input_hash": input_hash(cloud, r), "boundary_samples": len(cloud),
        "width_directions": len(directions), "sampling_bound": bound, "r": r,
        "undersampled": not np.isfinite(bound)})
    allow = tol + bound if np.isfinite(bound) else tol
    rep.add(verify_constant_width(cloud, r, directions, allow))
    rep.add(verify_antipodal(cloud, r, allow))
    rep.add(verify_convexity(cloud, 1e-9 * r))
    return rep
