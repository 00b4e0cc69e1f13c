"""Constant-width bodies from odd, degree-one homogeneous seed functions.

A seed g gives the median surface H = grad g (even and degree-zero
homogeneous). For every width r at least r* = 2 max |eigenvalue of the
Hessian of g| over the unit sphere, the map G(u) = H(u) + (r/2) u traces the
boundary of a body of constant width r.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, EvaluationError, PreconditionError
from .geometry import PointCloud, jacobi_eigh, normalize, sample_sphere, symmetrize

logger = logging.getLogger(__name__)

GRADIENT_STEP = 1e-5
HESSIAN_STEP = 1e-4


def _rows(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


def _finite(a, what):
    if not np.all(np.isfinite(a)):
        raise EvaluationError(f"seed {what} produced a non-finite value")
    return a


def fd_gradient(f, x, step=GRADIENT_STEP) -> np.ndarray:
    """Central differences of a vectorized scalar function, one Richardson level."""
    x = _rows(x)
    n = x.shape[1]

    def central(h):
        out = np.empty_like(x)
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            out[:, j] = (f(x + e) - f(x - e)) / (2.0 * h)
        return out

    return (4.0 * central(step / 2.0) - central(step)) / 3.0


def fd_hessian(f, x, step=HESSIAN_STEP) -> np.ndarray:
    """Second central differences, one Richardson level, symmetrized."""
    x = _rows(x)
    m, n = x.shape
    f0 = f(x)

    def central(h):
        out = np.empty((m, n, n))
        eye = np.eye(n) * h
        for i in range(n):
            ei = eye[i]
            out[:, i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h)
            for j in range(i + 1, n):
                ej = eye[j]
                v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h * h)
                out[:, i, j] = out[:, j, i] = v
        return out

    return symmetrize((4.0 * central(step / 2.0) - central(step)) / 3.0)


# --------------------------------------------------------------------------- seeds

class OddSeedFunction:
    """Odd function on R^n \\ {0}, homogeneous of degree one.

    Subclasses provide vectorized ``value``, ``gradient`` and ``hessian`` over
    rows of an (m, n) array.
    """

    dim: int
    provenance = "analytic"

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x) -> np.ndarray:
        raise NotImplementedError

    def scaled(self, lam: float) -> "OddSeedFunction":
        return ScaledSeed(self, float(lam))

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True)
class Term:
    """coef * x^powers / |x|^(deg - 1), with odd total degree."""

    coef: float
    powers: tuple

    @property
    def degree(self) -> int:
        return int(sum(self.powers))


def _mono(x, powers):
    return np.prod(x ** np.asarray(powers, dtype=float), axis=1)


def _mono_d(x, powers, j):
    p = np.array(powers)
    if p[j] == 0:
        return np.zeros(len(x))
    q = p.copy()
    q[j] -= 1
    return p[j] * _mono(x, q)


def _mono_dd(x, powers, i, j):
    p = np.array(powers)
    c = float(p[i])
    q = p.copy()
    q[i] -= 1
    if q[i] < 0:
        return np.zeros(len(x))
    c *= q[j]
    if c == 0:
        return np.zeros(len(x))
    q[j] -= 1
    return c * _mono(x, q)


class PolynomialRatioSeed(OddSeedFunction):
    """Sum of odd monomials divided by the power of |x| that makes each term degree one.

    Derivatives are exact; this is the representation used by the named
    built-in seeds.
    """

    def __init__(self, terms: Sequence, dim: int, name: str | None = None):
        parsed = []
        for t in terms:
            t = t if isinstance(t, Term) else Term(float(t[0]), tuple(int(p) for p in t[1]))
            if len(t.powers) != dim:
                raise ConfigurationError(f"term {t.powers} does not have {dim} exponents")
            if any(p < 0 for p in t.powers):
                raise ConfigurationError("exponents must be nonnegative")
            if t.degree % 2 == 0:
                raise ConfigurationError(f"term {t.powers} has even degree; the seed must be odd")
            if t.coef != 0.0:
                parsed.append(t)
        self.terms = tuple(parsed)
        self.dim = int(dim)
        self.name = name

    def __repr__(self):
        return f"PolynomialRatioSeed({self.name or list(self.terms)}, dim={self.dim})"

    def scaled(self, lam: float) -> "PolynomialRatioSeed":
        return PolynomialRatioSeed([Term(lam * t.coef, t.powers) for t in self.terms], self.dim,
                                   self.name and f"{lam!r}*{self.name}")

    def value(self, x):
        x = _rows(x)
        rho2 = np.sum(x * x, axis=1)
        out = np.zeros(len(x))
        for t in self.terms:
            k = t.degree - 1
            out += t.coef * _mono(x, t.powers) * rho2 ** (-k / 2.0)
        return out

    def gradient(self, x):
        x = _rows(x)
        rho2 = np.sum(x * x, axis=1)
        out = np.zeros_like(x)
        for t in self.terms:
            k = t.degree - 1
            m = _mono(x, t.powers)
            a = rho2 ** (-k / 2.0)
            b = rho2 ** (-k / 2.0 - 1.0)
            for j in range(self.dim):
                out[:, j] += t.coef * (_mono_d(x, t.powers, j) * a - k * m * x[:, j] * b)
        return out

    def hessian(self, x):
        x = _rows(x)
        n = self.dim
        rho2 = np.sum(x * x, axis=1)
        out = np.zeros((len(x), n, n))
        for t in self.terms:
            k = t.degree - 1
            m = _mono(x, t.powers)
            grads = [_mono_d(x, t.powers, j) for j in range(n)]
            a = rho2 ** (-k / 2.0)
            b = rho2 ** (-k / 2.0 - 1.0)
            c = rho2 ** (-k / 2.0 - 2.0)
            for i in range(n):
                for j in range(i, n):
                    v = (_mono_dd(x, t.powers, i, j) * a
                         - k * (grads[i] * x[:, j] + grads[j] * x[:, i]) * b
                         + k * (k + 2) * m * x[:, i] * x[:, j] * c)
                    if i == j:
                        v = v - k * m * b
                    out[:, i, j] += t.coef * v
                    if i != j:
                        out[:, j, i] += t.coef * v
        return out


class CallbackSeed(OddSeedFunction):
    """Black-box seed given on the unit sphere and extended by g(x) = |x| g(x/|x|).

    Oddness is validated on construction. With ``symmetrize=True`` an
    offending callback is replaced by its odd part (g(x) - g(-x))/2 instead
    of being rejected. Derivatives come from finite differences.
    """

    provenance = "finite-difference"

    def __init__(self, fn: Callable, dim: int, symmetrize: bool = False,
                 gradient_step: float = GRADIENT_STEP, hessian_step: float = HESSIAN_STEP,
                 check_samples: int = 256, tol: float = 1e-10, name: str | None = None):
        self.fn = fn
        self.dim = int(dim)
        self.gradient_step = gradient_step
        self.hessian_step = hessian_step
        self.name = name
        self._odd_part = False
        u = normalize(np.random.default_rng(12345).standard_normal((check_samples, self.dim)))
        resid = float(np.max(np.abs(self._raw(u) + self._raw(-u))))
        if resid > tol:
            if not symmetrize:
                raise PreconditionError(f"callback seed is not odd: max |g(u) + g(-u)| = {resid:.3g}")
            self._odd_part = True
        self.oddness_residual = resid

    def _raw(self, x):
        x = _rows(x)
        rho = np.sqrt(np.sum(x * x, axis=1))
        vals = np.asarray(self.fn(x / rho[:, None]), dtype=float).reshape(len(x))
        return _finite(rho * vals, "value")

    def value(self, x):
        if self._odd_part:
            return 0.5 * (self._raw(x) - self._raw(-_rows(x)))
        return self._raw(x)

    def gradient(self, x):
        return _finite(fd_gradient(self.value, x, self.gradient_step), "gradient")

    def hessian(self, x):
        return _finite(fd_hessian(self.value, x, self.hessian_step), "hessian")


class ScaledSeed(OddSeedFunction):
    def __init__(self, base: OddSeedFunction, lam: float):
        self.base, self.lam, self.dim = base, lam, base.dim
        self.provenance = base.provenance

    def value(self, x):
        return self.lam * self.base.value(x)

    def gradient(self, x):
        return self.lam * self.base.gradient(x)

    def hessian(self, x):
        return self.lam * self.base.hessian(x)


def odd_monomials(dim: int, degree: int):
    """All exponent tuples of the given total degree."""
    out = []
    for combo in itertools.combinations_with_replacement(range(dim), degree):
        p = [0] * dim
        for k in combo:
            p[k] += 1
        out.append(tuple(p))
    return sorted(set(out), reverse=True)


BUILTIN_SEEDS = ("zero", "linear", "cos3theta", "xyz", "random-cubic")


def builtin_seed(name: str, eps: float = 1.0, dim: int | None = None, rng_seed: int = 0,
                 vector=None) -> PolynomialRatioSeed:
    """Named seeds.

    ``cos3theta`` is eps*(x^3 - 3 x y^2)/rho^2 = eps*rho*cos(3 theta) in the
    plane, ``xyz`` is eps*x*y*z/rho^2 in space, ``random-cubic`` draws
    Gaussian coefficients for every cubic monomial from ``rng_seed``,
    ``linear`` is a.x (a defaults to eps times the first basis vector) and
    ``zero`` is the zero function.
    """
    key = name.strip().lower().replace("_", "-")
    if key == "cos3theta":
        if dim not in (None, 2):
            raise ConfigurationError("cos3theta is a planar seed")
        return PolynomialRatioSeed([(eps, (3, 0)), (-3.0 * eps, (1, 2))], 2, name=f"{eps!r}*cos3theta")
    if key == "xyz":
        if dim not in (None, 3):
            raise ConfigurationError("xyz is a seed on R^3")
        return PolynomialRatioSeed([(eps, (1, 1, 1))], 3, name=f"{eps!r}*xyz")
    if key == "random-cubic":
        d = 3 if dim is None else int(dim)
        monos = odd_monomials(d, 3)
        coefs = np.random.default_rng(rng_seed).standard_normal(len(monos))
        return PolynomialRatioSeed([(eps * float(c), p) for c, p in zip(coefs, monos)], d,
                                   name=f"random-cubic[{rng_seed}]")
    if key == "linear":
        d = 2 if dim is None else int(dim)
        a = np.zeros(d) if vector is None else np.asarray(vector, dtype=float)
        if vector is None:
            a[0] = eps
        terms = [(float(a[j]), tuple(int(j == k) for k in range(d))) for j in range(d)]
        return PolynomialRatioSeed(terms, d, name="linear")
    if key == "zero":
        return PolynomialRatioSeed([], 2 if dim is None else int(dim), name="zero")
    raise ConfigurationError(f"unknown built-in seed {name!r}; known: {', '.join(BUILTIN_SEEDS)}")


def seed_from_config(spec) -> PolynomialRatioSeed:
    """Build a seed from a mapping.

    Accepted shapes::

        {"builtin": "xyz", "eps": 0.1}
        {"dimension": 3, "terms": [{"coef": 1.0, "powers": [1, 1, 1]}]}
    """
    if isinstance(spec, str):
        return builtin_seed(spec)
    spec = dict(spec)
    allowed = {"builtin", "eps", "dimension", "terms", "rng_seed", "vector"}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigurationError(f"unknown seed keys: {sorted(unknown)}")
    if "builtin" in spec:
        return builtin_seed(spec["builtin"], float(spec.get("eps", 1.0)), spec.get("dimension"),
                            int(spec.get("rng_seed", 0)), spec.get("vector"))
    if "terms" not in spec or "dimension" not in spec:
        raise ConfigurationError("a polynomial seed needs 'dimension' and 'terms'")
    eps = float(spec.get("eps", 1.0))
    terms = []
    for t in spec["terms"]:
        if set(t) - {"coef", "powers"}:
            raise ConfigurationError(f"unknown term keys: {sorted(set(t) - {'coef', 'powers'})}")
        terms.append((eps * float(t["coef"]), tuple(int(p) for p in t["powers"])))
    return PolynomialRatioSeed(terms, int(spec["dimension"]))


# --------------------------------------------------------------------------- median surface

def gradient(g: OddSeedFunction, u) -> np.ndarray:
    """Median surface H(u) = grad g(u) for each row u."""
    return g.gradient(u)


def hessian(g: OddSeedFunction, u) -> np.ndarray:
    """Symmetric Hessian of g at each row u; u itself spans the kernel."""
    return symmetrize(g.hessian(u))


@dataclass(frozen=True)
class MedianSurface:
    """Even map from directions to midpoints of the antipodal chords."""

    fn: Callable
    provenance: str = "analytic"

    @classmethod
    def of(cls, g: OddSeedFunction) -> "MedianSurface":
        return cls(g.gradient, g.provenance)

    def __call__(self, u):
        return self.fn(_rows(u))

    def evenness_residual(self, u) -> float:
        u = _rows(u)
        return float(np.max(np.abs(self(u) - self(-u))))

    def tangency_residual(self, u, eps: float = 1e-6, seed: int = 0) -> float:
        """max |u . (H(u + eps v) - H(u))| / eps over one random tangent v per row."""
        u = _rows(u)
        v = np.random.default_rng(seed).standard_normal(u.shape)
        v -= np.sum(v * u, axis=1, keepdims=True) * u
        v = normalize(v)
        d = (self(u + eps * v) - self(u - eps * v)) / (2.0 * eps)
        return float(np.max(np.abs(np.sum(u * d, axis=1))))


# --------------------------------------------------------------------------- r*

@dataclass(frozen=True)
class RStar:
    value: float
    direction: np.ndarray
    eigenvalue: float
    samples: int


def r_star_scan(g: OddSeedFunction, samples) -> RStar:
    """Twice the largest |Hessian eigenvalue| over the sample, with its direction."""
    u = _rows(samples)
    vals = jacobi_eigh(hessian(g, u))[0]
    absmax = np.max(np.abs(vals), axis=1)
    k = int(np.argmax(absmax))
    j = int(np.argmax(np.abs(vals[k])))
    return RStar(2.0 * float(absmax[k]), u[k].copy(), float(vals[k, j]), len(u))


def r_star(g: OddSeedFunction, samples) -> float:
    return r_star_scan(g, samples).value


def r_star_refined(g: OddSeedFunction, start: int = 256, cap: int = 65536, rtol: float = 1e-4,
                   scheme: str | None = None) -> RStar:
    """Double the sample density until r* moves by less than ``rtol`` (relative) or ``cap`` is hit."""
    if scheme is None:
        scheme = "uniform" if g.dim == 2 else "fibonacci" if g.dim == 3 else "random"
    count = start
    prev = r_star_scan(g, sample_sphere(g.dim, count, scheme))
    while count * 2 <= cap:
        count *= 2
        cur = r_star_scan(g, sample_sphere(g.dim, count, scheme))
        if cur.value < prev.value:
            cur = RStar(prev.value, prev.direction, prev.eigenvalue, cur.samples)
        done = abs(cur.value - prev.value) <= rtol * max(cur.value, 1e-300)
        prev = cur
        if done:
            break
    return prev


# --------------------------------------------------------------------------- median inequality

@dataclass(frozen=True)
class MedianCheck:
    worst: float
    pair: tuple
    strict: bool
    delta: float
    tol: float = 0.0

    @property
    def holds(self) -> bool:
        return self.worst <= self.tol


def all_pairs(samples):
    """Every ordered pair (u_i, u_j), i != j, as two stacked arrays."""
    u = _rows(samples)
    i, j = np.nonzero(~np.eye(len(u), dtype=bool))
    return u[i], u[j]


def check_median_inequality(H, r: float, pairs, delta: float = 0.0, tol: float = 0.0) -> MedianCheck:
    """Worst value of u.(H(v) - H(u)) - (r/4)|u - v|^2 over the given pairs.

    ``H`` is a MedianSurface or any vectorized callable. A nonpositive worst
    residual (``<= tol``) certifies the sampled inequality; ``strict`` reports
    whether every pair with u != v also clears the margin delta*|u - v|^2.
    """
    U, V = (_rows(p) for p in pairs)
    HU = H(U)
    HV = H(V)
    sq = np.sum((U - V) ** 2, axis=1)
    res = np.sum(U * (HV - HU), axis=1) - 0.25 * r * sq
    k = int(np.argmax(res))
    distinct = sq > 0
    strict = bool(np.all(res[distinct] + delta * sq[distinct] < 0.0))
    return MedianCheck(float(res[k]), (U[k].copy(), V[k].copy()), strict, delta, tol)


# --------------------------------------------------------------------------- bodies

@dataclass
class ConstantWidthBody:
    """Boundary samples G(u) = H(u) + (r/2)u of a body of width r.

    ``directions`` are the outward normals at which the boundary was sampled,
    ``median`` the matching values of H. ``certified`` is False for override
    bodies built below r*.
    """

    r: float
    seed: object
    directions: np.ndarray
    median: np.ndarray
    boundary_map: Callable | None = None
    certified: bool = True
    r_star: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def boundary(self) -> np.ndarray:
        return self.median + 0.5 * self.r * self.directions

    @property
    def cloud(self) -> PointCloud:
        return PointCloud(self.boundary)

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    def filled(self, levels: int = 16) -> PointCloud:
        """Points H(u) + t (r/2) u for t in [0, 1]; a sample of the solid body."""
        t = np.linspace(0.0, 1.0, levels)
        pts = self.median[None, :, :] + t[:, None, None] * (0.5 * self.r) * self.directions[None, :, :]
        return PointCloud(pts.reshape(-1, self.dim))

    def chord_residual(self) -> float:
        """max |G(u) - G(-u) - r u| over antipodal pairs present in the sample."""
        G = self.boundary
        u = self.directions
        m = len(u)
        if m % 2 == 0 and np.allclose(u[m // 2:], -u[: m // 2], atol=1e-15):
            d = G[: m // 2] - G[m // 2:] - self.r * u[: m // 2]
            return float(np.max(np.linalg.norm(d, axis=1)))
        if self.boundary_map is None:
            raise PreconditionError("sample is not antipode-ordered and no boundary map is attached")
        d = self.boundary_map(u) - self.boundary_map(-u) - self.r * u
        return float(np.max(np.linalg.norm(d, axis=1)))

    def sampling_bound(self, directions) -> float:
        """Width deficit allowed by the sample density along the given directions.

        If every principal radius of curvature is at most r, the support
        function at w exceeds w.G(u) by at most r(1 - w.u); doubling covers both
        sides of the width.
        """
        w = _rows(directions)
        best = np.empty(len(w))
        step = max(1, 2048 * 256 // len(self.directions))
        for s in range(0, len(w), step):
            best[s:s + step] = np.max(w[s:s + step] @ self.directions.T, axis=1)
        return float(2.0 * self.r * np.max(1.0 - np.minimum(best, 1.0)))


def build_body(g: OddSeedFunction, r: float, samples, override: bool = False) -> ConstantWidthBody:
    """Sample the boundary G(u) = grad g(u) + (r/2) u.

    Raises
    ------
    PreconditionError
        If r is below the sampled r* and ``override`` is not set. Override
        bodies carry ``certified=False`` and no constant-width claim.
    """
    u = _rows(samples)
    if r <= 0:
        raise PreconditionError("width r must be positive")
    rs = r_star_scan(g, u)
    certified = r >= rs.value * (1.0 - 1e-12)
    if not certified and not override:
        raise PreconditionError(
            f"r = {r:.6g} is below r* = {rs.value:.6g}: eigenvalue {rs.eigenvalue:.6g} at direction "
            f"{np.array2string(rs.direction, precision=6)} lies outside [-r/2, r/2]")
    H = g.gradient(u)
    return ConstantWidthBody(float(r), g, u.copy(), H,
                             boundary_map=lambda v, g=g, r=r: g.gradient(v) + 0.5 * r * _rows(v),
                             certified=bool(certified), r_star=rs.value)


def family(g: OddSeedFunction, r: float, lambdas: Sequence[float], samples) -> list:
    """Bodies for the seeds lam*g; lam = 0 is the ball of radius r/2 at the origin."""
    lams = [float(v) for v in lambdas]
    if any(b < a for a, b in zip(lams, lams[1:])):
        raise PreconditionError("lambdas must be sorted ascending")
    if any(v < 0.0 or v > 1.0 for v in lams):
        raise PreconditionError("lambdas must lie in [0, 1]")
    rs = r_star(g, samples)
    if r < rs * (1.0 - 1e-12):
        raise PreconditionError(f"r = {r:.6g} is below r* = {rs:.6g}")
    bodies = []
    for lam in lams:
        b = build_body(g.scaled(lam), r, samples)
        b.meta["lambda"] = lam
        bodies.append(b)
    return bodies


def injectivity_gap(body: ConstantWidthBody) -> float:
    """Minimum distance between boundary samples of distinct directions (0 means G collapsed two samples)."""
    from scipy.spatial import cKDTree

    d, _ = cKDTree(body.boundary).query(body.boundary, k=2)
    return float(d[:, 1].min())
