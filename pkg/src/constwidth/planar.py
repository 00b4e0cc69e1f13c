"""Planar constant-width curves from curvature-radius profiles.

A profile beta on [0, pi) with |beta| <= 1, extended by beta(t + pi) = -beta(t)
and with vanishing closure integral int_0^pi beta(t) T(t) dt, where
T(t) = (-sin t, cos t), gives the closed curve

    R(t) = int_0^t (r/2)(1 + beta(s)) T(s) ds,

whose outward normal at R(t) is U(t) = (cos t, sin t) and whose radius of
curvature there is (r/2)(1 + beta(t)). Every profile class below exposes the
cumulative moment t -> int_0^t beta(s) T(s) ds, computed from exact per-panel
antiderivatives where the representation allows and by composite Simpson
otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AdmissibilityError, ConvergenceError, DomainError, PreconditionError
from .geometry import PointCloud, hausdorff_distance, procrustes_align
from .median import ConstantWidthBody

PI = math.pi
TWO_PI = 2.0 * math.pi
DEFAULT_CELLS = 2048
_EXACT_CLOSURE = 1e-9


def _arr(t) -> np.ndarray:
    return np.atleast_1d(np.asarray(t, dtype=float))


def _linear_panel(a, L, va, slope):
    """int_a^(a+L) (va + slope*tau) T(a + tau) dtau, vectorized, stable for small L."""
    sL, cL = np.sin(L), np.cos(L)
    one_m_c = 2.0 * np.sin(0.5 * L) ** 2
    ta = np.stack([-np.sin(a), np.cos(a)], axis=-1)
    ua = np.stack([np.cos(a), np.sin(a)], axis=-1)
    c0 = va * sL + slope * (L * sL - one_m_c)
    s0 = va * one_m_c + slope * (sL - L * cL)
    return c0[..., None] * ta - s0[..., None] * ua


def _simpson_panel(fn, a, b):
    """One Simpson step of int_a^b fn(s) T(s) ds for arrays a, b."""
    m = 0.5 * (a + b)
    out = np.zeros(np.shape(a) + (2,))
    for s, w in ((a, 1.0), (m, 4.0), (b, 1.0)):
        v = np.asarray(fn(s), dtype=float)
        out += (w * v)[..., None] * np.stack([-np.sin(s), np.cos(s)], axis=-1)
    return out * ((b - a) / 6.0)[..., None]


class BetaProfile:
    """Base class: a profile given on [0, pi) and extended anti-periodically."""

    kind = "abstract"
    exact = True

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([0.0, PI])

    def base(self, t) -> np.ndarray:
        raise NotImplementedError

    def base_cumulative(self, t) -> np.ndarray:
        """int_0^t beta T for t in [0, pi], shape (len(t), 2)."""
        raise NotImplementedError

    def __call__(self, t) -> np.ndarray:
        t = _arr(t)
        k = np.floor(t / PI)
        s = t - k * PI
        s = np.where(s >= PI, 0.0, s)
        k = np.where(t - k * PI >= PI, k + 1, k)
        sign = np.where(np.mod(k, 2) == 0, 1.0, -1.0)
        return sign * self.base(s)

    def closure_integral(self) -> np.ndarray:
        return self.base_cumulative(np.array([PI]))[0]

    def cumulative(self, t) -> np.ndarray:
        """int_0^t beta(s) T(s) ds for any t >= 0 (beta*T has period pi)."""
        t = _arr(t)
        k = np.floor(t / PI)
        s = np.clip(t - k * PI, 0.0, PI)
        return self.base_cumulative(s) + k[:, None] * self.closure_integral()[None, :]

    def max_abs(self, samples: int = 4096) -> tuple:
        t = np.concatenate([np.linspace(0.0, PI, samples, endpoint=False), self.breakpoints[:-1]])
        v = np.abs(self.base(t))
        k = int(np.argmax(v))
        return float(v[k]), float(t[k])

    def check_admissible(self, tol: float = 1e-9) -> None:
        """Raise AdmissibilityError unless |beta| <= 1 and the closure integral vanishes."""
        vmax, tmax = self.max_abs()
        if vmax > 1.0 + 1e-12:
            raise AdmissibilityError(f"|beta| = {vmax:.6g} > 1 at t = {tmax:.6g}")
        ci = float(np.linalg.norm(self.closure_integral()))
        if ci > tol:
            raise AdmissibilityError(f"closure integral has norm {ci:.3g} > {tol:.3g}")

    def default_closure_tol(self, r: float, cells: int) -> float:
        return _EXACT_CLOSURE * r if self.exact else 10.0 * r / cells**2

    def to_json(self) -> dict:
        raise NotImplementedError


# --------------------------------------------------------------------------- representations

@dataclass
class Piece:
    a: float
    b: float
    value: object  # float or vectorized callable on [a, b]


class PiecewiseBeta(BetaProfile):
    """Profile built from consecutive pieces covering [0, pi).

    Constant pieces integrate exactly; callable pieces use composite Simpson
    on ``cells`` cells spread over [0, pi) in proportion to piece length.
    """

    kind = "piecewise"

    def __init__(self, pieces: Sequence, cells: int = DEFAULT_CELLS, meta: dict | None = None):
        ps = [p if isinstance(p, Piece) else Piece(float(p[0]), float(p[1]), p[2]) for p in pieces]
        ps = [p for p in ps if p.b > p.a]
        if not ps or abs(ps[0].a) > 1e-15 or abs(ps[-1].b - PI) > 1e-12:
            raise DomainError("pieces must cover [0, pi)")
        for p, q in zip(ps, ps[1:]):
            if abs(p.b - q.a) > 1e-12:
                raise DomainError("pieces must be contiguous")
        ps[-1].b = PI
        self.pieces = ps
        self.cells = int(cells)
        self.meta = dict(meta or {})
        self.exact = all(not callable(p.value) for p in ps)
        self._starts = np.array([p.a for p in ps])
        self._prefix = np.zeros((len(ps) + 1, 2))
        self._grids = {}
        for i, p in enumerate(ps):
            self._prefix[i + 1] = self._prefix[i] + self._piece_cumulative(i, np.array([p.b]))[0]
        self._check_values()

    def _check_values(self):
        for p in self.pieces:
            if not callable(p.value) and abs(float(p.value)) > 1.0 + 1e-12:
                raise AdmissibilityError(f"constant piece value {p.value} has |beta| > 1")

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([p.a for p in self.pieces] + [PI])

    def base(self, t):
        t = _arr(t)
        idx = np.clip(np.searchsorted(self._starts, t, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty(len(t))
        for i in np.unique(idx):
            mask = idx == i
            v = self.pieces[i].value
            out[mask] = np.asarray(v(t[mask]), dtype=float) if callable(v) else float(v)
        return out

    def _cell_grid(self, i):
        if i not in self._grids:
            p = self.pieces[i]
            n = max(2, int(math.ceil(self.cells * (p.b - p.a) / PI)))
            nodes = np.linspace(p.a, p.b, n + 1)
            cells = _simpson_panel(p.value, nodes[:-1], nodes[1:])
            cum = np.vstack([np.zeros((1, 2)), np.cumsum(cells, axis=0)])
            self._grids[i] = (nodes, cum)
        return self._grids[i]

    def _piece_cumulative(self, i, t):
        """int_{a_i}^t beta T for t inside piece i."""
        p = self.pieces[i]
        if not callable(p.value):
            c = float(p.value)
            return c * np.stack([np.cos(t) - math.cos(p.a), np.sin(t) - math.sin(p.a)], axis=-1)
        nodes, cum = self._cell_grid(i)
        j = np.clip(np.searchsorted(nodes, t, side="right") - 1, 0, len(nodes) - 2)
        return cum[j] + _simpson_panel(p.value, nodes[j], t)

    def base_cumulative(self, t):
        t = np.clip(_arr(t), 0.0, PI)
        idx = np.clip(np.searchsorted(self._starts, t, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty((len(t), 2))
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = self._prefix[i] + self._piece_cumulative(i, t[mask])
        return out

    def to_json(self) -> dict:
        if not self.exact:
            return {"kind": "piecewise-callback", **self.meta}
        return {"kind": "piecewise-constant",
                "breaks": [p.a for p in self.pieces] + [PI],
                "values": [float(p.value) for p in self.pieces], **self.meta}


def piecewise_constant(breaks, values, meta=None) -> PiecewiseBeta:
    """Profile equal to values[i] on [breaks[i], breaks[i+1]); breaks run from 0 to pi."""
    breaks = [float(b) for b in breaks]
    if len(breaks) != len(values) + 1:
        raise DomainError("need one more break than values")
    return PiecewiseBeta([(a, b, float(v)) for a, b, v in zip(breaks, breaks[1:], values)], meta=meta)


def callback_beta(fn: Callable, breakpoints: Sequence[float] = (), cells: int = DEFAULT_CELLS,
                  meta=None) -> PiecewiseBeta:
    """Profile from a vectorized callable on [0, pi); Simpson panels align with ``breakpoints``."""
    bps = sorted({0.0, PI, *[float(b) for b in breakpoints if 0.0 < b < PI]})
    return PiecewiseBeta([(a, b, fn) for a, b in zip(bps, bps[1:])], cells=cells, meta=meta)


class PiecewiseLinearBeta(BetaProfile):
    """Linear interpolation of values at nodes 0 = s_0 < ... < s_M = pi, exact moments."""

    kind = "piecewise-linear"

    def __init__(self, nodes, values, meta=None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.nodes[0] != 0.0 or abs(self.nodes[-1] - PI) > 1e-12 or np.any(np.diff(self.nodes) <= 0):
            raise DomainError("nodes must increase from 0 to pi")
        self.meta = dict(meta or {})
        L = np.diff(self.nodes)
        cells = _linear_panel(self.nodes[:-1], L, self.values[:-1], np.diff(self.values) / L)
        self._cum = np.vstack([np.zeros((1, 2)), np.cumsum(cells, axis=0)])

    @property
    def breakpoints(self):
        return np.array([0.0, PI])

    def base(self, t):
        return np.interp(_arr(t), self.nodes, self.values)

    def base_cumulative(self, t):
        t = np.clip(_arr(t), 0.0, PI)
        j = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, len(self.nodes) - 2)
        a = self.nodes[j]
        slope = (self.values[j + 1] - self.values[j]) / (self.nodes[j + 1] - self.nodes[j])
        return self._cum[j] + _linear_panel(a, t - a, self.values[j], slope)

    def to_json(self):
        return {"kind": "piecewise-linear", "nodes": len(self.nodes), **self.meta}


def _int_cos(m, t):
    return t if m == 0 else np.sin(m * t) / m


def _int_sin(m, t):
    return np.zeros_like(t) if m == 0 else (1.0 - np.cos(m * t)) / m


class TrigBeta(BetaProfile):
    """Finite odd-harmonic series sum_k a_k cos(k t) + b_k sin(k t), closed-form moments."""

    kind = "trig"

    def __init__(self, cos: dict | None = None, sin: dict | None = None):
        self.cos = {int(k): float(v) for k, v in (cos or {}).items() if float(v) != 0.0}
        self.sin = {int(k): float(v) for k, v in (sin or {}).items() if float(v) != 0.0}
        for k in (*self.cos, *self.sin):
            if k % 2 == 0 or k < 1:
                raise AdmissibilityError(f"harmonic {k} is not odd; the profile would not be anti-periodic")

    def base(self, t):
        t = _arr(t)
        out = np.zeros(len(t))
        for k, a in self.cos.items():
            out += a * np.cos(k * t)
        for k, b in self.sin.items():
            out += b * np.sin(k * t)
        return out

    def base_cumulative(self, t):
        t = _arr(t)
        x = np.zeros(len(t))
        y = np.zeros(len(t))
        for k, a in self.cos.items():
            # cos(kt) sin t and cos(kt) cos t via product-to-sum
            x -= a * 0.5 * (_int_sin(k + 1, t) - _int_sin(k - 1, t))
            y += a * 0.5 * (_int_cos(k - 1, t) + _int_cos(k + 1, t))
        for k, b in self.sin.items():
            x -= b * 0.5 * (_int_cos(k - 1, t) - _int_cos(k + 1, t))
            y += b * 0.5 * (_int_sin(k + 1, t) + _int_sin(k - 1, t))
        return np.stack([x, y], axis=-1)

    def max_abs(self, samples: int = 8192):
        return super().max_abs(samples)

    def to_json(self):
        return {"kind": "trig", "cos": {str(k): v for k, v in sorted(self.cos.items())},
                "sin": {str(k): v for k, v in sorted(self.sin.items())}}


def random_trig_beta(rng, max_harmonic: int = 9, terms: int | None = None) -> TrigBeta:
    """Random admissible profile on odd harmonics >= 3 with sum of |coefficients| <= 1."""
    ks = list(range(3, max_harmonic + 1, 2))
    c = rng.standard_normal(2 * len(ks))
    if terms is not None:
        c[rng.permutation(len(c))[terms:]] = 0.0
    c *= rng.uniform(0.3, 1.0) / max(np.sum(np.abs(c)), 1e-300)
    return TrigBeta({k: c[i] for i, k in enumerate(ks)}, {k: c[len(ks) + i] for i, k in enumerate(ks)})


@dataclass(frozen=True)
class TrigSeries:
    """a(t) = sum_k c_k cos(k t) + s_k sin(k t) with exact derivatives."""

    cos: dict = field(default_factory=dict)
    sin: dict = field(default_factory=dict)

    def __call__(self, t):
        t = _arr(t)
        out = np.zeros(len(t))
        for k, v in self.cos.items():
            out += v * np.cos(k * t)
        for k, v in self.sin.items():
            out += v * np.sin(k * t)
        return out

    def second_derivative(self) -> "TrigSeries":
        return TrigSeries({k: -k * k * v for k, v in self.cos.items()},
                          {k: -k * k * v for k, v in self.sin.items()})


# --------------------------------------------------------------------------- the a <-> beta relation

def _second_difference(a, t, h=1e-3):
    def d2(step):
        return (a(t + step) - 2.0 * a(t) + a(t - step)) / (step * step)
    return (4.0 * d2(h / 2.0) - d2(h)) / 3.0


def beta_from_a(a, r: float, samples: int = 4096, check: bool = True) -> BetaProfile:
    """beta = (2/r)(a + a'').

    A TrigSeries is differentiated exactly and gives a TrigBeta; any other
    vectorized callable gets a'' from Richardson-extrapolated central
    differences and yields a callback profile.

    Raises
    ------
    PreconditionError
        If a is not pi anti-periodic on the sample.
    AdmissibilityError
        If |beta| > 1 somewhere; the message names the worst t and the
        smallest width that would make the profile admissible.
    """
    t = np.linspace(0.0, PI, samples, endpoint=False)
    scale = max(1.0, float(np.max(np.abs(a(t)))))
    anti = float(np.max(np.abs(a(t + PI) + a(t))))
    if anti > 1e-8 * scale:
        raise PreconditionError(f"a is not pi anti-periodic: max |a(t + pi) + a(t)| = {anti:.3g}")
    if isinstance(a, TrigSeries):
        coef = {k: (2.0 / r) * (1 - k * k) * v for k, v in a.cos.items() if k != 1}
        scoef = {k: (2.0 / r) * (1 - k * k) * v for k, v in a.sin.items() if k != 1}
        beta = TrigBeta(coef, scoef)
    else:
        beta = callback_beta(lambda s: (2.0 / r) * (a(s) + _second_difference(a, s)),
                             meta={"source": "beta_from_a"})
    if check:
        vmax, tmax = beta.max_abs(samples)
        if vmax > 1.0 + 1e-9:
            raise AdmissibilityError(
                f"|beta| = {vmax:.6g} > 1 at t = {tmax:.6g}; the smallest admissible width is r = {r * vmax:.6g}")
    return beta


def a_from_beta(beta: BetaProfile, r: float, tol: float = 1e-9) -> Callable:
    """Particular solution a(t) = int_0^t (r/2) beta(s) sin(t - s) ds of a + a'' = (r/2) beta.

    The returned callable is vectorized and satisfies a(0) = 0 = a(pi) and
    a(t + pi) = -a(t) whenever the closure integral vanishes.
    """
    ci = float(np.linalg.norm(beta.closure_integral()))
    if ci > tol:
        raise AdmissibilityError(f"closure integral has norm {ci:.3g}; no anti-periodic solution exists")

    def a(t):
        t = _arr(t)
        neg = t < 0
        tt = np.where(neg, t + TWO_PI * np.ceil(-t / TWO_PI), t)
        m = beta.cumulative(tt)
        return 0.5 * r * (np.sin(tt) * m[:, 1] + np.cos(tt) * m[:, 0])

    return a


# --------------------------------------------------------------------------- curves

@dataclass
class PlanarCurve:
    """Samples R(t) of the boundary curve for t in [0, 2 pi] (last sample repeats t = 2 pi)."""

    t: np.ndarray
    points: np.ndarray
    r: float
    steps: int
    beta: BetaProfile
    closure_tol: float

    @property
    def closure_residual(self) -> float:
        return float(np.linalg.norm(self.points[-1] - self.points[0]))

    @property
    def closed(self) -> bool:
        return self.closure_residual <= self.closure_tol

    def at(self, t) -> np.ndarray:
        return position(self.beta, self.r, t)

    @property
    def cloud(self) -> PointCloud:
        return PointCloud(self.points[:-1])

    def as_body(self) -> ConstantWidthBody:
        t = self.t[:-1]
        u = np.column_stack([np.cos(t), np.sin(t)])
        pts = self.points[:-1]
        beta, r = self.beta, self.r
        return ConstantWidthBody(self.r, self.beta, u, pts - 0.5 * self.r * u,
                                 boundary_map=lambda v: position(beta, r, np.mod(np.arctan2(v[:, 1], v[:, 0]), TWO_PI)),
                                 meta={"curve": self})

    def chord_residual(self) -> float:
        """max | |R(t) - R(t + pi)| - r | over the sampled antipodal pairs."""
        m = len(self.t) - 1
        d = np.linalg.norm(self.points[: m // 2] - self.points[m // 2:m], axis=1)
        return float(np.max(np.abs(d - self.r)))


def position(beta: BetaProfile, r: float, t) -> np.ndarray:
    """R(t) for arbitrary t >= 0."""
    t = _arr(t)
    m = beta.cumulative(t)
    base = np.stack([np.cos(t) - 1.0, np.sin(t)], axis=-1)
    return 0.5 * r * (base + m)


def parameter_grid(beta: BetaProfile, steps: int) -> np.ndarray:
    """Uniform grid with ``steps`` intervals on [0, 2 pi] merged with the profile breakpoints.

    The half on [0, pi) is repeated shifted by pi, so sample i and sample
    i + m/2 are antipodal.
    """
    if steps < 4 or steps % 2:
        raise DomainError("steps must be an even integer >= 4")
    half = np.linspace(0.0, PI, steps // 2, endpoint=False)
    half = np.union1d(half, beta.breakpoints[:-1])
    keep = np.concatenate([[True], np.diff(half) > 1e-13])
    half = half[keep]
    return np.concatenate([half, half + PI, [TWO_PI]])


def curve_from_beta(beta: BetaProfile, r: float, steps: int = 4096, check: bool = True) -> PlanarCurve:
    """Sample the curve of a profile at ``steps`` uniform parameters plus its breakpoints."""
    if check:
        beta.check_admissible()
    t = parameter_grid(beta, steps)
    pts = position(beta, r, t)
    cells = getattr(beta, "cells", steps)
    return PlanarCurve(t, pts, float(r), int(steps), beta, beta.default_closure_tol(r, cells))


def corner_parameters(beta: BetaProfile, tol: float = 1e-12) -> np.ndarray:
    """Normal angles in [0, 2 pi) where a stretch with beta = -1 (a corner of the curve) starts."""
    probe = parameter_grid(beta, 4096)
    corner = np.abs(beta(0.5 * (probe[:-1] + probe[1:])) + 1.0) <= tol
    starts = corner & ~np.roll(corner, 1)
    return probe[:-1][starts]


def curve_vertices(beta: BetaProfile, r: float) -> np.ndarray:
    """Corner points of the curve (e.g. the 2k + 1 vertices of a Reuleaux polygon)."""
    return position(beta, r, corner_parameters(beta))


def barbier_perimeter(curve: PlanarCurve) -> float:
    """Length of the closed sampled curve by chord summation.

    The chord sum over all samples is combined with the sum over every
    other sample, (4 L_fine - L_coarse) / 3, which cancels the leading
    second-order chord deficit.
    """
    if not curve.closed:
        raise DomainError(f"curve is open: closure residual {curve.closure_residual:.3g}")
    pts = curve.points
    fine = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
    if (len(pts) - 1) % 2:
        return fine
    coarse_pts = pts[::2]
    coarse = float(np.sum(np.linalg.norm(np.diff(coarse_pts, axis=0), axis=1)))
    return (4.0 * fine - coarse) / 3.0


# --------------------------------------------------------------------------- families of profiles

def reuleaux_beta(k: int) -> PiecewiseBeta:
    """+1/-1 alternating on 2k + 1 equal intervals of [0, pi): the Reuleaux (2k+1)-gon."""
    if k < 1:
        raise DomainError("k must be a positive integer")
    n = 2 * k + 1
    breaks = [i * PI / n for i in range(n)] + [PI]
    return piecewise_constant(breaks, [(-1.0) ** i for i in range(n)], meta={"reuleaux": k})


def mu_measure(a: float, b: float) -> float:
    """Measure with density sin t on [0, pi/2]: cos a - cos b."""
    return math.cos(a) - math.cos(b)


def _half_pieces(beta_half):
    if callable(beta_half) and not isinstance(beta_half, (list, tuple)):
        return [Piece(0.0, PI / 2, beta_half)]
    ps = [p if isinstance(p, Piece) else Piece(float(p[0]), float(p[1]), p[2]) for p in beta_half]
    if abs(ps[0].a) > 1e-15 or abs(ps[-1].b - PI / 2) > 1e-12:
        raise DomainError("half profile pieces must cover [0, pi/2]")
    ps[-1].b = PI / 2
    return ps


def _mu_integral(pieces, cells=DEFAULT_CELLS) -> float:
    total = 0.0
    for p in pieces:
        if callable(p.value):
            n = max(2, 2 * int(math.ceil(cells * (p.b - p.a) / PI)))
            s = np.linspace(p.a, p.b, n + 1)
            f = np.asarray(p.value(s), dtype=float) * np.sin(s)
            w = np.ones(n + 1)
            w[1:-1:2], w[2:-1:2] = 4.0, 2.0
            total += float(np.dot(w, f) * (p.b - p.a) / (3.0 * n))
        else:
            total += float(p.value) * mu_measure(p.a, p.b)
    return total


def _mirror(fn):
    return lambda s: fn(PI - np.asarray(s, dtype=float))


def mirror_extend_beta(beta_half, tol: float = 1e-9, cells: int = DEFAULT_CELLS, meta=None) -> PiecewiseBeta:
    """Extend a profile on [0, pi/2] by beta(pi - t) = beta(t), then anti-periodically.

    ``beta_half`` is a vectorized callable on [0, pi/2] or a list of
    ``(a, b, value)`` pieces covering it. The mirror symmetry cancels the
    cosine part of the closure integral; the sine part vanishes iff
    int_0^(pi/2) beta(t) sin(t) dt = 0, which is checked.
    """
    pieces = _half_pieces(beta_half)
    probe = np.linspace(0.0, PI / 2, 2049)
    for p in pieces:
        v = np.asarray(p.value(np.clip(probe, p.a, p.b)), dtype=float) if callable(p.value) else np.array([p.value])
        if np.max(np.abs(v)) > 1.0 + 1e-12:
            raise AdmissibilityError(f"half profile exceeds 1 in absolute value on [{p.a:.6g}, {p.b:.6g}]")
    mu = _mu_integral(pieces, cells)
    if abs(mu) > tol:
        raise AdmissibilityError(f"int beta sin over [0, pi/2] is {mu:.6g}, not 0")
    mirrored = [Piece(PI - p.b, PI - p.a, _mirror(p.value) if callable(p.value) else p.value)
                for p in reversed(pieces)]
    full = [Piece(p.a, p.b, p.value) for p in pieces] + mirrored
    return PiecewiseBeta(full, cells=cells, meta=dict(meta or {}, mirrored=True))


def fat_cantor_intervals(stage: int) -> list:
    """Intervals of [0, 1] of total length exactly 1/2 approximating a fat Cantor set.

    Stage-k Smith-Volterra-Cantor intervals (removing middle gaps of length
    4^-n at step n), each shrunk about its center so the total is 1/2.
    """
    ivs = [(0.0, 1.0)]
    for n in range(1, stage + 1):
        gap = 0.25**n
        nxt = []
        for a, b in ivs:
            m = 0.5 * (a + b)
            nxt += [(a, m - gap / 2), (m + gap / 2, b)]
        ivs = nxt
    total = sum(b - a for a, b in ivs)
    f = 0.5 / total
    out = []
    for a, b in ivs:
        m, h = 0.5 * (a + b), 0.5 * (b - a) * f
        out.append((m - h, m + h))
    return out


def cantor_beta(stage: int = 6) -> PiecewiseBeta:
    """Mirror-extended chi_A - chi_A' with A a stage-k fat Cantor set of mu-measure 1/2.

    A is built in the coordinate s = 1 - cos t, in which mu is Lebesgue
    measure, and mapped back by t = arccos(1 - s).
    """
    ivs = fat_cantor_intervals(stage)
    pieces, cur = [], 0.0
    for a, b in ivs:
        ta, tb = math.acos(1.0 - a), math.acos(1.0 - b)
        if ta > cur:
            pieces.append(Piece(cur, ta, -1.0))
        pieces.append(Piece(ta, tb, 1.0))
        cur = tb
    if cur < PI / 2:
        pieces.append(Piece(cur, PI / 2, -1.0))
    return mirror_extend_beta(pieces, tol=1e-12, meta={"cantor_stage": stage})


# --------------------------------------------------------------------------- arc embedding

@dataclass
class EmbeddedArc:
    beta: PiecewiseBeta
    body: ConstantWidthBody
    curve: PlanarCurve
    constant: float
    theta_star: float


def embed_arc(rho, theta_star: float, r: float, steps: int = 4096, cells: int = DEFAULT_CELLS) -> EmbeddedArc:
    """Extend a curve piece into the boundary of a constant-width body.

    The piece is given by its radius of curvature ``rho`` (a constant or a
    vectorized callable) as a function of the normal angle on [0, theta*].
    Its profile 2 rho/r - 1 is continued on (theta*, pi/2] by the constant
    that zeroes the mu-integral, then mirror-extended. The output curve
    starts at the origin with normal angle 0, like the piece.
    """
    if theta_star <= 0:
        raise PreconditionError("theta* must be positive")
    if theta_star > PI / 3 + 1e-12:
        raise PreconditionError(f"theta* = {theta_star:.6g} exceeds pi/3; the piece cannot be embedded")
    theta_star = min(theta_star, PI / 3)
    if callable(rho):
        probe = np.linspace(0.0, theta_star, 4097)
        vals = np.asarray(rho(probe), dtype=float)
        lo, hi = float(vals.min()), float(vals.max())
        piece_beta = lambda t: 2.0 * np.asarray(rho(t), dtype=float) / r - 1.0  # noqa: E731
    else:
        lo = hi = float(rho)
        piece_beta = 2.0 * float(rho) / r - 1.0
    if lo < -1e-12 or hi > r * (1.0 + 1e-12):
        raise PreconditionError(f"radius of curvature must lie in [0, r]; got range [{lo:.6g}, {hi:.6g}]")
    first = [Piece(0.0, theta_star, piece_beta)]
    c = -_mu_integral(first, cells) / max(mu_measure(theta_star, PI / 2), 1e-300)
    halves = first + ([Piece(theta_star, PI / 2, c)] if theta_star < PI / 2 else [])
    beta = mirror_extend_beta(halves, tol=1e-9, cells=cells, meta={"embedded_arc": theta_star})
    curve = curve_from_beta(beta, r, steps)
    body = curve.as_body()
    return EmbeddedArc(beta, body, curve, float(c), float(theta_star))


def piece_points(rho, t, order: int = 64) -> np.ndarray:
    """Points int_0^t rho(s) T(s) ds of a curve piece, by Gauss-Legendre on each [0, t]."""
    t = _arr(t)
    x, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * t[:, None] * (x[None, :] + 1.0)
    vals = np.asarray(rho(s), dtype=float) if callable(rho) else np.full(s.shape, float(rho))
    tx = (vals * -np.sin(s)) @ w
    ty = (vals * np.cos(s)) @ w
    return 0.5 * t[:, None] * np.column_stack([tx, ty])


def arc_containment(embedded: EmbeddedArc, rho, samples: int = 512) -> float:
    """Largest distance between the piece and the output curve at matching normal angles."""
    t = np.linspace(0.0, embedded.theta_star, samples)
    return float(np.max(np.linalg.norm(piece_points(rho, t) - embedded.curve.at(t), axis=1)))


# --------------------------------------------------------------------------- mollification

def _project_closure(nodes, v, rounds=20, tol=1e-12):
    """Remove the first-harmonic moment from a sampled profile without leaving [-1, 1].

    The correction is (1 - v^2)(c1 cos + c2 sin); it keeps |v| <= 1 as long as
    |c1 cos + c2 sin| <= 1/2, and the moment is linear in (c1, c2).
    """
    cs, sn = np.cos(nodes), np.sin(nodes)
    for _ in range(rounds):
        w = 1.0 - v * v
        m0 = PiecewiseLinearBeta(nodes, v).closure_integral()
        if np.linalg.norm(m0) <= tol and np.max(np.abs(v)) <= 1.0:
            return v, float(np.linalg.norm(m0))
        a = PiecewiseLinearBeta(nodes, w * cs).closure_integral()
        b = PiecewiseLinearBeta(nodes, w * sn).closure_integral()
        coef = np.linalg.solve(np.column_stack([a, b]), -m0)
        phi = coef[0] * cs + coef[1] * sn
        if np.max(np.abs(phi)) > 0.5:
            v = v + w * np.clip(phi, -0.5, 0.5)
        else:
            v = v + w * phi
        v = np.clip(v, -1.0, 1.0)
    res = float(np.linalg.norm(PiecewiseLinearBeta(nodes, v).closure_integral()))
    if res > 1e-9:
        raise ConvergenceError(f"closure re-projection did not converge: residual {res:.3g}")
    return v, res


def smooth_beta_sequence(beta: BetaProfile, n: int, nodes: int = 8192) -> PiecewiseLinearBeta:
    """Stage-n mollification of an admissible profile.

    Convolves the anti-periodic extension with a triangular kernel of total
    width pi / 2**n (circular convolution on ``2 * nodes`` samples of
    [0, 2 pi)), then restores the closure integral exactly.
    """
    m2 = 2 * nodes
    s = np.arange(m2) * (PI / nodes)
    v = beta(s)
    half_w = PI / 2 ** (n + 1)
    ds = PI / nodes
    j = np.arange(m2)
    dist = np.minimum(j, m2 - j) * ds
    ker = np.maximum(0.0, 1.0 - dist / half_w)
    ker /= ker.sum()
    conv = np.real(np.fft.ifft(np.fft.fft(v) * np.fft.fft(ker)))
    grid = np.append(s[:nodes], PI)
    vals = np.append(conv[:nodes], -conv[0])
    vals = np.clip(vals, -1.0, 1.0)
    vals, res = _project_closure(grid, vals)
    return PiecewiseLinearBeta(grid, vals, meta={"mollified_stage": n, "closure_residual": res})


# --------------------------------------------------------------------------- comparisons

def aligned_hausdorff(a: PlanarCurve, b: PlanarCurve) -> float:
    """Hausdorff distance after a rigid motion matching b's samples to a's parameters."""
    pa = a.points[:-1]
    pb = b.at(a.t[:-1])
    moved = procrustes_align(pb, pa)
    return hausdorff_distance(PointCloud(pa), PointCloud(moved))


def curve_hausdorff(a: PlanarCurve, b: PlanarCurve) -> float:
    return hausdorff_distance(a.cloud, b.cloud)


def profile_from_config(spec) -> BetaProfile:
    """Build a profile from a mapping (the JSON profile format).

    Kinds: ``{"kind": "circle"}``, ``{"kind": "reuleaux", "k": 2}``,
    ``{"kind": "trig", "cos": {"3": -1}, "sin": {}}``,
    ``{"kind": "cantor", "stage": 6}``,
    ``{"kind": "piecewise-constant", "breaks": [...], "values": [...]}``,
    ``{"kind": "mollified", "base": {...}, "stage": 6}``.
    """
    spec = dict(spec)
    kind = str(spec.pop("kind", "")).lower()

    def only(*keys):
        extra = set(spec) - set(keys)
        if extra:
            raise DomainError(f"unknown keys for profile kind {kind!r}: {sorted(extra)}")

    if kind == "circle":
        only()
        return TrigBeta()
    if kind == "reuleaux":
        only("k")
        return reuleaux_beta(int(spec.get("k", 1)))
    if kind == "trig":
        only("cos", "sin")
        return TrigBeta({int(k): v for k, v in spec.get("cos", {}).items()},
                        {int(k): v for k, v in spec.get("sin", {}).items()})
    if kind == "cantor":
        only("stage")
        return cantor_beta(int(spec.get("stage", 6)))
    if kind == "piecewise-constant":
        only("breaks", "values")
        return piecewise_constant(spec["breaks"], spec["values"])
    if kind == "mollified":
        only("base", "stage")
        return smooth_beta_sequence(profile_from_config(spec["base"]), int(spec.get("stage", 6)))
    raise DomainError(f"unknown profile kind {kind!r}")
