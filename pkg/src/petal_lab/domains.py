"""Koenigs domains: explicitly mapped catalog members and profile domains.

Every catalog member except the disk and half-plane is the image of a strip
(``source``) under an explicit map ``m``; it exposes ``to_source`` (the
inverse of m), ``from_source`` and ``source_derivative``. Profile domains
carry only geometry: membership, boundary distance and gap functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConvergenceError, DomainError, InputError, UnsupportedExactError
from .hypgeo import HALF_PI, STANDARD_STRIP, StripSpec
from .quadrature import DIVERGENT, FINITE, QuadratureResult

# ---------------------------------------------------------------- two-slit map


def two_slit_map(z):
    """g(z) = z + (1 + e^{2z})/2, mapping the standard strip onto the two-slit plane."""
    z = np.asarray(z, dtype=complex)
    out = z + 0.5 * (1.0 + np.exp(2.0 * z))
    return out.item() if out.ndim == 0 else out


def two_slit_map_prime(z):
    z = np.asarray(z, dtype=complex)
    out = 1.0 + np.exp(2.0 * z)
    return out.item() if out.ndim == 0 else out


def _newton_g(w, z, tol, maxiter):
    """Damped Newton for g(z) = w, keeping iterates inside the standard strip."""
    z = z.copy()
    for _ in range(maxiter):
        e2 = np.exp(2.0 * z)
        r = z + 0.5 * (1.0 + e2) - w
        step = r / (1.0 + e2)
        lam = np.ones(z.shape)
        zn = z - step
        for _ in range(40):
            bad = np.abs(zn.imag) >= HALF_PI
            if not bad.any():
                break
            lam = np.where(bad, 0.5 * lam, lam)
            zn = z - lam * step
        z = np.where(np.abs(zn.imag) < HALF_PI, zn, z)
        if np.all(np.abs(lam * step) <= tol * np.maximum(1.0, np.abs(z))):
            break
    return z


def _initial_guesses(flat, lim):
    guesses = []
    g = flat - 0.5
    guesses.append(g.real + 1j * np.clip(g.imag, -lim, lim))
    g = 0.5 * np.log(2.0 * flat + 0j)
    for _ in range(3):
        g = 0.5 * np.log(2.0 * (flat - g) - 1.0 + 0j)
    guesses.append(g.real + 1j * np.clip(g.imag, -lim, lim))
    for tip in (1j * HALF_PI, -1j * HALF_PI):
        u = np.sqrt(-(flat - tip))
        u = np.where((u.imag > 0) == (tip.imag > 0), -u, u)
        g = tip + u
        guesses.append(g.real + 1j * np.clip(g.imag, -lim, lim))
    return guesses


def two_slit_map_inverse(w, *, tol: float = 1e-13, maxiter: int = 60):
    """Invert g by damped Newton from several asymptotic starting guesses."""
    w = np.asarray(w, dtype=complex)
    flat = np.atleast_1d(w).ravel()
    on_slit = (flat.real <= 0) & (np.abs(np.abs(flat.imag) - HALF_PI) == 0)
    if on_slit.any():
        raise DomainError("point lies on a slit of the two-slit domain")
    lim = HALF_PI * (1 - 1e-12)
    with np.errstate(all="ignore"):
        guesses = np.stack(_initial_guesses(flat, lim))
    best = np.full(flat.shape, np.nan + 0j)
    best_res = np.full(flat.shape, np.inf)
    todo = np.ones(flat.shape, dtype=bool)
    # left asymptote first for points far left, right asymptote otherwise,
    # then the other one, then the two tip expansions
    first = np.where(flat.real < -1.0, 0, 1)
    for stage in range(4):
        idx = np.flatnonzero(todo)
        if idx.size == 0:
            break
        k = first[idx] if stage == 0 else (1 - first[idx] if stage == 1 else np.full(idx.size, stage))
        with np.errstate(over="ignore", invalid="ignore"):
            z = _newton_g(flat[idx], guesses[k, idx], tol, maxiter)
            res = np.abs(two_slit_map(z) - flat[idx])
        res = np.where((np.abs(z.imag) < HALF_PI) & np.isfinite(res), res, np.inf)
        take = res < best_res[idx]
        best[idx[take]] = z[take]
        best_res[idx[take]] = res[take]
        todo = best_res > 1e-11 * np.maximum(1.0, np.abs(flat))
    ok = best_res <= 1e-11 * np.maximum(1.0, np.abs(flat))
    if not ok.all():
        raise ConvergenceError(
            f"two-slit inversion failed at {flat[~ok][:3]} (residual {best_res[~ok][:3]})")
    out = best.reshape(np.shape(w))
    return out.item() if out.ndim == 0 else out


# ---------------------------------------------------------------- catalog variants


@dataclass(frozen=True)
class Disk:
    def contains(self, z):
        return np.abs(np.asarray(z)) < 1

    def boundary_query(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        nearest = np.where(r > 0, z / np.where(r > 0, r, 1), 1.0 + 0j)
        return 1.0 - r, nearest

    def im_bounds(self):
        return (-1.0, 1.0)


@dataclass(frozen=True)
class HalfPlane:
    """{Im w > height}."""

    height: float = 0.0

    def contains(self, z):
        return np.imag(z) > self.height

    def boundary_query(self, z):
        z = np.asarray(z, dtype=complex)
        return z.imag - self.height, z.real + 1j * self.height

    def im_bounds(self):
        return (self.height, math.inf)

    def maximal_strip(self):
        return None


class _StripSourced:
    """Shared helpers for domains given as m(source strip)."""

    source: StripSpec

    def to_source(self, w):  # pragma: no cover - overridden
        raise NotImplementedError

    def from_source(self, zeta):  # pragma: no cover - overridden
        raise NotImplementedError

    def source_derivative(self, zeta):  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class Strip(_StripSourced):
    """The strip {a < Im w < b}; S_delta is Strip(-pi/2, pi/2 + delta)."""

    a: float = -HALF_PI
    b: float = HALF_PI

    def __post_init__(self):
        StripSpec(self.a, self.b)

    @property
    def source(self) -> StripSpec:
        return StripSpec(self.a, self.b)

    @property
    def spec(self) -> StripSpec:
        return self.source

    def contains(self, z):
        y = np.imag(z)
        return (self.a < y) & (y < self.b)

    def boundary_query(self, z):
        z = np.asarray(z, dtype=complex)
        up = self.b - z.imag
        lo = z.imag - self.a
        d = np.minimum(up, lo)
        nearest = z.real + 1j * np.where(up <= lo, self.b, self.a)
        return d, nearest

    def to_source(self, w):
        return np.asarray(w, dtype=complex)

    def from_source(self, zeta):
        return np.asarray(zeta, dtype=complex)

    def source_derivative(self, zeta):
        return np.ones(np.shape(zeta), dtype=complex)

    def delta_pair(self, t):
        z = np.zeros(np.shape(t))
        return z, z

    def im_bounds(self):
        return (self.a, self.b)

    def maximal_strip(self) -> StripSpec:
        return self.source


def widened_strip(delta: float) -> Strip:
    """S_delta = {-pi/2 < Im w < pi/2 + delta}."""
    if not delta > 0:
        raise InputError("widened strip needs delta > 0")
    return Strip(-HALF_PI, HALF_PI + delta)


@dataclass(frozen=True)
class TwoSlit(_StripSourced):
    """The plane minus the half-lines {Re w <= slit_end, Im w in {a, b}}.

    With the standard strip and slit_end = 0 this is g(standard strip).
    """

    strip: StripSpec = STANDARD_STRIP
    slit_end: float = 0.0

    @property
    def source(self) -> StripSpec:
        return STANDARD_STRIP

    @property
    def _scale(self) -> float:
        return self.strip.width() / math.pi

    def _affine_inv(self, w):
        return (np.asarray(w, dtype=complex) - self.slit_end - 1j * self.strip.mid) / self._scale

    def from_source(self, zeta):
        return self._scale * np.asarray(two_slit_map(zeta)) + 1j * self.strip.mid + self.slit_end

    def to_source(self, w):
        return np.asarray(two_slit_map_inverse(self._affine_inv(w)))

    def source_derivative(self, zeta):
        return self._scale * np.asarray(two_slit_map_prime(zeta))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        on = (z.real <= self.slit_end) & ((z.imag == self.strip.a) | (z.imag == self.strip.b))
        return ~on

    def boundary_query(self, z):
        z = np.asarray(z, dtype=complex)
        cx = np.minimum(z.real, self.slit_end)
        du = np.hypot(z.real - cx, z.imag - self.strip.b)
        dl = np.hypot(z.real - cx, z.imag - self.strip.a)
        d = np.minimum(du, dl)
        nearest = cx + 1j * np.where(du <= dl, self.strip.b, self.strip.a)
        return d, nearest

    def delta_pair(self, t):
        t = np.asarray(t, dtype=float)
        d = np.where(t <= self.slit_end, 0.0, np.inf)
        return d, d

    def im_bounds(self):
        return (-math.inf, math.inf)

    def maximal_strip(self) -> StripSpec:
        return self.strip


@dataclass(frozen=True, eq=False)
class Mapped(_StripSourced):
    """A user-supplied image m(source) with derivative and inverse."""

    source: StripSpec
    m: Callable
    m_prime: Callable
    m_inverse: Callable
    contains_fn: Callable
    name: str = "mapped"
    bounds: tuple = (-math.inf, math.inf)
    strip: Optional[StripSpec] = None

    def from_source(self, zeta):
        return np.asarray(self.m(np.asarray(zeta, dtype=complex)))

    def to_source(self, w):
        return np.asarray(self.m_inverse(np.asarray(w, dtype=complex)))

    def source_derivative(self, zeta):
        return np.asarray(self.m_prime(np.asarray(zeta, dtype=complex)))

    def contains(self, z):
        return np.asarray(self.contains_fn(np.asarray(z, dtype=complex)))

    def im_bounds(self):
        return self.bounds

    def maximal_strip(self):
        return self.strip


@dataclass(frozen=True, eq=False)
class DiskImage:
    """h(disk) for an explicit Koenigs map h (used for parabolic examples)."""

    name: str
    h: Callable
    h_prime: Callable
    contains_fn: Callable
    bounds: tuple = (-math.inf, math.inf)

    def contains(self, z):
        return np.asarray(self.contains_fn(np.asarray(z, dtype=complex)))

    def im_bounds(self):
        return self.bounds

    def maximal_strip(self):
        return None


# ---------------------------------------------------------------- boundary profiles


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class PowerTail:
    """c |t|^-p, extending to -infinity."""

    c: float
    p: float


@dataclass(frozen=True)
class Segment:
    t: float
    shape: Union[Const, PowerTail]


class BoundaryProfile:
    """Monotone gap function built from constant steps and an optional power tail.

    Segments are sorted by breakpoint. A constant segment at t_k governs
    [t_k, t_{k+1}). A power tail may only be the leftmost segment: it gives
    c|t|^-p on (-inf, t_0) and holds its end value c|t_0|^-p on [t_0, t_1).
    Without a tail the gap is 0 left of the first breakpoint.
    """

    def __init__(self, segments: Sequence[Segment] = ()):
        segs = sorted(segments, key=lambda s: s.t)
        ts = [s.t for s in segs]
        if len(set(ts)) != len(ts):
            raise InputError("profile breakpoints must be distinct")
        self.segments = tuple(segs)
        self.tail: Optional[tuple[float, float, float]] = None
        starts = [-math.inf]
        values = [0.0]
        for k, s in enumerate(segs):
            if isinstance(s.shape, PowerTail):
                if k != 0:
                    raise InputError("a power tail must be the leftmost segment")
                c, p = float(s.shape.c), float(s.shape.p)
                if not (c > 0 and p > 0):
                    raise InputError("power tail needs c > 0 and p > 0")
                if not s.t < 0:
                    raise InputError("power tail breakpoint must be negative")
                self.tail = (float(s.t), c, p)
                starts = [float(s.t)]
                values = [c * abs(s.t) ** (-p)]
            elif isinstance(s.shape, Const):
                v = float(s.shape.value)
                if not (v >= 0 and math.isfinite(v)):
                    raise InputError("constant gap must be finite and nonnegative")
                if v < values[-1]:
                    raise InputError(
                        f"profile must be non-decreasing (value {v} at t={s.t} "
                        f"below previous {values[-1]})")
                starts.append(float(s.t))
                values.append(v)
            else:
                raise InputError(f"unknown segment shape {s.shape!r}")
        self._starts = np.array(starts)
        self._values = np.array(values)

    def __repr__(self):
        return f"BoundaryProfile({list(self.segments)!r})"

    def __eq__(self, other):
        return isinstance(other, BoundaryProfile) and self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)

    @property
    def steps(self) -> list[tuple[float, float]]:
        return list(zip(self._starts.tolist(), self._values.tolist()))

    def sup(self) -> float:
        return float(self._values[-1])

    def _tail_value(self, t):
        _, c, p = self.tail
        with np.errstate(divide="ignore"):
            return c * np.abs(t) ** (-p)

    def __call__(self, t):
        """Right-continuous evaluation."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self._starts, t, side="right") - 1
        out = self._values[np.clip(idx, 0, None)]
        if self.tail is not None:
            out = np.where(t < self.tail[0], self._tail_value(np.minimum(t, self.tail[0])), out)
        elif len(self._starts) > 0:
            out = np.where(idx < 0, 0.0, out)
        return out.item() if out.ndim == 0 else out

    def left_limit(self, t):
        """Left limit; the smaller of the two one-sided values for a monotone profile."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self._starts, t, side="left") - 1
        out = self._values[np.clip(idx, 0, None)]
        if self.tail is not None:
            out = np.where(t <= self.tail[0], self._tail_value(np.minimum(t, self.tail[0])), out)
        return out.item() if out.ndim == 0 else out

    # pieces for integration: list of (lo, hi, kind, params)
    def pieces(self):
        out = []
        if self.tail is not None:
            t0, c, p = self.tail
            out.append((-math.inf, t0, "tail", (c, p)))
        starts = self._starts.tolist() + [math.inf]
        for k, v in enumerate(self._values.tolist()):
            out.append((starts[k], starts[k + 1], "const", (v,)))
        return out

    # ----- geometry of the graph y = base + delta(x)

    def _upper_distance(self, px, py, base):
        """Distance from points below the graph y = base + delta(x) to the graph."""
        best = np.full(px.shape, np.inf)
        nx = np.zeros(px.shape)
        ny = np.zeros(px.shape)

        def take(d, qx, qy):
            nonlocal best, nx, ny
            m = d < best
            best = np.where(m, d, best)
            nx = np.where(m, qx, nx)
            ny = np.where(m, qy, ny)

        starts = self._starts.tolist() + [math.inf]
        vals = self._values.tolist()
        for k, v in enumerate(vals):
            x1, x2 = starts[k], starts[k + 1]
            H = base + v
            cx = np.clip(px, x1, x2)
            take(np.hypot(px - cx, py - H), cx, np.full(px.shape, H))
            if k > 0 or (self.tail is None and math.isfinite(x1)):
                lo = base + (vals[k - 1] if k > 0 else 0.0)
                cy = np.clip(py, lo, H)
                take(np.hypot(px - x1, py - cy), np.full(px.shape, x1), cy)
        if self.tail is not None:
            qx, qy = _tail_foot(px, py, base, *self.tail)
            take(np.hypot(px - qx, py - qy), qx, qy)
        return best, nx + 1j * ny


def _tail_foot(px, py, base, t0, c, p, iters: int = 60):
    """Nearest point on the curve y = base + c(-x)^-p, x <= t0, by safeguarded Newton."""

    def curve(x):
        return base + c * (-x) ** (-p)

    x_start = np.minimum(px, t0)
    d0 = np.hypot(px - x_start, py - curve(x_start))
    lo = px - d0
    hi = np.minimum(px + d0, t0)
    x = x_start.copy()
    for _ in range(iters):
        u = -x
        f = c * u ** (-p)
        f1 = c * p * u ** (-p - 1)
        f2 = c * p * (p + 1) * u ** (-p - 2)
        r = base + f - py
        g1 = (x - px) + r * f1
        g2 = 1.0 + f1 * f1 + r * f2
        g2 = np.where(g2 > 0.1, g2, 1.0 + f1 * f1)
        xn = np.clip(x - g1 / g2, lo, hi)
        done = np.abs(xn - x) <= 1e-15 * np.maximum(1.0, np.abs(x))
        x = xn
        if done.all():
            break
    # the endpoint t0 and the starting point are valid candidates too
    cand = [x, np.full(px.shape, t0), x_start]
    best_x = x
    best_d = np.hypot(px - x, py - curve(x))
    for cx in cand[1:]:
        d = np.hypot(px - cx, py - curve(cx))
        m = d < best_d
        best_x = np.where(m, cx, best_x)
        best_d = np.where(m, d, best_d)
    return best_x, curve(best_x)


@dataclass(frozen=True)
class ProfileDomain:
    """{a - delta1(x) < y < b + delta2(x)} over a maximal strip S(a, b)."""

    strip: StripSpec = STANDARD_STRIP
    upper: BoundaryProfile = field(default_factory=BoundaryProfile)
    lower: BoundaryProfile = field(default_factory=BoundaryProfile)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        return (self.strip.a - self.lower.left_limit(x) < y) & (y < self.strip.b + self.upper.left_limit(x))

    def boundary_query(self, z):
        z = np.asarray(z, dtype=complex)
        px, py = np.atleast_1d(z.real), np.atleast_1d(z.imag)
        du, nu = self.upper._upper_distance(px, py, self.strip.b)
        ref = self.strip.a + self.strip.b
        dl, nl = self.lower._upper_distance(px, ref - py, self.strip.b)
        nl = nl.real + 1j * (ref - nl.imag)
        d = np.minimum(du, dl)
        n = np.where(du <= dl, nu, nl)
        if np.ndim(z) == 0:
            return d.item(), n.item()
        return d.reshape(z.shape), n.reshape(z.shape)

    def delta_pair(self, t):
        return np.asarray(self.lower(t)), np.asarray(self.upper(t))

    def im_bounds(self):
        return (self.strip.a - self.lower.sup(), self.strip.b + self.upper.sup())

    def maximal_strip(self) -> StripSpec:
        return self.strip


def half_widened_strip(delta: float) -> ProfileDomain:
    """S*_delta: the standard strip with the upper side raised by delta for Re > 0."""
    return ProfileDomain(STANDARD_STRIP, BoundaryProfile([Segment(0.0, Const(delta))]))


# ---------------------------------------------------------------- module-level oracles


def contains(domain, z):
    out = np.asarray(domain.contains(z))
    return bool(out) if out.ndim == 0 else out


def dist_to_boundary(domain, z):
    if not np.all(domain.contains(z)):
        raise DomainError("point outside domain")
    d, _ = domain.boundary_query(z)
    return d


def delta_pair(domain, t):
    if not hasattr(domain, "delta_pair"):
        raise UnsupportedExactError(f"no cross-section oracle for {type(domain).__name__}")
    d1, d2 = domain.delta_pair(t)
    if np.ndim(t) == 0:
        return float(d1), float(d2)
    return d1, d2


def delta(domain, t):
    d1, d2 = delta_pair(domain, t)
    out = np.maximum(d1, d2)
    return float(out) if np.ndim(out) == 0 else out


def _piece_integral(kind, params, lo, hi) -> float:
    if hi <= lo:
        return 0.0
    if kind == "const":
        v = params[0]
        if v == 0:
            return 0.0
        return v * (hi - lo)
    c, p = params
    # integral of c|t|^-p over [lo, hi] with hi < 0
    if p == 1:
        return c * (math.log(abs(lo)) - math.log(abs(hi))) if math.isfinite(lo) else math.inf
    if math.isinf(lo):
        return c * abs(hi) ** (1 - p) / (p - 1) if p > 1 else math.inf
    return c * (abs(hi) ** (1 - p) - abs(lo) ** (1 - p)) / (p - 1)


def _piece_eval(kind, params, t):
    if kind == "const":
        return params[0]
    c, p = params
    return c * abs(t) ** (-p)


def _crossings(k1, p1, k2, p2, lo, hi):
    """Points in (lo, hi) where two piece functions are equal."""
    pts = []
    if k1 == "const" and k2 == "const":
        return pts
    if k1 == "const":
        k1, p1, k2, p2 = k2, p2, k1, p1
    c, p = p1
    if k2 == "const":
        v = p2[0]
        if v > 0:
            pts.append(-((c / v) ** (1.0 / p)))
    else:
        c2, q = p2
        if q != p:
            pts.append(-((c / c2) ** (1.0 / (p - q))))
    return [x for x in pts if lo < x < hi]


def max_profile_integral(f1: BoundaryProfile, f2: BoundaryProfile, hi: float,
                         lo: float = -math.inf) -> float:
    """Closed-form integral of max(f1, f2) over [lo, hi]."""
    cuts = {x for f in (f1, f2) for piece in f.pieces() for x in piece[:2]}
    edges = [lo] + sorted(x for x in cuts if math.isfinite(x) and lo < x < hi) + [hi]

    def piece_at(f, t):
        for a, b, kind, params in f.pieces():
            if a <= t < b:
                return kind, params
        return "const", (0.0,)

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        probe = b - 1.0 if math.isinf(a) else 0.5 * (a + b)
        k1, q1 = piece_at(f1, probe)
        k2, q2 = piece_at(f2, probe)
        sub = [a] + _crossings(k1, q1, k2, q2, a, b) + [b]
        for u, v in zip(sub[:-1], sub[1:]):
            m = v - 1.0 if math.isinf(u) else 0.5 * (u + v)
            kind, params = (k1, q1) if _piece_eval(k1, q1, m) >= _piece_eval(k2, q2, m) else (k2, q2)
            total += _piece_integral(kind, params, u, v)
    return total


def euclidean_gap_integral(domain, upper: float = 0.0) -> QuadratureResult:
    """Closed-form integral of the gap delta over (-inf, upper]."""
    if isinstance(domain, Strip):
        return QuadratureResult(0.0, 0.0, FINITE, math.inf, ((math.inf, 0.0),), 0.0)
    if isinstance(domain, TwoSlit):
        if domain.slit_end < upper:
            witness = ((16.0, math.inf), (32.0, math.inf))
            return QuadratureResult(math.inf, math.inf, DIVERGENT, upper - domain.slit_end,
                                    witness, 0.0)
        return QuadratureResult(0.0, 0.0, FINITE, math.inf, ((math.inf, 0.0),), 0.0)
    if isinstance(domain, ProfileDomain):
        total = max_profile_integral(domain.lower, domain.upper, upper)
        partials = []
        for k in range(5):
            T = 16.0 * 2**k
            partials.append((T, max_profile_integral(domain.lower, domain.upper, upper, upper - T)))
        if math.isfinite(total):
            return QuadratureResult(total, 0.0, FINITE, math.inf, tuple(partials), 0.0)
        return QuadratureResult(math.inf, math.inf, DIVERGENT, partials[-1][0],
                                tuple(partials), 0.0)
    raise UnsupportedExactError(f"no gap function for {type(domain).__name__}")
