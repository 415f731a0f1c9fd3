"""Hyperbolic densities, conformal radii, Green's functions and harmonic measures.

Curvature -1 throughout: the disk density is 2/(1-|z|^2) and the conformal
radius is R = 2/density. Strip quantities are pushed forward from the disk
through w -> tanh(pi (w - i c) / (2 width)), c the midline height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, SingularityError, UnsupportedExactError
from .quadrature import QuadratureResult  # noqa: F401  (re-exported)

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class StripSpec:
    """The horizontal strip {a < Im z < b}."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a < self.b):
            raise DomainError(f"strip needs a < b, got a={self.a}, b={self.b}")

    def width(self) -> float:
        return self.b - self.a

    @property
    def mid(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, w) -> np.ndarray:
        y = np.imag(w)
        return (self.a < y) & (y < self.b)


STANDARD_STRIP = StripSpec(-HALF_PI, HALF_PI)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    walks: int
    shell_epsilon: float
    discarded: int = 0

    @property
    def inconclusive(self) -> bool:
        return self.discarded > 0.01 * (self.walks + self.discarded)

    def to_dict(self) -> dict:
        return {
            "mean": float(self.mean),
            "std_error": float(self.std_error),
            "walks": int(self.walks),
            "shell_epsilon": float(self.shell_epsilon),
            "discarded": int(self.discarded),
            "inconclusive": bool(self.inconclusive),
        }


def _scalar_out(x, like):
    return x.item() if np.ndim(like) == 0 else x


# ---------------------------------------------------------------- disk


def disk_density(z):
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    if np.any(r2 >= 1):
        raise DomainError("disk_density needs |z| < 1")
    return _scalar_out(2.0 / (1.0 - r2), z)


def green_disk(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(z == w):
        raise SingularityError("Green's function is singular at z = w")
    g = np.log(np.abs(1.0 - z * np.conj(w)) / np.abs(z - w))
    return _scalar_out(g, np.broadcast_to(z, np.broadcast(z, w).shape))


def disk_distance(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    q = np.abs(z - w) / np.abs(1.0 - z * np.conj(w))
    return _scalar_out(2.0 * np.arctanh(q), np.broadcast_to(z, np.broadcast(z, w).shape))


def harmonic_measure_disk_arc(z: complex, alpha: float, beta: float) -> float:
    """Harmonic measure at z of the arc {e^{it}: alpha < t < beta}."""
    if abs(z) >= 1:
        raise DomainError("harmonic_measure_disk_arc needs |z| < 1")
    if not (alpha < beta <= alpha + 2 * math.pi + 1e-15):
        raise DomainError("need alpha < beta <= alpha + 2 pi")
    if beta - alpha >= 2 * math.pi:
        return 1.0

    def T(s):
        return (s - z) / (1 - s * np.conj(z))

    a2 = np.angle(T(np.exp(1j * alpha)))
    b2 = np.angle(T(np.exp(1j * beta)))
    return float(np.mod(b2 - a2, 2 * math.pi) / (2 * math.pi))


def elliptic_density_factor(w):
    """log(mu / sinh mu) with mu = (1-|w|^2)/|1-w|^2; lies in [-mu^2/6, 0]."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) >= 1):
        raise DomainError("elliptic_density_factor needs |w| < 1")
    if np.any(w == 1):
        raise DomainError("elliptic_density_factor undefined at w = 1")
    mu = (1.0 - np.abs(w) ** 2) / np.abs(1.0 - w) ** 2
    small = mu <= 1.0
    out = np.empty_like(mu)
    m = mu[small]
    out[small] = np.log(m / np.sinh(m)) if m.size else m
    m = mu[~small]
    # log(2m) - m - log(1 - e^{-2m}) avoids overflow of sinh
    out[~small] = np.log(2 * m) - m - np.log1p(-np.exp(-2 * m))
    return _scalar_out(out, w)


# ---------------------------------------------------------------- strips


def strip_to_disk(w, s: StripSpec = STANDARD_STRIP):
    w = np.asarray(w, dtype=complex)
    return np.tanh(math.pi * (w - 1j * s.mid) / (2.0 * s.width()))


def strip_to_disk_prime(w, s: StripSpec = STANDARD_STRIP):
    w = np.asarray(w, dtype=complex)
    k = math.pi / (2.0 * s.width())
    return k / np.cosh(k * (w - 1j * s.mid)) ** 2


def _check_in_strip(w, s: StripSpec):
    if not np.all(s.contains(w)):
        raise DomainError(f"point outside strip S({s.a}, {s.b})")


def strip_density(w, s: StripSpec = STANDARD_STRIP):
    """Hyperbolic density of S(a,b) at w (pushforward of the disk density)."""
    w = np.asarray(w, dtype=complex)
    _check_in_strip(w, s)
    # translation invariance: evaluate on the imaginary axis, where the
    # disk image stays away from the boundary
    v = 1j * w.imag
    F = strip_to_disk(v, s)
    lam = 2.0 / (1.0 - np.abs(F) ** 2) * np.abs(strip_to_disk_prime(v, s))
    return _scalar_out(lam, w)


def strip_conf_radius(w, s: StripSpec = STANDARD_STRIP):
    return _scalar_out(2.0 / np.asarray(strip_density(w, s)), np.asarray(w))


def green_strip(z, w, s: StripSpec = STANDARD_STRIP):
    """Green's function of S(a,b), pulled back from the disk."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_in_strip(z, s)
    _check_in_strip(w, s)
    if np.any(z == w):
        raise SingularityError("Green's function is singular at z = w")
    shift = w.real
    g = green_disk(strip_to_disk(z - shift, s), strip_to_disk(w - shift, s))
    return _scalar_out(np.asarray(g), np.broadcast_to(z, np.broadcast(z, w).shape))


def strip_distance(z, w, s: StripSpec = STANDARD_STRIP):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_in_strip(z, s)
    _check_in_strip(w, s)
    shift = 0.5 * (z.real + w.real)
    d = disk_distance(strip_to_disk(z - shift, s), strip_to_disk(w - shift, s))
    return _scalar_out(np.asarray(d), np.broadcast_to(z, np.broadcast(z, w).shape))


def harmonic_measure_strip_upper(y, x):
    """Density at abscissa x of harmonic measure of {Im z = pi/2}, seen from iy."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(y) >= HALF_PI):
        raise DomainError("need |y| < pi/2")
    with np.errstate(over="ignore"):
        out = np.cos(y) / (2 * math.pi * (np.cosh(x) - np.sin(y)))
    return _scalar_out(out, np.broadcast_to(x, np.broadcast(x, y).shape))


# ---------------------------------------------------------------- generic domains


def _is(domain, name: str) -> bool:
    return type(domain).__name__ == name


def density(domain, w):
    return _scalar_out(2.0 / np.asarray(conf_radius(domain, w)), np.asarray(w))


def conf_radius(domain, w):
    """Conformal radius R(w, domain) for domains with an explicit map."""
    w = np.asarray(w, dtype=complex)
    if not np.all(domain.contains(w)):
        raise DomainError("point outside domain")
    if _is(domain, "Disk"):
        return _scalar_out(1.0 - np.abs(w) ** 2, w)
    if _is(domain, "HalfPlane"):
        return _scalar_out(2.0 * (w.imag - domain.height), w)
    if not hasattr(domain, "to_source"):
        raise UnsupportedExactError(
            f"{type(domain).__name__} has no explicit map; use wos_log_conf_radius")
    zeta = domain.to_source(w)
    r = strip_conf_radius(zeta, domain.source) * np.abs(domain.source_derivative(zeta))
    return _scalar_out(np.asarray(r), w)


def log_radius_ratio(outer, inner, w):
    """log R(w, outer)/R(w, inner) for two explicitly mapped domains."""
    return _scalar_out(np.log(np.asarray(conf_radius(outer, w)) / np.asarray(conf_radius(inner, w))),
                       np.asarray(w))


def green(domain, z, w):
    """Green's function of an explicitly mapped domain."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if _is(domain, "Disk"):
        return green_disk(z, w)
    if _is(domain, "HalfPlane"):
        if np.any(z == w):
            raise SingularityError("Green's function is singular at z = w")
        wc = np.conj(w) + 2j * domain.height
        g = np.log(np.abs(z - wc) / np.abs(z - w))
        return _scalar_out(g, np.broadcast_to(z, np.broadcast(z, w).shape))
    if not hasattr(domain, "to_source"):
        raise UnsupportedExactError(f"{type(domain).__name__} has no explicit Green's function")
    if np.any(z == w):
        raise SingularityError("Green's function is singular at z = w")
    return green_strip(domain.to_source(z), domain.to_source(w), domain.source)


def hyperbolic_distance(domain, z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if _is(domain, "Disk"):
        return disk_distance(z, w)
    if _is(domain, "HalfPlane"):
        zz = z - 1j * domain.height
        ww = w - 1j * domain.height
        q = np.abs(zz - ww) / np.abs(zz - np.conj(ww))
        return _scalar_out(2 * np.arctanh(q), np.broadcast_to(z, np.broadcast(z, w).shape))
    if not hasattr(domain, "to_source"):
        raise UnsupportedExactError(f"{type(domain).__name__} has no explicit map")
    return strip_distance(domain.to_source(z), domain.to_source(w), domain.source)


# ---------------------------------------------------------------- strong Markov identity


def _gap_lines(inner, outer):
    """Boundary lines of the standard strip that lie inside ``outer``.

    Returns a list of (height, x_lo) meaning the half-line {x > x_lo, Im = height}.
    """
    lines = []
    if _is(outer, "Strip"):
        s = outer.source
        if s.b > HALF_PI:
            lines.append((HALF_PI, -math.inf))
        if s.a < -HALF_PI:
            lines.append((-HALF_PI, -math.inf))
        if s.a > -HALF_PI or s.b < HALF_PI:
            raise UnsupportedExactError("outer strip does not contain the inner strip")
    elif _is(outer, "TwoSlit"):
        s = outer.strip
        for h, edge in ((HALF_PI, s.b), (-HALF_PI, s.a)):
            if (h > 0 and edge > h) or (h < 0 and edge < h):
                lines.append((h, -math.inf))
            elif edge == h:
                lines.append((h, outer.slit_end))
            else:
                raise UnsupportedExactError("two-slit domain does not contain the inner strip")
    else:
        raise UnsupportedExactError(f"outer {type(outer).__name__} not supported")
    return lines


def strong_markov_log_ratio(inner, outer, w: complex, *, epsabs: float = 1e-11) -> float:
    """Integrate G_outer(alpha, w) against harmonic measure of the standard strip.

    The integral runs over the part of the strip boundary that lies inside
    ``outer``; it equals log R(w, outer)/R(w, inner).
    """
    if not (_is(inner, "Strip") and inner.source == STANDARD_STRIP):
        raise UnsupportedExactError("inner domain must be the standard strip")
    w = complex(w)
    if inner == outer:
        return 0.0
    x0, y = w.real, w.imag
    total = 0.0
    for h, x_lo in _gap_lines(inner, outer):
        yy = y if h > 0 else -y  # lower line by reflection

        def integrand(x, h=h, yy=yy):
            a = complex(x, h)
            return float(green(outer, a, w)) * float(harmonic_measure_strip_upper(yy, x - x0))

        lo = x_lo
        pieces = []
        if math.isinf(lo):
            pieces = [(-math.inf, x0), (x0, math.inf)]
        else:
            pieces = [(lo, max(lo + 1.0, x0)), (max(lo + 1.0, x0), math.inf)]
        for p, q in pieces:
            v, _ = integrate.quad(integrand, p, q, epsabs=epsabs, epsrel=1e-11, limit=400)
            total += v
    return total
