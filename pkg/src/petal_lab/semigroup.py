"""Semigroup dynamics in Koenigs coordinates.

For a domain given as m(standard strip) the Koenigs map is h = m o s0 with
s0(z) = log((1+z)/(1-z)), so h(0) = m(0). Orbits are computed through the
strip coordinate zeta = m^{-1}(h(z) + t); disk quantities near the alpha
point -1 are evaluated from zeta to avoid cancellation in 1 - |z|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .domains import ProfileDomain, euclidean_gap_integral
from .errors import (BackwardInadmissibleError, DomainError, NoBackwardOrbitError,
                     UnsupportedExactError, WrongTypeError)
from .hypgeo import StripSpec

HYPERBOLIC = "hyperbolic"
PARABOLIC = "parabolic"


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


@dataclass(frozen=True, eq=False)
class SemigroupModel:
    """A semigroup given by its Koenigs domain and, when available, Koenigs map.

    Strip-sourced domains get h = m o s0 automatically. Models with an
    explicit map that is not strip-sourced (parabolic examples) pass
    ``h``/``h_prime``/``h_inverse`` directly.
    """

    domain: object
    kind: str
    name: str = ""
    h_fn: Optional[Callable] = None
    h_prime_fn: Optional[Callable] = None
    h_inverse_fn: Optional[Callable] = None

    @property
    def strip_sourced(self) -> bool:
        return self.h_fn is None and hasattr(self.domain, "to_source")

    @property
    def has_h(self) -> bool:
        return self.strip_sourced or self.h_fn is not None

    def _need_h(self):
        if not self.has_h:
            raise UnsupportedExactError("model has no explicit Koenigs map")

    # strip coordinate: zeta lives in the standard strip; m maps it onto the
    # domain through the domain's own source strip
    def _affine(self):
        src = self.domain.source
        return src.width() / math.pi, src.mid

    def m(self, zeta):
        k, c = self._affine()
        return self.domain.from_source(k * np.asarray(zeta, dtype=complex) + 1j * c)

    def m_prime(self, zeta):
        k, c = self._affine()
        return k * self.domain.source_derivative(k * np.asarray(zeta, dtype=complex) + 1j * c)

    def m_inverse(self, w):
        k, c = self._affine()
        return (self.domain.to_source(w) - 1j * c) / k

    def zeta_of(self, z):
        z = np.asarray(z, dtype=complex)
        return 2.0 * np.arctanh(z)

    def h(self, z):
        self._need_h()
        if self.h_fn is not None:
            return _out(self.h_fn(np.asarray(z, dtype=complex)))
        return _out(self.m(self.zeta_of(z)))

    def h_prime(self, z):
        self._need_h()
        if self.h_prime_fn is not None:
            return _out(self.h_prime_fn(np.asarray(z, dtype=complex)))
        return _out(self.h_prime_at_zeta(self.zeta_of(z)))

    def h_prime_at_zeta(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return self.m_prime(zeta) * 2.0 * np.cosh(0.5 * zeta) ** 2

    def h_inverse(self, w):
        self._need_h()
        if self.h_inverse_fn is not None:
            return _out(self.h_inverse_fn(np.asarray(w, dtype=complex)))
        if self.h_fn is not None:
            raise UnsupportedExactError("model has no inverse Koenigs map")
        return _out(np.tanh(0.5 * self.m_inverse(w)))


def model_from_domain(domain, name: str = "") -> SemigroupModel:
    """Semigroup model for a catalog or profile Koenigs domain."""
    lo, hi = domain.im_bounds()
    kind = HYPERBOLIC if (math.isfinite(lo) and math.isfinite(hi)) else PARABOLIC
    return SemigroupModel(domain, kind, name or type(domain).__name__)


# ---------------------------------------------------------------- orbits


def _check_backward(model: SemigroupModel, w0, t: float, samples: int = 64):
    if t >= 0:
        return
    s = np.linspace(t, 0.0, samples)
    pts = np.asarray(w0)[..., None] + s
    if not np.all(model.domain.contains(pts)):
        raise BackwardInadmissibleError(f"backward step of length {-t} leaves the Koenigs domain")


def orbit_zeta(model: SemigroupModel, z, t: float):
    """Strip coordinate m^{-1}(h(z) + t) of phi_t(z) for strip-sourced models."""
    if not model.strip_sourced:
        raise UnsupportedExactError("strip coordinates need a strip-sourced model")
    w0 = np.asarray(model.h(z))
    _check_backward(model, w0, t)
    return model.m_inverse(w0 + t)


def phi_t(model: SemigroupModel, z, t: float):
    """phi_t(z) = h^{-1}(h(z) + t)."""
    if t == 0:
        return z
    model._need_h()
    w0 = np.asarray(model.h(z))
    _check_backward(model, w0, t)
    return model.h_inverse(w0 + t)


def phi_t_prime(model: SemigroupModel, z, t: float):
    """phi_t'(z) = h'(z)/h'(phi_t(z))."""
    if t == 0:
        return np.ones_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 1.0 + 0j
    if model.strip_sourced:
        z0 = model.zeta_of(z)
        zt = orbit_zeta(model, z, t)
        return _out(model.h_prime_at_zeta(z0) / model.h_prime_at_zeta(zt))
    return _out(np.asarray(model.h_prime(z)) / np.asarray(model.h_prime(phi_t(model, z, t))))


def generator(model: SemigroupModel, z):
    """Infinitesimal generator G = 1/h'."""
    return _out(1.0 / np.asarray(model.h_prime(z)))


@dataclass(frozen=True)
class PetalRecord:
    strip: StripSpec
    alpha_point: complex
    spectral_value: float
    width: float


def petal_of(model: SemigroupModel, target=None) -> PetalRecord:
    """The hyperbolic petal whose image is the domain's maximal strip."""
    strip = target if isinstance(target, StripSpec) else None
    if strip is None:
        get = getattr(model.domain, "maximal_strip", None)
        strip = get() if get else None
    if strip is None:
        raise WrongTypeError("no maximal strip; the petal is parabolic (use the parabolic module)")
    width = strip.width()
    return PetalRecord(strip, -1.0 + 0j, math.pi / width, width)


def in_petal(model: SemigroupModel, z, petal: Optional[PetalRecord] = None) -> bool:
    petal = petal or petal_of(model)
    w = complex(model.h(z))
    return petal.strip.a < w.imag < petal.strip.b


def backward_orbit(model: SemigroupModel, z, t_grid) -> np.ndarray:
    """phi_t(z) for t in t_grid (all t <= 0); z must lie in a hyperbolic petal."""
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid > 0):
        raise ValueError("backward orbit needs t <= 0")
    if not in_petal(model, z):
        raise NoBackwardOrbitError("point is not in a hyperbolic petal")
    w0 = complex(model.h(z))
    return np.asarray(model.h_inverse(w0 + t_grid))


def log_dist_to_alpha(zeta):
    """log|phi + 1| for phi = tanh(zeta/2), stable as Re zeta -> -infinity."""
    zeta = np.asarray(zeta, dtype=complex)
    # phi + 1 = 2 e^zeta / (1 + e^zeta)
    return _out(math.log(2.0) + zeta.real - np.log(np.abs(1.0 + np.exp(zeta))))


def backward_orbit_log_dist(model: SemigroupModel, z, t_grid) -> np.ndarray:
    """log|phi_t(z) - sigma| along the backward orbit, computed stably."""
    if not in_petal(model, z):
        raise NoBackwardOrbitError("point is not in a hyperbolic petal")
    w0 = complex(model.h(z))
    zeta = model.m_inverse(w0 + np.asarray(t_grid, dtype=float))
    return np.asarray(log_dist_to_alpha(zeta))


def measured_rate(model: SemigroupModel, z, t1: float = -30.0, t2: float = -40.0) -> float:
    """Slope of log|phi_t(z) - sigma| in t between two backward times."""
    a, b = backward_orbit_log_dist(model, z, [t1, t2])
    return float((b - a) / (t2 - t1))


# ---------------------------------------------------------------- pre-model


def pre_model_psi(model: SemigroupModel, petal: PetalRecord, w, s: float = 0.0):
    """psi(w) = h^{-1}((b-a)/pi log w + i(b+a)/2 + s) on the right half-plane.

    The factor (b-a)/pi makes log w fill the whole strip, which is what the
    intertwining psi(e^{lambda t} w) = phi_t(psi(w)) requires.
    """
    w = np.asarray(w, dtype=complex)
    if np.any(w.real <= 0):
        raise DomainError("pre-model is defined on the right half-plane")
    a, b = petal.strip.a, petal.strip.b
    return model.h_inverse((b - a) / math.pi * np.log(w) + 0.5j * (b + a) + s)


def pre_model_psi_inverse(model: SemigroupModel, petal: PetalRecord, z, s: float = 0.0):
    a, b = petal.strip.a, petal.strip.b
    return _out(np.exp(math.pi / (b - a) * (np.asarray(model.h(z)) - 0.5j * (b + a) - s)))


def _psi_zeta(model, petal, x, s):
    a, b = petal.strip.a, petal.strip.b
    return model.m_inverse((b - a) / math.pi * np.log(x) + 0.5j * (b + a) + s)


def psi_angular_derivative(model: SemigroupModel, petal: PetalRecord, s: float = 0.0,
                           k_grid=range(2, 13)) -> complex:
    """lim_{x->0+} (psi(x) - sigma)/x along the positive reals."""
    xs = 10.0 ** -np.asarray(list(k_grid), dtype=float)
    zeta = _psi_zeta(model, petal, xs, s)
    vals = 2.0 / (1.0 + np.exp(-zeta)) / xs
    if abs(vals[-1] - vals[-2]) > 1e-6 * abs(vals[-1]):
        raise UnsupportedExactError("angular derivative did not stabilize")
    return complex(vals[-1])


def isogonality_probe(model: SemigroupModel, petal: PetalRecord, s: float = 0.0,
                      k_grid=range(1, 13)) -> np.ndarray:
    """arg((1 - conj(sigma) psi(x))/x) at x = 10^-k; tends to 0 for a regular pre-model."""
    xs = 10.0 ** -np.asarray(list(k_grid), dtype=float)
    zeta = _psi_zeta(model, petal, xs, s)
    return np.angle(2.0 / (1.0 + np.exp(-zeta)) / xs)


# ---------------------------------------------------------------- rate constant


@dataclass(frozen=True)
class RateConstant:
    value: float
    classification: str  # finite | infinite | inconclusive
    estimates: tuple = ()
    via: str = "orbit"

    def to_dict(self):
        v = self.value
        return {"value": v if math.isfinite(v) else ("inf" if v > 0 else "nan"),
                "classification": self.classification, "via": self.via}


def rate_constant(model, petal: Optional[PetalRecord] = None, z=0.0, *,
                  k_max: int = 8, rel_tol: float = 1e-3) -> RateConstant:
    """lim e^{-lambda t}|phi_t(z) - sigma| over the grid t = -2^k, k = 0..k_max.

    For profile domains (no Koenigs map) the finite/infinite class is taken
    from the euclidean gap criterion, which is equivalent to conformality.
    """
    domain = model.domain if isinstance(model, SemigroupModel) else model
    if isinstance(domain, ProfileDomain):
        q = euclidean_gap_integral(domain)
        cls = "finite" if q.classification == "finite" else (
            "infinite" if q.classification == "divergent" else "inconclusive")
        return RateConstant(math.inf if cls == "infinite" else math.nan, cls, (), "euclidean-surrogate")
    petal = petal or petal_of(model)
    lam = petal.spectral_value
    ts = -(2.0 ** np.arange(k_max + 1))
    logd = backward_orbit_log_dist(model, z, ts)
    logc = -lam * ts + logd
    est = np.exp(logc)
    last = est[-3:]
    if np.all(np.isfinite(last)) and np.max(np.abs(np.diff(last))) <= rel_tol * abs(last[-1]):
        return RateConstant(float(last[-1]), "finite", tuple(est.tolist()))
    if np.all(np.diff(logc[-4:]) > 0) and logc[-1] - logc[0] > math.log(1e3):
        return RateConstant(math.inf, "infinite", tuple(est.tolist()))
    return RateConstant(float(last[-1]), "inconclusive", tuple(est.tolist()))
