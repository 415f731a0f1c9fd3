"""Parabolic petals: hyperbolic-step class and the angular limit of (z - tau) h(z)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .domains import DiskImage, HalfPlane
from .errors import UnsupportedExactError, WrongTypeError
from .quadrature import FINITE, INCONCLUSIVE
from .semigroup import PARABOLIC, SemigroupModel

INFINITE = "infinite"
ZERO = "zero"
POSITIVE = "positive"


def _cayley(z):
    """Disk onto the upper half-plane, 1 -> infinity."""
    return 1j * (1 + z) / (1 - z)


def _cayley_inverse(w):
    return (w - 1j) / (w + 1j)


# ---------------------------------------------------------------- catalog models


def koebe_model() -> SemigroupModel:
    """h(z) = z/(1-z)^2, onto the plane slit along (-inf, -1/4]."""
    def h(z):
        return z / (1 - z) ** 2

    def hp(z):
        return (1 + z) / (1 - z) ** 3

    def hinv(w):
        # z/(1-z)^2 = w  <=>  w z^2 - (2w+1) z + w = 0; keep the root in the disk
        w = np.asarray(w, dtype=complex)
        r = np.sqrt(4 * w + 1)
        z = (2 * w + 1 - r) / (2 * w + 1e-300)
        alt = (2 * w + 1 + r) / (2 * w + 1e-300)
        return np.where(np.abs(z) < 1, z, alt)

    def inside(w):
        return ~((np.abs(w.imag) == 0) & (w.real <= -0.25))

    dom = DiskImage("koebe", h, hp, inside)
    return SemigroupModel(dom, PARABOLIC, "koebe", h, hp, hinv)


def h2_model() -> SemigroupModel:
    """h(z) = w - i sqrt(w) with w the Cayley image of z; sqrt maps the upper half-plane to the first quadrant."""
    def h(z):
        w = _cayley(z)
        return w - 1j * np.sqrt(w)

    def hp(z):
        w = _cayley(z)
        return (1 - 0.5j / np.sqrt(w)) * 2j / (1 - z) ** 2

    def _root(zeta):
        # s^2 - i s = zeta with s = sqrt(w) in the open first quadrant
        d = np.sqrt(4 * zeta - 1 + 0j)
        s1, s2 = (1j + d) / 2, (1j - d) / 2
        ok1 = (s1.real > 0) & (s1.imag > 0)
        ok2 = (s2.real > 0) & (s2.imag > 0)
        return np.where(ok1, s1, s2), ok1 | ok2

    def hinv(zeta):
        s, _ = _root(np.asarray(zeta, dtype=complex))
        return _cayley_inverse(s * s)

    def inside(zeta):
        return _root(zeta)[1]

    dom = DiskImage("h2", h, hp, inside)
    return SemigroupModel(dom, PARABOLIC, "h2", h, hp, hinv)


def half_plane_model(height: float = 0.0) -> SemigroupModel:
    """h(z) = i(1+z)/(1-z) + i*height, onto {Im w > height}."""
    def h(z):
        return _cayley(z) + 1j * height

    def hp(z):
        return 2j / (1 - z) ** 2

    def hinv(w):
        return _cayley_inverse(np.asarray(w, dtype=complex) - 1j * height)

    return SemigroupModel(HalfPlane(height), PARABOLIC, "half_plane", h, hp, hinv)


def model_for_domain(domain) -> SemigroupModel:
    if isinstance(domain, HalfPlane):
        return half_plane_model(domain.height)
    raise UnsupportedExactError(f"no explicit Koenigs map for {type(domain).__name__}")


def generator_positivity(model: SemigroupModel, samples: int = 10_000, seed: int = 0,
                         tau: complex = 1.0) -> float:
    """Smallest Re[(1 - conj(tau) z)^2 h'(z)] over random disk points.

    A positive value means h is a valid Koenigs map for a semigroup with
    Denjoy-Wolff point tau (generator G = 1/h').
    """
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0, 1, samples)) * (1 - 1e-9)
    z = r * np.exp(2j * np.pi * rng.uniform(0, 1, samples))
    vals = ((1 - np.conj(tau) * z) ** 2 * np.asarray(model.h_prime(z))).real
    return float(vals.min())


# ---------------------------------------------------------------- classifiers


def hyperbolic_step_class(domain) -> str:
    """positive iff the Koenigs domain lies in a horizontal half-plane."""
    if isinstance(domain, SemigroupModel):
        domain = domain.domain
    get = getattr(domain, "maximal_strip", None)
    if get is None or get() is not None:
        raise WrongTypeError("hyperbolic-type domain: use the conformality module")
    lo, hi = domain.im_bounds()
    return POSITIVE if (math.isfinite(lo) or math.isfinite(hi)) else ZERO


@dataclass(frozen=True)
class LimitEstimate:
    value: complex
    classification: str  # finite | infinite | inconclusive
    raw: tuple
    extrapolated: tuple

    @property
    def finite(self) -> bool:
        return self.classification == FINITE


def L_limit(h, tau: complex = 1.0, k_grid=range(2, 8), *, rel_tol: float = 1e-2,
            blowup: float = 1e3) -> LimitEstimate:
    """Radial probe of (z - tau) h(z) at z = tau(1 - 10^-k).

    Consecutive values are combined by Richardson extrapolation assuming a
    sqrt(1 - |z|) error term.
    """
    if isinstance(h, SemigroupModel):
        h = h.h
    ks = np.asarray(list(k_grid), dtype=float)
    eps = 10.0 ** -ks
    z = tau * (1 - eps)
    raw = (z - tau) * np.asarray(h(z), dtype=complex)
    mags = np.abs(raw)
    if np.all(np.diff(mags[-4:]) > 0) and mags[-1] > blowup:
        return LimitEstimate(complex(math.inf), INFINITE, tuple(raw), ())
    q = math.sqrt(10.0)
    ext = (q * raw[1:] - raw[:-1]) / (q - 1)
    last = ext[-3:]
    scale = max(abs(last[-1]), 1e-300)
    if np.all(np.isfinite(last)) and np.max(np.abs(np.diff(last))) <= rel_tol * scale:
        return LimitEstimate(complex(last[-1]), FINITE, tuple(raw), tuple(ext))
    return LimitEstimate(complex(ext[-1]), INCONCLUSIVE, tuple(raw), tuple(ext))


@dataclass(frozen=True)
class ParabolicReport:
    step_class: str
    L_estimate: Optional[complex]
    L_classification: str
    conformal: Union[bool, None]
    consistency: Optional[float]  # |Re(conj(tau) L)|
    model: str = ""

    def to_dict(self):
        L = self.L_estimate
        if L is None:
            Lout = None
        elif not np.isfinite(L):
            Lout = "inf"
        else:
            Lout = [L.real, L.imag]
        return {"model": self.model, "step_class": self.step_class, "L": Lout,
                "L_classification": self.L_classification,
                "conformal": "inconclusive" if self.conformal is None else self.conformal,
                "consistency": self.consistency}


def classify_parabolic_petal(model: SemigroupModel, tau: complex = 1.0) -> ParabolicReport:
    """Conformal iff L is finite; a positive hyperbolic step forces conformality."""
    step = hyperbolic_step_class(model.domain)
    L = None
    cls = "not_evaluated"
    resid = None
    if model.has_h:
        est = L_limit(model.h, tau)
        cls = est.classification
        L = est.value
        if est.finite:
            resid = float(abs((np.conj(tau) * L).real))
    if step == POSITIVE:
        conformal = True
    elif cls == FINITE:
        conformal = True
    elif cls == INFINITE:
        conformal = False
    else:
        conformal = None
    return ParabolicReport(step, L, cls, conformal, resid, model.name)
