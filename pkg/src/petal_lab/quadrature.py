"""Improper integrals over (-inf, upper] with a doubling-cutoff policy.

The cutoff T starts at ``cutoff_start`` and doubles. Each new slab
[upper - 2T, upper - T] is integrated adaptively with ``scipy.integrate.quad``.
Stopping rules:

* finite: the last slab changed the value by less than tol/2 and the tail
  bound |f(upper - T)| * T is below tol/2 (valid for integrands decaying at
  least like |t|^-2);
* divergent: for a nonnegative integrand, two consecutive slabs each add more
  than max(tol, 0.05 * value) and the slab contributions are not shrinking
  geometrically;
* inconclusive: neither happened before ``max_cutoff``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

FINITE = "finite"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

# a slab contribution counts as "not shrinking" when it is at least this
# fraction of the previous one
_PERSISTENCE = 0.75


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    classification: str
    cutoff_used: float
    partials: tuple[tuple[float, float], ...] = field(default=())
    min_integrand: float = math.inf

    def to_dict(self) -> dict:
        return {
            "value": _num(self.value),
            "error": _num(self.error_estimate),
            "classification": self.classification,
            "cutoff": _num(self.cutoff_used),
            "partials": [[_num(t), _num(v)] for t, v in self.partials],
        }


def _num(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


class _Recorder:
    """Wraps an integrand and keeps the smallest value seen at any node."""

    def __init__(self, f: Callable[[float], float]):
        self.f = f
        self.min_value = math.inf

    def __call__(self, t: float) -> float:
        v = float(self.f(t))
        if v < self.min_value:
            self.min_value = v
        return v


def _slab(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    val, err = integrate.quad(f, lo, hi, epsabs=tol * 1e-2, epsrel=1e-10, limit=400)
    return val, err


def improper_integral(
    f: Callable[[float], float],
    tol: float = 1e-6,
    *,
    upper: float = 0.0,
    cutoff_start: float = 16.0,
    max_cutoff: float = 2.0**26,
    nonnegative: bool = True,
) -> QuadratureResult:
    """Integrate ``f`` over (-inf, upper] following the doubling-cutoff policy."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    rec = _Recorder(f)
    T = float(cutoff_start)
    value, qerr = _slab(rec, upper - T, upper, tol)
    partials = [(T, value)]
    prev_inc = None
    big_run = 0
    while True:
        T2 = 2.0 * T
        inc, e = _slab(rec, upper - T2, upper - T, tol)
        qerr += e
        value += inc
        partials.append((T2, value))
        tail = abs(rec(upper - T2)) * T2
        if abs(inc) < tol / 2 and tail < tol / 2:
            return QuadratureResult(value, abs(inc) + tail + qerr, FINITE, T2,
                                    tuple(partials), rec.min_value)
        if not math.isfinite(value):
            return QuadratureResult(math.inf, math.inf, DIVERGENT, T2,
                                    tuple(partials), rec.min_value)
        threshold = max(tol, 0.05 * abs(value))
        shrinking = prev_inc is not None and inc < _PERSISTENCE * prev_inc
        if nonnegative and inc > threshold and not shrinking:
            big_run += 1
        else:
            big_run = 0
        if big_run >= 2:
            return QuadratureResult(value, math.inf, DIVERGENT, T2,
                                    tuple(partials), rec.min_value)
        prev_inc = inc
        T = T2
        if T >= max_cutoff:
            return QuadratureResult(value, abs(inc) + tail + qerr, INCONCLUSIVE, T,
                                    tuple(partials), rec.min_value)


def classify_partials(cutoffs, values, errors=None, tol: float = 1e-6) -> str:
    """Classify a short sequence of partial integrals at doubling cutoffs.

    Used for Monte Carlo partial sums where the integrand is only known with
    statistical error. Growth counts only when the increment also exceeds
    three standard errors.
    """
    values = np.asarray(values, dtype=float)
    errors = np.zeros_like(values) if errors is None else np.asarray(errors, dtype=float)
    inc = np.diff(values)
    inc_err = np.sqrt(errors[1:] ** 2 + errors[:-1] ** 2)
    if len(inc) == 0:
        return INCONCLUSIVE
    last = inc[-1]
    threshold = max(tol, 0.05 * abs(values[-1]), 3 * inc_err[-1])
    if len(inc) >= 2:
        persistent = inc[-1] >= _PERSISTENCE * inc[-2]
    else:
        persistent = True
    if last > threshold and persistent:
        return DIVERGENT
    if len(inc) >= 2 and inc[-1] <= _PERSISTENCE * max(inc[-2], 0.0) + 3 * inc_err[-1]:
        return FINITE
    return INCONCLUSIVE
