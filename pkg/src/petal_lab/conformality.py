"""Criteria deciding conformality of a hyperbolic petal at its alpha point.

Strip-side quantities work in Koenigs-domain coordinates w = h(z); disk-side
quantities work on backward orbits in the unit disk. For explicitly mapped
domains every integrand is exact; profile domains fall back to walk-on-spheres
estimates, which are reported but never decide a verdict on their own.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from . import semigroup as sg
from .domains import (HalfPlane, ProfileDomain, Strip, TwoSlit, euclidean_gap_integral,
                      half_widened_strip, widened_strip)
from .errors import (InputError, PetalLabError, UnsupportedExactError, WrongTypeError)
from .hypgeo import (HALF_PI, STANDARD_STRIP, MCEstimate, StripSpec, conf_radius,
                     density, hyperbolic_distance, strip_conf_radius, strip_density)
from .quadrature import (DIVERGENT, FINITE, INCONCLUSIVE, QuadratureResult, classify_partials,
                         improper_integral)
from .wos import DEFAULT_SHELL, wos_log_conf_radius, wos_log_ratio_to_outer

CONFORMAL = "conformal"
NON_CONFORMAL = "non_conformal"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-6
    mc_walks: int = 100_000
    seed: int = 0
    cutoff_start: float = 16.0
    output_format: str = "json"
    threads: int = 1

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InputError("tolerance must be positive")
        if self.mc_walks < 1000:
            raise InputError("MC-backed criteria need at least 1000 walks")
        if self.output_format not in ("json", "csv"):
            raise InputError("output format must be json or csv")
        if self.threads < 1:
            raise InputError("threads must be at least 1")


def _maximal_strip(domain, strip: Optional[StripSpec]) -> StripSpec:
    if strip is not None:
        return strip
    s = domain.maximal_strip() if hasattr(domain, "maximal_strip") else None
    if s is None:
        raise WrongTypeError("domain has no maximal strip")
    return s


# ---------------------------------------------------------------- strip-side integrand


def exact_log_ratio(domain, w, strip: Optional[StripSpec] = None):
    """log R(w, domain)/R(w, S) for an explicitly mapped domain containing S."""
    strip = _maximal_strip(domain, strip)
    w = np.asarray(w, dtype=complex)
    out = np.log(np.asarray(conf_radius(domain, w)) / np.asarray(strip_conf_radius(w, strip)))
    return out.item() if out.ndim == 0 else out


def profile_outer(domain: ProfileDomain, w: complex, lookahead: float = 6.0):
    """An explicitly mapped domain containing ``domain``, tight near w.

    If the gaps have reached their suprema at Re w + lookahead the widest strip
    is used; otherwise a two-slit domain whose slits sit at the gap heights
    attained at that abscissa.
    """
    x_e = complex(w).real + lookahead
    d1, d2 = (float(v) for v in domain.delta_pair(x_e))
    s1, s2 = domain.lower.sup(), domain.upper.sup()
    a, b = domain.strip.a, domain.strip.b
    if d1 == s1 and d2 == s2:
        return Strip(a - s1, b + s2)
    return TwoSlit(StripSpec(a - d1, b + d2), x_e)


def mc_log_ratio(domain: ProfileDomain, w: complex, walks: int = 4000, seed=0,
                 shell_epsilon: float = DEFAULT_SHELL, lookahead: float = 6.0,
                 threads: int = 1) -> MCEstimate:
    """Monte Carlo estimate of log R(w, domain)/R(w, S) for a profile domain.

    Computed as the exact log-ratio for an explicitly mapped outer domain minus
    the Green-scored walk estimate of log R(w, outer)/R(w, domain).
    """
    outer = profile_outer(domain, w, lookahead)
    base = float(exact_log_ratio(outer, w, domain.strip))
    r = wos_log_ratio_to_outer(domain, outer, w, walks, shell_epsilon, seed, threads=threads)
    return MCEstimate(base - r.mean, r.std_error, r.walks, r.shell_epsilon, r.discarded)


@dataclass(frozen=True)
class MCPartials:
    cutoffs: tuple
    values: tuple
    errors: tuple
    trend: str  # stabilizing | growing | unclear
    nodes: tuple = ()
    node_values: tuple = ()
    node_errors: tuple = ()

    def to_dict(self):
        return {"cutoffs": list(self.cutoffs), "values": list(self.values),
                "errors": list(self.errors), "trend": self.trend}


def mc_strip_side_partials(domain: ProfileDomain, w0: complex = 0j, cutoffs=(32, 64, 128),
                           step: float = 2.0, walks: int = 4000, seed: int = 0,
                           threads: int = 1, tol: float = 1e-6) -> MCPartials:
    """Partial integrals of the Monte Carlo strip-side integrand over [-T, 0].

    Nodes are shared by all cutoffs (composite Simpson, spacing ``step``);
    each node uses an independent walk substream.
    """
    cutoffs = tuple(sorted(float(c) for c in cutoffs))
    for T in cutoffs:
        if abs(T / (2 * step) - round(T / (2 * step))) > 1e-9:
            raise InputError("each cutoff must be an even multiple of the node spacing")
    ts = -np.arange(0.0, cutoffs[-1] + 0.5 * step, step)

    def node(k):
        e = mc_log_ratio(domain, complex(w0) + ts[k], walks, (seed, 7919, k))
        return e.mean, e.std_error

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            res = list(pool.map(node, range(len(ts))))
    else:
        res = [node(k) for k in range(len(ts))]
    vals = np.array([r[0] for r in res])
    errs = np.array([r[1] for r in res])
    pv, pe = [], []
    for T in cutoffs:
        n = int(round(T / step))
        wts = np.ones(n + 1)
        wts[1:-1:2] = 4.0
        wts[2:-1:2] = 2.0
        wts *= step / 3.0
        pv.append(float(wts @ vals[: n + 1]))
        pe.append(float(math.sqrt(np.sum((wts * errs[: n + 1]) ** 2))))
    cls = classify_partials(cutoffs, pv, pe, tol)
    trend = {DIVERGENT: "growing", FINITE: "stabilizing"}.get(cls, "unclear")
    return MCPartials(cutoffs, tuple(pv), tuple(pe), trend, tuple(ts.tolist()),
                      tuple(vals.tolist()), tuple(errs.tolist()))


def hyperbolic_integral_strip_side(domain, strip: Optional[StripSpec] = None, w0=None,
                                   tol: float = 1e-6, *, cutoff_start: float = 16.0,
                                   walks: int = 4000, seed: int = 0,
                                   threads: int = 1) -> QuadratureResult:
    """Integral over t <= 0 of log(lambda_S / lambda_Omega)(t + w0)."""
    strip = _maximal_strip(domain, strip)
    w0 = complex(1j * strip.mid if w0 is None else w0)
    if not strip.a < w0.imag < strip.b:
        raise InputError("base point must lie in the maximal strip")
    if isinstance(domain, ProfileDomain):
        mc = mc_strip_side_partials(domain, w0, walks=walks, seed=seed, threads=threads, tol=tol)
        err = mc.errors[-1]
        if mc.trend == "growing":
            cls = DIVERGENT
        elif mc.trend == "stabilizing" and err <= tol:
            cls = FINITE
        else:
            cls = INCONCLUSIVE
        return QuadratureResult(mc.values[-1], err, cls, mc.cutoffs[-1],
                                tuple(zip(mc.cutoffs, mc.values)), min(mc.node_values))
    if not hasattr(domain, "to_source"):
        raise UnsupportedExactError(f"no exact radii for {type(domain).__name__}")

    def f(t):
        return float(exact_log_ratio(domain, w0 + t, strip))

    return improper_integral(f, tol, cutoff_start=cutoff_start)


# ---------------------------------------------------------------- disk side


def _petal_density_at(model, z0, petal):
    """lambda_Delta(z0) = lambda_S(h(z0)) |h'(z0)|."""
    return float(strip_density(complex(model.h(z0)), petal.strip)) * abs(complex(model.h_prime(z0)))


def disk_side_integrand(model, z0, t, petal=None):
    """log lambda_Delta(z0) - log(lambda_D(phi_t z0) |phi_t'(z0)|), from orbit quantities.

    The disk density at phi_t(z0) = tanh(zeta/2) is evaluated as
    2|cosh(zeta/2)|^2 / cos(Im zeta), which equals 2/(1-|phi|^2) without the
    cancellation near the alpha point.
    """
    petal = petal or sg.petal_of(model)
    zt = np.asarray(sg.orbit_zeta(model, z0, t))
    lam_disk = 2.0 * np.abs(np.cosh(0.5 * zt)) ** 2 / np.cos(zt.imag)
    dphi = np.abs(np.asarray(sg.phi_t_prime(model, z0, t)))
    out = math.log(_petal_density_at(model, z0, petal)) - np.log(lam_disk * dphi)
    return out.item() if np.ndim(out) == 0 else out


def strip_side_integrand(model, z0, t, petal=None):
    """log lambda_S(h(z0)) - log lambda_Omega(h(z0) + t), with lambda_Omega from conf_radius."""
    petal = petal or sg.petal_of(model)
    w0 = complex(model.h(z0))
    lam_s = float(strip_density(w0, petal.strip))
    lam_o = np.asarray(density(model.domain, w0 + np.asarray(t, dtype=float)))
    out = math.log(lam_s) - np.log(lam_o)
    return out.item() if np.ndim(out) == 0 else out


def identity_chain_discrepancy(model, z0, ts) -> float:
    """Largest pointwise gap between the disk-side and strip-side integrands."""
    petal = sg.petal_of(model)
    d = [abs(disk_side_integrand(model, z0, t, petal) - strip_side_integrand(model, z0, t, petal))
         for t in ts]
    return float(max(d))


def hyperbolic_integral_disk_side(model, z0=None, tol: float = 1e-6, *,
                                  cutoff_start: float = 16.0) -> QuadratureResult:
    if not model.strip_sourced:
        raise UnsupportedExactError("disk-side integral needs an explicit strip-sourced Koenigs map")
    petal = sg.petal_of(model)
    if z0 is None:
        z0 = model.h_inverse(1j * petal.strip.mid)
    if not sg.in_petal(model, z0, petal):
        raise InputError("z0 must lie in the hyperbolic petal")
    return improper_integral(lambda t: disk_side_integrand(model, z0, t, petal), tol,
                             cutoff_start=cutoff_start)


# ---------------------------------------------------------------- sandwich bounds


@dataclass(frozen=True)
class Probe:
    y: float
    t: float
    lhs: float
    lhs_error: float
    bound: float
    bound_error: float
    slack: float
    holds: bool
    vacuous: bool = False
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    probes: tuple
    passed: bool
    constant: float = math.nan  # empirical constant (inf of lhs/delta or sup of term/delta)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed,
                "constant": None if math.isnan(self.constant) else self.constant,
                "probes": [{"y": p.y, "t": p.t, "lhs": p.lhs, "lhs_error": p.lhs_error,
                            "bound": p.bound, "bound_error": p.bound_error, "slack": p.slack,
                            "holds": p.holds, "vacuous": p.vacuous} for p in self.probes]}


def _lhs(domain, w, walks, seed):
    """log R(w, Omega)/R(w, S): exact for mapped domains, Monte Carlo for profiles."""
    if isinstance(domain, ProfileDomain):
        e = mc_log_ratio(domain, w, walks, seed)
        return e.mean, e.std_error
    return float(exact_log_ratio(domain, w, STANDARD_STRIP)), 0.0


def half_widened_log_ratio(y: float, delta: float, walks: int = 20000, seed=0,
                           lower: bool = False) -> MCEstimate:
    """log R(iy, S*_delta)/R(iy, S), scored against the exact widened strip S_delta.

    With ``lower`` the widening is applied to the lower side (by reflection).
    """
    if lower:
        y = -y
    outer = widened_strip(delta)
    L = float(exact_log_ratio(outer, 1j * y, STANDARD_STRIP))
    r = wos_log_ratio_to_outer(half_widened_strip(delta), outer, 1j * y, walks, DEFAULT_SHELL, seed)
    return MCEstimate(L - r.mean, r.std_error, r.walks, r.shell_epsilon, r.discarded)


def lower_bound_check(domain, strip: Optional[StripSpec] = None, y_set=(0.0,), t_set=(-1.0,), *,
                      walks: int = 20000, seed: int = 0, nsigma: float = 3.0) -> BoundCheck:
    """Probe log R(t+iy, Omega)/R(t+iy, S) >= log R(iy, S*_{delta(t)})/R(iy, S).

    The right side uses the larger of the upper and lower half-widened strips.
    The reported constant is the smallest lhs/delta_Omega(t) over non-vacuous probes.
    """
    strip = _maximal_strip(domain, strip)
    if strip != STANDARD_STRIP:
        raise UnsupportedExactError("bound checks are implemented for the standard maximal strip")
    probes = []
    cs = []
    k = 0
    for y in y_set:
        for t in t_set:
            k += 1
            d1, d2 = (float(v) for v in domain.delta_pair(t))
            if max(d1, d2) == 0:
                probes.append(Probe(y, t, 0.0, 0.0, 0.0, 0.0, 0.0, True, True))
                continue
            if not (math.isfinite(d1) and math.isfinite(d2)):
                continue
            lhs, lhs_e = _lhs(domain, complex(t, y), walks, (seed, 1, k))
            cands = []
            for d, low in ((d2, False), (d1, True)):
                if d > 0:
                    e = half_widened_log_ratio(y, d, walks, (seed, 2, k, int(low)), lower=low)
                    cap = float(exact_log_ratio(widened_strip(d), 1j * (-y if low else y), STANDARD_STRIP))
                    cands.append((e.mean, e.std_error, cap))
            rhs, rhs_e, cap = max(cands)
            slack = lhs - rhs
            tol = nsigma * math.hypot(lhs_e, rhs_e)
            probes.append(Probe(y, t, lhs, lhs_e, rhs, rhs_e, slack, slack >= -tol, False,
                                {"phi": rhs / cap, "cap": cap}))
            cs.append(lhs / max(d1, d2))
    passed = all(p.holds for p in probes)
    return BoundCheck("lower_bound", tuple(probes), passed, min(cs) if cs else math.nan)


def two_slit_bound(x):
    """log((1 + e^x)/(1 - e^x)) for x < 0."""
    e = math.exp(x)
    return math.log1p(e) - math.log1p(-e)


def upper_bound_check(domain, strip: Optional[StripSpec] = None, w0=0j, t_set=(-4.0,), *,
                      walks: int = 20000, seed: int = 0, nsigma: float = 3.0) -> BoundCheck:
    """Probe the pointwise upper chain at t + iy.

    log R(t+iy, Omega)/R(t+iy, S) <= log R(t/2-1+iy, D(t))/R(t/2-1+iy, S(t))
                                      + log R(iy, S(t))/R(iy, S)
    with S(t) the strip widened by the gaps at 1 + t/2 and D(t) the two-slit
    domain over S(t) with slits ending at 0. Also checks the first term
    against the two-slit bound and reports sup(second term / delta).
    """
    strip = _maximal_strip(domain, strip)
    if strip != STANDARD_STRIP:
        raise UnsupportedExactError("bound checks are implemented for the standard maximal strip")
    y = complex(w0).imag
    probes = []
    cs = []
    for k, t in enumerate(t_set):
        d1, d2 = (float(v) for v in domain.delta_pair(1.0 + 0.5 * t))
        if not (math.isfinite(d1) and math.isfinite(d2)):
            continue
        St = StripSpec(-HALF_PI - d1, HALF_PI + d2)
        Dt = TwoSlit(St, 0.0)
        p = complex(0.5 * t - 1.0, y)
        first = math.log(float(conf_radius(Dt, p)) / float(strip_conf_radius(p, St)))
        second = math.log(float(strip_conf_radius(1j * y, St)) / float(strip_conf_radius(1j * y, STANDARD_STRIP)))
        x = math.pi / (math.pi + d1 + d2) * p.real
        first_cap = two_slit_bound(x)
        lhs, lhs_e = _lhs(domain, complex(t, y), walks, (seed, 3, k))
        bound = first + second
        slack = bound - lhs
        ok = slack >= -nsigma * lhs_e - 1e-12 and first <= first_cap + 1e-12
        probes.append(Probe(y, t, lhs, lhs_e, bound, 0.0, slack, ok, False,
                            {"first": first, "second": second, "first_cap": first_cap}))
        dd = max(d1, d2)
        if dd > 0:
            cs.append(second / dd)
    passed = all(p.holds for p in probes)
    return BoundCheck("upper_bound", tuple(probes), passed, max(cs) if cs else math.nan)


# ---------------------------------------------------------------- Phi_delta


def phi_delta(y: float, delta: float, walks: int = 100_000, seed: int = 0, *,
              method: str = "scored", threads: int = 1) -> MCEstimate:
    """Phi_delta(y) = log(R(iy,S*_d)/R(iy,S)) / log(R(iy,S_d)/R(iy,S)).

    The denominator is exact. ``method="scored"`` estimates the numerator as
    the exact S_delta ratio minus a Green-scored walk in S*_delta;
    ``method="plain"`` averages log|exit - iy| directly.
    """
    if not abs(y) < HALF_PI:
        raise InputError("need |y| < pi/2")
    if not delta > 0:
        raise InputError("need delta > 0")
    outer = widened_strip(delta)
    den = float(exact_log_ratio(outer, 1j * y, STANDARD_STRIP))
    inner = half_widened_strip(delta)
    if method == "scored":
        r = wos_log_ratio_to_outer(inner, outer, 1j * y, walks, DEFAULT_SHELL, seed, threads=threads)
        num, se = den - r.mean, r.std_error
    elif method == "plain":
        r = wos_log_conf_radius(inner, 1j * y, walks, DEFAULT_SHELL, seed, threads=threads)
        num = r.mean - math.log(float(strip_conf_radius(1j * y)))
        se = r.std_error
    else:
        raise InputError(f"unknown method {method!r}")
    return MCEstimate(num / den, se / den, r.walks, r.shell_epsilon, r.discarded)


# ---------------------------------------------------------------- symmetric case


def symmetric_criterion(f: Callable[[float], float], fprime: Callable[[float], float],
                        xi0: float, tol: float = 1e-6, *, samples: int = 400) -> QuadratureResult:
    """I = integral over (0, xi0] of log(g(x))/x with g = f/(x f').

    Evaluated in u = -log x, where the integrand log g(e^-u) lives on
    [-log xi0, infinity) and the usual doubling policy applies.
    """
    if not xi0 > 0:
        raise InputError("xi0 must be positive")
    xs = xi0 * np.logspace(-12, 0, samples)
    fx = np.array([f(x) for x in xs])
    fp = np.array([fprime(x) for x in xs])
    if np.any(fp <= 0) or np.any(~np.isfinite(fp)):
        raise InputError("f' must be positive on (0, xi0]")
    g = fx / (xs * fp)
    if np.any(g < 1 - 1e-12):
        raise InputError("g = f/(x f') must be >= 1 on (0, xi0]")
    u0 = -math.log(xi0)

    def integrand(s):
        x = math.exp(-(u0 - s))
        return math.log(f(x) / (x * fprime(x)))

    return improper_integral(integrand, tol)


def research_probe_partials(integrand: Callable[[float], float], cutoffs: Sequence[float],
                            upper: float = 0.0) -> list:
    """Partial integrals of an integrand over [upper - T, upper]; no classification.

    Intended for exploratory integrals whose link to conformality is not settled.
    """
    out = []
    for T in cutoffs:
        v, _ = integrate.quad(integrand, upper - T, upper, limit=400)
        out.append((float(T), float(v)))
    return out


# ---------------------------------------------------------------- reformulations


def strip_distance_gaps(model, y: float, pairs) -> list:
    """d_S(iy+a, iy+b) - d_Omega(iy+a, iy+b) for each pair (a, b)."""
    domain = model.domain if isinstance(model, sg.SemigroupModel) else model
    if not hasattr(domain, "to_source"):
        raise UnsupportedExactError("comparator needs exact hyperbolic distances")
    strip = _maximal_strip(domain, None)
    S = Strip(strip.a, strip.b)
    out = []
    for a, b in pairs:
        if not a < b <= 0:
            raise InputError("pairs need a < b <= 0")
        za, zb = complex(a, y), complex(b, y)
        out.append(float(hyperbolic_distance(S, za, zb)) - float(hyperbolic_distance(domain, za, zb)))
    return out


@dataclass(frozen=True)
class LimitResult:
    nu: float
    log_limit: complex
    classification: str  # finite | infinite | inconclusive
    width_over_pi: float

    def to_dict(self):
        ll = self.log_limit
        return {"nu": self.nu, "log_limit": [ll.real, ll.imag] if np.isfinite(ll) else "inf",
                "classification": self.classification, "width_over_pi": self.width_over_pi}


def nu_and_log_limit(model, sigma: complex = -1.0, k_grid=range(1, 9), rel_tol: float = 1e-6) -> LimitResult:
    """Radial limits of (z - sigma) h'(z) and h(z) - nu log(1 - conj(sigma) z)."""
    if not model.strip_sourced or sigma != -1:
        raise UnsupportedExactError("implemented for strip-sourced models at sigma = -1")
    petal = sg.petal_of(model)
    eps = 10.0 ** -np.asarray(list(k_grid), dtype=float)
    # z = -1 + eps, so s0(z) = log(eps/(2 - eps)) exactly
    zeta = np.log(eps / (2.0 - eps)) + 0j
    nus = 2.0 * np.asarray(model.m_prime(zeta)) / (2.0 - eps)
    nu = nus[-1]
    if abs(nus[-1] - nus[-2]) > 1e-6 * abs(nu):
        return LimitResult(float(abs(nu)), complex(math.nan), INCONCLUSIVE, petal.width / math.pi)
    nu = float(nu.real)
    vals = np.asarray(model.m(zeta)) - nu * np.log(eps)
    last = vals[-3:]
    scale = max(1.0, abs(last[-1]))
    if np.max(np.abs(np.diff(last))) <= rel_tol * scale:
        cls = FINITE
        ll = complex(last[-1])
    elif np.all(np.diff(np.abs(vals[-4:])) > 0) and abs(vals[-1]) > 1e3:
        cls, ll = "infinite", complex(math.inf)
    else:
        cls, ll = INCONCLUSIVE, complex(last[-1])
    return LimitResult(nu, ll, cls, petal.width / math.pi)


def _length_gap_integrand(model, z, s, petal, lam_s):
    zt = np.asarray(sg.orbit_zeta(model, z, -s))
    lam_disk = 2.0 * np.abs(np.cosh(0.5 * zt)) ** 2 / np.cos(zt.imag)
    hp = np.abs(np.asarray(model.h_prime_at_zeta(zt)))
    return lam_s - lam_disk / hp


def hyperbolic_length_gap(model, z=None, T_grid=(1, 2, 4, 8, 16, 32, 64), *, w0=None,
                          walks: int = 2000, seed: int = 0) -> list:
    """Cumulative (lambda_Delta - lambda_D)|gamma'| along the backward orbit up to each T.

    For a profile domain (no Koenigs map) the same quantity is computed in
    domain coordinates, lambda_S(w0) - lambda_Omega(w0 - s), with Monte Carlo
    radii on a unit-spaced trapezoid grid.
    """
    T_grid = sorted(float(T) for T in T_grid)
    domain = model.domain if isinstance(model, sg.SemigroupModel) else model
    if isinstance(domain, ProfileDomain):
        w0 = complex(1j * domain.strip.mid if w0 is None else w0)
        lam_s = float(strip_density(w0, domain.strip))
        ss = np.arange(0.0, T_grid[-1] + 0.5)
        vals = np.array([lam_s * (1 - math.exp(-mc_log_ratio(domain, w0 - s, walks, (seed, 5, i)).mean))
                         for i, s in enumerate(ss)])
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]))])
        return [float(np.interp(T, ss, cum)) for T in T_grid]
    petal = sg.petal_of(model)
    if z is None:
        z = model.h_inverse(1j * petal.strip.mid)
    lam_s = float(strip_density(complex(model.h(z)), petal.strip))
    out = []
    acc = 0.0
    prev = 0.0
    for T in T_grid:
        v, _ = integrate.quad(lambda s: float(_length_gap_integrand(model, z, s, petal, lam_s)),
                              prev, T, epsabs=1e-12, limit=200)
        acc += v
        out.append(acc)
        prev = T
    return out


def ij_integrals(model, z0=None, tol: float = 1e-6, *, cutoff_start: float = 16.0):
    """The integrals I(z0) and J(z0) along the backward orbit of z0."""
    if not model.strip_sourced:
        raise UnsupportedExactError("I and J need an explicit strip-sourced Koenigs map")
    petal = sg.petal_of(model)
    if z0 is None:
        z0 = model.h_inverse(1j * petal.strip.mid)
    lam = petal.spectral_value
    A = abs(complex(sg.generator(model, z0))) * _petal_density_at(model, z0, petal)

    def parts(t):
        zt = complex(sg.orbit_zeta(model, z0, t))
        v = 0.5 * zt
        mp = complex(model.m_prime(zt))
        c = math.cos(zt.imag)
        re_term = (np.conj(np.sinh(v)) / (2.0 * mp * np.cosh(v) * c)).real
        abs_term = 1.0 / (2.0 * abs(mp) * c)
        return re_term, abs_term

    J = improper_integral(lambda t: lam / 2 + parts(t)[0], tol, cutoff_start=cutoff_start,
                          nonnegative=False)
    I = improper_integral(lambda t: A / 2 - parts(t)[1], tol, cutoff_start=cutoff_start)
    return I, J


def generator_density_product(model, z0, t: float) -> float:
    """|G(phi_t z0)| lambda_D(phi_t z0); tends to |G(z0)| lambda_Delta(z0) as t -> -infinity."""
    zt = complex(sg.orbit_zeta(model, z0, t))
    return 1.0 / (abs(complex(model.m_prime(zt))) * math.cos(zt.imag))


# ---------------------------------------------------------------- report


@dataclass
class CriterionOutcome:
    name: str
    classification: str
    value: float
    error: float
    exact: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        def num(x):
            x = float(x)
            return x if math.isfinite(x) else ("inf" if x > 0 else ("-inf" if x < 0 else "nan"))
        d = {"name": self.name, "classification": self.classification,
             "value": num(self.value), "error": num(self.error), "exact": self.exact}
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass
class ConformalityReport:
    verdict: str
    criteria: list
    base_point: complex
    notes: list
    parabolic: Optional[dict] = None

    def to_dict(self):
        d = {"verdict": self.verdict,
             "criteria": [c.to_dict() for c in sorted(self.criteria, key=lambda c: c.name)],
             "base_point": [self.base_point.real, self.base_point.imag],
             "notes": list(self.notes)}
        if self.parabolic is not None:
            d["parabolic"] = self.parabolic
        return d


def _from_quad(name, q: QuadratureResult, exact: bool) -> CriterionOutcome:
    return CriterionOutcome(name, q.classification, q.value, q.error_estimate, exact,
                            {"cutoff": q.cutoff_used if math.isfinite(q.cutoff_used) else "inf"})


def decide(criteria: list) -> tuple[str, list]:
    """Verdict from exact criteria only; disagreement among them gives undecided."""
    notes = []
    exact = [c for c in criteria if c.exact and c.classification in (FINITE, DIVERGENT, "infinite")]
    finite = [c.name for c in exact if c.classification == FINITE]
    div = [c.name for c in exact if c.classification in (DIVERGENT, "infinite")]
    if finite and div:
        notes.append(f"exact criteria disagree: finite {finite}, divergent {div}")
        return UNDECIDED, notes
    if finite:
        return CONFORMAL, notes
    if div:
        return NON_CONFORMAL, notes
    notes.append("no exact criterion reached a classification")
    return UNDECIDED, notes


def assemble_report(target, point=None, config: Optional[RunConfig] = None, *,
                    mc: bool = True) -> ConformalityReport:
    """Run every applicable criterion on a domain or model and fold the verdict."""
    config = config or RunConfig()
    tol = config.tolerance
    if isinstance(target, sg.SemigroupModel):
        model, domain = target, target.domain
    else:
        domain = target
        model = sg.model_from_domain(domain) if hasattr(domain, "im_bounds") else None
    criteria: list[CriterionOutcome] = []
    notes: list[str] = []

    if isinstance(domain, HalfPlane) or (model is not None and getattr(domain, "maximal_strip", lambda: None)() is None):
        from .parabolic import classify_parabolic_petal, model_for_domain
        pm = model if (model is not None and model.has_h) else model_for_domain(domain)
        rep = classify_parabolic_petal(pm)
        verdict = CONFORMAL if rep.conformal is True else (NON_CONFORMAL if rep.conformal is False else UNDECIDED)
        notes.append("parabolic petal: classified by the hyperbolic step and the L-limit")
        return ConformalityReport(verdict, criteria, complex(point or 0j), notes, rep.to_dict())

    strip = _maximal_strip(domain, None)
    w0 = complex(1j * strip.mid if point is None else point)
    if not strip.a < w0.imag < strip.b:
        raise InputError("base point must lie in the maximal strip")

    def attempt(fn):
        try:
            fn()
        except PetalLabError as exc:  # criteria never abort the report
            notes.append(f"{fn.__name__}: {type(exc).__name__}: {exc}")

    def euclid():
        upper = 0.0
        if isinstance(domain, TwoSlit) and domain.slit_end < 0:
            upper = domain.slit_end
            notes.append(f"gap integral taken over (-inf, {upper}] where the gap is finite; "
                         "conformality at -infinity is unchanged by real shifts")
        criteria.append(_from_quad("euclidean_gap_integral", euclidean_gap_integral(domain, upper), True))

    attempt(euclid)

    if isinstance(domain, ProfileDomain):
        notes.append("profile domain: no explicit map; hyperbolic integrals are Monte Carlo (advisory)")
        if mc:
            def mc_strip():
                walks = max(1000, config.mc_walks // 50)
                part = mc_strip_side_partials(domain, w0, walks=walks, seed=config.seed,
                                              threads=config.threads, tol=tol)
                cls = {"growing": DIVERGENT, "stabilizing": FINITE}.get(part.trend, INCONCLUSIVE)
                criteria.append(CriterionOutcome("hyperbolic_integral_strip_side_mc", cls,
                                                 part.values[-1], part.errors[-1], False,
                                                 part.to_dict()))
            attempt(mc_strip)
        verdict, vnotes = decide(criteria)
        return ConformalityReport(verdict, criteria, w0, notes + vnotes)

    def strip_side():
        q = hyperbolic_integral_strip_side(domain, strip, w0, tol, cutoff_start=config.cutoff_start)
        if q.min_integrand < -1e-12:
            notes.append(f"strip-side integrand went negative ({q.min_integrand:.3g})")
        criteria.append(_from_quad("hyperbolic_integral_strip_side", q, True))

    attempt(strip_side)

    if model is not None and model.strip_sourced:
        petal = sg.petal_of(model)
        z0 = model.h_inverse(w0)

        def disk_side():
            q = hyperbolic_integral_disk_side(model, z0, tol, cutoff_start=config.cutoff_start)
            criteria.append(_from_quad("hyperbolic_integral_disk_side", q, True))
            gap = identity_chain_discrepancy(model, z0, np.linspace(-30, 0, 20))
            notes.append(f"disk-side and strip-side integrands agree to {gap:.2e} on 20 nodes in [-30, 0]")

        def rate():
            rc = sg.rate_constant(model, petal, z0)
            criteria.append(CriterionOutcome("rate_constant", rc.classification, rc.value, 0.0, False))

        def limits():
            lim = nu_and_log_limit(model)
            criteria.append(CriterionOutcome("log_limit", lim.classification, abs(lim.log_limit),
                                             0.0, False, lim.to_dict()))

        def ij():
            I, J = ij_integrals(model, z0, tol, cutoff_start=config.cutoff_start)
            criteria.append(_from_quad("integral_I", I, False))
            criteria.append(_from_quad("integral_J", J, False))

        def length():
            gaps = hyperbolic_length_gap(model, z0, (16, 32, 64))
            inc = gaps[-1] - gaps[-2]
            cls = FINITE if inc < max(tol, 1e-9) else INCONCLUSIVE
            criteria.append(CriterionOutcome("hyperbolic_length_gap", cls, gaps[-1], inc, False))

        def distance_gaps():
            gaps = strip_distance_gaps(model, w0.imag, [(-2 * k - 1, -2 * k) for k in range(6)])
            notes.append("distance gaps on (-2k-1, -2k): " + ", ".join(f"{g:.3e}" for g in gaps))

        for fn in (disk_side, rate, limits, ij, length, distance_gaps):
            attempt(fn)

    verdict, vnotes = decide(criteria)
    # secondary (non-deciding) criteria must agree with the verdict
    for c in criteria:
        if c.exact or verdict == UNDECIDED:
            continue
        want = FINITE if verdict == CONFORMAL else (DIVERGENT, "infinite")
        if c.classification not in ((want,) if isinstance(want, str) else want):
            vnotes.append(f"{c.name} classified {c.classification}, not matching the verdict")
    return ConformalityReport(verdict, criteria, w0, notes + vnotes)
