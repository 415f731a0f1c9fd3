"""The acceptance suite: eleven end-to-end checks with fixed tolerances.

Each check returns an ``AcceptanceResult``. Monte Carlo checks take their walk
count and seed from a RunConfig; exact checks ignore it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import conformality as cf
from . import parabolic as pb
from . import semigroup as sg
from .conformality import RunConfig
from .domains import (BoundaryProfile, PowerTail, ProfileDomain, Segment, Strip, TwoSlit,
                      euclidean_gap_integral, half_widened_strip, widened_strip)
from .hypgeo import (HALF_PI, STANDARD_STRIP, conf_radius, density, green, green_strip,
                     harmonic_measure_strip_upper, strip_conf_radius, strip_density,
                     strong_markov_log_ratio)
from .wos import wos_log_conf_radius


@dataclass
class AcceptanceResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0
    monte_carlo: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{tag}] {self.number:2d} {self.title} ({self.seconds:.1f}s): {parts}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _tail_profile(p: float) -> ProfileDomain:
    return ProfileDomain(STANDARD_STRIP, BoundaryProfile([Segment(-1.0, PowerTail(1.0, p))]))


def two_slit_model() -> sg.SemigroupModel:
    return sg.model_from_domain(TwoSlit(STANDARD_STRIP, 0.0), "two_slit")


# ---------------------------------------------------------------- checks


def strip_kernels(config: Optional[RunConfig] = None) -> AcceptanceResult:
    ys = np.linspace(-1.5, 1.5, 50)
    err_density = float(np.max(np.abs(strip_density(1j * ys) - 1 / np.cos(ys))))
    r0 = float(strip_conf_radius(0j))
    d = 1e-4
    S_d = widened_strip(d)
    errs = []
    for y in (-1.0, 0.0, 1.0):
        num = math.log(float(conf_radius(S_d, 1j * y)) / float(strip_conf_radius(1j * y))) / d
        pred = 1 / math.pi + (math.pi + 2 * y) * math.tan(y) / (2 * math.pi)
        errs.append(abs(num - pred))
    ok = err_density < 1e-12 and abs(r0 - 2) < 1e-12 and max(errs) < 1e-3
    return AcceptanceResult(1, "strip kernel identities", ok,
                            {"density_err": err_density, "R0": r0, "derivative_err": max(errs)})


def harmonic_mass(config: Optional[RunConfig] = None) -> AcceptanceResult:
    errs = []
    for y in (-1.0, 0.0, 1.0):
        v, _ = integrate.quad(lambda x: float(harmonic_measure_strip_upper(y, x)), -np.inf, np.inf,
                              epsabs=1e-13, epsrel=1e-13)
        errs.append(abs(v - (0.5 + y / math.pi)))
    return AcceptanceResult(2, "harmonic measure mass", max(errs) < 1e-8, {"max_err": max(errs)})


def green_bounds(config: Optional[RunConfig] = None, seed: int = 12345) -> AcceptanceResult:
    rng = np.random.default_rng(seed)
    n = 1000
    beta = rng.uniform(-HALF_PI + 1e-3, HALF_PI - 1e-3, n)
    a0 = rng.uniform(0, 1, n) * 0.5 * (HALF_PI - beta)
    a0 = np.maximum(a0, 1e-6)
    alpha = rng.uniform(0.01, 0.99, n) * a0
    x = rng.uniform(-12, 12, n)
    h0 = np.asarray(green_strip(1j * beta, 1j * (HALF_PI - alpha)))
    hx = np.asarray(green_strip(1j * beta, x + 1j * (HALF_PI - alpha)))
    lower = h0 * (1 - np.cos(a0)) / (np.cosh(x) - np.cos(a0))
    slack1 = float(np.min(np.concatenate([(h0 - hx) / h0, (hx - lower) / h0])))

    D = TwoSlit(STANDARD_STRIP, 0.0)
    m = 200
    w = rng.uniform(-8, -1e-3, m) + 1j * rng.uniform(-HALF_PI + 1e-3, HALF_PI - 1e-3, m)
    s = rng.uniform(1e-3, 8, m) + 1j * HALF_PI * rng.choice([-1.0, 1.0], m)
    g = np.asarray(green(D, w, s))
    e = np.exp(w.real)
    cap = np.log1p(e) - np.log1p(-e)
    slack2 = float(np.min(cap - g))
    ok = slack1 >= -1e-12 and slack2 >= -1e-12
    return AcceptanceResult(3, "Green's function bounds", ok,
                            {"strip_bound_rel_slack": slack1, "two_slit_slack": slack2})


def strong_markov(config: Optional[RunConfig] = None) -> AcceptanceResult:
    S = Strip(-HALF_PI, HALF_PI)
    errs = []
    for d in (0.1, 0.3):
        Sd = widened_strip(d)
        for y in (-1.0, 0.0, 1.0):
            exact = math.log(float(conf_radius(Sd, 1j * y)) / float(strip_conf_radius(1j * y)))
            errs.append(abs(strong_markov_log_ratio(S, Sd, 1j * y) - exact))
    return AcceptanceResult(4, "strong Markov identity", max(errs) < 1e-6, {"max_err": max(errs)})


def phi_one_half(config: Optional[RunConfig] = None) -> AcceptanceResult:
    config = config or RunConfig()
    e = cf.phi_delta(0.0, 0.05, config.mc_walks, config.seed, threads=config.threads)
    ok = abs(e.mean - 0.5) < 0.1 and not e.inconclusive
    return AcceptanceResult(5, "Phi_0.05(0) near 1/2", ok,
                            {"phi": e.mean, "std_error": e.std_error, "walks": e.walks}, monte_carlo=True)


def profile_equivalence(config: Optional[RunConfig] = None) -> AcceptanceResult:
    config = config or RunConfig()
    walks = max(1000, config.mc_walks // 50)
    p2, p1 = _tail_profile(2.0), _tail_profile(1.0)
    tail2 = euclidean_gap_integral(p2, upper=-1.0)
    cfg = RunConfig(config.tolerance, config.mc_walks, config.seed, config.cutoff_start,
                    "json", config.threads)
    v2 = cf.assemble_report(p2, config=cfg, mc=False).verdict
    v1 = cf.assemble_report(p1, config=cfg, mc=False).verdict
    m2 = cf.mc_strip_side_partials(p2, 0j, walks=walks, seed=config.seed, threads=config.threads)
    m1 = cf.mc_strip_side_partials(p1, 0j, walks=walks, seed=config.seed, threads=config.threads)
    ok = (abs(tail2.value - 1.0) < 1e-12 and v2 == cf.CONFORMAL and v1 == cf.NON_CONFORMAL
          and m2.trend == "stabilizing" and m1.trend == "growing")
    return AcceptanceResult(6, "profile tails: verdicts and MC partials", ok,
                            {"tail_integral_p2": tail2.value, "verdict_p2": v2, "verdict_p1": v1,
                             "mc_p2": list(m2.values), "mc_p1": list(m1.values),
                             "trend_p2": m2.trend, "trend_p1": m1.trend}, monte_carlo=True)


def identity_chain(config: Optional[RunConfig] = None) -> AcceptanceResult:
    model = two_slit_model()
    z0 = model.h_inverse(0j)
    ts = np.linspace(-30, 0, 20)
    gap = cf.identity_chain_discrepancy(model, z0, ts)
    tt = np.linspace(0, -30, 301)
    lam = np.asarray(density(model.domain, tt + 0j))
    mono = bool(np.all(np.diff(lam) >= -1e-15))
    end = abs(lam[-1] - float(strip_density(0j)))
    ok = gap < 1e-8 and mono and end < 1e-6
    return AcceptanceResult(7, "identity chain and monotone convergence", ok,
                            {"max_gap": gap, "monotone": mono, "density_gap_at_-30": end})


def rate_constant_check(config: Optional[RunConfig] = None) -> AcceptanceResult:
    model = two_slit_model()
    petal = sg.petal_of(model)
    dpsi = sg.psi_angular_derivative(model, petal)
    rel = []
    for w in (0j, 0.5 + 0.7j, -1.0 - 0.4j):
        z = model.h_inverse(w)
        rc = sg.rate_constant(model, petal, z)
        pred = abs(complex(sg.pre_model_psi_inverse(model, petal, z)) * dpsi)
        rel.append(abs(rc.value - pred) / pred if rc.classification == "finite" else math.inf)
    I, J = cf.ij_integrals(model, model.h_inverse(0j))
    ok = max(rel) < 0.01 and I.classification == "finite" and J.classification == "finite"
    return AcceptanceResult(8, "rate constant and I, J integrals", ok,
                            {"max_rel_err": max(rel), "psi_prime_0": abs(dpsi),
                             "I": I.classification, "J": J.classification})


def parabolic_examples(config: Optional[RunConfig] = None) -> AcceptanceResult:
    koebe, h2, hp = pb.koebe_model(), pb.h2_model(), pb.half_plane_model()
    Lk = pb.L_limit(koebe.h)
    L2 = pb.L_limit(h2.h)
    steps = [pb.hyperbolic_step_class(m.domain) for m in (koebe, h2, hp)]
    resid = abs(L2.value.real)
    ok = (Lk.classification == "infinite" and L2.finite and abs(L2.value + 2j) < 1e-2
          and resid < 1e-2 and steps == ["zero", "zero", "positive"])
    return AcceptanceResult(9, "parabolic examples", ok,
                            {"koebe_L": Lk.classification, "h2_L": [L2.value.real, L2.value.imag],
                             "residual": resid, "steps": steps})


def wos_calibration(config: Optional[RunConfig] = None) -> AcceptanceResult:
    config = config or RunConfig()
    S = Strip(-HALF_PI, HALF_PI)
    e = wos_log_conf_radius(S, 0j, config.mc_walks, rng_seed=config.seed, threads=config.threads)
    z = abs(e.mean - math.log(2)) / e.std_error
    star = wos_log_conf_radius(half_widened_strip(0.5), 0j, config.mc_walks,
                               rng_seed=(config.seed, 1), threads=config.threads)
    hi = math.log(float(conf_radius(widened_strip(0.5), 0j)))
    ok = z <= 3 and math.log(2) < star.mean < hi and not (e.inconclusive or star.inconclusive)
    return AcceptanceResult(10, "walk-on-spheres calibration", ok,
                            {"logR_S": e.mean, "z_score": z, "logR_star": star.mean,
                             "bracket": [math.log(2), hi]}, monte_carlo=True)


def sandwich_bounds(config: Optional[RunConfig] = None) -> AcceptanceResult:
    config = config or RunConfig()
    walks = max(1000, config.mc_walks // 5)
    P = half_widened_strip(0.2)
    low = cf.lower_bound_check(P, None, y_set=(-0.5, 0.0, 0.5), t_set=(0.5, 1.0, 2.0),
                               walks=walks, seed=config.seed)
    ups = [cf.upper_bound_check(P, None, 1j * y, t_set=(-4.0, -1.0, 0.5, 1.5), walks=walks,
                                seed=config.seed + k) for k, y in enumerate((-0.5, 0.0, 0.5))]
    probes = [p for p in low.probes if not p.vacuous] + [p for u in ups for p in u.probes]
    ok = low.passed and all(u.passed for u in ups) and len(probes) > 0
    return AcceptanceResult(11, "sandwich bounds on S*_0.2", ok,
                            {"probes": len(probes), "min_lower_slack": min(p.slack for p in low.probes),
                             "min_upper_slack": min(p.slack for u in ups for p in u.probes),
                             "lower_constant": low.constant,
                             "upper_constant": max(u.constant for u in ups)}, monte_carlo=True)


CHECKS: list[Callable[[Optional[RunConfig]], AcceptanceResult]] = [
    strip_kernels, harmonic_mass, green_bounds, strong_markov, phi_one_half, profile_equivalence,
    identity_chain, rate_constant_check, parabolic_examples, wos_calibration, sandwich_bounds,
]


def run_check(fn, config: Optional[RunConfig] = None) -> AcceptanceResult:
    t = time.perf_counter()
    r = fn(config)
    r.seconds = time.perf_counter() - t
    return r


def run_all(config: Optional[RunConfig] = None, echo: Optional[Callable[[str], None]] = None) -> list:
    out = []
    for fn in CHECKS:
        r = run_check(fn, config)
        if echo:
            echo(r.line())
        out.append(r)
    return out
