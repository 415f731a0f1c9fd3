import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from petal_lab import semigroup as sg
from petal_lab.domains import (BoundaryProfile, HalfPlane, PowerTail, ProfileDomain, Segment,
                               Strip, TwoSlit, widened_strip)
from petal_lab.errors import BackwardInadmissibleError, NoBackwardOrbitError, WrongTypeError
from petal_lab.hypgeo import HALF_PI, STANDARD_STRIP

STRIP = sg.model_from_domain(Strip(-HALF_PI, HALF_PI))
TWO_SLIT = sg.model_from_domain(TwoSlit(STANDARD_STRIP, 0.0))
in_strip = st.floats(-1.4, 1.4)


def test_kinds():
    assert STRIP.kind == sg.HYPERBOLIC and TWO_SLIT.kind == sg.PARABOLIC
    assert sg.model_from_domain(HalfPlane()).kind == sg.PARABOLIC


def test_strip_model_is_log():
    z = np.array([0.1, -0.5 + 0.3j, 0.7j])
    assert np.allclose(STRIP.h(z), np.log((1 + z) / (1 - z)), atol=1e-14)
    assert sg.generator(STRIP, 0.0) == pytest.approx(0.5)


def test_phi_examples():
    z = TWO_SLIT.h_inverse(-1 + 0j)
    assert sg.phi_t(TWO_SLIT, z, 0.0) == z
    assert sg.phi_t(TWO_SLIT, z, -5.0) == pytest.approx(TWO_SLIT.h_inverse(-6 + 0j), abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-5, 5), y=in_strip, s=st.floats(0, 5), t=st.floats(0, 5))
def test_semigroup_law_and_abel(x, y, s, t):
    z = TWO_SLIT.h_inverse(complex(x, y))
    lhs = sg.phi_t(TWO_SLIT, sg.phi_t(TWO_SLIT, z, t), s)
    rhs = sg.phi_t(TWO_SLIT, z, s + t)
    assert abs(lhs - rhs) < 1e-10
    assert abs(TWO_SLIT.h(sg.phi_t(TWO_SLIT, z, t)) - TWO_SLIT.h(z) - t) < 1e-10 * max(1, abs(x) + t)


def test_backward_admissibility():
    z = TWO_SLIT.h_inverse(1 + 1j * HALF_PI)  # on the line of the upper slit, right of its tip
    with pytest.raises(BackwardInadmissibleError):
        sg.phi_t(TWO_SLIT, z, -5.0)
    with pytest.raises(NoBackwardOrbitError):
        sg.backward_orbit(TWO_SLIT, z, [0.0, -1.0])


def test_phi_prime_finite_difference():
    z = TWO_SLIT.h_inverse(0.5 + 0.4j)
    eps = 1e-7
    for t in (-3.0, 2.0):
        fd = (sg.phi_t(TWO_SLIT, z + eps, t) - sg.phi_t(TWO_SLIT, z - eps, t)) / (2 * eps)
        assert abs(sg.phi_t_prime(TWO_SLIT, z, t) - fd) < 1e-5 * max(1, abs(fd))
    assert sg.phi_t_prime(TWO_SLIT, z, 0.0) == 1


def test_phi_prime_growth_rate():
    z = TWO_SLIT.h_inverse(0j)
    ts = -np.arange(5.0, 40.0, 5.0)
    scaled = [abs(sg.phi_t_prime(TWO_SLIT, z, t)) * math.exp(-t) for t in ts]
    assert max(scaled) / min(scaled) < 1.01


def test_generator_ode():
    z0 = TWO_SLIT.h_inverse(0.3 + 0.2j)

    def rhs(_, u):
        g = complex(sg.generator(TWO_SLIT, complex(u[0], u[1])))
        return [g.real, g.imag]

    sol = solve_ivp(rhs, (0, 1), [z0.real, z0.imag], rtol=1e-12, atol=1e-14)
    end = complex(*sol.y[:, -1])
    assert abs(end - sg.phi_t(TWO_SLIT, z0, 1.0)) < 1e-8


def test_generator_nonzero_on_petal():
    ws = np.linspace(-10, 10, 21)[:, None] + 1j * np.linspace(-1.5, 1.5, 11)[None, :]
    z = TWO_SLIT.h_inverse(ws.ravel())
    assert np.all(np.abs(sg.generator(TWO_SLIT, z)) > 0)


def test_backward_orbit_to_alpha():
    ts = -np.linspace(0, 30, 31)
    orbit = sg.backward_orbit(STRIP, 0.0, ts)
    assert orbit[0] == 0
    assert abs(orbit[-1] + 1) < 1e-12
    # arg(1 + phi) with 1 + phi = 2e^zeta/(1 + e^zeta), free of cancellation
    zeta = np.array([sg.orbit_zeta(TWO_SLIT, TWO_SLIT.h_inverse(0.7j), t) for t in -np.linspace(30, 40, 11)])
    args = zeta.imag - np.angle(1 + np.exp(zeta))
    assert np.max(np.abs(np.diff(args))) < 1e-4


def test_rate_of_approach():
    z = TWO_SLIT.h_inverse(0j)
    assert sg.measured_rate(TWO_SLIT, z) == pytest.approx(1.0, abs=1e-3)
    # (1/t) log dist carries a log(C)/t offset; at t = -40 it is still ~1.7% away from lambda
    ld = float(sg.backward_orbit_log_dist(TWO_SLIT, z, [-40.0])[0])
    C = sg.rate_constant(TWO_SLIT, None, z).value
    assert ld / -40.0 == pytest.approx(1.0 - math.log(C) / 40.0, abs=1e-9)


def test_log_dist_stable():
    zeta = np.array([-50 + 0.2j, -5 - 1.0j, 0.3j])
    direct = np.log(np.abs(np.tanh(zeta / 2) + 1))
    assert np.allclose(sg.log_dist_to_alpha(zeta)[1:], direct[1:], atol=1e-12)
    assert sg.log_dist_to_alpha(zeta)[0] == pytest.approx(math.log(2) - 50, abs=1e-12)


def test_petal_records():
    p = sg.petal_of(TWO_SLIT)
    assert p.spectral_value == pytest.approx(1.0) and p.width == pytest.approx(math.pi)
    assert sg.petal_of(sg.model_from_domain(Strip(0.0, HALF_PI))).spectral_value == pytest.approx(2.0)
    d = 0.4
    q = sg.petal_of(sg.model_from_domain(widened_strip(d)))
    assert q.spectral_value == pytest.approx(math.pi / (math.pi + d))
    assert q.spectral_value * q.width == pytest.approx(math.pi)
    with pytest.raises(WrongTypeError):
        sg.petal_of(sg.model_from_domain(HalfPlane()))


@pytest.mark.parametrize("domain", [Strip(-HALF_PI, HALF_PI), Strip(0.0, 1.0), widened_strip(0.7),
                                    TwoSlit(STANDARD_STRIP, 0.0)])
def test_measured_rate_matches_width(domain):
    m = sg.model_from_domain(domain)
    p = sg.petal_of(m)
    z = m.h_inverse(1j * p.strip.mid)
    assert sg.measured_rate(m, z) == pytest.approx(math.pi / p.width, abs=1e-3)


def test_pre_model():
    p = sg.petal_of(TWO_SLIT)
    assert sg.pre_model_psi(TWO_SLIT, p, 1.0) == pytest.approx(TWO_SLIT.h_inverse(0j), abs=1e-14)
    rng = np.random.default_rng(2)
    for _ in range(20):
        w = rng.uniform(0.1, 3) * np.exp(1j * rng.uniform(-1.4, 1.4))
        t = rng.uniform(-3, 3)
        lhs = sg.pre_model_psi(TWO_SLIT, p, math.exp(p.spectral_value * t) * w)
        rhs = sg.phi_t(TWO_SLIT, sg.pre_model_psi(TWO_SLIT, p, w), t)
        assert abs(lhs - rhs) < 1e-9
    iso = sg.isogonality_probe(TWO_SLIT, p)
    assert abs(iso[-1]) < 1e-9 and abs(iso[-1]) <= abs(iso[0])


def test_rate_constant_two_slit():
    p = sg.petal_of(TWO_SLIT)
    dpsi = sg.psi_angular_derivative(TWO_SLIT, p)
    assert abs(dpsi) == pytest.approx(2 * math.exp(-0.5), rel=1e-9)  # 2 e^{-1/2}, from the map
    for w in (0j, 0.5 + 0.7j, -1.0 - 0.4j):
        z = TWO_SLIT.h_inverse(w)
        rc = sg.rate_constant(TWO_SLIT, p, z)
        assert rc.classification == "finite"
        assert rc.value == pytest.approx(abs(sg.pre_model_psi_inverse(TWO_SLIT, p, z) * dpsi), rel=1e-2)


def test_rate_constant_shift_invariant_class():
    p = sg.petal_of(TWO_SLIT)
    for s in (-2.0, 0.0, 3.0):
        z = sg.pre_model_psi(TWO_SLIT, p, 1.0, s)
        assert sg.rate_constant(TWO_SLIT, p, z).classification == "finite"


def test_rate_constant_profile_surrogate():
    P = ProfileDomain(STANDARD_STRIP, BoundaryProfile([Segment(-1.0, PowerTail(1.0, 1.0))]))
    rc = sg.rate_constant(P)
    assert rc.classification == "infinite" and rc.via == "euclidean-surrogate"
