import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from petal_lab.domains import (BoundaryProfile, Const, PowerTail, ProfileDomain, Segment, Strip,
                               TwoSlit, contains, delta, delta_pair, dist_to_boundary,
                               euclidean_gap_integral, half_widened_strip, two_slit_map,
                               two_slit_map_inverse, two_slit_map_prime, widened_strip)
from petal_lab.errors import DomainError, InputError
from petal_lab.hypgeo import HALF_PI, STANDARD_STRIP, StripSpec

S = Strip(-HALF_PI, HALF_PI)
D_STAR = TwoSlit(STANDARD_STRIP, 0.0)


def tail(p, c=1.0, t0=-1.0):
    return ProfileDomain(STANDARD_STRIP, BoundaryProfile([Segment(t0, PowerTail(c, p))]))


def test_membership_examples():
    assert contains(D_STAR, 1 + 0j)
    assert not contains(D_STAR, -1 + 1j * HALF_PI)
    assert contains(D_STAR, 2 + 3j)  # right of the slits the domain is unbounded
    P = tail(2.0)
    assert contains(P, -10 + 1j * (HALF_PI + 0.005))
    assert not contains(P, -10 + 1j * (HALF_PI + 0.011))


def test_distance_examples():
    assert dist_to_boundary(S, 0j) == pytest.approx(HALF_PI)
    # nearest boundary point of z = 1 is a slit tip
    assert dist_to_boundary(D_STAR, 1 + 0j) == pytest.approx(math.sqrt(1 + math.pi ** 2 / 4))
    assert dist_to_boundary(D_STAR, -5 + 0j) == pytest.approx(HALF_PI)
    with pytest.raises(DomainError):
        dist_to_boundary(S, 2j)


def test_distance_to_step_corner():
    P = half_widened_strip(0.5)
    # below-left of the raised step: the corner (0, pi/2) is nearest
    z = 0.3 + 1.4j
    corner = abs(z - 1j * HALF_PI)
    assert dist_to_boundary(P, z) == pytest.approx(min(corner, HALF_PI + 1.4, HALF_PI + 0.5 - 1.4))
    assert dist_to_boundary(P, -0.2 + 1.4j) == pytest.approx(HALF_PI - 1.4)


def test_tail_distance_against_dense_sampling():
    P = tail(1.0, c=1.0)
    rng = np.random.default_rng(0)
    xs = np.linspace(-60, -1, 400001)
    curve = HALF_PI + 1.0 / np.abs(xs)
    for _ in range(20):
        z = complex(rng.uniform(-40, -3), rng.uniform(0.5, HALF_PI + 0.02))
        if not contains(P, z):
            continue
        brute = min(np.min(np.abs(xs + 1j * curve - z)), z.imag + HALF_PI)
        assert dist_to_boundary(P, z) == pytest.approx(brute, abs=1e-6)


def test_delta_examples():
    assert delta(S, -3.0) == 0
    assert delta(D_STAR, -2.0) == 0
    assert math.isinf(delta(D_STAR, 0.5))
    assert delta(tail(2.0), -10.0) == pytest.approx(0.01)
    d1, d2 = delta_pair(widened_strip(0.4), 0.0)
    assert (d1, d2) == (0.0, 0.0)  # maximal strip of S_delta is itself


def test_profile_semantics():
    prof = BoundaryProfile([Segment(-1.0, Const(0.2)), Segment(-5.0, PowerTail(1.0, 2.0))])
    assert prof(-10.0) == pytest.approx(0.01)
    assert prof(-5.0) == pytest.approx(0.04)
    assert prof(-2.0) == pytest.approx(0.04)
    assert prof(-1.0) == pytest.approx(0.2)
    assert prof.left_limit(-1.0) == pytest.approx(0.04)
    assert prof.sup() == pytest.approx(0.2)
    with pytest.raises(InputError):
        BoundaryProfile([Segment(-1.0, Const(0.2)), Segment(1.0, PowerTail(1.0, 2.0))])
    with pytest.raises(InputError):
        BoundaryProfile([Segment(-1.0, Const(0.2)), Segment(-1.0, Const(0.3))])


def test_profile_maximality():
    prof = tail(1.0).upper
    vals = [prof(-(10.0 ** k)) for k in range(1, 8)]
    assert vals[-1] < 1e-6 and all(b < a for a, b in zip(vals, vals[1:]))


def test_euclidean_integral():
    r = euclidean_gap_integral(S)
    assert r.value == 0 and r.classification == "finite"
    assert euclidean_gap_integral(tail(2.0), upper=-1.0).value == pytest.approx(1.0, abs=1e-14)
    assert euclidean_gap_integral(tail(2.0)).value == pytest.approx(2.0, abs=1e-14)
    r1 = euclidean_gap_integral(tail(1.0))
    assert r1.classification == "divergent" and len(r1.partials) >= 2
    assert r1.partials[-1][1] > r1.partials[-2][1]
    assert euclidean_gap_integral(TwoSlit(STANDARD_STRIP, -1.0)).classification == "divergent"
    assert euclidean_gap_integral(D_STAR).classification == "finite"


def test_euclidean_integral_two_sided_max():
    # lower tail 2|t|^-2 and upper tail |t|^-2: max is the lower one
    P = ProfileDomain(STANDARD_STRIP, BoundaryProfile([Segment(-1.0, PowerTail(1.0, 2.0))]),
                      BoundaryProfile([Segment(-1.0, PowerTail(2.0, 2.0))]))
    assert euclidean_gap_integral(P, upper=-1.0).value == pytest.approx(2.0)


def test_two_slit_map_examples():
    assert two_slit_map(0j) == pytest.approx(1.0)
    assert two_slit_map(1j * HALF_PI) == pytest.approx(1j * HALF_PI, abs=1e-15)
    z = -20 + 0.3j
    assert abs(two_slit_map(z) - z - np.exp(2 * z) / 2 - 0.5) < 1e-14


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-40, 40), y=st.floats(-1.5707, 1.5707))
def test_two_slit_round_trip(x, y):
    z = complex(x, y)
    w = two_slit_map(z)
    if not np.isfinite(w) or abs(w) > 1e15:
        return
    back = two_slit_map_inverse(w)
    assert abs(two_slit_map(back) - w) <= 1e-11 * max(1.0, abs(w))


def test_two_slit_inverse_interior_grid():
    xs = np.linspace(-30, 10, 81)
    ys = np.linspace(-4, 4, 41)
    W = (xs[:, None] + 1j * ys[None, :]).ravel()
    W = W[np.asarray(contains(D_STAR, W))]
    Z = two_slit_map_inverse(W)
    assert np.all(np.abs(Z.imag) < HALF_PI)
    assert np.max(np.abs(two_slit_map(Z) - W) / np.maximum(1, np.abs(W))) < 1e-11


def test_two_slit_injective_and_avoids_slits():
    xs = np.linspace(-5, 2, 200)
    ys = np.linspace(-1.56, 1.56, 200)
    Z = (xs[:, None] + 1j * ys[None, :]).ravel()
    W = two_slit_map(Z)
    assert len(np.unique(np.round(W, 12))) == len(W)
    assert np.all(np.asarray(contains(D_STAR, W)))


def test_two_slit_derivative():
    z = 0.3 - 0.4j
    h = 1e-6
    fd = (two_slit_map(z + h) - two_slit_map(z - h)) / (2 * h)
    assert two_slit_map_prime(z) == pytest.approx(fd, abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-20, 20), y=st.floats(-3, 3), s=st.floats(0, 30))
def test_starlike_at_infinity(x, y, s):
    z = complex(x, y)
    for dom in (S, D_STAR, widened_strip(0.3), tail(1.0), half_widened_strip(0.2)):
        if contains(dom, z):
            assert contains(dom, z + s)


@settings(max_examples=50, deadline=None)
@given(t1=st.floats(-50, 5), t2=st.floats(-50, 5))
def test_delta_non_decreasing(t1, t2):
    lo, hi = min(t1, t2), max(t1, t2)
    for dom in (tail(2.0), tail(1.0, c=0.5), half_widened_strip(0.3)):
        assert delta(dom, lo) <= delta(dom, hi)


@settings(max_examples=50, deadline=None)
@given(x=st.floats(-20, 20), y=st.floats(-1.5, 2.5))
def test_profile_distance_bounded(x, y):
    P = ProfileDomain(STANDARD_STRIP, BoundaryProfile([Segment(-2.0, PowerTail(1.0, 1.5)),
                                                       Segment(1.0, Const(0.8))]))
    z = complex(x, y)
    if contains(P, z):
        d = dist_to_boundary(P, z)
        assert 0 < d <= math.pi / 2 + 0.8


def test_general_strip_two_slit():
    D = TwoSlit(StripSpec(-2.0, 1.0), 3.0)
    assert contains(D, 3.5 + 1.0j) and not contains(D, 2.0 + 1.0j)
    assert D.maximal_strip() == StripSpec(-2.0, 1.0)
