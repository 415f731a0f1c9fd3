import math

import numpy as np
import pytest

from petal_lab import parabolic as pb
from petal_lab.domains import HalfPlane, Strip, TwoSlit
from petal_lab.errors import UnsupportedExactError, WrongTypeError
from petal_lab.hypgeo import HALF_PI, STANDARD_STRIP

KOEBE, H2, HP = pb.koebe_model(), pb.h2_model(), pb.half_plane_model()


def test_step_classes():
    assert pb.hyperbolic_step_class(HalfPlane()) == "positive"
    assert pb.hyperbolic_step_class(KOEBE.domain) == "zero"
    assert pb.hyperbolic_step_class(H2.domain) == "zero"
    with pytest.raises(WrongTypeError):
        pb.hyperbolic_step_class(Strip(-HALF_PI, HALF_PI))
    with pytest.raises(WrongTypeError):
        pb.hyperbolic_step_class(TwoSlit(STANDARD_STRIP, 0.0))


def test_L_limits():
    assert pb.L_limit(KOEBE.h).classification == "infinite"
    L2 = pb.L_limit(H2.h)
    assert L2.finite and abs(L2.value + 2j) < 1e-2
    Lh = pb.L_limit(HP.h)
    assert Lh.finite and abs(Lh.value + 2j) < 1e-6


def test_L_limit_oscillating_is_inconclusive():
    # (z - 1) h(z) = sin(log(1 - z)) never settles
    h = lambda z: np.sin(np.log(1 - z)) / (z - 1)
    assert pb.L_limit(h).classification == "inconclusive"


def test_reports():
    k = pb.classify_parabolic_petal(KOEBE)
    assert k.step_class == "zero" and k.conformal is False and k.to_dict()["L"] == "inf"
    h = pb.classify_parabolic_petal(H2)
    assert h.conformal is True and h.consistency < 1e-2
    p = pb.classify_parabolic_petal(HP)
    assert p.step_class == "positive" and p.conformal is True and p.L_classification == "finite"


def test_koenigs_maps_valid():
    assert pb.generator_positivity(KOEBE) > 0
    assert pb.generator_positivity(H2) > 0


def test_maps_round_trip_and_membership():
    rng = np.random.default_rng(0)
    z = np.sqrt(rng.uniform(0, 0.98, 500)) * np.exp(2j * np.pi * rng.uniform(0, 1, 500))
    for m in (KOEBE, H2, HP):
        w = m.h(z)
        assert np.all(m.domain.contains(w))
        assert np.max(np.abs(m.h_inverse(w) - z)) < 1e-9


def test_h2_branch_first_quadrant():
    z = np.array([0.2 + 0.3j, -0.6j, 0.9])
    w = 1j * (1 + z) / (1 - z)
    s = np.sqrt(w)
    assert np.all((s.real > 0) & (s.imag > 0))


def test_abel_equation_koebe():
    z = 0.3 - 0.2j
    t = 0.7
    phi = KOEBE.h_inverse(KOEBE.h(z) + t)
    assert abs(KOEBE.h(phi) - KOEBE.h(z) - t) < 1e-12 and abs(phi) < 1


def test_model_for_domain():
    m = pb.model_for_domain(HalfPlane(2.0))
    assert m.h(0.0) == pytest.approx(3j)
    with pytest.raises(UnsupportedExactError):
        pb.model_for_domain(Strip(-1.0, 1.0))
