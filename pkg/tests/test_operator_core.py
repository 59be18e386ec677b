import numpy as np
import pytest

from plapext import (DomainError, make_spec, phi_eval, phi_inverse,
                     phi_inverse_array, phi_inverse_bracket,
                     unit_ball_volume, validate_conditions)
from plapext.operator_core import phi_prime


def test_plap_phi_is_power():
    spec = make_spec(3.0, 2)
    t = np.array([0.0, 0.5, 1.0, 4.0])
    assert np.allclose(phi_eval(spec, t), t ** 2)
    assert phi_eval(spec, 3.0) == pytest.approx(9.0)


def test_constant_coefficient_scales_phi():
    spec = make_spec(2.0, 2, "const:2.5")
    assert phi_eval(spec, 4.0) == pytest.approx(10.0)
    assert spec.delta == spec.L_up == 2.5


def test_alpha_exponent():
    assert make_spec(3.0, 2).alpha == pytest.approx(0.5)
    assert make_spec(4.0, 3).alpha == pytest.approx(1.0 / 3.0)


def test_bracket_contains_inverse():
    spec = make_spec(2.7, 2, "smooth-bump")
    for s in (1e-6, 0.3, 1.0, 7.0, 1e5):
        lo, hi = phi_inverse_bracket(spec, s)
        t = phi_inverse(spec, s)
        assert lo <= t <= hi
        assert phi_eval(spec, t) == pytest.approx(s, rel=1e-10)


def test_inverse_array_matches_scalar():
    spec = make_spec(1.6, 2, "smooth-bump")
    s = np.geomspace(1e-4, 1e4, 25)
    t = phi_inverse_array(spec, s)
    for si, ti in zip(s, t):
        assert ti == pytest.approx(phi_inverse(spec, si), rel=1e-11)


def test_inverse_at_zero():
    spec = make_spec(3.0, 2)
    assert phi_inverse(spec, 0.0) == 0.0


def test_phi_prime_constant_coefficient():
    spec = make_spec(3.0, 2)
    # phi(t) = t^2 so phi'(t) = 2t exactly on the closed-form branch
    assert phi_prime(spec, 1.7) == pytest.approx(3.4)


def test_phi_prime_finite_difference_branch():
    spec = make_spec(3.0, 2, "smooth-bump")
    t = 0.8
    h = 1e-6 * t
    oracle = (phi_eval(spec, t + h) - phi_eval(spec, t - h)) / (2 * h)
    assert phi_prime(spec, t) == pytest.approx(oracle, rel=1e-12)


def test_validate_conditions_plap():
    report = validate_conditions(make_spec(3.0, 2))
    assert report.all_passed


def test_validate_conditions_smooth_bump():
    report = validate_conditions(make_spec(3.0, 2, "smooth-bump"))
    assert report.all_passed


def test_bad_spec_rejected():
    with pytest.raises(DomainError):
        make_spec(1.0, 2)
    with pytest.raises(DomainError):
        make_spec(3.0, 1)
    with pytest.raises(DomainError):
        make_spec(3.0, 2, "const:-1")


def test_unit_ball_volume():
    assert unit_ball_volume(2) == pytest.approx(np.pi)
    assert unit_ball_volume(3) == pytest.approx(4.0 * np.pi / 3.0)


def test_phi_rejects_negative_argument():
    with pytest.raises(DomainError):
        phi_eval(make_spec(3.0, 2), -1.0)
