import numpy as np
import pytest

from plapext import (DomainError, exterior_limit, flux_residual, make_spec,
                     power_decay_source, solve_exterior_radial,
                     solve_radial_bvp, zero_source)


def test_harmonic_annulus_log_profile():
    # p = n = 2, f = 0: u = log(r/1) / log(2/1)
    spec = make_spec(2.0, 2)
    sol = solve_radial_bvp(spec, zero_source(), 1.0, 2.0, 0.0, 1.0)
    for r in (1.0, 1.3, 1.8, 2.0):
        assert sol.value(r) == pytest.approx(np.log(r) / np.log(2.0),
                                             abs=1e-10)


def test_p_harmonic_power_profile():
    # p=3, n=2, f=0: u = c1 + c2 r^alpha with alpha = 1/2
    spec = make_spec(3.0, 2)
    sol = solve_radial_bvp(spec, zero_source(), 1.0, 4.0, 2.0, 5.0)
    c2 = 3.0 / (2.0 - 1.0)          # (u_out - u_in)/(R_out^a - R_in^a)
    for r in (1.0, 2.5, 4.0):
        assert sol.value(r) == pytest.approx(2.0 + c2 * (np.sqrt(r) - 1.0),
                                             abs=1e-9)


def test_boundary_values_matched():
    spec = make_spec(1.5, 3)
    f = power_decay_source(spec, 0.7, 1.0)
    sol = solve_radial_bvp(spec, f, 1.0, 3.0, -1.0, 2.0)
    assert sol.value(1.0) == pytest.approx(-1.0, abs=1e-12)
    assert sol.value(3.0) == pytest.approx(2.0, abs=1e-9)


def test_flux_residual_small():
    spec = make_spec(3.0, 2, "smooth-bump")
    f = power_decay_source(spec, 1.0, 1.0)
    sol = solve_radial_bvp(spec, f, 1.0, 8.0, 0.0, 1.0)
    res = flux_residual(sol, np.geomspace(1.0, 8.0, 17))
    assert res < 1e-8


def test_bad_interval_rejected():
    spec = make_spec(2.0, 2)
    with pytest.raises(DomainError):
        solve_radial_bvp(spec, zero_source(), 2.0, 1.0, 0.0, 1.0)


def test_exterior_zero_source_is_constant():
    spec = make_spec(3.0, 2)
    sol = solve_exterior_radial(spec, zero_source(), u_in=1.5, R_in=1.0)
    assert exterior_limit(sol) == pytest.approx(1.5, abs=1e-12)
    assert sol.value(100.0) == pytest.approx(1.5, abs=1e-12)


def test_exterior_saturating_tail_closed_form():
    # p=3, n=2, f = min(1, r^(-4)): the flux constant is C = 1 (density
    # integrals 1/2 + 1/2), so u'(r)^2 r = r^(-2)/2 for r >= 1, i.e.
    # u' = r^(-3/2)/sqrt(2) and ell - u(R) = sqrt(2) R^(-1/2) exactly
    spec = make_spec(3.0, 2)
    f = power_decay_source(spec, 1.0, 1.0)
    sol = solve_exterior_radial(spec, f, u_in=0.0, R_in=1.0)
    ell = exterior_limit(sol)
    for R in (1.0, 4.0, 64.0, 1024.0):
        gap = np.sqrt(2.0) * R ** -0.5
        assert ell - sol.value(R) == pytest.approx(gap, abs=1e-8)


def test_exterior_limit_scales_with_source():
    spec = make_spec(3.0, 2)
    ells = []
    for c in (0.5, 1.0, 2.0):
        f = power_decay_source(spec, c, 1.0)
        ells.append(exterior_limit(solve_exterior_radial(spec, f, 0.0)))
    assert ells[0] < ells[1] < ells[2]
