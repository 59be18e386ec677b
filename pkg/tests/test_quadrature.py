import numpy as np
import pytest

from plapext.quadrature import DivergenceError, integrate, tail_integral


def test_polynomial_exact():
    val = integrate(lambda x: 3.0 * x ** 2, 0.0, 2.0)
    assert val == pytest.approx(8.0, rel=1e-13)


def test_empty_interval():
    assert integrate(np.sin, 1.0, 1.0) == 0.0


def test_endpoint_singularity():
    # integrable algebraic singularity at the left endpoint
    val = integrate(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, singular_left=True)
    assert val == pytest.approx(2.0, rel=1e-10)


def test_breakpoint_kink():
    val = integrate(lambda x: np.abs(x - 0.5), 0.0, 1.0, breakpoints=(0.5,))
    assert val == pytest.approx(0.25, rel=1e-13)


def test_tail_integral_power():
    # int_1^inf r^-2 dr = 1; int_2^inf r^-3 dr = 1/8
    assert tail_integral(lambda r: r ** -2.0, 1.0) == pytest.approx(1.0, rel=1e-11)
    assert tail_integral(lambda r: r ** -3.0, 2.0) == pytest.approx(0.125, rel=1e-11)


def test_tail_integral_exponential():
    val = tail_integral(lambda r: np.exp(-r), 1.0)
    assert val == pytest.approx(np.exp(-1.0), rel=1e-11)


def test_tail_divergence_detected():
    with pytest.raises(DivergenceError):
        tail_integral(lambda r: 1.0 / r, 1.0)
    with pytest.raises(DivergenceError):
        tail_integral(lambda r: np.ones_like(r), 1.0)


def test_tail_divergence_with_underflowing_integrand():
    # 1/(r log^0.9 r) diverges although the integrand underflows far out;
    # the growing-panel test must catch it before settling on zeros
    with pytest.raises(DivergenceError):
        tail_integral(lambda r: 1.0 / (r * np.log(r) ** 0.9), 2.0)
