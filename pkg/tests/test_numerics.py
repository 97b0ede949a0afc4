import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvmem.errors import ConvergenceError
from cvmem.quadrature import composite_rule, integrate, integrate_2d
from cvmem.special import erf_complex, scaled_erf


def _mp_scaled_erf(z, s):
    return complex(mpmath.exp(s) * mpmath.erf(mpmath.mpc(z.real, z.imag)))


@pytest.mark.parametrize("z", [0.1 + 0.2j, 0.4 - 0.3j, 1.5 + 2.0j, -2.0 + 3.0j, 3.0 - 0.5j, 0.0 + 4.0j])
def test_erf_complex_matches_mpmath(z):
    assert abs(erf_complex(z) - _mp_scaled_erf(z, 0.0)) <= 1e-12 * max(1.0, abs(_mp_scaled_erf(z, 0.0)))


@given(
    re=st.floats(-6, 6),
    im=st.floats(0.5, 8),
)
def test_scaled_erf_against_mpmath(re, im):
    # the cat formulas evaluate exp(-2 x0^2) erf(z) with large Im z
    s = -0.5 * im * im
    z = complex(re, im)
    ref = _mp_scaled_erf(z, s)
    got = complex(scaled_erf(z, s))
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))


def test_scaled_erf_no_overflow():
    # erf(10 + 30i) overflows a double, its scaled version must not
    z = 10.0 + 30.0j
    val = scaled_erf(z, -900.0)
    assert np.isfinite(val)
    assert abs(val - _mp_scaled_erf(z, -900.0)) < 1e-10 * max(1, abs(val))


def test_scaled_erf_real_axis():
    x = np.linspace(-5, 5, 21)
    assert np.allclose(np.real(scaled_erf(x + 0j)), [math.erf(v) for v in x], atol=1e-15)


def test_composite_rule_integrates_polynomials():
    x, w = composite_rule(-1.0, 2.0, 3, 8)
    assert abs(np.sum(w * x ** 5) - (2 ** 6 - 1) / 6) < 1e-12


def test_integrate_gaussian():
    val, err = integrate(lambda x: np.exp(-x * x), -10, 10, atol=1e-13)
    assert abs(val - math.sqrt(math.pi)) < 1e-12
    assert err < 1e-12


def test_integrate_2d_gaussian():
    val, _ = integrate_2d(lambda x, p: np.exp(-x * x - 2 * p * p), (-8, 8, -8, 8), atol=1e-12)
    assert abs(val - math.pi / math.sqrt(2)) < 1e-11


def test_integrate_reports_convergence_failure():
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: np.sign(x - 1e-3) * 0 + np.abs(np.sin(1e4 * x)), 0, 1, atol=1e-15, max_panels=4)
    assert np.isfinite(info.value.estimate)
