"""Recursion table, determinants and polynomial evaluation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lppdet.errors import ValidationError
from lppdet.exact_dist import square_opuc
from lppdet.opuc import (
    dpii_residual,
    eval_pi,
    eval_pi_dense,
    levinson,
    recurrence_checks,
    square_opuc_highprec,
    toeplitz_log_det,
    toeplitz_log_det_dense,
    y_corner,
)
from lppdet.symbols import SymbolSpec, fourier_coeffs


def test_reflection_starts_from_bessel_ratio():
    """b(1) = I_1(2t)/I_0(2t) at t = 1, straight from the moment ratio."""
    from scipy.special import iv

    data = square_opuc(1.0)
    assert float(data.reflection[1]) == pytest.approx(
        float(iv(1, 2.0) / iv(0, 2.0)), abs=1e-13
    )
    assert float(data.log_norms[0]) == pytest.approx(
        math.log(float(iv(0, 2.0))), abs=1e-13
    )


def test_reflection_frozen_values():
    data = square_opuc(1.0)
    assert float(data.reflection[1]) == pytest.approx(0.697774657964008, abs=1e-11)
    assert float(data.reflection[2]) == pytest.approx(-0.35989152755700093, abs=1e-11)
    assert float(data.reflection[3]) == pytest.approx(0.12910779285455318, abs=1e-11)


def test_signs_alternate_for_exponential_symbol():
    data = square_opuc(2.0)
    b = np.asarray(data.reflection, dtype=float)
    for k in range(1, 12):
        assert b[k] * (-1.0) ** (k + 1) > 0.0


@settings(deadline=None, max_examples=20)
@given(t=st.floats(0.1, 2.5), order=st.integers(1, 8))
def test_log_det_matches_dense_lu(t, order):
    """Recursion route vs scipy's LU on the raw moment matrix."""
    data = square_opuc(t, ell=order)
    coeffs = fourier_coeffs(SymbolSpec(exp_plus_t=t, exp_minus_t=t), data.cutoff + 1)
    lhs = toeplitz_log_det(data, order)
    rhs = toeplitz_log_det_dense(coeffs, order)
    assert lhs == pytest.approx(rhs, abs=5e-12 * max(1.0, abs(rhs)))


def test_log_det_order_zero_is_zero():
    data = square_opuc(1.0)
    assert toeplitz_log_det(data, 0) == 0.0


@settings(deadline=None, max_examples=20)
@given(
    t=st.floats(0.2, 2.0),
    k=st.integers(1, 6),
    x=st.floats(-0.9, 0.9),
)
def test_eval_pi_matches_dense_solve(t, k, x):
    data = square_opuc(t, ell=k + 2)
    coeffs = fourier_coeffs(SymbolSpec(exp_plus_t=t, exp_minus_t=t), data.cutoff + 1)
    pair = eval_pi(data, k, x)
    scale = math.exp(pair.log_scale)
    dense_pi, dense_star = eval_pi_dense(coeffs, k, x)
    assert float(pair.pi_mantissa) * scale == pytest.approx(
        complex(dense_pi).real, abs=1e-10
    )
    assert float(pair.pi_star_mantissa) * scale == pytest.approx(
        complex(dense_star).real, abs=1e-10
    )


def test_eval_pi_frozen_point():
    data = square_opuc(1.0, ell=8)
    pair = eval_pi(data, 2, -0.3)
    assert pair.log_scale == 0.0
    assert float(pair.pi_mantissa) == pytest.approx(0.7345608812097725, abs=1e-11)
    assert float(pair.pi_star_mantissa) == pytest.approx(1.3170595911329015, abs=1e-11)


def test_eval_pi_star_reverses_pi_at_plus_one():
    # at z = 1 the reversed polynomial takes the same value
    data = square_opuc(0.8, ell=6)
    for k in (1, 3, 5):
        pair = eval_pi(data, k, 1.0)
        assert float(pair.pi_mantissa) == pytest.approx(
            float(pair.pi_star_mantissa), rel=1e-12
        )


def test_discrete_painleve_residuals_small():
    for t in (0.5, 1.0, 3.0):
        data = square_opuc(t)
        worst = max(dpii_residual(data, t, k) for k in range(2, 15))
        assert worst < 1e-10


def test_dpii_residual_validates_range():
    data = square_opuc(1.0)
    with pytest.raises(ValidationError):
        dpii_residual(data, 1.0, 1)
    with pytest.raises(ValidationError):
        dpii_residual(data, 1.0, data.cutoff)


def test_recurrence_report_consistency():
    report = recurrence_checks(square_opuc(2.0))
    assert report.max_dev_a < 1e-12
    assert report.max_dev_d < 1e-12


def test_corner_unimodular_relation():
    data = square_opuc(1.5)
    for k in range(1, data.cutoff):
        corner = y_corner(data, k)
        assert corner.a * corner.d + corner.b**2 == pytest.approx(1.0, abs=1e-12)


def test_highprec_agrees_with_float64():
    hp = square_opuc_highprec(1.0, 12)
    fp = square_opuc(1.0)
    for k in range(1, 13):
        assert float(hp.reflection[k]) == pytest.approx(
            float(fp.reflection[k]), abs=1e-12
        )


def test_highprec_survives_large_t():
    """float64 moments overflow near t = 15; the mpmath path keeps the
    reflection sequence finite and inside the unit interval in product."""
    data = square_opuc_highprec(15.0, 30)
    b = [float(v) for v in data.reflection[1:31]]
    assert all(abs(v) < 1.0 for v in b)
    assert all(math.isfinite(v) for v in b)


def test_levinson_requires_enough_coefficients():
    coeffs = fourier_coeffs(SymbolSpec(exp_plus_t=1.0, exp_minus_t=1.0), 4)
    with pytest.raises(ValidationError):
        levinson(coeffs, 10)
