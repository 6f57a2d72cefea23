"""Viscosity model, masks, flow rates, and inflow profiles.

Frozen reference values were computed independently with mpmath at 50-digit
precision from the model definitions; they are asserted tightly enough to
catch any change in the formulas.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stenoflow import (
    CARREAU_BLOOD,
    ParameterError,
    PixelGrid,
    ScalarField,
    VelocityField,
    carreau_viscosity,
    flow_rate_profile,
    inlet_flow_rate,
    mask_from_sdf,
    parabolic_profile,
    parabolic_velocity,
)
from stenoflow.physics import boundary_band_pixels

# eta_ref * eta0 and eta_ref * eta_inf: the two asymptotes in Pa s.
ETA_ZERO_SHEAR = 0.2767596
ETA_INF_SHEAR = 0.00404484
# eta at gamma = 1/|lam| = 1/300 s^-1, i.e. (lam*gamma)^2 = 1.
ETA_AT_UNIT_GROUP = 0.22943004016734949


def test_carreau_zero_shear_plateau():
    assert carreau_viscosity(0.0) == pytest.approx(ETA_ZERO_SHEAR, rel=1e-12)


def test_carreau_infinite_shear_plateau():
    assert carreau_viscosity(1e12) == pytest.approx(ETA_INF_SHEAR, rel=1e-6)


def test_carreau_at_unit_shear_group():
    gamma = 1.0 / abs(CARREAU_BLOOD.lam)
    assert carreau_viscosity(gamma) == pytest.approx(ETA_AT_UNIT_GROUP,
                                                     rel=1e-14)


def test_carreau_rejects_negative_shear():
    with pytest.raises(ParameterError):
        carreau_viscosity(-1.0)
    with pytest.raises(ParameterError):
        carreau_viscosity(np.array([0.0, -1e-9]))


def test_carreau_array_shape_preserved():
    gamma = np.logspace(-3, 6, 25).reshape(5, 5)
    eta = carreau_viscosity(gamma)
    assert eta.shape == gamma.shape


@given(st.floats(min_value=0.0, max_value=1e9))
def test_carreau_bounded_by_plateaus(gamma):
    eta = carreau_viscosity(gamma)
    assert ETA_INF_SHEAR * (1 - 1e-12) <= eta <= ETA_ZERO_SHEAR * (1 + 1e-12)


def test_carreau_is_shear_thinning():
    gamma = np.logspace(-4, 8, 200)
    eta = carreau_viscosity(gamma)
    assert np.all(np.diff(eta) < 0.0)


def test_mask_from_sdf():
    grid = PixelGrid(4, 2, 1.0)
    sdf = ScalarField(grid, np.array([[0.0, 1e-9, 0.5, 0.0],
                                      [2.0, 0.0, 0.0, 3.0]]))
    mask = mask_from_sdf(sdf)
    np.testing.assert_array_equal(mask.values, [[0, 1, 1, 0], [1, 0, 0, 1]])
    with pytest.raises(ParameterError):
        mask_from_sdf(ScalarField(grid, np.full(grid.shape, -1e-12)))


def test_flow_rate_profile_hand_example():
    grid = PixelGrid(3, 2, dy=0.5)
    vx = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    expected = [2.5, 3.5, 4.5]
    np.testing.assert_allclose(
        flow_rate_profile(ScalarField(grid, vx)), expected)
    np.testing.assert_allclose(
        flow_rate_profile(VelocityField(grid, vx, np.zeros_like(vx))),
        expected)


def test_parabolic_velocity_frozen_point():
    # 4 * 0.03 * (d/4) * (3d/4) / d^2 = 0.03 * 3/4 = 0.0225 m/s.
    assert parabolic_velocity(0.25e-3, v_max=0.03, d=1e-3) == \
        pytest.approx(0.0225, rel=1e-15)
    assert parabolic_velocity(0.5e-3, 0.03, 1e-3) == pytest.approx(0.03)
    assert parabolic_velocity(-1e-6, 0.03, 1e-3) == 0.0
    assert parabolic_velocity(1.1e-3, 0.03, 1e-3) == 0.0


def test_parabolic_profile_columns_and_midpoint_sum():
    d, v_max, n = 1e-3, 0.3, 128
    grid = PixelGrid(4, n, d / n)
    profile = parabolic_profile(v_max, d, grid)
    # every column identical
    assert np.ptp(profile.values, axis=1).max() == 0.0
    # midpoint sums of a quadratic overshoot the integral by exactly
    # q * (1 / (2 n^2)); see the closed form sum s(1-s) = n/6 + 1/(12n).
    q = inlet_flow_rate(v_max, d)
    expected = q * (1.0 + 0.5 / n ** 2)
    np.testing.assert_allclose(flow_rate_profile(profile),
                               np.full(4, expected), rtol=1e-13)


def test_parabolic_profile_warns_outside_usual_range():
    grid = PixelGrid(2, 8, 1e-4)
    with pytest.warns(UserWarning):
        parabolic_profile(5.0, 1e-3, grid)


def test_inlet_flow_rate_exact():
    assert inlet_flow_rate(0.3, 1e-3) == pytest.approx(2.0e-4, rel=1e-15)
    with pytest.raises(ParameterError):
        inlet_flow_rate(0.3, 0.0)


def test_boundary_band_pixel_set():
    pixels = boundary_band_pixels(xi=2, width=10, height=3)
    assert len(pixels) == 2 * 2 * 3
    assert (0, 0) in pixels and (9, 2) in pixels and (5, 1) not in pixels
