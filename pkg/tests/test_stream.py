"""Analytic stream-function field: conservation, walls, idempotence.

Oracle for the flow rate on a straight channel: the columnwise midpoint sum
of the parabolic profile has the closed form q * (1 + 1/(2 n^2)) for n rows,
derived independently from sum_j s_j (1 - s_j) = n/6 + 1/(12 n) with
s_j = (j + 0.5)/n.
"""

import numpy as np
import pytest

from stenoflow import (
    ParameterError,
    SamplingWindow,
    SolverInput,
    StreamFunctionSolver,
    VelocityField,
    canonical_window,
    compute_sdf,
    flow_rate_profile,
    mask_from_sdf,
    straight_geometry,
    stream_solution,
    wall_discontinuities,
)

Q = 2.0e-4


def test_straight_channel_flow_rate_closed_form():
    geom = straight_geometry()
    for n in (2, 16, 128):
        window = SamplingWindow(0.004, 8, n, geom.d_artery / n)
        v = stream_solution(geom, window, Q)
        np.testing.assert_allclose(flow_rate_profile(v),
                                   Q * (1.0 + 0.5 / n ** 2), rtol=1e-13)


def test_straight_channel_profile_shape():
    geom = straight_geometry()
    window = SamplingWindow(0.004, 4, 64, geom.d_artery / 64)
    v = stream_solution(geom, window, Q)
    # vy vanishes identically for flat walls
    np.testing.assert_array_equal(v.vy, 0.0)
    # columns are identical and symmetric about the centerline
    assert np.all(v.vx == v.vx[:, :1])
    np.testing.assert_allclose(v.vx[::-1, 0], v.vx[:, 0], rtol=1e-12)
    # peak at the centerline: vx = 1.5 q / d
    assert v.vx[31, 0] == pytest.approx(1.5 * Q / geom.d_artery, rel=1e-3)
    assert np.all(v.vx > 0.0)


def test_stenotic_columns_stay_near_inlet_flow(sample_geometry):
    window = canonical_window(sample_geometry, height=64)
    v = stream_solution(sample_geometry, window, Q)
    q = flow_rate_profile(v)
    np.testing.assert_allclose(q, Q, rtol=0.02)


def test_velocity_zero_on_and_outside_walls(sample_geometry):
    window = canonical_window(sample_geometry, height=64)
    sdf = compute_sdf(sample_geometry, window)
    v = stream_solution(sample_geometry, window, Q)
    outside = sdf.values == 0.0
    assert np.all(v.vx[outside] == 0.0)
    assert np.all(v.vy[outside] == 0.0)
    assert np.all(v.vx[~outside] > 0.0)


def test_discrete_divergence_cancels(sample_geometry):
    window = canonical_window(sample_geometry, height=64)
    sdf = compute_sdf(sample_geometry, window)
    v = stream_solution(sample_geometry, window, Q)
    dy = window.dy
    ddx = (v.vx[1:-1, 2:] - v.vx[1:-1, :-2]) / (2 * dy)
    ddy = (v.vy[2:, 1:-1] - v.vy[:-2, 1:-1]) / (2 * dy)
    inside = sdf.values > 0.0
    core = np.ones_like(inside)
    for sj in (-1, 0, 1):
        for si in (-1, 0, 1):
            core &= np.roll(np.roll(inside, sj, axis=0), si, axis=1)
    # the field jumps across vertical wall facets; keep a stencil away
    xs = window.x_of_columns(np.arange(window.width))
    for xf, _, _ in wall_discontinuities(sample_geometry):
        core[:, np.abs(xs - xf) < 2 * dy] = False
    core = core[1:-1, 1:-1]
    div = np.abs(ddx + ddy)[core]
    scale = np.maximum(np.abs(ddx), np.abs(ddy))[core].max()
    # the analytic field is divergence-free; central differences of the two
    # terms cancel to discretization order
    assert div.max() <= 0.02 * scale


def test_subgrid_evaluation_matches_full_field(sample_geometry):
    window = canonical_window(sample_geometry, height=32)
    full = stream_solution(sample_geometry, window, Q)
    grid = window.grid().subgrid(200, 64)
    part = stream_solution(sample_geometry, window, Q, grid=grid)
    np.testing.assert_array_equal(part.vx, full.vx[:, 200:264])
    np.testing.assert_array_equal(part.vy, full.vy[:, 200:264])


def test_solver_is_idempotent_on_its_own_field(sample_geometry, sample_window,
                                               sample_raster):
    sdf, _ = sample_raster
    truth = stream_solution(sample_geometry, sample_window, Q)
    xi = 10
    vx = np.zeros_like(truth.vx)
    vy = np.zeros_like(truth.vy)
    for sl in (slice(None, xi), slice(-xi, None)):
        vx[:, sl] = truth.vx[:, sl]
        vy[:, sl] = truth.vy[:, sl]
    band = VelocityField(sample_window.grid(), vx, vy)
    inp = SolverInput.from_raw_sdf(sdf, band, xi)
    solver = StreamFunctionSolver(sample_geometry, sample_window, Q)
    out = solver.solve(inp)
    np.testing.assert_array_equal(out.vx, truth.vx)
    np.testing.assert_array_equal(out.vy, truth.vy)


def test_rejects_non_positive_flow(sample_geometry, sample_window):
    with pytest.raises(ParameterError):
        stream_solution(sample_geometry, sample_window, 0.0)


def test_solution_mask_agrees_with_raster(sample_geometry, sample_window,
                                          sample_raster):
    sdf, mask = sample_raster
    v = stream_solution(sample_geometry, sample_window, Q)
    np.testing.assert_array_equal((v.vx > 0).astype(float), mask.values)
    assert mask_from_sdf(sdf).values.sum() == mask.values.sum()
