"""Decomposed Dirichlet benchmark: the sweep must reproduce a direct solve."""

import numpy as np
import pytest

from stenoflow import (
    ParameterError,
    SchwarzConfig,
    Status,
    decompose,
    default_boundary,
    laplace_dirichlet,
    poisson_harness,
    run,
)


def test_default_boundary_is_continuous_around_the_ring():
    # odd width so the sine crest lands on a sample
    bottom, top, left, right = default_boundary(41, 12)
    assert bottom.shape == (41,) and top.shape == (41,)
    assert left.shape == (12,) and right.shape == (12,)
    assert top[0] == pytest.approx(0.0, abs=1e-15)
    assert top[-1] == pytest.approx(0.0, abs=1e-12)
    assert top[20] == 1.0
    assert top.max() == 1.0
    np.testing.assert_array_equal(bottom, 0.0)


def test_harness_requires_full_coverage():
    layout = decompose(120, 4, 8, width=50, cover="max")
    assert layout.covered < 120
    with pytest.raises(ParameterError):
        poisson_harness(layout, 20)


def test_harness_initial_state_carries_the_ring():
    layout = decompose(120, 4, 8, width=50, cover="full")
    state, solver, reference = poisson_harness(layout, 20)
    bottom, top, left, right = default_boundary(120, 20)
    np.testing.assert_array_equal(state.field.vx[-1, :], top)
    np.testing.assert_array_equal(state.field.vx[0, :], bottom)
    # interior outside the side bands starts at zero ...
    assert state.field.vx[1:-1, 4:-4].max() == 0.0
    # ... while the side bands are prescribed from the direct solution
    np.testing.assert_array_equal(state.field.vx[:, :4], reference.vx[:, :4])
    np.testing.assert_array_equal(state.field.vx[:, -4:], reference.vx[:, -4:])
    assert state.field.vx[1:-1, 1:4].max() > 0.0
    assert state.immutable[0].all() and state.immutable[-1].all()
    assert state.immutable[:, :4].all() and state.immutable[:, -4:].all()
    assert not state.immutable[5, 10]
    np.testing.assert_array_equal(reference.vy, 0.0)
    # the reference agrees with the prescribed ring
    np.testing.assert_array_equal(reference.vx[-1, :], top)


def test_decomposed_solve_matches_direct_solve():
    layout = decompose(120, 4, 8, width=50, cover="full")
    assert layout.offsets == (0, 42, 70)
    state, solver, reference = poisson_harness(layout, 20)
    config = SchwarzConfig(epsilon=1e-10, max_iterations=500, init="none")
    result = run(state, solver, config)
    assert result.status is Status.CONVERGED
    err = np.max(np.abs(state.field.vx - reference.vx))
    assert err <= 1e-8
    # contraction: once going, the update norm never grows
    errors = result.trace.abs_errors()
    assert all(b <= a * (1 + 1e-9) for a, b in zip(errors[1:], errors[2:]))


def test_custom_boundary_round_trip():
    rng = np.random.default_rng(8)
    w_global, height = 90, 14
    boundary = (rng.normal(size=w_global), rng.normal(size=w_global),
                rng.normal(size=height), rng.normal(size=height))
    layout = decompose(w_global, 3, 6, width=40, cover="full")
    state, solver, reference = poisson_harness(layout, height, boundary)
    result = run(state, solver,
                 SchwarzConfig(epsilon=1e-11, max_iterations=800, init="none"))
    assert result.status is Status.CONVERGED
    direct = laplace_dirichlet(*boundary)
    np.testing.assert_allclose(state.field.vx, direct, rtol=0, atol=1e-8)
    np.testing.assert_array_equal(reference.vx, direct)
