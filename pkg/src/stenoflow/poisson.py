"""Dirichlet benchmark problem for exercising the coupling layer.

The alternating sweep is solver-agnostic: anything that maps boundary bands
to an interior field can sit inside it.  The sharpest way to validate the
coupling itself is a problem with a computable global answer, so this module
wires the additive-free Laplace solver into a rectangular Dirichlet problem
whose reference solution comes from one direct solve on the full domain.

Geometry plays no role here: the "mask" is fully open and the field has no
physical units.  Only the decomposition bookkeeping (bands, overlap, write
ownership) is under test.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .fields import PixelGrid, ScalarField, VelocityField
from .physics import SDF_MAX
from .schwarz import SchwarzState, SubdomainLayout
from .solvers.laplace import LaplaceSolver, laplace_dirichlet

__all__ = ["default_boundary", "poisson_harness"]


def default_boundary(w_global: int, height: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Continuous, non-trivial Dirichlet data on the rectangle boundary.

    Returns ``(bottom, top, left, right)``: a half sine on the top edge,
    zero elsewhere.  The corners agree (sin vanishes at both ends), so the
    data is continuous around the ring.
    """
    i = np.arange(w_global, dtype=np.float64)
    top = np.sin(np.pi * i / (w_global - 1))
    bottom = np.zeros(w_global)
    left = np.zeros(height)
    right = np.zeros(height)
    return bottom, top, left, right


def poisson_harness(
    layout: SubdomainLayout,
    height: int,
    boundary: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> tuple[SchwarzState, LaplaceSolver, VelocityField]:
    """Build (state, solver, reference) for a decomposed Dirichlet solve.

    The layout must cover the domain exactly (``cover="full"``); a harness
    with unreached columns would compare against the wrong reference.  The
    returned state carries the ring values in ``vx`` and marks the outer
    bands immutable; the reference holds the direct solution of the same
    problem on the undecomposed rectangle (``vy`` identically zero).

    The immutable side bands are ``xi`` columns wide, but the ring data only
    constrains their outermost column, so the remaining band columns are
    prescribed from the direct solution.  They play the same role as the
    developed inlet/outlet profiles of the flow problem: boundary data the
    iteration must hold fixed, and the only self-consistent choice on this
    benchmark is the solution itself.
    """
    w_global = layout.w_global
    if layout.covered != w_global:
        raise ParameterError(
            f"harness layout leaves columns [{layout.covered}, {w_global}) uncovered; "
            "decompose with cover='full'"
        )
    if boundary is None:
        boundary = default_boundary(w_global, height)
    bottom, top, left, right = boundary

    exact = laplace_dirichlet(bottom=bottom, top=top, left=left, right=right)

    grid = PixelGrid(width=w_global, height=height, dy=1.0)
    vx = np.zeros((height, w_global))
    vx[0, :] = bottom
    vx[-1, :] = top
    vx[:, : layout.xi] = exact[:, : layout.xi]
    vx[:, w_global - layout.xi :] = exact[:, w_global - layout.xi :]
    field = VelocityField(grid, vx, np.zeros_like(vx))

    immutable = np.zeros((height, w_global), dtype=bool)
    immutable[0, :] = True
    immutable[-1, :] = True
    immutable[:, : layout.xi] = True
    immutable[:, w_global - layout.xi :] = True

    mask = ScalarField(grid, np.ones((height, w_global)))
    open_sdf = np.ones((height, w_global))
    sub_sdf = [
        ScalarField(grid.subgrid(off, layout.width), open_sdf[:, off : off + layout.width].copy())
        for off in layout.offsets
    ]

    state = SchwarzState(
        layout=layout,
        field=field,
        immutable=immutable,
        mask=mask,
        sub_sdf=sub_sdf,
        q_inlet=None,
    )
    solver = LaplaceSolver(bottom=bottom, top=top)

    reference = VelocityField(grid, exact, np.zeros_like(exact))
    return state, solver, reference
