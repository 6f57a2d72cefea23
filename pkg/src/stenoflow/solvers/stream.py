"""Analytic stream-function flow oracle.

Maps the developed inflow profile through the channel with a cubic stream
function of the normalized channel coordinate s = (y - y_lower) / (y_upper -
y_lower):

    psi(s) = q_inlet * (3 s^2 - 2 s^3)
    vx =  d(psi)/dy = 6 q s (1 - s) / h
    vy = -d(psi)/dx = 6 q s (1 - s) (y_lower' + s h') / h

with h = y_upper - y_lower.  The field is divergence-free by construction
and every column carries exactly the inlet flow rate, so it doubles as the
ground-truth generator for synthetic training data.  It ignores boundary
inputs entirely, which makes it idempotent under the subdomain contract.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..fields import PixelGrid, VelocityField
from ..geometry import ChannelGeometry, SamplingWindow, wall_derivatives, wall_functions
from .base import SolverInput, SubdomainSolver

__all__ = ["stream_solution", "StreamFunctionSolver"]


def stream_solution(geom: ChannelGeometry, window: SamplingWindow,
                    q_inlet: float, grid: PixelGrid | None = None
                    ) -> VelocityField:
    """Evaluate the stream-function field on ``grid`` (default: the window).

    ``grid`` may be any subgrid of the window (its ``origin_x`` selects the
    columns); pixels on or outside the walls get zero velocity.
    """
    if not q_inlet > 0.0:
        raise ParameterError(f"q_inlet must be positive, got {q_inlet}")
    if grid is None:
        grid = window.grid()
    cols = grid.origin_x + np.arange(grid.width)
    x = window.x_of_columns(cols)
    y = grid.row_centers()

    yl, yu = wall_functions(geom, x)
    dl, du = wall_derivatives(geom, x)
    h = yu - yl
    dh = du - dl
    s = (y[:, None] - yl[None, :]) / h[None, :]
    inside = (s > 0.0) & (s < 1.0)
    shape = 6.0 * q_inlet * s * (1.0 - s)
    vx = np.where(inside, shape / h[None, :], 0.0)
    vy = np.where(inside, shape * (dl[None, :] + s * dh[None, :]) / h[None, :], 0.0)
    return VelocityField(grid, vx, vy)


class StreamFunctionSolver(SubdomainSolver):
    """Subdomain backend that reproduces the analytic stream-function field.

    Positioning comes from the input grid's ``origin_x``, so the same solver
    instance serves every subdomain of a decomposition.
    """

    def __init__(self, geom: ChannelGeometry, window: SamplingWindow,
                 q_inlet: float):
        self.geom = geom
        self.window = window
        self.q_inlet = q_inlet

    def _predict(self, inp: SolverInput) -> VelocityField:
        return stream_solution(self.geom, self.window, self.q_inlet,
                               grid=inp.sdf.grid)
