"""Five-point finite-difference Laplace solver.

This backend exists to validate the alternating Schwarz orchestrator against
a classical exact subdomain solve: with Dirichlet data on all four edges of
each subdomain the iteration must reproduce the global direct solution.  It
is used as a scalar harness (the solution rides in vx, vy stays zero).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import NumericError, ParameterError
from ..fields import VelocityField
from .base import SolverInput, SubdomainSolver

__all__ = ["laplace_dirichlet", "LaplaceSolver"]

RESIDUAL_LIMIT = 1e-12


def _interior_operator(height: int, width: int) -> sp.csc_matrix:
    """Standard 5-point Laplacian on the (height-2) x (width-2) interior."""
    m, n = height - 2, width - 2
    ty = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(m, m))
    tx = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n))
    return (sp.kron(sp.eye(m), tx) + sp.kron(ty, sp.eye(n))).tocsc()


def laplace_dirichlet(bottom: np.ndarray, top: np.ndarray, left: np.ndarray,
                      right: np.ndarray, lu=None) -> np.ndarray:
    """Solve the Laplace equation with the given Dirichlet edge data.

    ``bottom``/``top`` have length ``width`` and own the four corners;
    ``left``/``right`` have length ``height`` (their first and last entries
    are ignored in favor of the rows).  Returns the full ``(height, width)``
    solution including the boundary ring.  A prefactorized operator ``lu``
    (from :func:`scipy.sparse.linalg.splu` of the interior operator) may be
    supplied to amortize repeated solves on equal-shaped subdomains.

    The residual of the interior system is checked against 1e-12 relative to
    the boundary data scale; failure raises :class:`NumericError`.
    """
    bottom = np.asarray(bottom, dtype=np.float64)
    top = np.asarray(top, dtype=np.float64)
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    width = bottom.size
    height = left.size
    if top.size != width or right.size != height:
        raise ParameterError("boundary arrays disagree on the grid shape")
    if width < 3 or height < 3:
        raise ParameterError("grid must be at least 3x3 for an interior")

    m, n = height - 2, width - 2
    b = np.zeros((m, n))
    b[0, :] += bottom[1:-1]
    b[-1, :] += top[1:-1]
    b[:, 0] += left[1:-1]
    b[:, -1] += right[1:-1]
    rhs = b.ravel()

    a = _interior_operator(height, width)
    if lu is None:
        lu = spla.splu(a)
    u = lu.solve(rhs)

    scale = max(1.0, float(np.max(np.abs(rhs))) if rhs.size else 1.0)
    residual = float(np.max(np.abs(a @ u - rhs)))
    if residual > RESIDUAL_LIMIT * scale:
        raise NumericError(
            f"Laplace solve residual {residual:.3e} exceeds {RESIDUAL_LIMIT:.0e}")

    out = np.empty((height, width))
    out[0, :] = bottom
    out[-1, :] = top
    out[1:-1, 0] = left[1:-1]
    out[1:-1, -1] = right[1:-1]
    out[1:-1, 1:-1] = u.reshape(m, n)
    return out


class LaplaceSolver(SubdomainSolver):
    """Exact Dirichlet-ring subdomain backend for the Schwarz harness.

    The global problem's top and bottom row data are fixed at construction
    (full global width); the left and right edge columns of each subdomain
    are read from the input's boundary band.  The interior operator is
    factorized once per subdomain shape.
    """

    def __init__(self, bottom: np.ndarray, top: np.ndarray):
        self.bottom = np.asarray(bottom, dtype=np.float64)
        self.top = np.asarray(top, dtype=np.float64)
        if self.bottom.shape != self.top.shape:
            raise ParameterError("top/bottom rows disagree on global width")
        self._lu_cache: dict = {}

    def _predict(self, inp: SolverInput) -> VelocityField:
        grid = inp.sdf.grid
        lo = grid.origin_x
        hi = lo + grid.width
        if lo < 0 or hi > self.bottom.size:
            raise ParameterError("subdomain exceeds the harness row data")
        key = grid.shape
        lu = self._lu_cache.get(key)
        if lu is None:
            lu = spla.splu(_interior_operator(*key))
            self._lu_cache[key] = lu
        vx = laplace_dirichlet(self.bottom[lo:hi], self.top[lo:hi],
                               inp.v_boundary.vx[:, 0],
                               inp.v_boundary.vx[:, -1], lu=lu)
        return VelocityField(grid, vx, np.zeros(grid.shape))
