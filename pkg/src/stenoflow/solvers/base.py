"""The universal subdomain-solver contract.

Every backend maps a :class:`SolverInput` (normalized SDF plus boundary-band
velocities) to a velocity field on the same grid.  Raw backend output is
post-processed in a fixed operator order: multiply by the interior mask,
overwrite the boundary band with the input band, and, for constrained
backends, rescale each column to the prescribed flow rate.  The constraint
comes last; re-overwriting the band afterwards would destroy the exact
flow-rate guarantee.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..errors import InvariantError, ParameterError
from ..fields import BoundaryBand, ScalarField, VelocityField
from ..physics import SDF_MAX, flow_rate_profile, mask_from_sdf

__all__ = [
    "SolverInput",
    "SubdomainSolver",
    "ConstraintResult",
    "postprocess",
    "constraint_layer",
    "FLOW_RATE_GUARD",
]

# Columns whose unconstrained flow rate is below this fraction of q_inlet
# are left unscaled (the scale factor would blow up); they are flagged.
FLOW_RATE_GUARD = 1e-6


@dataclass
class SolverInput:
    """Input tensor bundle for one subdomain solve.

    ``sdf`` is normalized to [0, 1]; ``v_boundary`` holds velocities on the
    boundary band (first and last ``xi`` columns) and is exactly zero
    elsewhere.  ``q_inlet`` is required by constrained backends and may be
    None otherwise.
    """

    sdf: ScalarField
    v_boundary: VelocityField
    xi: int
    q_inlet: float | None = None

    def __post_init__(self) -> None:
        if self.v_boundary.grid.shape != self.sdf.grid.shape:
            raise InvariantError("sdf and v_boundary grids disagree")
        if np.any(self.sdf.values < 0.0) or np.any(self.sdf.values > 1.0):
            raise InvariantError("normalized SDF must lie in [0, 1]")
        self.band = BoundaryBand(self.xi, self.sdf.grid.width)
        interior = ~self.band.column_mask()
        if (np.any(self.v_boundary.vx[:, interior] != 0.0)
                or np.any(self.v_boundary.vy[:, interior] != 0.0)):
            raise InvariantError("v_boundary carries values outside the band")
        self.v_boundary.validate_finite()
        if self.q_inlet is not None and not self.q_inlet > 0.0:
            raise ParameterError(f"q_inlet must be positive, got {self.q_inlet}")

    @classmethod
    def from_raw_sdf(cls, sdf: ScalarField, v_boundary: VelocityField, xi: int,
                     q_inlet: float | None = None) -> "SolverInput":
        """Build an input from an unnormalized SDF (meters)."""
        norm = ScalarField(sdf.grid, sdf.values / SDF_MAX)
        return cls(norm, v_boundary, xi, q_inlet)

    def mask(self) -> ScalarField:
        return mask_from_sdf(self.sdf)


def postprocess(raw: VelocityField, mask: ScalarField,
                v_boundary: VelocityField, xi: int) -> VelocityField:
    """Mask the raw prediction, then overwrite the boundary band.

    Pixels with mask 0 become exactly 0; band columns are copied bit-for-bit
    from ``v_boundary``.  The interior is ``raw * mask`` unchanged.
    """
    m = mask.values
    vx = raw.vx * m
    vy = raw.vy * m
    cols = BoundaryBand(xi, raw.grid.width).columns()
    vx[:, cols] = v_boundary.vx[:, cols]
    vy[:, cols] = v_boundary.vy[:, cols]
    return VelocityField(raw.grid, vx, vy)


@dataclass
class ConstraintResult:
    """Outcome of the flow-rate constraint: the scaled field, per-column
    scale factors, and which columns were skipped by the guard."""

    field: VelocityField
    scales: np.ndarray
    flagged: np.ndarray


def constraint_layer(v: VelocityField, q_inlet: float) -> ConstraintResult:
    """Rescale vx column-wise so every column carries flow rate ``q_inlet``.

    S(i) = q_inlet / q(i); vy is left untouched.  Columns with
    |q(i)| < 1e-6 * q_inlet keep S(i) = 1 and are flagged instead of scaled,
    since their factor would be numerically meaningless.
    """
    if not q_inlet > 0.0:
        raise ParameterError(f"q_inlet must be positive, got {q_inlet}")
    q = flow_rate_profile(v)
    flagged = np.abs(q) < FLOW_RATE_GUARD * q_inlet
    scales = np.where(flagged, 1.0, q_inlet / np.where(flagged, 1.0, q))
    out = VelocityField(v.grid, v.vx * scales[None, :], v.vy.copy())
    return ConstraintResult(out, scales, flagged)


class SubdomainSolver(ABC):
    """Template for all backends: predict raw, then apply the contract.

    ``constrained`` backends additionally pass their masked, band-overwritten
    output through :func:`constraint_layer` (requires ``input.q_inlet``).
    """

    constrained: bool = False

    @abstractmethod
    def _predict(self, inp: SolverInput) -> VelocityField:
        """Backend-specific raw prediction on the input grid."""

    def solve(self, inp: SolverInput) -> VelocityField:
        raw = self._predict(inp)
        out = postprocess(raw, inp.mask(), inp.v_boundary, inp.xi)
        if self.constrained:
            if inp.q_inlet is None:
                raise ParameterError("constrained solve requires q_inlet")
            out = constraint_layer(out, inp.q_inlet).field
        return out
