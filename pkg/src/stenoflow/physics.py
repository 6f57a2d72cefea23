"""Pointwise physics on pixel grids: SDF masks, flow rates, inflow profiles,
and the Carreau viscosity model.

Flow rates are per unit depth (2-D), so q has units m^2/s.  The signed
distance normalizer ``SDF_MAX`` is a fixed constant for millimeter-scale
channels, not a per-grid maximum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fields import PixelGrid, ScalarField, VelocityField

__all__ = [
    "SDF_MAX",
    "V_MAX_RANGE",
    "CarreauParams",
    "CARREAU_BLOOD",
    "carreau_viscosity",
    "mask_from_sdf",
    "flow_rate_profile",
    "parabolic_velocity",
    "parabolic_profile",
    "inlet_flow_rate",
    "boundary_band_pixels",
]

# Normalizer for SDF inputs handed to subdomain solvers, in meters.
SDF_MAX = 5.0e-4

# Inflow peak velocities outside this range are allowed but unusual enough
# to warn about; the training corpus never leaves it.
V_MAX_RANGE = (0.02, 0.6)


@dataclass(frozen=True)
class CarreauParams:
    """Carreau model constants.

    ``eta_inf`` and ``eta0`` are relative to the reference viscosity
    ``eta_ref`` (Pa s); ``lam`` is the relaxation time in seconds and enters
    the model only through its square.
    """

    rho: float
    eta_inf: float
    eta0: float
    eta_ref: float
    n: float
    lam: float


# Parameter set for human blood.
CARREAU_BLOOD = CarreauParams(rho=1000.0, eta_inf=3.3707, eta0=230.6330,
                              eta_ref=0.0012, n=0.45, lam=-300.0)


def carreau_viscosity(shear_rate, params: CarreauParams = CARREAU_BLOOD):
    """Dynamic viscosity eta(gamma_dot) of a Carreau fluid, in Pa s.

    eta = eta_ref * (eta_inf + (eta0 - eta_inf) * (1 + (lam*gamma)^2)^((n-1)/2))

    Accepts scalars or arrays; the shear rate must be non-negative.
    """
    gamma = np.asarray(shear_rate, dtype=np.float64)
    if np.any(gamma < 0.0):
        raise ParameterError("shear rate must be non-negative")
    p = params
    factor = (1.0 + (p.lam * gamma) ** 2) ** ((p.n - 1.0) / 2.0)
    eta = p.eta_ref * (p.eta_inf + (p.eta0 - p.eta_inf) * factor)
    return eta if eta.ndim else float(eta)


def mask_from_sdf(sdf: ScalarField) -> ScalarField:
    """Binary interior mask: 1 where SDF > 0, else 0.

    SDF fields are non-negative by construction; a negative value indicates
    a corrupted input and is rejected.
    """
    if np.any(sdf.values < 0.0):
        raise ParameterError("SDF contains negative values")
    return ScalarField(sdf.grid, (sdf.values > 0.0).astype(np.float64))


def flow_rate_profile(v) -> np.ndarray:
    """Per-column flow rate q(i) = sum_j vx(i, j) * dy.

    ``v`` may be a :class:`VelocityField` (its vx is used) or a
    :class:`ScalarField` holding vx directly.  Returns a vector of length
    ``width``.
    """
    if isinstance(v, VelocityField):
        values, dy = v.vx, v.grid.dy
    else:
        values, dy = v.values, v.grid.dy
    return values.sum(axis=0) * dy


def parabolic_velocity(y, v_max: float, d: float):
    """Developed-profile velocity vx(y) = 4 v_max y (d - y) / d^2.

    Zero outside [0, d]; ``y`` may be a scalar or array.
    """
    if not d > 0.0:
        raise ParameterError(f"channel height must be positive, got {d}")
    y = np.asarray(y, dtype=np.float64)
    v = 4.0 * v_max * y * (d - y) / d ** 2
    v = np.where((y >= 0.0) & (y <= d), v, 0.0)
    return v if v.ndim else float(v)


def parabolic_profile(v_max: float, d: float, grid: PixelGrid) -> ScalarField:
    """Developed parabolic vx on every column of ``grid``.

    The profile peaks at ``v_max`` on the channel centerline y = d/2 and is
    sampled at pixel-row centers; the matching vy is identically zero.
    """
    lo, hi = V_MAX_RANGE
    if not lo <= v_max <= hi:
        warnings.warn(f"v_max={v_max:g} outside the usual range [{lo}, {hi}]",
                      stacklevel=2)
    column = parabolic_velocity(grid.row_centers(), v_max, d)
    return ScalarField(grid, np.repeat(column[:, None], grid.width, axis=1))


def inlet_flow_rate(v_max: float, d: float) -> float:
    """Exact flow rate of the developed parabola: q = (2/3) v_max d."""
    if not d > 0.0:
        raise ParameterError(f"channel height must be positive, got {d}")
    return 2.0 / 3.0 * v_max * d


def boundary_band_pixels(xi: int, width: int, height: int) -> frozenset:
    """Index set {(i, j)} of the boundary band of a width x height subdomain.

    The band reduces to the leftmost and rightmost ``xi`` pixel columns;
    its size is therefore ``2 * xi * height``.
    """
    from .fields import BoundaryBand

    cols = BoundaryBand(xi, width).columns()
    return frozenset((int(i), int(j)) for i in cols for j in range(height))
