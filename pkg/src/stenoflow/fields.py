"""Pixel grids, scalar and velocity fields, and their delimited file format.

All fields live on uniform grids with square pixels.  Values are sampled at
pixel centers and stored row-major as ``values[j, i]`` where ``j`` indexes
rows (row 0 is the lower wall side) and ``i`` indexes columns (flow
direction).  Field files are plain CSV, one row per grid row, accompanied by
a small sidecar metadata file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError, ParameterError

__all__ = [
    "PixelGrid",
    "ScalarField",
    "VelocityField",
    "BoundaryBand",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class PixelGrid:
    """Uniform pixel grid with square pixels.

    Parameters
    ----------
    width, height : int
        Number of pixel columns and rows.
    dy : float
        Pixel spacing in meters; identical in both directions.
    origin_x : int
        Global column index of this grid's column 0.  Subdomain grids carry
        their offset into the parent grid here; stand-alone grids use 0.
    """

    width: int
    height: int
    dy: float
    origin_x: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ParameterError("grid dimensions must be positive, got "
                                 f"{self.width}x{self.height}")
        if not self.dy > 0.0:
            raise ParameterError(f"pixel spacing must be positive, got {self.dy}")

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(height, width)`` of fields on this grid."""
        return (self.height, self.width)

    def row_centers(self) -> np.ndarray:
        """Physical y of every pixel row center, measured from the lower wall."""
        return (np.arange(self.height) + 0.5) * self.dy

    def subgrid(self, offset: int, width: int) -> "PixelGrid":
        """Grid of ``width`` columns starting at local column ``offset``."""
        if offset < 0 or offset + width > self.width:
            raise ParameterError(
                f"subgrid [{offset}, {offset + width}) exceeds width {self.width}")
        return PixelGrid(width, self.height, self.dy, self.origin_x + offset)


def _check_values(grid: PixelGrid, values: np.ndarray, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != grid.shape:
        raise InvariantError(
            f"{name} shape {values.shape} does not match grid {grid.shape}")
    return values


@dataclass
class ScalarField:
    """A single scalar quantity sampled on a :class:`PixelGrid`."""

    grid: PixelGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = _check_values(self.grid, self.values, "field")

    @classmethod
    def zeros(cls, grid: PixelGrid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def full(cls, grid: PixelGrid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def crop(self, offset: int, width: int) -> "ScalarField":
        """Columns ``[offset, offset + width)`` as a new field."""
        sub = self.grid.subgrid(offset, width)
        return ScalarField(sub, self.values[:, offset:offset + width].copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


@dataclass
class VelocityField:
    """Velocity components vx (flow direction) and vy on a shared grid."""

    grid: PixelGrid
    vx: np.ndarray
    vy: np.ndarray

    def __post_init__(self) -> None:
        self.vx = _check_values(self.grid, self.vx, "vx")
        self.vy = _check_values(self.grid, self.vy, "vy")

    @classmethod
    def zeros(cls, grid: PixelGrid) -> "VelocityField":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    def copy(self) -> "VelocityField":
        return VelocityField(self.grid, self.vx.copy(), self.vy.copy())

    def crop(self, offset: int, width: int) -> "VelocityField":
        sub = self.grid.subgrid(offset, width)
        return VelocityField(sub,
                             self.vx[:, offset:offset + width].copy(),
                             self.vy[:, offset:offset + width].copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.vx).all() and np.isfinite(self.vy).all())

    def validate_finite(self) -> "VelocityField":
        """Raise :class:`InvariantError` if any component is NaN or infinite."""
        if not self.is_finite():
            raise InvariantError("velocity field contains non-finite values")
        return self


@dataclass(frozen=True)
class BoundaryBand:
    """The first and last ``xi`` pixel columns of a width-``width`` subdomain.

    The band is where a subdomain solver reads its velocity boundary data.
    ``xi`` must satisfy ``1 <= xi < width / 3`` so the two bands and the
    interior remain disjoint and non-empty.
    """

    xi: int
    width: int

    def __post_init__(self) -> None:
        if self.xi < 1:
            raise ParameterError(f"xi must be >= 1, got {self.xi}")
        if not self.xi < self.width / 3:
            raise ParameterError(
                f"xi must be < width/3 = {self.width / 3:g}, got {self.xi}")

    def columns(self) -> np.ndarray:
        """Band column indices, ascending."""
        return np.concatenate([np.arange(self.xi),
                               np.arange(self.width - self.xi, self.width)])

    def column_mask(self) -> np.ndarray:
        """Boolean vector of length ``width``, True on band columns."""
        m = np.zeros(self.width, dtype=bool)
        m[:self.xi] = True
        m[self.width - self.xi:] = True
        return m

    def pixel_count(self, height: int) -> int:
        return 2 * self.xi * height


# ---------------------------------------------------------------------------
# Delimited field I/O
# ---------------------------------------------------------------------------

def _meta_path(path: str) -> str:
    base, _ = os.path.splitext(path)
    return base + ".meta"


def save_field(path: str, fld: ScalarField, units: str = "m/s") -> None:
    """Write one scalar field as CSV plus a sidecar ``.meta`` file.

    The CSV holds ``height`` rows of ``width`` comma-separated decimals with
    no header; the first row is the lower wall side.  Floats are written with
    17 significant digits so a load/save cycle is bit-exact.
    """
    np.savetxt(path, fld.values, fmt="%.17g", delimiter=",")
    g = fld.grid
    with open(_meta_path(path), "w", encoding="ascii") as fh:
        fh.write("[field]\n")
        fh.write(f"width = {g.width}\n")
        fh.write(f"height = {g.height}\n")
        fh.write(f"dy = {g.dy!r}\n")
        fh.write(f"origin_x = {g.origin_x}\n")
        fh.write(f"units = {units}\n")


def load_field(path: str) -> ScalarField:
    """Read a field written by :func:`save_field`.

    The sidecar metadata is authoritative for the grid; a shape mismatch
    between it and the CSV raises :class:`InvariantError`.
    """
    import configparser

    values = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))
    parser = configparser.ConfigParser()
    meta_file = _meta_path(path)
    if not parser.read(meta_file):
        raise OSError(f"missing field metadata {meta_file}")
    sect = parser["field"]
    grid = PixelGrid(sect.getint("width"), sect.getint("height"),
                     sect.getfloat("dy"), sect.getint("origin_x", 0))
    return ScalarField(grid, values)
