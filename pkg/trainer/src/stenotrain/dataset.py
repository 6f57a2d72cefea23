"""Training-pair loading and dataset splitting.

A pair directory holds comma-delimited grids plus an INI description:

    pair.ini           [pair] geometry, offset, xi, width, height, v_max,
                       q_inlet
    input_sdf.csv      raw signed-distance values in meters
    input_vx.csv       x-velocity on the first/last xi columns, 0 elsewhere
    input_vy.csv       y-velocity on the first/last xi columns, 0 elsewhere
    target_vx.csv      full-field x-velocity
    target_vy.csv      full-field y-velocity

Each ``.csv`` has a ``.meta`` sidecar ([field] width, height, dy, ...);
``dy`` is the pixel spacing used by the flow-rate quadrature.

The network input is three channels: the SDF divided by the fixed
normalizer 5.0e-4, then the two band velocity components (unnormalized by
default).  The interior mask is SDF > 0.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DatasetError

__all__ = [
    "SDF_NORMALIZER",
    "PairSample",
    "discover_pairs",
    "load_pair",
    "load_dataset",
    "split_indices",
    "sample_tensors",
]

SDF_NORMALIZER = 5.0e-4

_GRID_FILES = ("input_sdf", "input_vx", "input_vy", "target_vx", "target_vy")


@dataclass
class PairSample:
    """One training pair, eagerly loaded as float32 arrays of shape (H, W)."""

    path: str
    sdf: np.ndarray
    input_vx: np.ndarray
    input_vy: np.ndarray
    target_vx: np.ndarray
    target_vy: np.ndarray
    xi: int
    width: int
    height: int
    dy: float
    q_inlet: float
    v_max: float


def _read_grid(path: Path) -> np.ndarray:
    try:
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except OSError as exc:
        raise DatasetError(f"missing grid file {path}") from exc
    except ValueError as exc:
        raise DatasetError(f"malformed grid file {path}: {exc}") from exc
    return values.astype(np.float32)


def _read_ini(path: Path, section: str) -> configparser.SectionProxy:
    parser = configparser.ConfigParser(interpolation=None)
    if not parser.read(path):
        raise DatasetError(f"missing description file {path}")
    if not parser.has_section(section):
        raise DatasetError(f"{path} lacks a [{section}] section")
    return parser[section]

def load_pair(pair_dir: str | Path) -> PairSample:
    """Load and validate one pair directory."""
    pair_dir = Path(pair_dir)
    info = _read_ini(pair_dir / "pair.ini", "pair")
    try:
        xi = info.getint("xi")
        width = info.getint("width")
        height = info.getint("height")
        q_inlet = info.getfloat("q_inlet")
        v_max = info.getfloat("v_max")
    except ValueError as exc:
        raise DatasetError(f"non-numeric value in {pair_dir}/pair.ini: {exc}")
    if not 0 < 2 * xi <= width:
        raise DatasetError(f"{pair_dir}: xi {xi} incompatible with width {width}")
    if q_inlet <= 0:
        raise DatasetError(f"{pair_dir}: q_inlet must be positive, got {q_inlet}")

    grids = {}
    for name in _GRID_FILES:
        grid = _read_grid(pair_dir / f"{name}.csv")
        if grid.shape != (height, width):
            raise DatasetError(
                f"dataset shape mismatch: {pair_dir}/{name}.csv is "
                f"{grid.shape}, pair.ini declares ({height}, {width})")
        grids[name] = grid
    if np.any(grids["input_sdf"] < 0.0):
        raise DatasetError(f"{pair_dir}: SDF contains negative values")

    meta = _read_ini(pair_dir / "input_vx.meta", "field")
    dy = meta.getfloat("dy")
    if not dy > 0:
        raise DatasetError(f"{pair_dir}: non-positive pixel spacing {dy}")

    return PairSample(str(pair_dir), grids["input_sdf"],
                      grids["input_vx"], grids["input_vy"],
                      grids["target_vx"], grids["target_vy"],
                      xi, width, height, dy, q_inlet, v_max)


def discover_pairs(root: str | Path) -> list[Path]:
    """All pair directories below ``root``, sorted by path.

    ``root`` may itself be a single pair directory.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"{root} is not a directory")
    if (root / "pair.ini").exists():
        return [root]
    found = sorted(p.parent for p in root.rglob("pair.ini"))
    if not found:
        raise DatasetError(f"no training pairs under {root}")
    return found


def load_dataset(root: str | Path) -> list[PairSample]:
    """Load every pair below ``root`` and enforce a uniform geometry.

    All pairs must share height, width, and xi: the network input size is
    fixed, and the band overwrite depends on xi.
    """
    samples = [load_pair(p) for p in discover_pairs(root)]
    first = samples[0]
    for s in samples[1:]:
        if (s.height, s.width, s.xi) != (first.height, first.width, first.xi):
            raise DatasetError(
                f"dataset shape mismatch: {s.path} is "
                f"(height {s.height}, width {s.width}, xi {s.xi}) but "
                f"{first.path} is (height {first.height}, width "
                f"{first.width}, xi {first.xi})")
    return samples


def split_indices(n: int, fractions: tuple[float, float, float],
                  seed: int) -> tuple[list[int], list[int], list[int]]:
    """Deterministic train/validation/test partition of ``range(n)``.

    Validation and test take the floor of their fractions; training takes
    the remainder, so every sample lands in exactly one part and training
    is never empty for n >= 1.
    """
    if n < 1:
        raise DatasetError("cannot split an empty dataset")
    if abs(sum(fractions) - 1.0) > 1e-9 or any(f < 0 for f in fractions):
        raise ConfigError(f"split fractions must sum to 1, got {fractions}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    order = rng.permutation(n).tolist()
    n_val = int(fractions[1] * n)
    n_test = int(fractions[2] * n)
    n_train = n - n_val - n_test
    return (order[:n_train], order[n_train:n_train + n_val],
            order[n_train + n_val:])


def sample_tensors(sample: PairSample, normalize_velocity: bool = False):
    """Arrays for one sample: (x, y, mask, q_inlet, dy).

    x is (3, H, W): normalized SDF, band vx, band vy.  y is (2, H, W).
    mask is (1, H, W) with 1 inside the channel (SDF > 0).  With velocity
    normalization on, all velocities and q_inlet are divided by the
    sample's peak inlet velocity (weights trained this way predict scaled
    fields and are not interchangeable with unnormalized ones).
    """
    scale = np.float32(sample.v_max) if normalize_velocity else np.float32(1.0)
    x = np.stack([sample.sdf / np.float32(SDF_NORMALIZER),
                  sample.input_vx / scale,
                  sample.input_vy / scale])
    y = np.stack([sample.target_vx / scale, sample.target_vy / scale])
    mask = (sample.sdf > 0.0).astype(np.float32)[None]
    return x, y, mask, sample.q_inlet / float(scale), sample.dy
