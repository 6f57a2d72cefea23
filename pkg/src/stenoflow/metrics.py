"""Prediction-quality metrics: global relative error and training loss.

The global relative error (GRE) compares two velocity fields over the
channel interior:

    GRE = || v - v_pred ||_2 / (|| v ||_2 + 1e-4)

with both components of all masked pixels stacked into one vector.  The
small regularizer keeps near-zero reference fields from exploding the
ratio.  Errors are bucketed into the standard report categories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fields import VelocityField

__all__ = [
    "GRE_REGULARIZER",
    "CATEGORIES",
    "GreReport",
    "gre",
    "categorize",
    "category_of",
    "mse",
]

GRE_REGULARIZER = 1e-4

# Half-open buckets (lower, upper]; the lowest includes zero.
CATEGORIES = ("<=1%", "1-5%", "5-10%", "10-20%", ">20%", "diverged")
_BOUNDS = (0.01, 0.05, 0.10, 0.20)


@dataclass
class GreReport:
    """GRE of one prediction, per component and combined."""

    gre: float
    gre_x: float
    gre_y: float
    category: str
    iterations: int = 0
    v_max_inlet: float = float("nan")


def category_of(value: float, diverged: bool = False) -> str:
    """Bucket a GRE value; ``diverged`` overrides the numeric bucket."""
    if diverged or not np.isfinite(value):
        return "diverged"
    if value < 0.0:
        raise ParameterError(f"GRE cannot be negative, got {value}")
    for bound, name in zip(_BOUNDS, CATEGORIES):
        if value <= bound:
            return name
    return ">20%"


def _norm(*parts: np.ndarray) -> float:
    return float(np.sqrt(sum(float(np.dot(p, p)) for p in parts)))


def gre(reference: VelocityField, prediction: VelocityField,
        mask: np.ndarray | None = None, *, iterations: int = 0,
        v_max_inlet: float = float("nan"), diverged: bool = False) -> GreReport:
    """GRE of ``prediction`` against ``reference`` over the masked pixels.

    ``mask`` is a boolean (H, W) array (None means all pixels).  The
    combined value stacks vx and vy; the per-component values use the same
    regularized denominator form on one component each.
    """
    if reference.grid.shape != prediction.grid.shape:
        raise ParameterError("reference and prediction grids disagree")
    if mask is None:
        mask = np.ones(reference.grid.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != reference.grid.shape:
        raise ParameterError("mask shape does not match the fields")

    dx = (reference.vx - prediction.vx)[mask].ravel()
    dy = (reference.vy - prediction.vy)[mask].ravel()
    rx = reference.vx[mask].ravel()
    ry = reference.vy[mask].ravel()

    total = _norm(dx, dy) / (_norm(rx, ry) + GRE_REGULARIZER)
    gx = _norm(dx) / (_norm(rx) + GRE_REGULARIZER)
    gy = _norm(dy) / (_norm(ry) + GRE_REGULARIZER)
    return GreReport(total, gx, gy, category_of(total, diverged),
                     iterations, v_max_inlet)


def categorize(reports) -> dict:
    """Category histogram of an iterable of :class:`GreReport`."""
    counts = {name: 0 for name in CATEGORIES}
    for rep in reports:
        counts[rep.category] += 1
    return counts


def mse(pairs) -> float:
    """Mean squared vector error over a dataset of field pairs.

    ``pairs`` iterates (reference, prediction); each image contributes the
    mean over its pixels of |v - v_pred|^2 (both components), and the
    dataset value is the mean over images.  A single pair may be passed as
    a 2-tuple directly.
    """
    if (isinstance(pairs, tuple) and len(pairs) == 2
            and isinstance(pairs[0], VelocityField)):
        pairs = [pairs]
    per_image = []
    for ref, pred in pairs:
        if ref.grid.shape != pred.grid.shape:
            raise ParameterError("field pair grids disagree")
        sq = (ref.vx - pred.vx) ** 2 + (ref.vy - pred.vy) ** 2
        per_image.append(float(sq.mean()))
    if not per_image:
        raise ParameterError("mse of an empty dataset is undefined")
    return float(np.mean(per_image))
