"""Global relative error and training-loss metrics."""

import math

import numpy as np
import pytest

from stenoflow import ParameterError, PixelGrid, VelocityField
from stenoflow.metrics import (
    CATEGORIES,
    GRE_REGULARIZER,
    categorize,
    category_of,
    gre,
    mse,
)


def make_field(grid, vx, vy):
    return VelocityField(grid, np.asarray(vx, dtype=np.float64),
                         np.asarray(vy, dtype=np.float64))


def gre_oracle(ref, pred, mask):
    """Scalar two-loop transcription of the metric definition."""
    num = 0.0
    den = 0.0
    h, w = mask.shape
    for i in range(h):
        for j in range(w):
            if mask[i, j]:
                num += (ref.vx[i, j] - pred.vx[i, j]) ** 2
                num += (ref.vy[i, j] - pred.vy[i, j]) ** 2
                den += ref.vx[i, j] ** 2 + ref.vy[i, j] ** 2
    return math.sqrt(num) / (math.sqrt(den) + GRE_REGULARIZER)


def component_oracle(ref_c, pred_c, mask):
    num = 0.0
    den = 0.0
    h, w = mask.shape
    for i in range(h):
        for j in range(w):
            if mask[i, j]:
                num += (ref_c[i, j] - pred_c[i, j]) ** 2
                den += ref_c[i, j] ** 2
    return math.sqrt(num) / (math.sqrt(den) + GRE_REGULARIZER)


def test_gre_matches_two_loop_oracle_on_random_fields():
    rng = np.random.default_rng(42)
    grid = PixelGrid(width=17, height=11, dy=1.0)
    ref = make_field(grid, rng.normal(size=(11, 17)), rng.normal(size=(11, 17)))
    pred = make_field(grid, rng.normal(size=(11, 17)), rng.normal(size=(11, 17)))
    mask = rng.random(size=(11, 17)) < 0.7
    assert mask.any() and not mask.all()

    report = gre(ref, pred, mask)
    assert report.gre == pytest.approx(gre_oracle(ref, pred, mask), rel=1e-12)
    assert report.gre_x == pytest.approx(
        component_oracle(ref.vx, pred.vx, mask), rel=1e-12)
    assert report.gre_y == pytest.approx(
        component_oracle(ref.vy, pred.vy, mask), rel=1e-12)


def test_gre_without_mask_uses_every_pixel():
    rng = np.random.default_rng(7)
    grid = PixelGrid(width=9, height=6, dy=1.0)
    ref = make_field(grid, rng.normal(size=(6, 9)), rng.normal(size=(6, 9)))
    pred = make_field(grid, rng.normal(size=(6, 9)), rng.normal(size=(6, 9)))
    full = np.ones((6, 9), dtype=bool)
    assert gre(ref, pred).gre == gre(ref, pred, full).gre


def test_gre_ignores_error_outside_the_mask():
    grid = PixelGrid(width=8, height=5, dy=1.0)
    ref = make_field(grid, np.ones((5, 8)), np.zeros((5, 8)))
    vx = np.ones((5, 8))
    vx[0, 0] = 1e6  # huge error at a pixel the mask excludes
    pred = make_field(grid, vx, np.zeros((5, 8)))
    mask = np.ones((5, 8), dtype=bool)
    mask[0, 0] = False
    report = gre(ref, pred, mask)
    assert report.gre == 0.0
    assert report.category == "<=1%"


def test_gre_identical_fields_is_zero():
    grid = PixelGrid(width=6, height=4, dy=1.0)
    f = make_field(grid, np.arange(24.0).reshape(4, 6), np.ones((4, 6)))
    report = gre(f, f)
    assert report.gre == 0.0 and report.gre_x == 0.0 and report.gre_y == 0.0


def test_gre_zero_reference_is_regularized():
    grid = PixelGrid(width=5, height=3, dy=1.0)
    ref = make_field(grid, np.zeros((3, 5)), np.zeros((3, 5)))
    pred = make_field(grid, np.full((3, 5), 2.0), np.zeros((3, 5)))
    report = gre(ref, pred)
    # ||d|| = 2*sqrt(15); denominator is exactly the regularizer
    assert report.gre == pytest.approx(2.0 * math.sqrt(15) / GRE_REGULARIZER,
                                       rel=1e-13)


def test_gre_report_carries_run_metadata():
    grid = PixelGrid(width=4, height=3, dy=1.0)
    f = make_field(grid, np.ones((3, 4)), np.zeros((3, 4)))
    report = gre(f, f, iterations=12, v_max_inlet=0.25)
    assert report.iterations == 12
    assert report.v_max_inlet == 0.25
    default = gre(f, f)
    assert default.iterations == 0 and math.isnan(default.v_max_inlet)


def test_gre_validation_errors():
    g1 = PixelGrid(width=4, height=3, dy=1.0)
    g2 = PixelGrid(width=5, height=3, dy=1.0)
    f1 = make_field(g1, np.zeros((3, 4)), np.zeros((3, 4)))
    f2 = make_field(g2, np.zeros((3, 5)), np.zeros((3, 5)))
    with pytest.raises(ParameterError):
        gre(f1, f2)
    with pytest.raises(ParameterError):
        gre(f1, f1, np.ones((4, 4), dtype=bool))


@pytest.mark.parametrize("value,expected", [
    (0.0, "<=1%"),
    (0.005, "<=1%"),
    (0.01, "<=1%"),          # bucket edges belong to the lower bucket
    (0.010000001, "1-5%"),
    (0.05, "1-5%"),
    (0.050000001, "5-10%"),
    (0.10, "5-10%"),
    (0.15, "10-20%"),
    (0.20, "10-20%"),
    (0.21, ">20%"),
    (7.0, ">20%"),
])
def test_category_bucket_edges(value, expected):
    assert category_of(value) == expected


def test_category_diverged_overrides_value():
    assert category_of(0.001, diverged=True) == "diverged"
    assert category_of(float("inf")) == "diverged"
    assert category_of(float("nan")) == "diverged"


def test_category_rejects_negative():
    with pytest.raises(ParameterError):
        category_of(-0.1)


def test_gre_diverged_flag_sets_category():
    grid = PixelGrid(width=4, height=3, dy=1.0)
    f = make_field(grid, np.ones((3, 4)), np.zeros((3, 4)))
    assert gre(f, f, diverged=True).category == "diverged"


def test_categorize_counts_every_bucket():
    grid = PixelGrid(width=4, height=3, dy=1.0)
    f = make_field(grid, np.ones((3, 4)), np.zeros((3, 4)))
    reports = [gre(f, f),  # <=1%
               gre(f, f, diverged=True),
               gre(f, f, diverged=True)]
    counts = categorize(reports)
    assert counts["<=1%"] == 1
    assert counts["diverged"] == 2
    assert sum(counts.values()) == 3
    assert tuple(counts) == CATEGORIES


def test_mse_single_pair_pythagorean():
    grid = PixelGrid(width=7, height=5, dy=1.0)
    ref = make_field(grid, np.zeros((5, 7)), np.zeros((5, 7)))
    pred = make_field(grid, np.full((5, 7), 3.0), np.full((5, 7), 4.0))
    # |v - v_pred|^2 = 3^2 + 4^2 = 25 at every pixel
    assert mse((ref, pred)) == 25.0


def test_mse_averages_per_image_then_over_images():
    grid = PixelGrid(width=3, height=2, dy=1.0)
    zero = make_field(grid, np.zeros((2, 3)), np.zeros((2, 3)))
    one = make_field(grid, np.ones((2, 3)), np.zeros((2, 3)))
    three = make_field(grid, np.full((2, 3), 3.0), np.zeros((2, 3)))
    # per-image means: 1 and 9 -> dataset mean 5
    assert mse([(zero, one), (zero, three)]) == 5.0


def test_mse_image_mean_is_independent_of_image_size():
    small = PixelGrid(width=2, height=2, dy=1.0)
    large = PixelGrid(width=40, height=30, dy=1.0)
    pairs = [
        (make_field(small, np.zeros((2, 2)), np.zeros((2, 2))),
         make_field(small, np.full((2, 2), 2.0), np.zeros((2, 2)))),
        (make_field(large, np.zeros((30, 40)), np.zeros((30, 40))),
         make_field(large, np.zeros((30, 40)), np.zeros((30, 40)))),
    ]
    # image means 4 and 0; the large image does not dominate by pixel count
    assert mse(pairs) == 2.0


def test_mse_validation_errors():
    g1 = PixelGrid(width=4, height=3, dy=1.0)
    g2 = PixelGrid(width=5, height=3, dy=1.0)
    f1 = make_field(g1, np.zeros((3, 4)), np.zeros((3, 4)))
    f2 = make_field(g2, np.zeros((3, 5)), np.zeros((3, 5)))
    with pytest.raises(ParameterError):
        mse([(f1, f2)])
    with pytest.raises(ParameterError):
        mse([])
