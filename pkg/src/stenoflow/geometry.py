"""Channel geometries with cosine-shaped stenotic segments.

A channel consists of a straight inlet region, a stenotic region partitioned
into contiguous segments, and a straight outlet region.  Within a segment
starting at ``x0`` with length ``l`` the walls follow

    y_lower(x) = (d/2) (f_lower/2) (1 + cos(2 pi (x - x0) / l))
    y_upper(x) = d/2 + (d/2) (1 - (f_upper/2) (1 + cos(2 pi (x - x0) / l)))

so the constriction peaks at both segment endpoints and vanishes at the
segment midpoint.  Adjacent segments of different strengths therefore meet
in a wall-height jump; rasterization closes such jumps with a vertical wall
facet, and the signed-distance computation measures against those facets as
well as against the two wall curves.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ExtentError, InvariantError, ParameterError
from .fields import PixelGrid, ScalarField
from .physics import mask_from_sdf

__all__ = [
    "StenosisSegment",
    "ChannelGeometry",
    "SamplingWindow",
    "straight_geometry",
    "random_geometry",
    "scaled_geometry",
    "wall_functions",
    "wall_derivatives",
    "wall_discontinuities",
    "canonical_window",
    "rasterize",
    "compute_sdf",
    "training_offsets",
    "save_geometry",
    "load_geometry",
]

# Bounds on the stenosis strength parameters and on relative segment lengths.
STRENGTH_RANGE = (0.05, 0.7)
REL_LENGTH_RANGE = (0.4, 1.5)

# Canonical sampling-window constants for d = 1 mm, H = 128: the window
# starts 4 mm into the channel and spans 2305 columns; every additional
# centimeter of stenotic region adds 1280 columns.
CANONICAL_X_START = 0.004
CANONICAL_WIDTH = 2305
CANONICAL_HEIGHT = 128
COLUMNS_PER_CM = 1280

# Training-extraction layout on the canonical window (subdomain width 256):
# nine non-overlapping offsets step 256 from zero, then four sets of five
# overlapping subdomains inside the stenotic region, sets shifted by 50 px.
_REGULAR_COUNT = 9
_STENOTIC_SETS = 4
_STENOTIC_PER_SET = 5
_SET_SHIFT = 50


@dataclass(frozen=True)
class StenosisSegment:
    """One cosine segment: start ``x0``, length, and the two strengths."""

    x0: float
    length: float
    f_lower: float
    f_upper: float

    def __post_init__(self) -> None:
        if not self.length > 0.0:
            raise ParameterError(f"segment length must be positive, got {self.length}")
        lo, hi = STRENGTH_RANGE
        for name, f in (("f_lower", self.f_lower), ("f_upper", self.f_upper)):
            if not lo <= f <= hi:
                raise ParameterError(
                    f"{name}={f:g} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class ChannelGeometry:
    """Straight inlet + segmented stenotic region + straight outlet.

    ``segments`` must partition ``[l_inlet, l_inlet + l_stenotic]``
    contiguously and in order; an empty tuple describes a straight channel.
    The combined strengths never close the channel because each strength is
    at most 0.7, leaving an open height of at least ``0.3 * d_artery``.
    """

    d_artery: float
    l_inlet: float
    l_stenotic: float
    l_outlet: float
    segments: tuple = ()

    def __post_init__(self) -> None:
        for name, v in (("d_artery", self.d_artery), ("l_inlet", self.l_inlet),
                        ("l_stenotic", self.l_stenotic), ("l_outlet", self.l_outlet)):
            if not v > 0.0:
                raise ParameterError(f"{name} must be positive, got {v}")
        object.__setattr__(self, "segments", tuple(self.segments))
        tol = 1e-9 * self.l_stenotic
        cursor = self.l_inlet
        for seg in self.segments:
            if abs(seg.x0 - cursor) > tol:
                raise InvariantError(
                    f"segment at x0={seg.x0:g} leaves a gap (expected {cursor:g})")
            cursor += seg.length
        if self.segments and abs(cursor - (self.l_inlet + self.l_stenotic)) > tol:
            raise InvariantError(
                "segments do not partition the stenotic region: end "
                f"{cursor:g} != {self.l_inlet + self.l_stenotic:g}")

    @property
    def length(self) -> float:
        """Total channel length."""
        return self.l_inlet + self.l_stenotic + self.l_outlet

    def min_open_height(self) -> float:
        """Lower bound on y_upper - y_lower over the whole channel."""
        worst = max((s.f_lower + s.f_upper for s in self.segments), default=0.0)
        return self.d_artery * (1.0 - worst / 2.0)


def straight_geometry(d: float = 1e-3, l_inlet: float = 0.007,
                      l_stenotic: float = 0.01, l_outlet: float = 0.007
                      ) -> ChannelGeometry:
    """Channel with no constriction at all."""
    return ChannelGeometry(d, l_inlet, l_stenotic, l_outlet, ())


def random_geometry(seed, n_segment: int | None = None, *, d: float = 1e-3,
                    l_inlet: float = 0.007, l_stenotic: float = 0.01,
                    l_outlet: float = 0.007,
                    f_lower: float | None = None,
                    f_upper: float | None = None) -> ChannelGeometry:
    """Draw a random stenotic channel.

    ``seed`` is an integer or :class:`numpy.random.SeedSequence`; draws use
    the counter-based Philox generator so results are reproducible across
    platforms.  The draw order is versioned: segment count first (uniform on
    {1, 2, 3} when ``n_segment`` is None), then per segment in order a
    relative length from U[0.4, 1.5] and the two strengths from
    U[0.05, 0.7].  Relative lengths are normalized to sum to ``l_stenotic``.
    ``f_lower``/``f_upper`` pin the respective strength of every segment
    instead of drawing it (the pinned value is still validated).
    """
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.Philox(seed))
    if n_segment is None:
        n_segment = int(rng.integers(1, 4))
    if n_segment < 1:
        raise ParameterError(f"n_segment must be >= 1, got {n_segment}")
    rel_lo, rel_hi = REL_LENGTH_RANGE
    f_lo, f_hi = STRENGTH_RANGE
    rels, lows, ups = [], [], []
    for _ in range(n_segment):
        rels.append(rng.uniform(rel_lo, rel_hi))
        lows.append(rng.uniform(f_lo, f_hi) if f_lower is None else f_lower)
        ups.append(rng.uniform(f_lo, f_hi) if f_upper is None else f_upper)
    scale = l_stenotic / sum(rels)
    segments, x0 = [], l_inlet
    for rel, fl, fu in zip(rels, lows, ups):
        seg = StenosisSegment(x0, rel * scale, fl, fu)
        segments.append(seg)
        x0 += seg.length
    # Pin the final endpoint exactly; float accumulation may drift slightly.
    last = segments[-1]
    segments[-1] = replace(last, length=l_inlet + l_stenotic - last.x0)
    return ChannelGeometry(d, l_inlet, l_stenotic, l_outlet, tuple(segments))


def scaled_geometry(geom: ChannelGeometry, factor: int, mode: str = "duplicate",
                    seed=None) -> ChannelGeometry:
    """Stretch the stenotic region to ``factor`` times its length.

    ``duplicate`` repeats the existing stenotic wall profile ``factor``
    times; ``random`` draws ``factor * len(segments)`` fresh segments over
    the scaled region (``seed`` required).  Inlet and outlet lengths are
    unchanged.
    """
    if not isinstance(factor, int) or isinstance(factor, bool) or factor < 1:
        raise ParameterError(f"scale factor must be a positive integer, got {factor!r}")
    if factor == 1:
        return geom
    if mode == "duplicate":
        if not geom.segments:
            raise ParameterError("cannot duplicate a straight stenotic region")
        segments = []
        for k in range(factor):
            shift = k * geom.l_stenotic
            segments.extend(replace(s, x0=s.x0 + shift) for s in geom.segments)
        return ChannelGeometry(geom.d_artery, geom.l_inlet,
                               factor * geom.l_stenotic, geom.l_outlet,
                               tuple(segments))
    if mode == "random":
        if seed is None:
            raise ParameterError("random scaling requires a seed")
        n = factor * max(len(geom.segments), 1)
        return random_geometry(seed, n, d=geom.d_artery, l_inlet=geom.l_inlet,
                               l_stenotic=factor * geom.l_stenotic,
                               l_outlet=geom.l_outlet)
    raise ParameterError(f"unknown scale mode {mode!r}")


# ---------------------------------------------------------------------------
# Wall evaluation
#
# Region lookup tables turn the piecewise wall definition into a single
# vectorized expression: searchsorted finds the region of each x, straight
# regions get amplitude 0 and a dummy period of 1 m.
# ---------------------------------------------------------------------------

class _WallTables:
    def __init__(self, geom: ChannelGeometry):
        starts = [0.0]
        amp_l, amp_u, x0s, periods = [0.0], [0.0], [0.0], [1.0]
        half = geom.d_artery / 2.0
        for seg in geom.segments:
            starts.append(seg.x0)
            amp_l.append(half * seg.f_lower / 2.0)
            amp_u.append(half * seg.f_upper / 2.0)
            x0s.append(seg.x0)
            periods.append(seg.length)
        starts.append(geom.l_inlet + geom.l_stenotic)
        amp_l.append(0.0)
        amp_u.append(0.0)
        x0s.append(0.0)
        periods.append(1.0)
        self.starts = np.array(starts)
        self.amp_l = np.array(amp_l)
        self.amp_u = np.array(amp_u)
        self.x0s = np.array(x0s)
        self.periods = np.array(periods)
        self.d = geom.d_artery

    def evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        idx = np.searchsorted(self.starts, x, side="right") - 1
        bump = 1.0 + np.cos(2.0 * np.pi * (x - self.x0s[idx]) / self.periods[idx])
        return self.amp_l[idx] * bump, self.d - self.amp_u[idx] * bump

    def derivatives(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        idx = np.searchsorted(self.starts, x, side="right") - 1
        omega = 2.0 * np.pi / self.periods[idx]
        s = np.sin(omega * (x - self.x0s[idx]))
        return -self.amp_l[idx] * omega * s, self.amp_u[idx] * omega * s


def _tables(geom: ChannelGeometry) -> _WallTables:
    # Tiny per-geometry cache; geometries are frozen dataclasses.
    tab = getattr(geom, "_wall_tables", None)
    if tab is None:
        tab = _WallTables(geom)
        object.__setattr__(geom, "_wall_tables", tab)
    return tab


def _check_extent(geom: ChannelGeometry, x: np.ndarray) -> None:
    if np.any(x < 0.0) or np.any(x > geom.length):
        raise ExtentError(
            f"x outside the channel extent [0, {geom.length:g}]")


def wall_functions(geom: ChannelGeometry, x):
    """Lower and upper wall heights ``(y_lower, y_upper)`` at ``x``.

    ``x`` may be scalar or array and must lie inside ``[0, length]``.
    Segment membership is half-open, ``x0 <= x < x0 + l``.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_extent(geom, x)
    yl, yu = _tables(geom).evaluate(x)
    if x.ndim:
        return yl, yu
    return float(yl), float(yu)


def wall_derivatives(geom: ChannelGeometry, x):
    """d/dx of the two wall curves at ``x`` (undefined exactly at joins)."""
    x = np.asarray(x, dtype=np.float64)
    _check_extent(geom, x)
    dl, du = _tables(geom).derivatives(x)
    if x.ndim:
        return dl, du
    return float(dl), float(du)


def wall_discontinuities(geom: ChannelGeometry):
    """Vertical wall facets, as tuples ``(x, y_low, y_high)``.

    One facet per wall-height jump at a region boundary (inlet/stenotic,
    segment/segment, stenotic/outlet).  Facets with a jump below 1e-15 m are
    dropped.
    """
    tab = _tables(geom)
    facets = []
    eps = 1e-9 * geom.d_artery
    boundaries = list(tab.starts[1:])  # interior region boundaries
    for xb in boundaries:
        left_l, left_u = tab.evaluate(np.nextafter(np.array(xb), -np.inf))
        right_l, right_u = tab.evaluate(np.array(xb))
        for a, b in ((left_l, right_l), (left_u, right_u)):
            lo, hi = (float(a), float(b)) if a < b else (float(b), float(a))
            if hi - lo > eps:
                facets.append((float(xb), lo, hi))
    return facets


# ---------------------------------------------------------------------------
# Sampling window and rasterization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingWindow:
    """Axis-aligned window of ``width`` x ``height`` square pixels.

    ``x_start`` locates the left window edge in channel coordinates; the
    pixel spacing is ``dy`` in both directions, so the window ends at
    ``x_start + width * dy``.
    """

    x_start: float
    width: int
    height: int
    dy: float

    def __post_init__(self) -> None:
        if self.x_start < 0.0:
            raise ParameterError(f"x_start must be >= 0, got {self.x_start}")
        PixelGrid(self.width, self.height, self.dy)  # bounds check

    @property
    def x_end(self) -> float:
        return self.x_start + self.width * self.dy

    def grid(self) -> PixelGrid:
        return PixelGrid(self.width, self.height, self.dy)

    def x_of_columns(self, cols) -> np.ndarray:
        """Physical x of the pixel centers of global column indices ``cols``."""
        return self.x_start + (np.asarray(cols, dtype=np.float64) + 0.5) * self.dy


def canonical_window(geom: ChannelGeometry,
                     height: int = CANONICAL_HEIGHT) -> SamplingWindow:
    """The standard evaluation window for a (possibly scaled) geometry.

    Starts 4 mm into the channel and spans a fixed physical length: at the
    reference resolution (d = 1 mm, 128 rows) that is 2305 columns for the
    base 1 cm stenotic region plus 1280 columns per additional centimeter;
    other resolutions get the same span in their own pixel size.
    """
    dy = geom.d_artery / height
    span = CANONICAL_WIDTH * (1e-3 / CANONICAL_HEIGHT) + (geom.l_stenotic - 0.01)
    width = round(span / dy)
    return SamplingWindow(CANONICAL_X_START, width, height, dy)


def compute_sdf(geom: ChannelGeometry, window: SamplingWindow,
                tol: float = 1e-12) -> ScalarField:
    """Signed distance to the channel walls, sampled at pixel centers.

    Interior pixels get their minimum Euclidean distance to the wall curves
    (including vertical facets at wall jumps); pixels on or outside a wall
    get exactly 0.  The per-pixel 1-D minimization over the curve parameter
    is carried to an interval width below ``tol`` meters, bracketing from a
    coarse scan whose spacing resolves every cosine segment.
    """
    if window.x_start < 0.0 or window.x_end > geom.length + 1e-12:
        raise ExtentError(
            f"window [{window.x_start:g}, {window.x_end:g}] outside the "
            f"channel extent [0, {geom.length:g}]")
    tab = _tables(geom)
    grid = window.grid()
    xs = window.x_of_columns(np.arange(window.width))
    ys = grid.row_centers()
    yl_cols, yu_cols = tab.evaluate(xs)
    inside = (ys[:, None] > yl_cols[None, :]) & (ys[:, None] < yu_cols[None, :])

    jj, ii = np.nonzero(inside)
    px = xs[ii]
    py = ys[jj]
    bound_l = py - yl_cols[ii]
    bound_u = yu_cols[ii] - py

    d2_l = _min_sq_dist_to_curve(tab, geom.length, px, py, bound_l, upper=False,
                                 tol=tol)
    d2_u = _min_sq_dist_to_curve(tab, geom.length, px, py, bound_u, upper=True,
                                 tol=tol)
    best = np.minimum(d2_l, d2_u)
    for xf, ylo, yhi in wall_discontinuities(geom):
        dx = px - xf
        dy_f = np.clip(py, ylo, yhi) - py
        best = np.minimum(best, dx * dx + dy_f * dy_f)

    values = np.zeros(grid.shape)
    values[jj, ii] = np.sqrt(best)
    return ScalarField(grid, values)


def _min_sq_dist_to_curve(tab: _WallTables, length: float, px: np.ndarray,
                          py: np.ndarray, bound: np.ndarray, upper: bool,
                          tol: float, chunk: int = 32768) -> np.ndarray:
    """min over t of (px - t)^2 + (py - wall(t))^2, per pixel.

    ``bound`` is a proven upper bound on the distance (the vertical gap), so
    the minimizer lies in [px - bound, px + bound] intersected with the
    channel extent.  A 65-point scan brackets the global minimum (segment
    features are millimeters wide, far wider than the scan spacing); 17-point
    refinement then shrinks the bracket by 8x per round until it is below
    ``tol``.
    """
    out = np.empty(px.shape)
    for lo_i in range(0, px.size, chunk):
        sl = slice(lo_i, min(lo_i + chunk, px.size))
        x, y, b = px[sl], py[sl], bound[sl]
        lo = np.clip(x - b, 0.0, length)
        hi = np.clip(x + b, 0.0, length)

        def sq_dist(t):
            yl, yu = tab.evaluate(t.ravel())
            w = (yu if upper else yl).reshape(t.shape)
            return (x[None, :] - t) ** 2 + (y[None, :] - w) ** 2

        t = lo[None, :] + (hi - lo)[None, :] * np.linspace(0.0, 1.0, 65)[:, None]
        d = sq_dist(t)
        k = np.argmin(d, axis=0)
        idx = np.arange(x.size)
        lo_b = t[np.maximum(k - 1, 0), idx]
        hi_b = t[np.minimum(k + 1, 64), idx]
        span = float(np.max(hi - lo)) / 32.0
        grid = np.linspace(0.0, 1.0, 17)[:, None]
        while span > tol:
            t = lo_b[None, :] + (hi_b - lo_b)[None, :] * grid
            d = sq_dist(t)
            k = np.argmin(d, axis=0)
            lo_b = t[np.maximum(k - 1, 0), idx]
            hi_b = t[np.minimum(k + 1, 16), idx]
            span /= 8.0
        out[sl] = np.min(d, axis=0)
    return out


def rasterize(geom: ChannelGeometry, window: SamplingWindow
              ) -> tuple[ScalarField, ScalarField]:
    """SDF and interior mask of ``geom`` over ``window``."""
    sdf = compute_sdf(geom, window)
    return sdf, mask_from_sdf(sdf)


def training_offsets(geom: ChannelGeometry, window: SamplingWindow,
                     width: int = 256) -> list[int]:
    """Subdomain offsets used to cut training windows from a global raster.

    Nine non-overlapping subdomains step ``width`` from column 0, then four
    sets of five overlapping subdomains spanning the stenotic region, with
    consecutive sets shifted 50 columns.  29 offsets in total on the
    canonical window.
    """
    offsets = [m * width for m in range(_REGULAR_COUNT)]
    if offsets[-1] + width > window.width:
        raise ParameterError("window too narrow for the regular subdomains")
    sten_lo = int(math.ceil((geom.l_inlet - window.x_start) / window.dy))
    sten_px = int(round(geom.l_stenotic / window.dy))
    room = sten_px - width - _SET_SHIFT * (_STENOTIC_SETS - 1)
    if room < 0:
        raise ParameterError("stenotic region too narrow for overlapping sets")
    step = room // (_STENOTIC_PER_SET - 1)
    for s in range(_STENOTIC_SETS):
        base = sten_lo + s * _SET_SHIFT
        offsets.extend(base + m * step for m in range(_STENOTIC_PER_SET))
    for off in offsets:
        if off < 0 or off + width > window.width:
            raise ParameterError(f"training offset {off} leaves the window")
    return offsets


# ---------------------------------------------------------------------------
# Geometry description files
# ---------------------------------------------------------------------------

def save_geometry(path: str, geom: ChannelGeometry) -> None:
    """Write a key-value description file (INI sections, repr floats)."""
    parser = configparser.ConfigParser()
    parser["channel"] = {
        "d_artery": repr(geom.d_artery),
        "l_inlet": repr(geom.l_inlet),
        "l_stenotic": repr(geom.l_stenotic),
        "l_outlet": repr(geom.l_outlet),
        "n_segment": str(len(geom.segments)),
    }
    for k, seg in enumerate(geom.segments):
        parser[f"segment {k}"] = {
            "x0": repr(seg.x0),
            "length": repr(seg.length),
            "f_lower": repr(seg.f_lower),
            "f_upper": repr(seg.f_upper),
        }
    with open(path, "w", encoding="ascii") as fh:
        parser.write(fh)


def load_geometry(path: str) -> ChannelGeometry:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise OSError(f"cannot read geometry file {path}")
    try:
        ch = parser["channel"]
        n = ch.getint("n_segment")
        segments = tuple(
            StenosisSegment(parser[f"segment {k}"].getfloat("x0"),
                            parser[f"segment {k}"].getfloat("length"),
                            parser[f"segment {k}"].getfloat("f_lower"),
                            parser[f"segment {k}"].getfloat("f_upper"))
            for k in range(n))
        return ChannelGeometry(ch.getfloat("d_artery"), ch.getfloat("l_inlet"),
                               ch.getfloat("l_stenotic"), ch.getfloat("l_outlet"),
                               segments)
    except (KeyError, configparser.Error) as exc:
        raise InvariantError(f"malformed geometry file {path}: {exc}") from exc


def geometry_dir_name(index: int) -> str:
    return f"geom_{index:04d}"
