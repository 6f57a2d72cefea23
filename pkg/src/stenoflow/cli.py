"""Command-line entry point.

Subcommands:

    generate         draw channel geometries and rasterize them
    synthesize       cut solver-ready training pairs from geometries
    run              one decomposed solve, with trace/field/figure exports
    scalability      the same solve across stenotic-region scale factors
    evaluate         GRE reports and histograms for saved field pairs
    inspect-weights  header and checksum summary of a weight file

Exit codes: 0 success, 2 configuration or parameter problem, 3 file or
weight-format problem, 4 model or numeric failure, 5 the iteration
diverged (outputs are still written).
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import BACKENDS, RunConfig, load_run_config, save_run_config
from .errors import (
    ConfigError,
    ModelError,
    NumericError,
    ParameterError,
    StenoflowError,
    WeightFormatError,
)
from .fields import ScalarField, VelocityField, load_field, save_field
from .geometry import (
    SamplingWindow,
    canonical_window,
    geometry_dir_name,
    load_geometry,
    random_geometry,
    rasterize,
    save_geometry,
    scaled_geometry,
    straight_geometry,
    training_offsets,
)
from .metrics import categorize, gre, mse
from .physics import V_MAX_RANGE, inlet_flow_rate
from .poisson import poisson_harness
from .schwarz import (
    SchwarzConfig,
    Status,
    decompose,
    gre_star,
    initialize,
    run as schwarz_run,
)
from .solvers import (
    CnnSolver,
    StreamFunctionSolver,
    inspect_weights,
    load_model,
    stream_solution,
)

__all__ = ["main"]


# ---------------------------------------------------------------------------
# shared helpers

def _save_velocity(directory: Path, v: VelocityField, units: str = "m/s",
                   prefix: str = "") -> None:
    save_field(str(directory / f"{prefix}vx.csv"),
               ScalarField(v.grid, v.vx), units=units)
    save_field(str(directory / f"{prefix}vy.csv"),
               ScalarField(v.grid, v.vy), units=units)


def _load_velocity(vx_path: str, vy_path: str) -> VelocityField:
    fx = load_field(vx_path)
    fy = load_field(vy_path)
    return VelocityField(fx.grid, fx.values, fy.values)


def _write_sections(path: Path, sections: dict) -> None:
    parser = configparser.ConfigParser(interpolation=None)
    for name, kv in sections.items():
        parser[name] = {k: (repr(v) if isinstance(v, float) else str(v))
                        for k, v in kv.items()}
    with open(path, "w", encoding="ascii") as fh:
        parser.write(fh)


def _make_geometry(cfg: RunConfig):
    if cfg.geometry_file:
        geom = load_geometry(cfg.geometry_file)
    elif cfg.preset == "straight":
        geom = straight_geometry()
    else:
        geom = random_geometry(np.random.SeedSequence((cfg.seed, 0)),
                               cfg.n_segment)
    if cfg.factor > 1:
        geom = scaled_geometry(geom, cfg.factor, cfg.scale_mode,
                               seed=np.random.SeedSequence((cfg.seed, 1)))
    return geom


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    """File values (if any) overridden by explicitly given flags."""
    base = load_run_config(args.config) if args.config else RunConfig()
    values = dataclasses.asdict(base)
    for field in dataclasses.fields(RunConfig):
        given = getattr(args, field.name, None)
        if given is not None:
            values[field.name] = given
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# generate

def cmd_generate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        if args.preset == "straight":
            geom = straight_geometry(args.d, args.l_inlet, args.l_stenotic,
                                     args.l_outlet)
        else:
            geom = random_geometry(
                np.random.SeedSequence((args.seed, k)), args.n_segment,
                d=args.d, l_inlet=args.l_inlet, l_stenotic=args.l_stenotic,
                l_outlet=args.l_outlet,
                f_lower=args.f_lower, f_upper=args.f_upper)
        gdir = out / geometry_dir_name(k)
        gdir.mkdir(exist_ok=True)
        save_geometry(str(gdir / "geometry.ini"), geom)
        line = f"{gdir.name}: {len(geom.segments)} segment(s)"
        if not args.skip_raster:
            window = canonical_window(geom, args.height)
            sdf, mask = rasterize(geom, window)
            save_field(str(gdir / "sdf.csv"), sdf, units="m")
            save_field(str(gdir / "mask.csv"), mask, units="1")
            line += f", raster {window.width}x{window.height}"
        print(line)
    return 0


# ---------------------------------------------------------------------------
# synthesize

def cmd_synthesize(args: argparse.Namespace) -> int:
    root = Path(args.geometries)
    gdirs = sorted(d for d in root.iterdir()
                   if d.is_dir() and (d / "geometry.ini").exists())
    if not gdirs:
        raise ParameterError(f"no geometry directories under {root}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    total = 0
    for idx, gdir in enumerate(gdirs):
        geom = load_geometry(str(gdir / "geometry.ini"))
        window = canonical_window(geom, args.height)
        if (gdir / "sdf.csv").exists():
            sdf = load_field(str(gdir / "sdf.csv"))
        else:
            sdf, _ = rasterize(geom, window)
        if args.v_max is not None:
            v_max = args.v_max
        else:
            rng = np.random.Generator(np.random.Philox(
                np.random.SeedSequence((args.seed, idx))))
            v_max = float(rng.uniform(*V_MAX_RANGE))
        q_inlet = inlet_flow_rate(v_max, geom.d_artery)
        truth = stream_solution(geom, window, q_inlet)

        xi, width = args.xi, args.width
        offsets = training_offsets(geom, window, width)
        for m, off in enumerate(offsets):
            pair = out / gdir.name / f"pair_{m:03d}"
            pair.mkdir(parents=True, exist_ok=True)
            sub_sdf = sdf.crop(off, width)
            target = truth.crop(off, width)
            vbx = np.zeros(sub_sdf.grid.shape)
            vby = np.zeros(sub_sdf.grid.shape)
            for band in (slice(0, xi), slice(width - xi, width)):
                vbx[:, band] = target.vx[:, band]
                vby[:, band] = target.vy[:, band]
            save_field(str(pair / "input_sdf.csv"), sub_sdf, units="m")
            _save_velocity(pair, VelocityField(sub_sdf.grid, vbx, vby),
                           prefix="input_")
            _save_velocity(pair, target, prefix="target_")
            _write_sections(pair / "pair.ini", {"pair": {
                "geometry": gdir.name, "offset": off, "xi": xi,
                "width": width, "height": window.height,
                "v_max": float(v_max), "q_inlet": float(q_inlet),
            }})
            total += 1
        print(f"{gdir.name}: {len(offsets)} pairs (v_max {v_max:.6g})")
    print(f"{total} pairs under {out}")
    return 0


# ---------------------------------------------------------------------------
# run

def _build_flow_problem(cfg: RunConfig):
    geom = _make_geometry(cfg)
    window = canonical_window(geom, cfg.height)
    if cfg.w_global is not None and cfg.w_global != window.width:
        window = SamplingWindow(window.x_start, cfg.w_global, cfg.height,
                                window.dy)
    sdf, mask = rasterize(geom, window)
    layout = decompose(window.width, cfg.xi, cfg.delta, cfg.width, cfg.cover)
    q_inlet = inlet_flow_rate(cfg.v_max, geom.d_artery)

    if cfg.backend == "stream":
        solver = StreamFunctionSolver(geom, window, q_inlet)
    else:
        solver = CnnSolver(load_model(cfg.weights), constrained=cfg.constrained)

    state = initialize(layout, sdf, q_inlet, mode=cfg.init)
    if cfg.reference_vx and cfg.reference_vy:
        reference = _load_velocity(cfg.reference_vx, cfg.reference_vy)
    else:
        reference = stream_solution(geom, window, q_inlet)
    return state, solver, reference, mask, "m/s"


def _build_laplace_problem(cfg: RunConfig):
    w_global = cfg.w_global if cfg.w_global is not None else 512
    layout = decompose(w_global, cfg.xi, cfg.delta, cfg.width, cover="full")
    state, solver, reference = poisson_harness(layout, cfg.height)
    return state, solver, reference, state.mask, "1"


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    if cfg.backend == "laplace":
        state, solver, reference, mask, units = _build_laplace_problem(cfg)
    else:
        state, solver, reference, mask, units = _build_flow_problem(cfg)

    callback = None
    if cfg.snapshot_every > 0:
        def callback(k, st, _out=out, _every=cfg.snapshot_every):
            if k % _every == 0:
                d = _out / "snapshots" / f"iter_{k:04d}"
                d.mkdir(parents=True, exist_ok=True)
                _save_velocity(d, st.field, units=units)

    result = schwarz_run(state, solver, cfg.schwarz_config(), callback)
    layout = state.layout
    covered = layout.covered
    field = state.field

    save_run_config(str(out / "config.ini"), cfg)
    result.trace.save(str(out / "trace.txt"))
    _save_velocity(out, field, units=units)
    save_field(str(out / "mask.csv"), mask, units="1")

    mask_bool = mask.values > 0.0
    report = {
        "run": {
            "backend": cfg.backend,
            "status": str(result.status),
            "iterations": result.iterations,
            "abs_err": result.trace.records[-1].abs_err,
            "epsilon": cfg.epsilon,
        },
        "decomposition": {
            "w_global": layout.w_global, "width": layout.width,
            "xi": layout.xi, "delta": layout.delta,
            "n_subdomains": layout.n, "covered": covered,
        },
    }
    if state.q_inlet is not None:
        report["run"]["q_inlet"] = float(state.q_inlet)
    if result.status is not Status.DIVERGED:
        rep = gre(reference.crop(0, covered), field.crop(0, covered),
                  mask_bool[:, :covered], iterations=result.iterations,
                  diverged=False)
        report["gre"] = {"gre": rep.gre, "gre_x": rep.gre_x,
                         "gre_y": rep.gre_y, "category": rep.category}
        if cfg.backend == "laplace":
            diff = np.abs(field.vx[:, :covered]
                          - reference.vx[:, :covered]).max()
            report["gre"]["max_abs_diff"] = float(diff)
    _write_sections(out / "report.ini", report)

    if cfg.figures:
        from .report import save_convergence_figure, save_field_figure
        save_field_figure(str(out / "field.png"), field, mask_bool)
        save_convergence_figure(str(out / "convergence.png"),
                                result.trace.abs_errors(), cfg.epsilon)

    print(f"status {result.status} after {result.iterations} iteration(s), "
          f"abs_err {result.trace.records[-1].abs_err:.6g}")
    if "gre" in report:
        print(f"GRE {report['gre']['gre']:.6g} ({report['gre']['category']})")
    print(f"outputs in {out}")
    return 5 if result.status is Status.DIVERGED else 0


# ---------------------------------------------------------------------------
# scalability

def cmd_scalability(args: argparse.Namespace) -> int:
    try:
        factors = [int(tok) for tok in args.factors.split(",") if tok]
    except ValueError as exc:
        raise ParameterError(f"bad --factors value {args.factors!r}") from exc
    if not factors or any(f < 1 for f in factors):
        raise ParameterError("factors must be positive integers")
    if args.backend == "laplace":
        raise ConfigError("scalability needs a flow backend (stream or cnn)")
    if args.backend == "cnn" and not args.weights:
        raise ConfigError("backend cnn requires a weights file")

    if args.geometry:
        base = load_geometry(args.geometry)
    else:
        base = random_geometry(np.random.SeedSequence((args.seed, 0)),
                               args.n_segment)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    curves: dict[str, list[float]] = {}
    stars: dict[str, float] = {}
    any_diverged = False
    for factor in factors:
        geom = (base if factor == 1 else
                scaled_geometry(base, factor, args.scale_mode,
                                seed=np.random.SeedSequence((args.seed, factor))))
        window = canonical_window(geom, args.height)
        sdf, mask = rasterize(geom, window)
        layout = decompose(window.width, args.xi, args.delta, args.width,
                           args.cover)
        q_inlet = inlet_flow_rate(args.v_max, geom.d_artery)
        if args.backend == "stream":
            solver = StreamFunctionSolver(geom, window, q_inlet)
        else:
            solver = CnnSolver(load_model(args.weights))
        truth = stream_solution(geom, window, q_inlet)

        covered = layout.covered
        mask_bool = mask.values[:, :covered] > 0.0
        truth_cov = truth.crop(0, covered)
        curve: list[float] = []

        def track(k, st, _t=truth_cov, _m=mask_bool, _c=covered, _curve=curve):
            _curve.append(gre(_t, st.field.crop(0, _c), _m).gre)

        state = initialize(layout, sdf, q_inlet, mode=args.init)
        result = schwarz_run(state, solver, _schwarz_config_from(args), track)
        star, _ = gre_star(truth, layout, sdf, solver, q_inlet)

        label = f"x{factor}"
        curves[label] = curve
        stars[label] = star
        result.trace.save(str(out / f"trace_{label}.txt"))
        any_diverged |= result.status is Status.DIVERGED
        rows.append((factor, layout.w_global, layout.n, result.iterations,
                     str(result.status), curve[-1], star))
        print(f"factor {factor}: {layout.n} subdomains over "
              f"{layout.w_global} columns, {result.status} in "
              f"{result.iterations} iteration(s), GRE {curve[-1]:.6g} "
              f"(GRE* {star:.6g})")

    with open(out / "summary.csv", "w", encoding="ascii") as fh:
        fh.write("factor,w_global,n_subdomains,iterations,status,"
                 "gre,gre_star\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")
    with open(out / "gre_iterations.csv", "w", encoding="ascii") as fh:
        fh.write("factor,iteration,gre\n")
        for factor, curve in zip(factors, curves.values()):
            for k, value in enumerate(curve, start=1):
                fh.write(f"{factor},{k},{value!r}\n")
    if args.figures:
        from .report import save_gre_figure
        save_gre_figure(str(out / "gre.png"), curves, stars)
    print(f"outputs in {out}")
    return 5 if any_diverged else 0


def _schwarz_config_from(args: argparse.Namespace) -> SchwarzConfig:
    return SchwarzConfig(epsilon=args.epsilon,
                         max_iterations=args.max_iterations,
                         init=args.init)


# ---------------------------------------------------------------------------
# evaluate

_NAME_PREFIXES = ("", "target_", "pred_", "input_")


def _velocity_from_dir(d: Path) -> VelocityField:
    for prefix in _NAME_PREFIXES:
        vx = d / f"{prefix}vx.csv"
        if vx.exists():
            return _load_velocity(str(vx), str(d / f"{prefix}vy.csv"))
    raise OSError(f"no velocity pair (vx.csv/vy.csv) in {d}")


def cmd_evaluate(args: argparse.Namespace) -> int:
    pred_root = Path(args.pred)
    ref_root = Path(args.ref)
    if any((pred_root / f"{p}vx.csv").exists() for p in _NAME_PREFIXES):
        pairs = [(pred_root.name, pred_root, ref_root)]
    else:
        pairs = [(d.name, d, ref_root / d.name)
                 for d in sorted(pred_root.iterdir()) if d.is_dir()]
    if not pairs:
        raise ParameterError(f"nothing to evaluate under {pred_root}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    shared_mask = (np.asarray(load_field(args.mask).values > 0.0)
                   if args.mask else None)

    reports, fields = [], []
    for name, pdir, rdir in pairs:
        prediction = _velocity_from_dir(pdir)
        reference = _velocity_from_dir(rdir)
        mask = shared_mask
        if mask is None and (pdir / "mask.csv").exists():
            mask = load_field(str(pdir / "mask.csv")).values > 0.0
        rep = gre(reference, prediction, mask,
                  diverged=not prediction.is_finite())
        reports.append((name, rep))
        fields.append((reference, prediction))

    counts = categorize(rep for _, rep in reports)
    mean_sq = mse(fields)
    with open(out / "report.csv", "w", encoding="ascii") as fh:
        fh.write("name,gre,gre_x,gre_y,category\n")
        for name, rep in reports:
            fh.write(f"{name},{rep.gre!r},{rep.gre_x!r},{rep.gre_y!r},"
                     f"{rep.category}\n")
    with open(out / "histogram.csv", "w", encoding="ascii") as fh:
        fh.write("category,count\n")
        for category, count in counts.items():
            fh.write(f"{category},{count}\n")
    if args.figures:
        from .report import save_histogram_figure
        save_histogram_figure(str(out / "histogram.png"), counts)

    finite = [rep.gre for _, rep in reports if np.isfinite(rep.gre)]
    mean = float(np.mean(finite)) if finite else float("nan")
    print(f"{len(reports)} pair(s): mean GRE {mean:.6g}, MSE {mean_sq:.6g}")
    for category, count in counts.items():
        if count:
            print(f"  {category}: {count}")
    print(f"outputs in {out}")
    return 0


# ---------------------------------------------------------------------------
# inspect-weights

def cmd_inspect_weights(args: argparse.Namespace) -> int:
    info = inspect_weights(args.path)
    c, h, w = info["input_shape"]
    print(f"input:      {c} x {h} x {w}")
    print(f"layers:     {info['layer_count']} "
          f"({info['encoder_count']} encoder)")
    for row in info["layers"]:
        print(f"  {row}")
    print(f"parameters: {info['parameters']}")
    print(f"checksum:   {'ok' if info['checksum_ok'] else 'FAILED'}")
    chain = "ok" if info["chain_ok"] else f"BROKEN ({info['chain_message']})"
    print(f"layer chain: {chain}")
    return 0 if info["checksum_ok"] and info["chain_ok"] else 3


# ---------------------------------------------------------------------------
# parser

def _add_geometry_flags(p: argparse.ArgumentParser, with_sizes: bool) -> None:
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument("--preset", choices=("random", "straight"),
                   default="random", help="geometry family")
    p.add_argument("--n-segment", dest="n_segment", type=int, default=None,
                   help="number of constriction segments (default: random 1-3)")
    if with_sizes:
        p.add_argument("--d", type=float, default=1e-3,
                       help="channel diameter in meters")
        p.add_argument("--l-inlet", type=float, default=0.007)
        p.add_argument("--l-stenotic", type=float, default=0.01)
        p.add_argument("--l-outlet", type=float, default=0.007)
        p.add_argument("--f-lower", type=float, default=None,
                       help="pin every lower-wall strength")
        p.add_argument("--f-upper", type=float, default=None,
                       help="pin every upper-wall strength")


def _add_override_flags(p: argparse.ArgumentParser) -> None:
    """Flags mirroring RunConfig; None means 'not given, keep file value'."""
    g = p.add_argument_group("geometry")
    g.add_argument("--geometry", dest="geometry_file", default=None,
                   help="geometry description file")
    g.add_argument("--preset", choices=("random", "straight"), default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--n-segment", dest="n_segment", type=int, default=None)
    g.add_argument("--factor", type=int, default=None,
                   help="stenotic-region scale factor")
    g.add_argument("--scale-mode", dest="scale_mode",
                   choices=("duplicate", "random"), default=None)
    g.add_argument("--height", type=int, default=None)
    g.add_argument("--v-max", dest="v_max", type=float, default=None,
                   help="inlet peak velocity in m/s")
    d = p.add_argument_group("decomposition")
    d.add_argument("--width", type=int, default=None,
                   help="subdomain width in columns")
    d.add_argument("--xi", type=int, default=None, help="boundary band width")
    d.add_argument("--delta", type=int, default=None,
                   help="overlap (default 2*xi)")
    d.add_argument("--cover", choices=("max", "full"), default=None)
    d.add_argument("--w-global", dest="w_global", type=int, default=None,
                   help="override the window width in columns")
    s = p.add_argument_group("iteration")
    s.add_argument("--epsilon", type=float, default=None,
                   help="convergence threshold on AbsErr")
    s.add_argument("--max-iter", dest="max_iterations", type=int, default=None)
    s.add_argument("--init", choices=("none", "parabolic"), default=None)
    s.add_argument("--stagnation-window", dest="stagnation_window",
                   type=int, default=None)
    s.add_argument("--stagnation-threshold", dest="stagnation_threshold",
                   type=float, default=None)
    s.add_argument("--divergence-run", dest="divergence_run",
                   type=int, default=None)
    s.add_argument("--divergence-factor", dest="divergence_factor",
                   type=float, default=None)
    b = p.add_argument_group("solver")
    b.add_argument("--backend", choices=BACKENDS, default=None)
    b.add_argument("--weights", default=None, help="weight file for cnn")
    b.add_argument("--constrained", dest="constrained",
                   action=argparse.BooleanOptionalAction, default=None,
                   help="apply the flow-rate constraint (cnn)")
    o = p.add_argument_group("output")
    o.add_argument("--out", default=None, help="output directory")
    o.add_argument("--figures", dest="figures",
                   action=argparse.BooleanOptionalAction, default=None)
    o.add_argument("--snapshot-every", dest="snapshot_every", type=int,
                   default=None, help="save the field every k iterations")
    o.add_argument("--reference-vx", dest="reference_vx", default=None)
    o.add_argument("--reference-vy", dest="reference_vy", default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stenoflow",
        description="Decomposed stationary-flow prediction on pixel grids.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw and rasterize geometries")
    _add_geometry_flags(p, with_sizes=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--out", default="geometries")
    p.add_argument("--skip-raster", action="store_true",
                   help="write only the description files")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("synthesize", help="cut training pairs")
    p.add_argument("--geometries", required=True,
                   help="directory produced by generate")
    p.add_argument("--out", default="pairs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--v-max", dest="v_max", type=float, default=None,
                   help="fixed inlet peak (default: drawn per geometry)")
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--xi", type=int, default=10)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("run", help="one decomposed solve")
    p.add_argument("--config", default=None, help="run configuration file")
    _add_override_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("scalability",
                       help="sweep stenotic-region scale factors")
    p.add_argument("--factors", default="2,4,8",
                   help="comma-separated scale factors")
    p.add_argument("--geometry", default=None)
    _add_geometry_flags(p, with_sizes=False)
    p.add_argument("--scale-mode", dest="scale_mode",
                   choices=("duplicate", "random"), default="duplicate")
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--v-max", dest="v_max", type=float, default=0.3)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--xi", type=int, default=10)
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--cover", choices=("max", "full"), default="max")
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--max-iter", dest="max_iterations", type=int, default=200)
    p.add_argument("--init", choices=("none", "parabolic"), default="none")
    p.add_argument("--backend", choices=("stream", "cnn"), default="stream")
    p.add_argument("--weights", default=None)
    p.add_argument("--out", default="scalability")
    p.add_argument("--figures", dest="figures",
                   action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_scalability)

    p = sub.add_parser("evaluate", help="GRE reports for saved fields")
    p.add_argument("--pred", required=True,
                   help="prediction directory (or parent of pair dirs)")
    p.add_argument("--ref", required=True, help="reference directory")
    p.add_argument("--mask", default=None, help="shared mask file")
    p.add_argument("--out", default="evaluation")
    p.add_argument("--figures", dest="figures",
                   action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inspect-weights", help="weight-file summary")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect_weights)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WeightFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except StenoflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
