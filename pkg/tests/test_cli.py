"""End-to-end command-line runs, exercised in process via main(argv).

Covers the documented exit codes (0 success, 2 parameter/config, 3
file/weight format, 4 model/numeric, 5 diverged), the on-disk layout of
each subcommand, and the figure exports.
"""

import configparser
import dataclasses
import pathlib
import shutil

import numpy as np
import pytest

import stenoflow.cli as cli
from stenoflow.cli import main
from stenoflow.config import load_run_config
from stenoflow.fields import load_field
from stenoflow.schwarz import Status

GOLDEN = pathlib.Path(__file__).resolve().parent / "fixtures" / "cnn_golden"

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def read_report(path):
    parser = configparser.ConfigParser(interpolation=None)
    assert parser.read(path)
    return parser


def laplace_args(out, extra=()):
    return ["run", "--backend", "laplace", "--height", "24",
            "--w-global", "120", "--width", "60", "--xi", "4", "--delta", "8",
            "--epsilon", "1e-9", "--out", str(out), *extra]


def test_laplace_run_writes_reports_fields_and_snapshots(tmp_path):
    out = tmp_path / "lap"
    rc = main(laplace_args(out, ["--no-figures", "--snapshot-every", "5"]))
    assert rc == 0

    for name in ("config.ini", "report.ini", "trace.txt",
                 "vx.csv", "vy.csv", "mask.csv"):
        assert (out / name).exists(), name

    report = read_report(out / "report.ini")
    assert report["run"]["status"] == "Converged"
    assert float(report["run"]["abs_err"]) <= 1e-9
    assert report["run"]["epsilon"] == "1e-09"
    assert report["decomposition"]["n_subdomains"] == "3"
    assert report["decomposition"]["covered"] == "120"
    # stitched result agrees with the direct solve over every covered column
    assert float(report["gre"]["max_abs_diff"]) <= 1e-6

    field = load_field(str(out / "vx.csv"))
    assert field.grid.shape == (24, 120)

    snap = out / "snapshots" / "iter_0005" / "vx.csv"
    assert snap.exists()
    assert load_field(str(snap)).grid.shape == (24, 120)

    # the effective configuration is reloadable
    cfg = load_run_config(str(out / "config.ini"))
    assert cfg.backend == "laplace" and cfg.epsilon == 1e-9


def test_run_figures_are_png_files(tmp_path):
    out = tmp_path / "figs"
    assert main(laplace_args(out)) == 0
    for name in ("field.png", "convergence.png"):
        data = (out / name).read_bytes()
        assert data.startswith(PNG_MAGIC) and len(data) > 1000


def test_flags_override_config_file(tmp_path):
    cfg_path = tmp_path / "run.ini"
    cfg_path.write_text(
        "[solver]\nbackend = laplace\n"
        "[window]\nheight = 24\n"
        "[decomposition]\nw_global = 120\nwidth = 60\nxi = 4\ndelta = 8\n"
        "[schwarz]\nepsilon = 1e-3\n"
        f"[output]\nout = {tmp_path / 'from_file'}\nfigures = false\n")
    out = tmp_path / "from_flag"
    rc = main(["run", "--config", str(cfg_path),
               "--epsilon", "1e-9", "--out", str(out)])
    assert rc == 0
    assert not (tmp_path / "from_file").exists()
    report = read_report(out / "report.ini")
    assert report["run"]["epsilon"] == "1e-09"  # flag beat the file
    assert report["decomposition"]["w_global"] == "120"  # file kept


def test_stream_run_reproduces_its_oracle(tmp_path):
    out = tmp_path / "stream"
    rc = main(["run", "--preset", "straight", "--height", "32",
               "--width", "120", "--xi", "4", "--delta", "8",
               "--out", str(out), "--no-figures"])
    assert rc == 0
    report = read_report(out / "report.ini")
    assert report["run"]["status"] == "Converged"
    assert int(report["run"]["iterations"]) <= 2
    assert float(report["gre"]["gre"]) <= 1e-12
    assert report["gre"]["category"] == "<=1%"
    assert report["decomposition"]["w_global"] == "576"
    assert load_field(str(out / "vx.csv")).grid.shape == (32, 576)


def test_bad_decomposition_exits_2(tmp_path, capsys):
    rc = main(["run", "--backend", "laplace", "--height", "24",
               "--w-global", "120", "--width", "60", "--xi", "40",
               "--out", str(tmp_path / "x")])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_cnn_without_weights_exits_2(tmp_path):
    assert main(["run", "--backend", "cnn", "--out", str(tmp_path / "x")]) == 2


def test_missing_weights_file_exits_3(tmp_path):
    rc = main(["run", "--backend", "cnn",
               "--weights", str(tmp_path / "absent.usds"),
               "--preset", "straight", "--height", "32",
               "--width", "120", "--xi", "4",
               "--out", str(tmp_path / "x"), "--no-figures"])
    assert rc == 3


def test_model_grid_mismatch_exits_4(tmp_path):
    # 16x16 fixture model against 32-row subdomains
    rc = main(["run", "--backend", "cnn", "--weights", str(GOLDEN / "weights.usds"),
               "--preset", "straight", "--height", "32",
               "--width", "120", "--xi", "4",
               "--out", str(tmp_path / "x"), "--no-figures"])
    assert rc == 4


def test_diverged_run_exits_5_but_still_writes(tmp_path, monkeypatch):
    real = cli.schwarz_run

    def fake(state, solver, config, callback=None):
        return dataclasses.replace(real(state, solver, config, callback),
                                   status=Status.DIVERGED)

    monkeypatch.setattr(cli, "schwarz_run", fake)
    out = tmp_path / "div"
    rc = main(laplace_args(out, ["--no-figures"]))
    assert rc == 5
    report = read_report(out / "report.ini")
    assert report["run"]["status"] == "Diverged"
    assert "gre" not in report  # no quality section for a diverged field
    assert (out / "vx.csv").exists()


def test_inspect_weights_reports_inventory(capsys):
    assert main(["inspect-weights", str(GOLDEN / "weights.usds")]) == 0
    out = capsys.readouterr().out
    assert "input:      3 x 16 x 16" in out
    assert "parameters: 16970" in out
    assert "checksum:   ok" in out


def test_inspect_weights_corrupt_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.usds"
    blob = bytearray((GOLDEN / "weights.usds").read_bytes())
    blob[-1] ^= 0xFF
    bad.write_bytes(bytes(blob))
    assert main(["inspect-weights", str(bad)]) == 3
    assert "FAILED" in capsys.readouterr().out


def test_inspect_weights_missing_exits_3(tmp_path):
    assert main(["inspect-weights", str(tmp_path / "absent.usds")]) == 3


def test_generate_synthesize_evaluate_chain(tmp_path, capsys):
    geos = tmp_path / "geos"
    pairs = tmp_path / "pairs"
    ev = tmp_path / "eval"

    assert main(["generate", "--count", "2", "--seed", "3",
                 "--height", "32", "--out", str(geos)]) == 0
    for k in range(2):
        gdir = geos / f"geom_{k:04d}"
        for name in ("geometry.ini", "sdf.csv", "mask.csv"):
            assert (gdir / name).exists(), name
    assert load_field(str(geos / "geom_0000" / "sdf.csv")).grid.shape[0] == 32

    assert main(["synthesize", "--geometries", str(geos), "--out", str(pairs),
                 "--height", "32", "--xi", "4", "--width", "64",
                 "--seed", "1"]) == 0
    capsys.readouterr()
    pair_dirs = sorted((pairs / "geom_0000").glob("pair_*"))
    assert len(pair_dirs) == 29  # 9 regular + 4 sets x 5 stenotic windows
    first = pair_dirs[0]
    for name in ("input_sdf.csv", "input_vx.csv", "input_vy.csv",
                 "target_vx.csv", "target_vy.csv", "pair.ini"):
        assert (first / name).exists(), name

    # network inputs carry velocities only on the boundary bands
    ivx = load_field(str(first / "input_vx.csv"))
    assert ivx.grid.shape == (32, 64)
    assert np.any(ivx.values[:, :4] != 0.0)
    assert not np.any(ivx.values[:, 4:60] != 0.0)

    meta = read_report(first / "pair.ini")
    assert meta["pair"]["width"] == "64" and meta["pair"]["xi"] == "4"
    assert float(meta["pair"]["q_inlet"]) > 0.0

    # predictions identical to references: every pair lands in the best bucket
    rc = main(["evaluate", "--pred", str(pairs / "geom_0000"),
               "--ref", str(pairs / "geom_0000"),
               "--out", str(ev), "--no-figures"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "mean GRE 0" in out and "MSE 0" in out

    hist = (ev / "histogram.csv").read_text().splitlines()
    counts = dict(line.split(",") for line in hist[1:])
    assert int(counts["<=1%"]) == len(pair_dirs)
    assert int(counts["diverged"]) == 0
    rows = (ev / "report.csv").read_text().splitlines()
    assert rows[0] == "name,gre,gre_x,gre_y,category"
    assert len(rows) == 1 + len(pair_dirs)


def test_evaluate_marks_nonfinite_prediction_diverged(tmp_path, capsys):
    from stenoflow import PixelGrid, ScalarField
    from stenoflow.fields import save_field

    grid = PixelGrid(width=6, height=4, dy=1.0)
    ref = tmp_path / "ref"
    pred = tmp_path / "pred"
    ref.mkdir(), pred.mkdir()
    vals = np.ones((4, 6))
    save_field(str(ref / "vx.csv"), ScalarField(grid, vals), units="m/s")
    save_field(str(ref / "vy.csv"), ScalarField(grid, 0 * vals), units="m/s")
    broken = vals.copy()
    broken[2, 3] = np.nan
    save_field(str(pred / "vx.csv"), ScalarField(grid, broken), units="m/s")
    save_field(str(pred / "vy.csv"), ScalarField(grid, 0 * vals), units="m/s")

    out = tmp_path / "ev"
    rc = main(["evaluate", "--pred", str(pred), "--ref", str(ref),
               "--out", str(out)])
    assert rc == 0
    assert "diverged: 1" in capsys.readouterr().out
    hist = dict(line.split(",")
                for line in (out / "histogram.csv").read_text().splitlines()[1:])
    assert hist["diverged"] == "1"
    png = (out / "histogram.png").read_bytes()
    assert png.startswith(PNG_MAGIC)


def test_scalability_writes_summary_curves_and_figure(tmp_path):
    out = tmp_path / "scal"
    rc = main(["scalability", "--factors", "1", "--seed", "5",
               "--height", "32", "--width", "120", "--xi", "4",
               "--epsilon", "1e-5", "--out", str(out)])
    assert rc == 0
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == ("factor,w_global,n_subdomains,iterations,status,"
                          "gre,gre_star")
    row = summary[1].split(",")
    assert row[0] == "1" and row[4] == "Converged"
    assert float(row[5]) <= 1e-12  # stream backend reproduces its oracle
    assert (out / "trace_x1.txt").exists()
    curve = (out / "gre_iterations.csv").read_text().splitlines()
    assert curve[0] == "factor,iteration,gre"
    assert len(curve) == 1 + int(row[3])
    assert (out / "gre.png").read_bytes().startswith(PNG_MAGIC)


def test_scalability_rejects_laplace_backend(tmp_path):
    # parser-level choice restriction: only flow backends scale
    with pytest.raises(SystemExit) as exc:
        main(["scalability", "--factors", "1", "--backend", "laplace",
              "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_bad_factor_list_exits_2(tmp_path):
    rc = main(["scalability", "--factors", "2,zap",
               "--out", str(tmp_path / "x")])
    assert rc == 2


def test_evaluate_empty_directory_exits_2(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    rc = main(["evaluate", "--pred", str(empty), "--ref", str(empty),
               "--out", str(tmp_path / "ev")])
    assert rc == 2


def test_version_flag_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "stenoflow" in capsys.readouterr().out


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--warp-speed", "9"])
    assert exc.value.code == 2
