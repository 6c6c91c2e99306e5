import hashlib
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from lorentz_imcf.cli import main
from lorentz_imcf.config import format_config, parse_config, read_config_text, write_resolved
from lorentz_imcf.discretization import build_grid
from lorentz_imcf.errors import ConfigError, MonitorFailure
from lorentz_imcf.flow import FlowConfig, GraphState, evolve
from lorentz_imcf.output import (HEADER, emit_csv, emit_snapshot, load_snapshot,
                                 read_trajectory)

SMALL = ["--cells", "32", "--t-end", "0.05", "--csv-every", "10"]


def sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# --- configuration ------------------------------------------------------------

def test_defaults():
    cfg = parse_config()
    assert cfg == FlowConfig()
    assert (cfg.mode, cfg.n, cfg.cells, cfg.cfl_gamma, cfg.t_end) == ("radial", 2, 256, 0.2, 2.0)


def test_empty_and_comment_only_files(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("")
    assert parse_config(p) == FlowConfig()
    p.write_text("# nothing\n\n   # still nothing\n")
    assert parse_config(p) == FlowConfig()


def test_file_values_and_inline_comments(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("cells = 64  # coarse\nu0 = bump:1.5,0.05\ndt = none\nmode=radial\n")
    cfg = parse_config(p)
    assert cfg.cells == 64 and cfg.u0.kind == "bump" and cfg.dt is None


def test_override_precedence(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("cells = 64\nt_end = 1.0\n")
    cfg = parse_config(p, {"cells": "128"})
    assert cfg.cells == 128 and cfg.t_end == 1.0
    assert parse_config(None, {"t_end": 0.5}).t_end == 0.5


@pytest.mark.parametrize("text, line", [
    ("cells = 64\nbogus = 1\n", 2),
    ("cells = sixty\n", 1),
    ("cells = 64\nno equals sign\n", 2),
    ("mode = hexagon\n", 1),
    ("t_end = 1\ncfl_gamma = 0.9\n", 2),
    ("cells = 64\ndt = -1\n", 2),
])
def test_bad_lines_are_reported_with_line_number(text, line):
    with pytest.raises(ConfigError) as info:
        read_config_text(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.cfg")


def test_resolved_round_trip(tmp_path):
    cfg = FlowConfig(u0="bump:1.5,0.05", cells=64, t_end=0.3, dt=1e-4,
                     c_convention="value:0.4", out_dir=str(tmp_path))
    path = write_resolved(cfg)
    again = parse_config(path)
    assert again == cfg
    assert format_config(again) == format_config(cfg)


# --- trajectory and snapshot files --------------------------------------------

@pytest.fixture(scope="module")
def small_run():
    cfg = FlowConfig(u0="bump:1.5,0.05", cells=32, t_end=0.05, csv_every=10)
    return cfg, *evolve(cfg)


def test_trajectory_round_trip(tmp_path, small_run):
    cfg, records, _ = small_run
    path = emit_csv(records, tmp_path / "t.csv")
    with open(path) as fh:
        assert fh.readline().strip().split(",") == HEADER
    assert read_trajectory(path) == records


def test_emit_csv_rejects_unordered_rows(tmp_path, small_run):
    _, records, _ = small_run
    with pytest.raises(ValueError):
        emit_csv([records[1], records[0]], tmp_path / "t.csv")


@pytest.mark.parametrize("corrupt", [
    lambda lines: ["t,u\n"] + lines[1:],
    lambda lines: lines[:2] + [lines[2].replace(",", ",x,", 1)] + lines[3:],
    lambda lines: lines[:2] + ["nan" + lines[2][lines[2].index(","):]] + lines[3:],
    lambda lines: [lines[0], lines[2], lines[1]] + lines[3:],
    lambda lines: lines[:1],
])
def test_malformed_trajectory(tmp_path, small_run, corrupt):
    _, records, _ = small_run
    path = emit_csv(records, tmp_path / "t.csv")
    with open(path) as fh:
        lines = fh.readlines()
    with open(path, "w") as fh:
        fh.writelines(corrupt(lines))
    with pytest.raises(MonitorFailure):
        read_trajectory(path)


def test_missing_trajectory(tmp_path):
    with pytest.raises(ConfigError):
        read_trajectory(tmp_path / "none.csv")


@pytest.mark.parametrize("mode", ["radial", "disk"])
def test_snapshot_round_trip(tmp_path, mode):
    g = build_grid(mode, 2, 1.0, 16, 8)
    u = 1.5 * (1 + 0.05 * np.cos(np.pi * g.rho))
    s = GraphState(0.3, u, 0.2, "raw")
    path = emit_snapshot(s, g, tmp_path / "s.csv")
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    coords = ["rho"] if mode == "radial" else ["r", "theta"]
    assert header == ["t", *coords, "u", "u_rescaled", "v", "H", "grad_phi"]
    back = load_snapshot(path, g, 0.2)
    assert back.t == 0.3 and np.array_equal(back.u, u)
    res = load_snapshot(path, g, 0.2, mode="rescaled")
    assert np.allclose(res.u, u / math.exp(-0.3 / 2 + 0.2), rtol=1e-15)
    with pytest.raises(ValueError):
        load_snapshot(path, build_grid(mode, 2, 1.0, 32, 8), 0.2)


# --- command line -------------------------------------------------------------

def test_run_writes_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(["run", *SMALL, "--u0", "bump:1.5,0.05", "--snapshot-every", "20",
                 "--out-dir", str(out)]) == 0
    traj = read_trajectory(out / "trajectory.csv")
    assert traj[0].t == 0
    snaps = sorted(os.listdir(out / "snapshots"))
    assert snaps[0] == "step_00000000.csv" and snaps[1] == "step_00000020.csv"
    assert parse_config(out / "config.resolved").cells == 32


def test_run_is_deterministic(tmp_path):
    paths = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["run", *SMALL, "--u0", "bump:1.5,0.05", "--out-dir", str(out)]) == 0
        paths.append(out / "trajectory.csv")
    assert sha(paths[0]) == sha(paths[1])


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("cells = 64\nt_end = 0.02\n")
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--cells", "32", "--out-dir", str(out)]) == 0
    resolved = parse_config(out / "config.resolved")
    assert resolved.cells == 32 and resolved.t_end == 0.02


@pytest.mark.parametrize("argv", [
    ["run", "--mode", "hexagon"],
    ["run", "--cells", "8"],
    ["run", "--u0", "bump:1.0,0.9"],
    ["run", "--cfl-gamma", "0.7"],
    ["run", "--n", "3", "--mode", "disk"],
    ["run", "--bogus", "1"],
    ["run", "--u0", "bump:1.5,0.05", "--c-convention", "value:5"],
    ["frobnicate"],
])
def test_config_errors_exit_4(tmp_path, argv):
    with pytest.raises(SystemExit) as info:
        code = main(argv + ["--out-dir", str(tmp_path)])
        raise SystemExit(code)
    assert info.value.code == 4


def test_bad_config_line_exit_4(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("cells = 32\nwhat = 3\n")
    assert main(["run", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 4
    assert "line 2" in capsys.readouterr().err


def test_unwritable_out_dir_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", *SMALL, "--out-dir", str(blocker / "sub")]) == 4


def test_singularity_exit_3_keeps_partial_trajectory(tmp_path):
    out = tmp_path / "s"
    code = main(["run", "--u0", "bump:1.5,0.05", "--cells", "32", "--dt", "0.5",
                 "--t-end", "1", "--out-dir", str(out)])
    assert code == 3
    assert len(read_trajectory(out / "trajectory.csv")) == 1


def test_verify_fresh_run_and_stored_trajectory(tmp_path, capsys):
    out = tmp_path / "v"
    args = [*SMALL, "--u0", "bump:1.5,0.05", "--out-dir", str(out)]
    assert main(["run", *args]) == 0
    assert main(["verify", *args]) == 0
    assert capsys.readouterr().out.strip().endswith("overall: pass")
    traj = out / "trajectory.csv"
    assert main(["verify", *args, "--trajectory", str(traj)]) == 0
    lines = traj.read_text().splitlines()
    lines[2] = lines[2].replace(",", ",oops,", 1)
    traj.write_text("\n".join(lines) + "\n")
    assert main(["verify", *args, "--trajectory", str(traj)]) == 2


def test_verify_detects_violation_in_stored_trajectory(tmp_path):
    out = tmp_path / "v"
    args = [*SMALL, "--u0", "bump:1.5,0.05", "--out-dir", str(out)]
    assert main(["run", *args]) == 0
    records = read_trajectory(out / "trajectory.csv")
    k = len(records) - 1
    from dataclasses import replace
    records[k] = replace(records[k], max_phi=records[k].max_phi + 0.1)
    emit_csv(records, out / "bad.csv")
    assert main(["verify", *args, "--trajectory", str(out / "bad.csv")]) == 2


def test_oracle_compare(capsys):
    assert main(["oracle-compare", "--u0", "constant:1.5", "--cells", "32",
                 "--t-end", "0.5"]) == 0
    assert "pass" in capsys.readouterr().out
    assert main(["oracle-compare", "--u0", "bump:1.5,0.05", "--cells", "32"]) == 4


def test_run_rescaled_report(tmp_path):
    out = tmp_path / "r"
    assert main(["run-rescaled", *SMALL, "--u0", "bump:1.5,0.05", "--out-dir", str(out)]) == 0
    text = (out / "report.txt").read_text()
    assert text.startswith("c = ") and "rescaled_convergence: inconclusive" in text


def test_geometry_check(capsys):
    assert main(["geometry-check", "--seed", "1", "--samples", "50"]) == 0
    assert capsys.readouterr().out.strip().endswith("overall: pass")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lorentz_imcf", "run", "--mode", "hexagon",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 4
    assert "hexagon" in proc.stderr
