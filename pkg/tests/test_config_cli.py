import csv
import json

import pytest

from fastdiff_shock.cli import main
from fastdiff_shock.config import REQUIRED, baseline_config, build_config, load_config, parse_text
from fastdiff_shock.errors import ConfigError
from fastdiff_shock.io import fmt, read_csv, snapshot_name

SMALL = """\
# small problem for the CLI tests
flux.u_minus = 2.0
flux.m = 0.75
grid.L = 160
grid.nx = 1600
solver.dt_max = 0.01
solver.cfl = 0.4
solver.floor = 1e-12
run.t_end = 1
run.snapshot_times = 0, 0.5, 1   # inline comment
init.center = 15
init.bump.amplitude = 0.05
init.bump.center = 10
init.bump.width = 2
sweep.m = 0.75
sweep.center = 15
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return p


def test_parse_text():
    raw = parse_text("a = 1  # c\n\n# only comment\nb.c=x, y\n")
    assert raw == {"a": "1", "b.c": "x, y"}
    with pytest.raises(ConfigError, match="duplicate"):
        parse_text("a = 1\na = 2\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_text("just words\n")


def test_baseline():
    cfg = baseline_config()
    assert cfg.model.m == 0.75 and cfg.model.u_minus == 2.0
    assert cfg.settings.nx == 4000 and cfg.settings.snapshot_times == (0.0, 20.0, 40.0)
    assert cfg.settings.bump.amplitude == 0.05


@pytest.mark.parametrize("key", REQUIRED)
def test_missing_key_named(key):
    raw = parse_text(SMALL)
    del raw[key]
    with pytest.raises(ConfigError, match=f"missing config key: {key}"):
        build_config(raw)


def test_unknown_key():
    raw = parse_text(SMALL)
    raw["grid.nz"] = "3"
    with pytest.raises(ConfigError, match="grid.nz"):
        build_config(raw)


def test_bad_number():
    raw = parse_text(SMALL)
    raw["grid.L"] = "long"
    with pytest.raises(ConfigError, match="grid.L"):
        build_config(raw)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.cfg")


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 2.0**-1074, 1e300, -0.0):
        assert float(fmt(v)) == v
    assert snapshot_name(0.5) == "snapshot_0.5.csv" and snapshot_name(20.0) == "snapshot_20.csv"


def test_invalid_m_exit(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(SMALL.replace("flux.m = 0.75", "flux.m = 1.2"))
    assert main(["profile", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "1/2<m<1" in capsys.readouterr().err


def test_missing_key_exit(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(SMALL.replace("grid.nx = 1600\n", ""))
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "grid.nx" in capsys.readouterr().err


def test_profile_command(small_cfg, tmp_path, capsys):
    out = tmp_path / "p"
    assert main(["profile", "--config", str(small_cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "profile_summary.json").read_text())
    assert summary["lambda_minus"] == pytest.approx(1.189207115002721, rel=1e-12)
    cols = read_csv(out / "profile.csv")
    assert list(cols) == ["z", "U", "Uz", "Uzz"]
    assert (cols["Uz"] < 0).all()
    assert "lambda_minus=1.18920711500272" in capsys.readouterr().out


def _sweep_rows(path):
    with open(path / "sweep.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def _tree(path):
    return {p.relative_to(path).as_posix(): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_profile_deterministic(small_cfg, tmp_path):
    for name in ("a", "b"):
        assert main(["profile", "--config", str(small_cfg), "--out", str(tmp_path / name)]) == 0
    assert _tree(tmp_path / "a") == _tree(tmp_path / "b")


def test_simulate_deterministic(small_cfg, tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", "--config", str(small_cfg), "--out", str(tmp_path / name),
                     "--record-every", "7"]) == 0
    a = _tree(tmp_path / "a")
    assert a == _tree(tmp_path / "b")
    assert {"timeseries.csv", "ledger.csv", "summary.json", "snapshot_0.csv", "snapshot_0.5.csv",
            "snapshot_1.csv"} <= set(a)
    rows = list(csv.reader(a["timeseries.csv"].decode().splitlines()))
    assert rows[0][:10] == ["t", "d", "dprime", "Ub", "B", "sup_err", "mass_residual", "phi_wall",
                            "floored_mass", "newton_iters"]
    steps = [int(r[rows[0].index("step")]) for r in rows[1:]]
    assert steps[1] == 7


def test_record_every_validation(small_cfg, tmp_path):
    assert main(["simulate", "--config", str(small_cfg), "--out", str(tmp_path), "--record-every", "0"]) == 2


def test_sweep_single_point_matches_simulate(small_cfg, tmp_path):
    assert main(["simulate", "--config", str(small_cfg), "--out", str(tmp_path / "sim")]) == 0
    assert main(["sweep", "--config", str(small_cfg), "--out", str(tmp_path / "sw")]) == 0
    point = tmp_path / "sw" / "m0.75_center15"
    for name in ("timeseries.csv", "ledger.csv", "snapshot_1.csv"):
        assert (point / name).read_bytes() == (tmp_path / "sim" / name).read_bytes()
    assert [r["status"] for r in _sweep_rows(tmp_path / "sw")] == ["ok"]


def test_sweep_duplicate_points(tmp_path):
    p = tmp_path / "dup.cfg"
    p.write_text(SMALL.replace("sweep.m = 0.75", "sweep.m = 0.8, 0.8"))
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path / "sw")]) == 0
    lines = (tmp_path / "sw" / "sweep.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[1] == lines[2]


def test_sweep_records_failures(tmp_path):
    p = tmp_path / "fail.cfg"
    p.write_text(SMALL.replace("sweep.center = 15", "sweep.center = 3, 15"))
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path / "sw")]) == 0
    rows = _sweep_rows(tmp_path / "sw")
    assert [r["status"] for r in rows] == ["error", "ok"]
    assert "center" in rows[0]["message"]
    # the profile columns are still filled for the failed point
    assert float(rows[0]["tail_exponent_fit"]) == pytest.approx(4.0, rel=0.02)
