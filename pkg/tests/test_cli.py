"""
Подкоманды командной строки: коды завершения, файлы вывода, манифесты
и приоритет параметров
"""
import os

import numpy as np
import pandas as pd
import pytest

import lab
from mtm.fields import Grid, SpinorField, l2_norm_sq
from mtm.solitons import stationary_soliton
from services.manifest import RunManifest
from services.mode_manager import ModeManager
from services.parameters import ParameterResolver, UsageError
from utils.snapshots import FIELD_COLUMNS, read_field, read_frame, read_json, write_field

LAM_RE = repr(float(np.cos(np.pi / 4)))
LAM_IM = repr(float(np.sin(np.pi / 4)))
HALF_PI = repr(float(np.pi / 2))


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write_config(path, **values):
    path.write_text("".join(f"{k}={v}\n" for k, v in values.items()), encoding="utf-8")
    return str(path)


def make_soliton(workdir, n=2048, half=30.0):
    path = str(workdir / "soliton.csv")
    code = lab.main(["soliton", "--gamma", HALF_PI, "--grid-l", str(half), "--grid-n", str(n), "--out", path])
    assert code == 0
    return path


# Коды завершения


def test_no_arguments_is_usage_error(workdir):
    assert lab.main([]) == 2


def test_unknown_flag_is_usage_error(workdir):
    assert lab.main(["soliton", "--bogus", "1"]) == 2
    assert lab.main(["nonexistent"]) == 2


def test_help_exits_cleanly(workdir):
    assert lab.main(["soliton", "--help"]) == 0


def test_missing_gamma_is_usage_error(workdir):
    assert lab.main(["soliton", "--out", str(workdir / "s.csv")]) == 2


def test_domain_error_exit_code(workdir):
    assert lab.main(["soliton", "--gamma", "4.0", "--out", str(workdir / "s.csv")]) == 1
    assert not (workdir / "s.csv").exists()


def test_missing_input_file(workdir):
    assert lab.main(["eigen", "--field", str(workdir / "absent.csv"), "--gamma", HALF_PI]) == 1


# soliton


def test_soliton_writes_field_and_manifest(workdir):
    path = make_soliton(workdir)
    frame = read_frame(path)
    assert list(frame.columns) == FIELD_COLUMNS
    assert len(frame) == 2048
    manifest = RunManifest.read(path + ".manifest.json")
    assert manifest.subcommand == "soliton"
    assert manifest.results["charge"] == pytest.approx(2 * np.pi, abs=1e-6)
    assert manifest.parameters["GRID_N"] == 2048
    assert manifest.stale_files() == []


def test_manifest_detects_changed_output(workdir):
    path = make_soliton(workdir, n=256, half=10.0)
    with open(path, "a", encoding="utf-8") as handle:
        handle.write("\n")
    assert RunManifest.read(path + ".manifest.json").stale_files() == [path]


def test_field_round_trip_is_lossless(workdir, rng):
    grid = Grid.symmetric(5.0, 64)
    f = SpinorField(grid, rng.normal(size=64) + 1j * rng.normal(size=64), rng.normal(size=64) * 1e-9)
    path = str(workdir / "f.csv")
    write_field(f, path)
    back = read_field(path)
    assert np.array_equal(back.u, f.u) and np.array_equal(back.v, f.v)
    assert back.grid.dx == pytest.approx(grid.dx, rel=1e-12)
    assert back.grid.periodic


def test_config_file_and_flag_precedence(workdir):
    cfg = write_config(workdir / "run.cfg", GAMMA="1.0", GRID_N="512", GRID_L="20")
    out = str(workdir / "a.csv")
    assert lab.main(["soliton", "--config", cfg, "--out", out]) == 0
    assert len(read_frame(out)) == 512
    assert read_json(out + ".manifest.json")["results"]["charge"] == pytest.approx(4.0, abs=1e-6)

    out = str(workdir / "b.csv")
    assert lab.main(["soliton", "--config", cfg, "--gamma", "0.5", "--grid-n", "256", "--out", out]) == 0
    assert len(read_frame(out)) == 256
    assert read_json(out + ".manifest.json")["results"]["charge"] == pytest.approx(2.0, abs=1e-6)


def test_unknown_config_key(workdir):
    cfg = write_config(workdir / "bad.cfg", GAMMA="1.0", COLOUR="blue")
    assert lab.main(["soliton", "--config", cfg, "--out", str(workdir / "s.csv")]) == 2


def test_missing_config_file(workdir):
    assert lab.main(["soliton", "--config", str(workdir / "none.cfg"), "--gamma", "1.0"]) == 2


# eigen и backlund


def test_eigen_then_backlund_down(workdir):
    field = make_soliton(workdir)
    prefix = str(workdir / "eig")
    assert lab.main(["eigen", "--field", field, "--gamma", HALF_PI, "--out-prefix", prefix]) == 0
    summary = read_json(prefix + ".json")
    assert complex(summary["lambda_re"], summary["lambda_im"]) == pytest.approx(np.exp(0.25j * np.pi), abs=1e-6)
    assert set(summary["remainder_sup"]) == {"r11", "r12", "r21", "r22"}

    out = str(workdir / "small.csv")
    code = lab.main([
        "backlund", "--field", field, "--eigenvector", prefix + "_eigenvector.csv",
        "--lambda-re", repr(summary["lambda_re"]), "--lambda-im", repr(summary["lambda_im"]),
        "--direction", "down", "--out", out,
    ])
    assert code == 0
    assert np.sqrt(l2_norm_sq(read_field(out))) < 1e-5
    manifest = RunManifest.read(out + ".manifest.json")
    assert field in manifest.inputs


def test_backlund_down_requires_eigenvector(workdir):
    field = make_soliton(workdir, n=256, half=10.0)
    assert lab.main(["backlund", "--field", field, "--lambda-re", LAM_RE, "--lambda-im", LAM_IM]) == 2


def test_backlund_up_from_zero_field(workdir):
    grid = Grid.symmetric(30.0, 2048)
    zero = str(workdir / "zero.csv")
    write_field(SpinorField.zeros(grid), zero)
    out = str(workdir / "up.csv")
    code = lab.main([
        "backlund", "--field", zero, "--lambda-re", LAM_RE, "--lambda-im", LAM_IM,
        "--direction", "up", "--a", "0", "--theta", "0", "--t", "0", "--out", out,
    ])
    assert code == 0
    result = read_field(out)
    expected = stationary_soliton(np.pi / 2, 0.0, 0.0, 0.0, result.grid)
    assert np.max(np.abs(result.u - expected.u)) < 1e-8
    assert np.max(np.abs(result.v - expected.v)) < 1e-8


# evolve


def test_evolve_writes_snapshots_and_series(workdir):
    field = make_soliton(workdir, n=512, half=20.0)
    prefix = str(workdir / "run_")
    assert lab.main(["evolve", "--field", field, "--t-end", "0.5", "--stride", "4", "--out-prefix", prefix]) == 0
    series = read_frame(prefix + "series.csv")
    assert list(series.columns) == ["t", "charge", "charge_drift"]
    assert len(series) == 3
    assert series["charge_drift"].max() < 1e-10
    assert os.path.exists(prefix + "snapshot_0000.csv")
    assert os.path.exists(prefix + "snapshot_0002.csv")
    assert read_json(prefix + "manifest.json")["results"]["steps"] == 6


def test_evolve_rejects_wrong_step(workdir):
    field = make_soliton(workdir, n=256, half=10.0)
    assert lab.main(["evolve", "--field", field, "--t-end", "1", "--dt", "0.01"]) == 1


# stability


def test_stability_single_epsilon(workdir):
    out_dir = str(workdir / "exp")
    code = lab.main([
        "stability", "--gamma0", HALF_PI, "--epsilon", "0.01", "--t-end", "0.2",
        "--pipeline", "both", "--grid-n", "2048", "--out-dir", out_dir,
    ])
    assert code == 0
    records = read_frame(os.path.join(out_dir, "records.csv"))
    assert {"t", "dist", "small_norm", "pipeline_gap"} <= set(records.columns)
    summary = read_frame(os.path.join(out_dir, "summary.csv"))
    assert len(summary) == 1
    manifest = read_json(os.path.join(out_dir, "manifest.json"))
    assert manifest["parameters"]["PIPELINE"] == "both"


def test_stability_epsilon_list(workdir):
    out_dir = str(workdir / "exp")
    code = lab.main([
        "stability", "--gamma0", HALF_PI, "--epsilon", "0.01", "--epsilon", "0.02",
        "--t-end", "0.1", "--grid-n", "1024", "--out-dir", out_dir,
    ])
    assert code == 0
    assert os.path.exists(os.path.join(out_dir, "records_eps_0.01.csv"))
    assert os.path.exists(os.path.join(out_dir, "records_eps_0.02.csv"))
    summary = pd.read_csv(os.path.join(out_dir, "summary.csv"))
    assert list(summary["epsilon"]) == [0.01, 0.02]


def test_stability_epsilon_from_config(workdir):
    cfg = write_config(workdir / "exp.cfg", GAMMA0=HALF_PI, EPSILON="0.01,0.02", T_END="0.1", GRID_N="1024")
    out_dir = str(workdir / "exp")
    assert lab.main(["stability", "--config", cfg, "--out-dir", out_dir]) == 0
    assert len(read_frame(os.path.join(out_dir, "summary.csv"))) == 2


def test_stability_invalid_pipeline(workdir):
    assert lab.main(["stability", "--gamma0", "1.0", "--epsilon", "0.01", "--pipeline", "sideways"]) == 2


def test_stability_invalid_pipeline_in_config(workdir):
    cfg = write_config(workdir / "exp.cfg", PIPELINE="sideways")
    assert lab.main(["stability", "--config", cfg, "--gamma0", "1.0", "--epsilon", "0.01"]) == 2


def test_stability_unknown_shape_in_config(workdir):
    cfg = write_config(workdir / "exp.cfg", SHAPE="triangle")
    assert lab.main(["stability", "--config", cfg, "--gamma0", "1.0", "--epsilon", "0.01"]) == 2


def test_stability_repeated_epsilon(workdir):
    out_dir = str(workdir / "exp")
    code = lab.main(["stability", "--gamma0", HALF_PI, "--epsilon", "0.01", "--epsilon", "0.01",
                     "--out-dir", out_dir])
    assert code == 2
    assert not os.path.exists(os.path.join(out_dir, "summary.csv"))


# Параметры и режимы


def test_parameter_resolver_precedence(tmp_path):
    cfg = write_config(tmp_path / "p.cfg", GRID_N="300", T_END="abc")
    params = ParameterResolver(cfg)
    assert params.get("GRID_N", None, int, 10) == 300
    assert params.get("GRID_N", 20, int, 10) == 20
    assert params.get("GRID_L", None, float, 7.5) == 7.5
    assert params.get_complex("LAMBDA_RE", "LAMBDA_IM", 0.5, None) == 0.5 + 0j
    with pytest.raises(UsageError):
        params.get("T_END", None, float)
    with pytest.raises(UsageError):
        params.get("GAMMA", None, float, required=True)
    assert params.resolved["GRID_L"] == 7.5


def test_mode_manager():
    manager = ModeManager()
    assert manager.choices() == ["direct", "backlund", "both"]
    assert manager.parse(" Both ").value == "both"
    assert manager.parse(None) is manager.default
    assert "подбор (a, θ)" in manager.stages(manager.parse("both"))
    with pytest.raises(ValueError):
        manager.parse("sideways")
