"""Batch interface: subcommands, file formats, reproducibility."""

import json
from pathlib import Path

import numpy as np
import pytest

from rangesim import cli, engine, params


def _read(path: Path) -> str:
    return path.read_text()


def test_version_exits_zero(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["--version"])
    assert e.value.code == 0


def test_validate_defaults_ok(capsys):
    assert cli.main(["validate"]) == 0
    assert "87 parameters" in capsys.readouterr().out


def test_validate_rejects_bad_file(tmp_path, capsys):
    doc = params.canonical_document(params.default_params())
    for e in doc["params"]:
        if e["id"] == "avg_rain_probability":
            e["default"] = 3.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert cli.main(["validate", "--params", str(bad)]) == 2
    assert "avg_rain_probability" in capsys.readouterr().err


def test_run_prints_targets_json(capsys):
    assert cli.main(["run", "--horizon", "2.0", "--seed", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == set(engine.TARGET_NAMES)
    cfg = engine.RunConfig(horizon=2.0, base_seed=3)
    res = engine.simulate(params.default_params(), cfg)
    for name in engine.TARGET_NAMES:
        assert doc[name] == getattr(res.targets, name)


def test_run_writes_trace(tmp_path, capsys):
    out = tmp_path / "r"
    assert cli.main(["run", "--horizon", "1.0", "--trace",
                     "--out", str(out)]) == 0
    capsys.readouterr()
    assert json.loads(_read(out / "targets.json"))
    lines = _read(out / "trace.csv").splitlines()
    assert lines[0] == "t," + ",".join(engine.TRACE_COLUMNS)
    assert len(lines) == 1 + 128


def test_plan_schedules_without_executing(tmp_path, capsys):
    out = tmp_path / "plan"
    assert cli.main(["sweep", "--n", "4000", "--out", str(out),
                     "--plan"]) == 0
    assert "288000" in capsys.readouterr().out
    manifest = json.loads(_read(out / cli.MANIFEST_NAME))
    assert manifest["scheduled_runs"] == 288_000
    assert manifest["n"] == 4000 and manifest["k"] == 70
    assert manifest["executed"] is False
    # nothing but the manifest: no scenario or result files
    assert sorted(p.name for p in out.iterdir()) == [cli.MANIFEST_NAME]


def test_rank_refuses_unexecuted_plan(tmp_path, capsys):
    out = tmp_path / "plan"
    cli.main(["sweep", "--n", "16", "--out", str(out), "--plan"])
    capsys.readouterr()
    with pytest.raises(SystemExit):
        cli.main(["rank", "--out", str(out)])


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("campaign") / "sw"
    args = ["sweep", "--n", "4", "--horizon", "50", "--out", str(out),
            "--method", "both", "--seed", "12"]
    assert cli.main(args) == 0
    assert cli.main(["rank", "--out", str(out), "--boot", "50"]) == 0
    return out


def test_sweep_outputs_shape(sweep_dir):
    lines = _read(sweep_dir / cli.TARGETS_NAME).splitlines()
    assert lines[0] == ("scenario_id,soil_depth_end,avg_farmers,"
                        "avg_stocking,avg_herbage,avg_earnings,status")
    assert len(lines) == 1 + 4 * 72  # N(k+2) data rows
    assert all(line.endswith(",ok") for line in lines[1:])
    ids = [int(line.split(",", 1)[0]) for line in lines[1:]]
    assert ids == list(range(288))
    scen = _read(sweep_dir / cli.SCENARIOS_NAME).splitlines()
    assert scen[0].split(",")[0] == "scenario_id"
    assert len(scen[0].split(",")) == 71
    assert len(scen) == 1 + 288


def test_sweep_targets_parse_as_finite_floats(sweep_dir):
    lines = _read(sweep_dir / cli.TARGETS_NAME).splitlines()[1:]
    vals = np.array([[float(v) for v in line.split(",")[1:6]]
                     for line in lines])
    assert np.all(np.isfinite(vals))


def test_rank_outputs(sweep_dir):
    for name in ("sobol.csv", "sobol_b3.csv"):
        lines = _read(sweep_dir / name).splitlines()
        assert lines[0] == "target,parameter,si,sti,se_sti,sign,rank"
        assert len(lines) == 1 + 5 * 70
        for target in engine.TARGET_NAMES:
            rows = [l.split(",") for l in lines[1:]
                    if l.startswith(target + ",")]
            assert len(rows) == 70
            assert sorted(int(r[6]) for r in rows) == list(range(1, 71))
            assert {r[5] for r in rows} <= {"+", "-"}
            for r in rows:
                float(r[2]), float(r[3]), float(r[4])
    report = _read(sweep_dir / cli.REPORT_NAME)
    assert "# Sensitivity ranking" in report
    assert "economic/managerial" in report
    conv = json.loads(_read(sweep_dir / cli.CONVERGENCE_NAME))
    assert set(conv) == set(engine.TARGET_NAMES)
    assert set(conv["soil_depth_end"]) == {"jansen-saltelli", "b3"}


def test_rank_ranks_by_total_effect(sweep_dir):
    lines = _read(sweep_dir / "sobol.csv").splitlines()[1:]
    rows = [l.split(",") for l in lines if l.startswith("soil_depth_end,")]
    by_rank = sorted(rows, key=lambda r: int(r[6]))
    stis = [float(r[3]) for r in by_rank]
    assert all(a >= b - 1e-12 for a, b in zip(stis, stis[1:]))


def test_sweep_and_rank_rerun_byte_identical(sweep_dir, tmp_path):
    out2 = tmp_path / "sw2"
    args = ["sweep", "--n", "4", "--horizon", "50", "--out", str(out2),
            "--method", "both", "--seed", "12"]
    assert cli.main(args) == 0
    assert cli.main(["rank", "--out", str(out2), "--boot", "50"]) == 0
    names = [cli.MANIFEST_NAME, cli.SCENARIOS_NAME, cli.TARGETS_NAME,
             "sobol.csv", "sobol_b3.csv", cli.REPORT_NAME,
             cli.CONVERGENCE_NAME]
    for name in names:
        assert _read(sweep_dir / name) == _read(out2 / name), name


def test_rank_refuses_failed_runs(sweep_dir, tmp_path, capsys):
    broken = tmp_path / "broken"
    broken.mkdir()
    for name in (cli.MANIFEST_NAME, cli.SCENARIOS_NAME, cli.TARGETS_NAME):
        (broken / name).write_text(_read(sweep_dir / name))
    lines = _read(broken / cli.TARGETS_NAME).splitlines()
    parts = lines[3].rsplit(",", 1)
    lines[3] = parts[0] + ",failed step 17: state not finite"
    (broken / cli.TARGETS_NAME).write_text("\n".join(lines) + "\n")
    with pytest.raises(SystemExit) as e:
        cli.main(["rank", "--out", str(broken)])
    assert "failed" in str(e.value)


def test_sweep_reports_failures(tmp_path, capsys):
    # a parameter file outside the hard bounds is rejected before any run
    doc = params.canonical_document(
        params.default_params().with_updates({"avg_et0": -5.0}))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--n", "4", "--out", str(tmp_path / "x"),
                  "--params", str(bad)])
