from __future__ import annotations

import csv
import json
import runpy
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

REPO = Path(__file__).resolve().parents[1]
SMALL_GRID = {"base_n": 4, "support_n": 5, "face_n": 16, "interior_n": 32}


def _write_json(path: Path, obj: object) -> Path:
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


def _linear_config(tmp_path: Path, task: str, params: dict | None = None) -> Path:
    return _write_json(
        tmp_path / f"{task}.json",
        {
            "task": task,
            "seed": 5,
            "system": {"variant": "linear"},
            "params": params or {},
            "grid": SMALL_GRID,
        },
    )


def _rows(path: Path) -> list[dict[str, str]]:
    with path.open("r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def test_cli_simulate_writes_trajectory_manifest_and_log(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    cfg = _linear_config(tmp_path, "simulate")
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(cfg), "--out", str(out), "--svg"])
    assert rc == 0

    rows = _rows(out / "pseudotrajectory.csv")
    assert len(rows) == 101
    assert rows[0] == {"k": "0", "x": "0.1", "y": "0.2"}

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["status"] == "pass" and manifest["exit_code"] == 0
    assert manifest["seed"] == 5
    assert manifest["artifacts"] == [
        "pseudotrajectory.csv",
        "pseudotrajectory.svg",
        "resolved_config.json",
    ]
    assert (out / "pseudotrajectory.svg").read_text(encoding="utf-8").startswith(
        "<?xml"
    )
    assert "task=simulate seed=5" in (out / "run.log").read_text(encoding="utf-8")


def test_cli_seed_flag_overrides_the_config(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    cfg = _linear_config(tmp_path, "simulate", {"m": 5})
    out = tmp_path / "out"
    argv = ["simulate", "--config", str(cfg), "--out", str(out), "--seed", "9"]
    assert main(argv) == 0
    resolved = json.loads((out / "resolved_config.json").read_text(encoding="utf-8"))
    assert resolved["seed"] == 9
    assert resolved["out_dir"] == str(out)


def test_cli_check_conditions_passes_for_linear(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    cfg = _linear_config(tmp_path, "check-conditions")
    out = tmp_path / "out"
    assert main(["check-conditions", "--config", str(cfg), "--out", str(out)]) == 0

    rows = _rows(out / "conditions.csv")
    assert [r["condition"] for r in rows] == [
        "C1",
        "C2-C4",
        "C5",
        "C6",
        "C7",
        "C8",
        "C9",
    ]
    assert all(r["passed"] == "1" for r in rows)
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["summary"]["failed"] == []
    assert manifest["summary"]["min_margin"] > 0


def test_cli_derive_chain_writes_the_chain(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    cfg = _linear_config(tmp_path, "derive-chain")
    out = tmp_path / "out"
    assert main(["derive-chain", "--config", str(cfg), "--out", str(out)]) == 0
    chain = json.loads((out / "chain.json").read_text(encoding="utf-8"))
    assert 0 < chain["d"] < chain["delta2"] < chain["Delta"] < chain["Delta0"]
    assert len(_rows(out / "conditions.csv")) == 6


def test_cli_shadow_trials_succeed(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    cfg = _linear_config(tmp_path, "shadow", {"m": 30, "trials": 2})
    out = tmp_path / "out"
    assert main(["shadow", "--config", str(cfg), "--out", str(out), "--svg"]) == 0

    rows = _rows(out / "trials.csv")
    assert [r["shadowed"] for r in rows] == ["1", "1"]
    assert all(float(r["achieved_eps"]) < 0.05 for r in rows)
    assert (out / "shadow_trial0.svg").exists()
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["summary"]["success_rate"] == 1.0
    assert "shadow_distances.csv" in manifest["artifacts"]

    dist = _rows(out / "shadow_distances.csv")
    assert len(dist) == 2 * 31
    for i, row in enumerate(rows):
        mine = [r for r in dist if r["trial"] == str(i)]
        assert [r["k"] for r in mine] == [str(k) for k in range(31)]
        worst = max(float(r["distance"]) for r in mine)
        assert worst == pytest.approx(float(row["achieved_eps"]), rel=1e-12)
    assert all(float(r["distance"]) < 0.05 for r in dist)


def test_cli_stability_writes_per_point_defects(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    params = {
        "grid_n": 2,
        "K": 5,
        "perturbation_fraction": 0.1,
        "expansivity_K": 5,
        "expansivity_pairs": 50,
        "monotone_pairs": 20,
    }
    cfg = _linear_config(tmp_path, "stability", params)
    out = tmp_path / "out"
    assert main(["stability", "--config", str(cfg), "--out", str(out)]) == 0

    rows = _rows(out / "conjugacy.csv")
    assert len(rows) == 4
    assert list(rows[0]) == [
        "i",
        "x",
        "y",
        "hx",
        "hy",
        "achieved_eps",
        "defect_id",
        "defect_conj",
    ]
    report = json.loads((out / "stability.json").read_text(encoding="utf-8"))
    report = report["report"]
    d_id = [float(r["defect_id"]) for r in rows]
    d_conj = [float(r["defect_conj"]) for r in rows]
    assert max(d_id) == pytest.approx(report["defect_id"], rel=1e-12)
    assert max(d_conj) == pytest.approx(report["defect_conj"], rel=1e-12)
    assert all(x < 0.05 for x in d_id)


def test_cli_negative_control_fails_at_the_kicked_step(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    cfg = _linear_config(
        tmp_path,
        "shadow",
        {"m": 20, "trials": 2, "d_fraction": 0.5, "negative_control_step": 5},
    )
    out = tmp_path / "out"
    assert main(["shadow", "--config", str(cfg), "--out", str(out)]) == 0

    rows = _rows(out / "trials.csv")
    assert [r["failing_step"] for r in rows] == ["5", "5"]
    assert {r["failure_reason"] for r in rows} == {"condition W violated"}
    assert [r["shadowed"] for r in rows] == ["0", "0"]


def test_cli_missing_variant_is_a_usage_error(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    from shadowtorus.cli import main

    cfg = _write_json(tmp_path / "c.json", {"task": "shadow", "system": {}})
    rc = main(["shadow", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 1
    assert "system.variant: missing required key" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize("argv", [["nope"], ["shadow"], []])
def test_cli_bad_arguments_exit_one(argv: list[str]) -> None:
    from shadowtorus.cli import main

    assert main(argv) == 1


def test_cli_report_needs_manifests(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["report", "--out", str(empty)]) == 1


def test_cli_report_summarises_runs(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    runs = tmp_path / "runs"
    sim = _linear_config(tmp_path, "simulate", {"m": 10})
    chain = _linear_config(tmp_path, "derive-chain")
    assert main(["simulate", "--config", str(sim), "--out", str(runs / "sim")]) == 0
    argv = ["derive-chain", "--config", str(chain), "--out", str(runs / "dc")]
    assert main(argv) == 0

    assert main(["report", "--out", str(runs)]) == 0
    rows = _rows(runs / "summary.csv")
    assert [(r["run"], r["task"], r["status"]) for r in rows] == [
        ("dc", "derive-chain", "pass"),
        ("sim", "simulate", "pass"),
    ]
    assert float(rows[0]["d"]) > 0
    assert rows[1]["min_margin"] == ""

    # A second report skips the first report's own manifest.
    assert main(["report", "--out", str(runs)]) == 0
    assert len(_rows(runs / "summary.csv")) == 2


def test_out_dir_falls_back_to_the_environment(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    from shadowtorus.cli import OUT_ENV, resolve_out_dir
    from shadowtorus.config import ExperimentConfig

    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    assert resolve_out_dir(ExperimentConfig(task="shadow"), None) == tmp_path / "shadow"
    assert resolve_out_dir(ExperimentConfig(task="report"), None) == tmp_path
    cfg = ExperimentConfig(task="shadow", out_dir="elsewhere")
    assert resolve_out_dir(cfg, None) == Path("elsewhere")
    assert resolve_out_dir(cfg, tmp_path / "flag") == tmp_path / "flag"

    monkeypatch.delenv(OUT_ENV)
    assert resolve_out_dir(ExperimentConfig(task="shadow"), None) == Path("runs/shadow")


def test_unknown_task_has_no_runner() -> None:
    from shadowtorus.tasks import runner_for_task

    with pytest.raises(ValueError, match="Unsupported task"):
        runner_for_task("nope")


def test_python_m_shadowtorus_executes_main(tmp_path: Path) -> None:
    cfg = _linear_config(tmp_path, "simulate", {"m": 5})
    out = tmp_path / "out"

    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "shadowtorus",
            "simulate",
            "--config",
            str(cfg),
            "--out",
            str(out),
        ],
        capture_output=True,
        text=True,
        check=False,
        cwd=REPO,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "pseudotrajectory.csv").exists()


def test___main___module_runs_inprocess_and_exits_zero(tmp_path: Path) -> None:
    cfg = _linear_config(tmp_path, "simulate", {"m": 5})
    out = tmp_path / "out"

    old_argv = sys.argv[:]
    try:
        sys.argv = [
            "python -m shadowtorus",
            "simulate",
            "--config",
            str(cfg),
            "--out",
            str(out),
        ]
        with pytest.raises(SystemExit) as exc:
            runpy.run_module("shadowtorus.__main__", run_name="__main__")
        assert exc.value.code == 0
    finally:
        sys.argv = old_argv

    assert (out / "manifest.json").exists()


def test_io_writers_roundtrip(tmp_path: Path) -> None:
    from shadowtorus.io import (
        read_json,
        read_pseudotrajectory_csv,
        write_json,
        write_pseudotrajectory_csv,
        write_table_csv,
    )
    from shadowtorus.orbits import Pseudotrajectory

    out_json = tmp_path / "out" / "x.json"
    write_json(out_json, {"b": 1, "a": [1.5, None]})
    assert read_json(out_json) == {"a": [1.5, None], "b": 1}
    assert out_json.read_text(encoding="utf-8").index('"a"') < out_json.read_text(
        encoding="utf-8"
    ).index('"b"')

    ptraj = Pseudotrajectory.from_points(np.array([[0.1, 0.2], [0.3, 0.4]]), 1e-3)
    path = tmp_path / "out" / "p.csv"
    write_pseudotrajectory_csv(path, ptraj)
    back = read_pseudotrajectory_csv(path, 1e-3)
    assert np.array_equal(back.points, ptraj.points)

    table = tmp_path / "out" / "t.csv"
    write_table_csv(table, ["a", "b", "c"], [{"a": True, "b": None, "c": 0.5}])
    assert table.read_text(encoding="utf-8").splitlines() == ["a,b,c", "1,,0.5"]
