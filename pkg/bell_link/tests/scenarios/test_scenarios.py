import json
import math
import os

import pytest

from bell_link.utils.config_loader import build_config, RunConfig
from bell_link.utils.rng import spawn_sequences
from bell_link.scenarios import (
    run_scenario,
    run_delay_point,
    scenario_chsh,
    scenario_attack,
    scenario_lock,
    scenario_scan_delay,
)
from bell_link.scenarios.scan_delay import DelayPointTask, delay_points
from bell_link.errors import ConfigMismatchError, InvalidParameterError


def _run(tmp_path=None, **overrides):
    overrides.setdefault("runtime.progress", False)
    if tmp_path is not None:
        overrides.setdefault("output.directory", str(tmp_path))
    return RunConfig.from_omega_conf(build_config(overrides=overrides))


@pytest.mark.parametrize("v, expected", [(1.0, 2.0 * math.sqrt(2.0)), (0.0, 0.0)])
def test_exact_chsh(v, expected):
    run = _run(**{"model.base_visibility": v})
    result = scenario_chsh(run, exact=True)
    chsh = result.results["chsh"]
    assert chsh["s_value"] == pytest.approx(expected, abs=1e-7)
    assert chsh["s_from_fits"] == pytest.approx(expected, abs=1e-6)
    assert len(result.tables["setting_counts"]) == 4
    assert len(result.tables["sweep_points"]) == 32


def test_sampled_chsh_violates_with_the_lock():
    within_two_sigma = 0
    for seed in (1, 2, 3):
        run = _run(seed=seed)
        assert run.chsh.lock and run.controller.enabled
        chsh = scenario_chsh(run).results["chsh"]
        assert 0.08 <= chsh["s_sigma"] <= 0.16
        assert chsh["s_value"] > 2.0, f"seed {seed}: S={chsh['s_value']}"
        deviation = abs(chsh["s_value"] - 2.386) / chsh["s_sigma"]
        assert deviation <= 3.0, f"seed {seed}: {deviation:.2f} sigma from 2.386"
        within_two_sigma += deviation <= 2.0
    assert within_two_sigma >= 2


def test_attack_scenario():
    run = _run(**{"attack.duration": 0, "attack.max_lambdas": 2})
    result = scenario_attack(run)
    assert result.results["analytic"]["FRANSON"]["s_value"] == 4.0
    assert result.results["analytic"]["HUG"]["s_value"] == pytest.approx(2.0)
    assert result.results["exhaustive"]["FRANSON"]["2"] == pytest.approx(4.0)
    assert result.results["exhaustive"]["HUG"]["2"] == pytest.approx(2.0)
    assert [r.source for r in result.tables["attack"]] == ["analytic", "analytic"]


def test_lock_scenario_settles_after_the_switch():
    run = _run(**{"lock.duration": 0.2, "lock.switch_time": 0.1})
    result = scenario_lock(run)
    assert result.results["settling_time"] < 0.1
    assert result.results["summary"]["n_steps"] == 1000
    assert len(result.tables["lock_trace"]) == 100


def test_delay_points():
    assert len(delay_points(-2.0, 2.0, 0.025)) == 161
    with pytest.raises(InvalidParameterError):
        delay_points(-80.0, 0.0, 1.0)


def test_lock_makes_no_difference_without_drift():
    run = _run(**{"noise.drift_coefficient": 0.0, "scan.point_duration": 0.2})
    seed = spawn_sequences(run.seed, 1)[0]
    records = [
        run_delay_point(DelayPointTask(0, 0.0, 0.0, lock, seed, run))[0] for lock in (True, False)
    ]
    assert records[0] == records[1]
    assert records[0].counts > 0


SMALL_SCAN = {
    "scan.start": -2.0,
    "scan.stop": 2.0,
    "scan.step": 0.05,
    "scan.ramp_period": 10.0,
}


def test_delay_scan_with_lock():
    run = _run(**SMALL_SCAN)
    assert run.model.base_visibility == pytest.approx(0.8436)
    result = scenario_scan_delay(run)
    fit = result.results["envelope_fit"]
    assert result.results["n_points"] == 81
    assert result.results["mean_lock_residual_rms"] <= 0.1
    assert fit["visibility"] >= 0.8, f"visibility {fit['visibility']}"
    assert fit["fwhm"] == pytest.approx(1.0, rel=0.15)


def test_delay_scan_without_lock():
    result = scenario_scan_delay(_run(**SMALL_SCAN, **{"scan.lock": False}))
    assert not result.results["lock_enabled"]
    assert result.results["envelope_fit"]["visibility"] <= 0.15


def _read(path):
    with open(path, "rb") as fp:
        return fp.read()


def test_outputs_are_reproducible(tmp_path):
    first = _run(tmp_path / "a", **{"chsh.exact": True})
    second = _run(tmp_path / "b", **{"chsh.exact": True})
    run_scenario(first)
    run_scenario(second)
    for name in ("summary.json", "setting_counts.json", "fringe_fits.json"):
        assert _read(tmp_path / "a" / name) == _read(tmp_path / "b" / name), name

    with open(tmp_path / "a" / "config.yaml") as fp:
        assert fp.readline().strip() == f"# config_hash: {first.config_hash()}"
    with open(tmp_path / "a" / "summary.json") as fp:
        assert json.load(fp)["config_hash"] == first.config_hash()


def test_output_directory_of_another_config(tmp_path):
    run_scenario(_run(tmp_path, **{"chsh.exact": True}))
    other = _run(tmp_path, **{"chsh.exact": True, "seed": 1})
    with pytest.raises(ConfigMismatchError):
        run_scenario(other)
    summary = run_scenario(other, force=True)
    assert summary.seed == 1


def test_csv_counts_run_writes_events(tmp_path):
    run = _run(
        tmp_path,
        **{
            "scenario": "counts",
            "counts.duration": 1.0,
            "counts.write_events": True,
            "output.format": "csv",
        },
    )
    summary = run_scenario(run)
    assert os.path.exists(tmp_path / "events.txt")
    assert os.path.exists(tmp_path / "counts.csv")
    with open(tmp_path / "counts.csv") as fp:
        assert fp.readline().startswith("# config_hash: ")

    replay = _run(
        tmp_path / "replay",
        **{"scenario": "counts", "counts.input": str(tmp_path / "events.txt")},
    )
    replayed = run_scenario(replay)
    assert replayed.results["n_events"] == summary.results["n_events"]
    assert replayed.results["raw"] == summary.results["raw"]
