from typing import Optional
import logging

from bell_link.utils.config_loader import RunConfig
from .scenario_common import ScenarioResult, run_tasks
from .scan_delay import scenario_scan_delay, run_delay_point
from .chsh_scenario import scenario_chsh
from .attack_scenario import scenario_attack
from .lock_scenario import scenario_lock
from .counts_scenario import scenario_counts
from .run_outputs import (
    RunSummary,
    prepare_output_dir,
    write_config_snapshot,
    write_summary,
    write_table,
)

logger = logging.getLogger(__name__)


def _dispatch(run: RunConfig, out_dir: str) -> ScenarioResult:
    if run.scenario == "scan-delay":
        return scenario_scan_delay(run)
    if run.scenario == "chsh":
        return scenario_chsh(run)
    if run.scenario == "attack":
        return scenario_attack(run)
    if run.scenario == "lock":
        return scenario_lock(run)
    return scenario_counts(run, out_dir)


def run_scenario(run: RunConfig, out_dir: Optional[str] = None, force: bool = False) -> RunSummary:
    """Run the configured scenario and write its output directory."""
    out_dir = out_dir or run.output_directory
    digest = run.config_hash()
    prepare_output_dir(out_dir, digest, force=force)
    write_config_snapshot(out_dir, run.to_yaml(), digest)
    logger.info(f"Running {run.scenario} with seed {run.seed}, config {digest[:12]}...")

    result = _dispatch(run, out_dir)
    summary = RunSummary(
        scenario=run.scenario, config_hash=digest, seed=run.seed, results=result.results
    )
    for name, rows in result.tables.items():
        write_table(out_dir, name, rows, run.output_format, digest)
    write_summary(out_dir, summary, run.output_format)
    return summary


__all__ = [
    "ScenarioResult",
    "run_tasks",
    "run_scenario",
    "scenario_scan_delay",
    "run_delay_point",
    "scenario_chsh",
    "scenario_attack",
    "scenario_lock",
    "scenario_counts",
    "RunSummary",
]
