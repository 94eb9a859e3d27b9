import logging

from bell_link.stabilization import run_lock, settling_time
from bell_link.utils.config_loader import RunConfig
from bell_link.utils.rng import task_generators, LOCK
from bell_link.scenarios.run_outputs import LockRecord
from bell_link.scenarios.scenario_common import ScenarioResult, to_builtin

logger = logging.getLogger(__name__)


def scenario_lock(run: RunConfig) -> ScenarioResult:
    lock = run.lock
    schedule = []
    switch_time = lock.get("switch_time", None)
    if switch_time is not None:
        schedule.append((float(switch_time), float(lock.switch_to)))
    lock_run = run_lock(
        float(lock.duration),
        run.noise,
        run.controller,
        run.wavelengths,
        seed=task_generators(run.seed)[LOCK],
        set_point_schedule=schedule,
    )
    results = {
        "enabled": run.controller.enabled,
        "summary": lock_run.summary.to_dict(),
        "settling_time": settling_time(lock_run, float(switch_time)) if schedule else None,
    }
    logger.info(
        f"lock run: residual rms {lock_run.summary.residual_rms:.4f} rad, "
        f"{lock_run.summary.saturation_count} saturated ticks"
    )
    rows = [LockRecord(**row) for row in lock_run.records(int(lock.decimation))]
    return ScenarioResult(results=to_builtin(results), tables={"lock_trace": rows})
