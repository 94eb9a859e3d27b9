"""
Two-photon interference versus the delay line setting.

Each delay point is an isolated task: its own lock loop run (starting from zero drift), Alice's
piezo ramp continuing from where the previous point left it, and its own events. With the
lock off the long interferometer drifts freely during every point and the fringe washes out.
"""

from typing import List, Tuple
import math
import logging

import numpy as np
from attrs import define, evolve
from numpy.random import SeedSequence

from bell_link.data_classes import PhaseSettings
from bell_link.topology import sample_events
from bell_link.stabilization import run_lock
from bell_link.analysis import fit_envelope
from bell_link.errors import InvalidParameterError
from bell_link.utils.config_loader import RunConfig
from bell_link.utils.rng import spawn_sequences, task_generators, LOCK
from bell_link.scenarios.run_outputs import DelayPointRecord
from bell_link.scenarios.scenario_common import (
    ScenarioResult,
    run_tasks,
    count_stream,
    to_builtin,
)

logger = logging.getLogger(__name__)

MAX_DELAY = 75.0  # mm, half the delay line travel


@define(frozen=True)
class DelayPointTask:
    index: int
    delay: float
    t_start: float
    lock_enabled: bool
    seed: SeedSequence
    run: RunConfig


def delay_points(start: float, stop: float, step: float) -> np.ndarray:
    if not step > 0 or stop < start:
        raise InvalidParameterError(f"scan needs step > 0 and stop >= start, got {start}, {stop}, {step}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    delays = start + step * np.arange(n)
    if np.any(np.abs(delays) > MAX_DELAY):
        raise InvalidParameterError(f"delay points must lie within +-{MAX_DELAY} mm")
    return delays


def ramp_phase(t: np.ndarray, ramp_period: float) -> np.ndarray:
    return 2.0 * math.pi * np.asarray(t) / ramp_period


def run_delay_point(task: DelayPointTask) -> Tuple[DelayPointRecord, float]:
    """One delay point. Returns its record and the detector-pair counts fed to the fit."""
    run = task.run
    scan = run.scan
    duration = float(scan.point_duration)
    controller = run.controller if task.lock_enabled else run.controller.disabled()
    topology = evolve(run.topology, delay_offset_delta=task.delay)
    source = evolve(run.source, pair_rate=float(scan.pair_rate))

    lock_rng = task_generators(task.seed)[LOCK]
    lock_run = run_lock(duration, run.noise, controller, run.wavelengths, seed=lock_rng)
    phi_a = ramp_phase(task.t_start + lock_run.times, float(scan.ramp_period))
    trajectory = lock_run.phase_trajectory(phi_a)

    stream = sample_events(
        topology, source, run.model, PhaseSettings(), duration, task.seed, trajectory=trajectory
    )
    raw, net, estimate = count_stream(stream, run)
    i, j = (int(d) for d in scan.detector_pair)
    relative = float(
        ramp_phase(task.t_start + duration / 2.0, float(scan.ramp_period))
        - controller.set_point_phase
    )
    record = DelayPointRecord(
        index=task.index,
        delay=task.delay,
        relative_phase=relative,
        visibility_model=run.model.visibility_at(task.delay),
        lock_residual_rms=lock_run.summary.residual_rms,
        counts=raw.count(i, j),
        net_counts=net.count(i, j),
        accidental_rate=float(estimate.rates[i - 1, j - 1]),
    )
    logger.debug(f"delay {task.delay:+.3f} mm: {record.counts:.0f} counts, net {record.net_counts:.1f}")
    return record, record.net_counts


def scenario_scan_delay(run: RunConfig) -> ScenarioResult:
    scan = run.scan
    delays = delay_points(float(scan.start), float(scan.stop), float(scan.step))
    lock_enabled = bool(scan.lock) and run.controller.enabled
    seeds = spawn_sequences(run.seed, len(delays))
    duration = float(scan.point_duration)
    tasks = [
        DelayPointTask(
            index=k,
            delay=float(delay),
            t_start=k * duration,
            lock_enabled=lock_enabled,
            seed=seeds[k],
            run=run,
        )
        for k, delay in enumerate(delays)
    ]
    logger.info(f"delay scan: {len(tasks)} points, lock {'on' if lock_enabled else 'off'}")
    outputs = run_tasks(run_delay_point, tasks, run.workers, run.progress, desc="delay scan")
    records: List[DelayPointRecord] = [record for record, _ in outputs]

    fit = fit_envelope(
        [r.delay for r in records],
        [r.relative_phase for r in records],
        [r.net_counts for r in records],
        fwhm_bounds=tuple(float(b) for b in scan.fwhm_bounds),
        center_bound=float(scan.center_bound),
    )
    results = {
        "lock_enabled": lock_enabled,
        "n_points": len(records),
        "envelope_fit": fit.to_dict(),
        "mean_lock_residual_rms": float(np.mean([r.lock_residual_rms for r in records])),
        "fringe_period_mm": float(scan.step) * float(scan.ramp_period) / duration,
    }
    logger.info(
        f"delay scan done: V={fit.visibility:.4f}, FWHM={fit.fwhm:.3f} mm, converged={fit.converged}"
    )
    return ScenarioResult(results=to_builtin(results), tables={"delay_points": records})
