"""
CHSH measurement: phase sweeps for both of Bob's settings, then dedicated acquisitions at the
four canonical setting pairs. Bob's phase is held by the lock loop, which switches its
set-point between phi_b and phi_b'.
"""

from typing import Dict, List, Optional, Tuple
import math
import logging

import numpy as np
from attrs import define, evolve
from numpy.random import SeedSequence

from bell_link.data_classes import (
    PhaseSettings,
    PhaseTrajectory,
    SettingPair,
    CountTable,
    FringeFit,
)
from bell_link.topology import sample_events, expected_cross_rate
from bell_link.stabilization import run_lock
from bell_link.analysis import (
    estimate_chsh,
    expected_count_table,
    fit_fringe,
    chsh_from_fringe_fits,
    with_fit_component,
)
from bell_link.analysis.chsh_estimate import DETECTOR_PAIRS
from bell_link.errors import FitConvergenceError, InvalidParameterError
from bell_link.utils.config_loader import RunConfig
from bell_link.utils.rng import spawn_sequences, task_generators, make_generator, LOCK
from bell_link.scenarios.run_outputs import SweepPointRecord, FitRecord, CountRecord
from bell_link.scenarios.scenario_common import (
    ScenarioResult,
    run_tasks,
    count_stream,
    count_record,
    to_builtin,
)

logger = logging.getLogger(__name__)


@define(frozen=True)
class AcquisitionTask:
    label: str
    settings: PhaseSettings
    duration: float
    seed: SeedSequence
    run: RunConfig


def sweep_phases(n_points: int) -> np.ndarray:
    if n_points < 6:
        raise InvalidParameterError(f"a sweep needs at least 6 points, got {n_points}")
    return np.arange(n_points) * (2.0 * math.pi / n_points)


def held_trajectory(task: AcquisitionTask) -> Optional[PhaseTrajectory]:
    """Bob's phase while the lock holds phi_b; None when the lock is not simulated."""
    run = task.run
    if not bool(run.chsh.lock):
        return None
    controller = evolve(run.controller, set_point_phase=task.settings.phi_b)
    lock_run = run_lock(
        task.duration,
        run.noise,
        controller,
        run.wavelengths,
        seed=task_generators(task.seed)[LOCK],
    )
    return lock_run.phase_trajectory(np.full(len(lock_run.times), task.settings.phi_a))


def run_acquisition(task: AcquisitionTask) -> Tuple[CountTable, CountTable, CountRecord]:
    run = task.run
    stream = sample_events(
        run.topology,
        run.source,
        run.model,
        task.settings,
        task.duration,
        task.seed,
        trajectory=held_trajectory(task),
    )
    raw, net, estimate = count_stream(stream, run)
    return raw, net, count_record(task.label, task.settings, raw, net, estimate)


def _exact_acquisition(task: AcquisitionTask, v: float, cross_rate: float):
    table = expected_count_table(task.settings, v, cross_rate, task.duration)
    record = CountRecord(
        label=task.label,
        phi_a=task.settings.phi_a,
        phi_b=task.settings.phi_b,
        integration_time=task.duration,
        n11=table.count(1, 1),
        n12=table.count(1, 2),
        n21=table.count(2, 1),
        n22=table.count(2, 2),
        net11=table.count(1, 1),
        net12=table.count(1, 2),
        net21=table.count(2, 1),
        net22=table.count(2, 2),
        accidental_rate=0.0,
    )
    return table, table, record


def _fit_curves(
    points: Dict[int, List[Tuple[float, CountTable]]], net: bool
) -> Tuple[Dict[int, Dict[Tuple[int, int], FringeFit]], List[FitRecord]]:
    fits: Dict[int, Dict[Tuple[int, int], FringeFit]] = {}
    records = []
    for b_index, curve in points.items():
        fits[b_index] = {}
        for pair in DETECTOR_PAIRS:
            try:
                fit = fit_fringe(curve, pair)
            except FitConvergenceError as e:
                logger.warning(f"fringe fit failed for b={b_index}, pair={pair}: {e}")
                continue
            fits[b_index][pair] = fit
            records.append(
                FitRecord(
                    bob_setting=b_index,
                    detector_pair=f"{pair[0]}{pair[1]}",
                    net=net,
                    visibility=fit.visibility,
                    visibility_error=fit.visibility_error
                    if math.isfinite(fit.visibility_error)
                    else None,
                    offset=fit.offset,
                    phase0=fit.phase0,
                    residual=fit.residual,
                    degenerate_phase=fit.degenerate_phase,
                    constrained=fit.constrained,
                )
            )
    return fits, records


def _sweep_record(b_index: int, settings: PhaseSettings, table: CountTable) -> SweepPointRecord:
    total = table.total
    normalised = (table.counts / total) if total > 0 else np.full((2, 2), np.nan)

    def p(i, j):
        value = float(normalised[i - 1, j - 1])
        return value if math.isfinite(value) else None

    return SweepPointRecord(
        bob_setting=b_index,
        phi_a=settings.phi_a,
        phi_b=settings.phi_b,
        n11=table.count(1, 1),
        n12=table.count(1, 2),
        n21=table.count(2, 1),
        n22=table.count(2, 2),
        p11=p(1, 1),
        p12=p(1, 2),
        p21=p(2, 1),
        p22=p(2, 2),
    )


def _mean_visibility(fits: Dict[int, Dict[Tuple[int, int], FringeFit]]) -> Optional[float]:
    values = [fit.visibility for by_pair in fits.values() for fit in by_pair.values()]
    return float(np.mean(values)) if values else None


def scenario_chsh(run: RunConfig, exact: Optional[bool] = None) -> ScenarioResult:
    chsh = run.chsh
    exact = bool(chsh.exact) if exact is None else exact
    settings = run.settings
    phases = sweep_phases(int(chsh.sweep_points))
    sweep_duration = float(chsh.sweep_point_duration)
    setting_duration = float(chsh.setting_duration)

    n_sweep = 2 * len(phases)
    seeds = spawn_sequences(run.seed, n_sweep + len(SettingPair) + 1)
    tasks = []
    for b_index, phi_b in enumerate(settings.bob_phases()):
        for k, phi_a in enumerate(phases):
            tasks.append(
                AcquisitionTask(
                    label=f"sweep_b{b_index}_{k}",
                    settings=PhaseSettings(float(phi_a), phi_b),
                    duration=sweep_duration,
                    seed=seeds[b_index * len(phases) + k],
                    run=run,
                )
            )
    for m, pair in enumerate(SettingPair):
        tasks.append(
            AcquisitionTask(
                label=pair.name,
                settings=settings.settings_for(pair),
                duration=setting_duration,
                seed=seeds[n_sweep + m],
                run=run,
            )
        )

    v = run.model.visibility_at(run.topology.delay_offset_delta)
    if exact:
        cross_rate = expected_cross_rate(run.topology, run.source)
        outputs = [_exact_acquisition(task, v, cross_rate) for task in tasks]
    else:
        outputs = run_tasks(run_acquisition, tasks, run.workers, run.progress, desc="chsh")

    raw_points: Dict[int, List[Tuple[float, CountTable]]] = {0: [], 1: []}
    net_points: Dict[int, List[Tuple[float, CountTable]]] = {0: [], 1: []}
    sweep_records = []
    for k, (task, (raw, net, _)) in enumerate(zip(tasks[:n_sweep], outputs[:n_sweep])):
        b_index = k // len(phases)
        raw_points[b_index].append((task.settings.phi_a, raw))
        net_points[b_index].append((task.settings.phi_a, net))
        sweep_records.append(_sweep_record(b_index, task.settings, raw))

    raw_fits, raw_fit_records = _fit_curves(raw_points, net=False)
    net_fits, net_fit_records = _fit_curves(net_points, net=True)

    canonical = outputs[n_sweep:]
    result = estimate_chsh({pair: raw for pair, (raw, _, _) in zip(SettingPair, canonical)})
    try:
        s_fit, s_fit_sigma = chsh_from_fringe_fits(
            raw_fits, settings, make_generator(seeds[-1]), n_draws=int(chsh.fit_draws)
        )
        result = with_fit_component(result, s_fit, s_fit_sigma)
    except InvalidParameterError as e:
        logger.warning(f"no fit-derived S: {e}")

    results = {
        "exact": exact,
        "visibility_model": v,
        "chsh": result.to_dict(),
        "raw_visibility": _mean_visibility(raw_fits),
        "net_visibility": _mean_visibility(net_fits),
    }
    logger.info(
        f"CHSH: S={result.s_value:.4f} +- {result.s_sigma:.4f} "
        f"({result.significance:.2f} sigma above 2)"
    )
    return ScenarioResult(
        results=to_builtin(results),
        tables={
            "sweep_points": sweep_records,
            "fringe_fits": raw_fit_records + net_fit_records,
            "setting_counts": [record for _, _, record in canonical],
        },
    )
