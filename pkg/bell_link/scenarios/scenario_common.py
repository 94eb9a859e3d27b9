from typing import Callable, Sequence, List, Any, Dict, Tuple, Optional
from concurrent.futures import ProcessPoolExecutor, as_completed
import math
import logging

import numpy as np
from attrs import define, field
from tqdm import tqdm

from bell_link.data_classes import (
    EventStream,
    CountTable,
    AccidentalEstimate,
    CoincidenceWindow,
    PhaseSettings,
)
from bell_link.analysis import count_coincidences, estimate_accidentals, subtract_accidentals
from bell_link.utils.config_loader import RunConfig
from bell_link.scenarios.run_outputs import CountRecord

logger = logging.getLogger(__name__)


@define
class ScenarioResult:
    """Summary values plus named tables of pydantic records."""

    results: Dict[str, Any] = field(factory=dict)
    tables: Dict[str, List[Any]] = field(factory=dict)


def to_builtin(value):
    """numpy scalars and arrays to plain Python, NaN and inf to None."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def run_tasks(
    worker: Callable[[Any], Any],
    tasks: Sequence[Any],
    workers: int = 1,
    progress: bool = True,
    desc: str = "",
) -> List[Any]:
    """
    Run `worker` over `tasks`, in a process pool when workers > 1. Results come back in task
    order whatever order the workers finish in.
    """
    results: List[Any] = [None] * len(tasks)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(worker, task): k for k, task in enumerate(tasks)}
            for future in tqdm(
                as_completed(futures), total=len(tasks), desc=desc, disable=not progress
            ):
                results[futures[future]] = future.result()
    else:
        for k, task in enumerate(tqdm(tasks, desc=desc, disable=not progress)):
            results[k] = worker(task)
    return results


def count_stream(
    stream: EventStream, run: RunConfig, window: Optional[CoincidenceWindow] = None
) -> Tuple[CountTable, CountTable, AccidentalEstimate]:
    """(raw table, net table, accidental estimate) for Alice's vs Bob's clicks of one stream."""
    window = window or run.window
    alice, bob = stream.split()
    raw = count_coincidences(alice, bob, window)
    estimate = estimate_accidentals(
        alice,
        bob,
        window,
        method=run.accidental_method,
        shift_step=run.shift_step,
        n_shifts=run.n_shifts,
    )
    net = subtract_accidentals(raw, estimate) if run.subtract_accidentals else raw
    return raw, net, estimate


def count_record(
    label: str,
    settings: PhaseSettings,
    raw: CountTable,
    net: CountTable,
    estimate: AccidentalEstimate,
) -> CountRecord:
    return CountRecord(
        label=label,
        phi_a=settings.phi_a,
        phi_b=settings.phi_b,
        integration_time=raw.integration_time,
        n11=raw.count(1, 1),
        n12=raw.count(1, 2),
        n21=raw.count(2, 1),
        n22=raw.count(2, 2),
        net11=net.count(1, 1),
        net12=net.count(1, 2),
        net21=net.count(2, 1),
        net22=net.count(2, 2),
        accidental_rate=float(estimate.rates.sum()),
    )
