from typing import Tuple
import logging

import numpy as np

from bell_link.data_classes import (
    EventStream,
    CoincidenceWindow,
    CountTable,
    PairingRule,
    PhaseSettings,
)
from bell_link.errors import UnsortedStreamError

logger = logging.getLogger(__name__)

# the window edge is tested exactly after the searchsorted pre-selection
_EDGE_SLACK = 1e-12


def _check_sorted(stream: EventStream, name: str):
    if not stream.is_sorted():
        logger.error(f"{name} is not sorted by timestamp")
        raise UnsortedStreamError(f"{name} must be sorted by timestamp")


def candidate_pairs(
    t_a: np.ndarray, t_b: np.ndarray, half_width: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Every (i, j) with |t_a[i] - t_b[j]| <= half_width, for sorted t_b.

    Returns (index into a, index into b, |dt|).
    """
    lo = np.searchsorted(t_b, t_a - half_width - _EDGE_SLACK, side="left")
    hi = np.searchsorted(t_b, t_a + half_width + _EDGE_SLACK, side="right")
    n_candidates = hi - lo
    total = int(n_candidates.sum())
    if total == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    ia = np.repeat(np.arange(len(t_a)), n_candidates)
    starts = np.cumsum(n_candidates) - n_candidates
    ib = np.arange(total) - np.repeat(starts, n_candidates) + np.repeat(lo, n_candidates)
    dt = np.abs(t_a[ia] - t_b[ib])
    keep = dt <= half_width
    return ia[keep], ib[keep], dt[keep]


def greedy_nearest(
    ia: np.ndarray, ib: np.ndarray, dt: np.ndarray, t_a: np.ndarray, t_b: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Accept candidates in order of |dt| (then time), never reusing an event."""
    if len(ia) == 0:
        return ia, ib
    order = np.lexsort((t_b[ib], t_a[ia], dt))
    used_a, used_b = set(), set()
    keep = []
    for k, a, b in zip(order.tolist(), ia[order].tolist(), ib[order].tolist()):
        if a in used_a or b in used_b:
            continue
        used_a.add(a)
        used_b.add(b)
        keep.append(k)
    keep = np.sort(np.asarray(keep, dtype=np.int64))
    return ia[keep], ib[keep]


def find_coincidences(
    stream_a: EventStream, stream_b: EventStream, window: CoincidenceWindow
) -> Tuple[np.ndarray, np.ndarray]:
    """Indices (into stream_a, into stream_b) of the accepted coincidences."""
    _check_sorted(stream_a, "stream_a")
    _check_sorted(stream_b, "stream_b")
    t_a = stream_a.timestamps
    t_b = stream_b.timestamps - window.offset
    ia, ib, dt = candidate_pairs(t_a, t_b, window.half_width)
    if window.pairing_rule is PairingRule.NEAREST_NO_REUSE:
        ia, ib = greedy_nearest(ia, ib, dt, t_a, t_b)
    return ia, ib


def count_coincidences(
    stream_a: EventStream,
    stream_b: EventStream,
    window: CoincidenceWindow,
    settings: PhaseSettings = None,
) -> CountTable:
    """
    Coincidence counts per detector pair; |t_a - (t_b - offset)| <= width / 2.

    Arguments:
        stream_a: Alice's clicks, time-sorted.
        stream_b: Bob's clicks, time-sorted.
        window: width, pairing rule and Bob-minus-Alice offset.
        settings: attached to the table for bookkeeping.
    """
    ia, ib = find_coincidences(stream_a, stream_b, window)
    counts = np.zeros((2, 2))
    np.add.at(
        counts,
        (stream_a.detectors[ia].astype(np.intp) - 1, stream_b.detectors[ib].astype(np.intp) - 1),
        1.0,
    )
    logger.debug(
        f"{len(ia)} coincidences from {len(stream_a)} x {len(stream_b)} events "
        f"({window.pairing_rule.name}, width {window.width:.2e} s)"
    )
    return CountTable(
        counts=counts,
        integration_time=max(stream_a.duration, stream_b.duration),
        settings=settings,
    )
