import numpy as np
import pytest

from bell_link.data_classes import (
    EventStream,
    CoincidenceWindow,
    PairingRule,
    Party,
    Origin,
    PhaseSettings,
    TwoPhotonModel,
)
from bell_link.analysis import count_coincidences, find_coincidences
from bell_link.topology import TopologyConfig, SourceModel, sample_events
from bell_link.errors import UnsortedStreamError

NS = 1e-9


def _stream(party, times, detectors=None, duration=1e-3):
    times = np.asarray(times, dtype=float)
    if detectors is None:
        detectors = np.ones(len(times))
    return EventStream(
        parties=np.full(len(times), party.value),
        detectors=detectors,
        timestamps=times,
        origins=np.full(len(times), Origin.PAIR.value),
        duration=duration,
    )


def test_window_edges():
    alice = _stream(Party.ALICE, [1000 * NS])
    bob = _stream(Party.BOB, [1001 * NS, 1005 * NS])
    table = count_coincidences(alice, bob, CoincidenceWindow(width=4 * NS))
    assert table.total == 1
    assert table.count(1, 1) == 1


def test_nearest_rule_never_reuses_a_click():
    alice = _stream(Party.ALICE, [10 * NS])
    bob = _stream(Party.BOB, [11 * NS, 12 * NS])
    nearest = count_coincidences(alice, bob, CoincidenceWindow(width=6 * NS))
    every = count_coincidences(
        alice, bob, CoincidenceWindow(width=6 * NS, pairing_rule=PairingRule.ALL_PAIRS)
    )
    assert nearest.total == 1
    assert every.total == 2


def test_nearest_rule_prefers_the_smallest_gap():
    alice = _stream(Party.ALICE, [10 * NS, 13 * NS], detectors=[1, 2])
    bob = _stream(Party.BOB, [12 * NS])
    ia, ib = find_coincidences(alice, bob, CoincidenceWindow(width=6 * NS))
    assert ia.tolist() == [1], "the closer Alice click must win"
    assert ib.tolist() == [0]
    table = count_coincidences(alice, bob, CoincidenceWindow(width=6 * NS))
    assert table.count(2, 1) == 1 and table.total == 1


def test_offset_is_removed_from_bob():
    alice = _stream(Party.ALICE, [100 * NS], duration=1e-5)
    bob = _stream(Party.BOB, [100 * NS + 5.2e-6], duration=1e-5)
    assert count_coincidences(alice, bob, CoincidenceWindow()).total == 0
    assert count_coincidences(alice, bob, CoincidenceWindow(offset=5.2e-6)).total == 1


def test_unsorted_stream_is_rejected():
    alice = _stream(Party.ALICE, [2 * NS, 1 * NS])
    bob = _stream(Party.BOB, [1 * NS])
    with pytest.raises(UnsortedStreamError):
        count_coincidences(alice, bob, CoincidenceWindow())


def test_empty_streams_give_zero_table():
    empty_a = EventStream.empty(duration=1.0)
    empty_b = EventStream.empty(duration=1.0)
    table = count_coincidences(empty_a, empty_b, CoincidenceWindow())
    assert table.total == 0
    assert table.integration_time == 1.0


def test_swapping_parties_transposes_the_table():
    stream = sample_events(
        TopologyConfig(),
        SourceModel(pair_rate=0, singles_rate_alice=20000, singles_rate_bob=20000),
        TwoPhotonModel(),
        PhaseSettings(),
        1.0,
        17,
    )
    alice, bob = stream.split()
    window = CoincidenceWindow(width=20 * NS, pairing_rule=PairingRule.ALL_PAIRS)
    forward = count_coincidences(alice, bob, window)
    backward = count_coincidences(bob, alice, window)
    assert forward.total > 0
    assert np.array_equal(forward.counts, backward.counts.T)


def _brute_force_nearest(t_a, t_b, half_width):
    """Every pair compared, then accepted greedily by (|dt|, t_a, t_b) without reuse."""
    candidates = []
    for start in range(0, len(t_a), 500):
        gaps = np.abs(t_a[start : start + 500, None] - t_b[None, :])
        rows, cols = np.nonzero(gaps <= half_width)
        for i, j in zip((rows + start).tolist(), cols.tolist()):
            candidates.append((abs(t_a[i] - t_b[j]), t_a[i], t_b[j], i, j))
    used_a, used_b, accepted = set(), set(), set()
    for _, _, _, i, j in sorted(candidates):
        if i not in used_a and j not in used_b:
            used_a.add(i)
            used_b.add(j)
            accepted.add((i, j))
    return accepted


def _random_streams(seed, n=5000, duration=1e-3):
    rng = np.random.default_rng(seed)
    alice = _stream(Party.ALICE, np.sort(rng.uniform(0, duration, n)), rng.integers(1, 3, n), duration)
    bob = _stream(Party.BOB, np.sort(rng.uniform(0, duration, n)), rng.integers(1, 3, n), duration)
    return alice, bob


def test_nearest_rule_matches_an_exhaustive_greedy_search():
    alice, bob = _random_streams(17)
    window = CoincidenceWindow(width=20 * NS, pairing_rule=PairingRule.NEAREST_NO_REUSE)
    ia, ib = find_coincidences(alice, bob, window)
    expected = _brute_force_nearest(alice.timestamps, bob.timestamps, window.half_width)
    assert len(expected) > 100
    assert set(zip(ia.tolist(), ib.tolist())) == expected


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_nearest_never_exceeds_all_pairs(seed):
    alice, bob = _random_streams(seed, n=2000)
    nearest = CoincidenceWindow(width=50 * NS, pairing_rule=PairingRule.NEAREST_NO_REUSE)
    every = CoincidenceWindow(width=50 * NS, pairing_rule=PairingRule.ALL_PAIRS)
    ia, ib = find_coincidences(alice, bob, nearest)
    assert len(np.unique(ia)) == len(ia)
    assert len(np.unique(ib)) == len(ib)
    n_nearest = count_coincidences(alice, bob, nearest).total
    n_all = count_coincidences(alice, bob, every).total
    assert 0 < n_nearest <= n_all
