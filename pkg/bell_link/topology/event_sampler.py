"""
Monte Carlo event generation for the Franson and hug topologies.

Draw order inside the events generator is fixed and setting independent:
emission count, emission times, path choices (two uniforms per pair), detector uniforms
(two per pair), then jitter. Background clicks come from their own generator. Because the
path choice never sees a phase, which pairs become cross-party coincidences in the hug
topology is identical under any change of settings.
"""

from typing import Optional, Tuple
import logging

import numpy as np

from bell_link.data_classes import (
    EventStream,
    Party,
    Origin,
    PhaseSettings,
    PhaseTrajectory,
    TwoPhotonModel,
    CoincidenceWindow,
)
from bell_link.quantum.quantum_core import probability_arrays
from bell_link.topology.topology_config import (
    TopologyConfig,
    TopologyKind,
    SourceModel,
    SHORT,
    LONG,
)
from bell_link.utils.rng import (
    SeedLike,
    task_generators,
    master_entropy,
    spawn_key,
)
from bell_link.errors import InvalidParameterError

logger = logging.getLogger(__name__)

ALICE, BOB = Party.ALICE.value, Party.BOB.value


def _check_duration(duration: float):
    if not duration > 0:
        raise InvalidParameterError(f"duration must be > 0, got {duration}")


def emission_times(rng: np.random.Generator, rate: float, duration: float) -> np.ndarray:
    """Homogeneous Poisson process on [0, duration]."""
    n = rng.poisson(rate * duration) if rate > 0 else 0
    return np.sort(rng.uniform(0.0, duration, n))


def draw_paths(
    rng: np.random.Generator, topology: TopologyConfig, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """SHORT/LONG choice for photon 1 and photon 2 of each pair."""
    u = rng.random((n, 2))
    paths = (u >= topology.splitter_transmission).astype(np.int8)
    return paths[:, 0], paths[:, 1]


def detectors_from_probabilities(probs: np.ndarray, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Categorical draw over (11, 12, 21, 22) with probabilities normalised per row.
    Returns (detector_a, detector_b), values in {1, 2}.
    """
    cumulative = np.cumsum(probs, axis=1)
    cumulative /= cumulative[:, -1:]
    k = np.minimum((u[:, None] >= cumulative).sum(axis=1), 3)
    return (1 + k // 2).astype(np.int8), (1 + k % 2).astype(np.int8)


def uniform_detectors(u: np.ndarray) -> np.ndarray:
    return (1 + (u >= 0.5)).astype(np.int8)


def background_columns(
    rng: np.random.Generator, source: SourceModel, duration: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Independent Poisson clicks for each of the four detectors (Alice 1, 2, Bob 1, 2)."""
    parties, detectors, times = [], [], []
    for party in (Party.ALICE, Party.BOB):
        rate = source.background_rate(party)
        for detector in (1, 2):
            t = emission_times(rng, rate, duration)
            parties.append(np.full(len(t), party.value, dtype=np.int8))
            detectors.append(np.full(len(t), detector, dtype=np.int8))
            times.append(t)
    return np.concatenate(parties), np.concatenate(detectors), np.concatenate(times)


def assemble_stream(
    pair_columns: Tuple[np.ndarray, np.ndarray, np.ndarray],
    background: Tuple[np.ndarray, np.ndarray, np.ndarray],
    topology: TopologyConfig,
    rng: np.random.Generator,
    duration: float,
    seed: SeedLike,
) -> EventStream:
    parties = np.concatenate([pair_columns[0], background[0]])
    detectors = np.concatenate([pair_columns[1], background[1]])
    times = np.concatenate([pair_columns[2], background[2]])
    origins = np.concatenate(
        [
            np.full(len(pair_columns[2]), Origin.PAIR.value, dtype=np.int8),
            np.full(len(background[2]), Origin.BACKGROUND.value, dtype=np.int8),
        ]
    )
    if topology.jitter_sigma > 0:
        times = times + rng.normal(0.0, topology.jitter_sigma, len(times))
    return EventStream.from_unsorted(
        parties,
        detectors,
        times,
        origins,
        duration=duration,
        rng_seed=master_entropy(seed),
        spawn_key=spawn_key(seed),
    )


def route_pairs(
    topology: TopologyConfig,
    t_emit: np.ndarray,
    path_1: np.ndarray,
    path_2: np.ndarray,
    det_1: np.ndarray,
    det_2: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Route photon 1 / photon 2 of every pair to a party and a time.

    FRANSON: photon 1 always reaches Alice, photon 2 always reaches Bob, each through its own
    path. HUG: equal paths split the photons between the parties; (S, L) leaves both photons at
    Alice and (L, S) both at Bob, one through each arm.
    """
    delay = {
        (party.value, path): topology.arrival_delay(party, path)
        for party in (Party.ALICE, Party.BOB)
        for path in (SHORT, LONG)
    }
    if topology.kind is TopologyKind.FRANSON:
        party_1 = np.full(len(t_emit), ALICE, dtype=np.int8)
        party_2 = np.full(len(t_emit), BOB, dtype=np.int8)
    else:
        cross = path_1 == path_2
        party_1 = np.where(cross | (path_1 == SHORT), ALICE, BOB).astype(np.int8)
        party_2 = np.where(cross, BOB, party_1).astype(np.int8)

    def arrival(party, path):
        out = np.empty(len(t_emit))
        for (p, l), d in delay.items():
            mask = (party == p) & (path == l)
            out[mask] = d
        return t_emit + out

    t_1 = arrival(party_1, path_1)
    t_2 = arrival(party_2, path_2)
    return (
        np.concatenate([party_1, party_2]),
        np.concatenate([det_1, det_2]),
        np.concatenate([t_1, t_2]),
    )


def sample_events(
    topology: TopologyConfig,
    source: SourceModel,
    model: TwoPhotonModel,
    settings: PhaseSettings,
    duration: float,
    seed: SeedLike,
    trajectory: Optional[PhaseTrajectory] = None,
) -> EventStream:
    """
    Draw one run of detector clicks.

    Arguments:
        topology: geometry and timing.
        source: pair and background rates.
        model: visibility model; evaluated at topology.delay_offset_delta.
        settings: analyser phases, used when no trajectory is given.
        duration: run length in seconds.
        seed: int master seed or a spawned SeedSequence.
        trajectory: optional time-varying phases (piezo ramp, lock residual).
    Returns:
        EventStream sorted by timestamp.
    """
    _check_duration(duration)
    rng_events, _, rng_background = task_generators(seed)

    t_emit = emission_times(rng_events, source.pair_rate, duration)
    n = len(t_emit)
    path_1, path_2 = draw_paths(rng_events, topology, n)
    u_det = rng_events.random((n, 2))

    v = model.visibility_at(topology.delay_offset_delta)
    if trajectory is None:
        relative = np.full(n, settings.relative_phase)
    else:
        phi_a, phi_b = trajectory.at(t_emit)
        relative = phi_a - phi_b

    interfering = path_1 == path_2
    det_1 = uniform_detectors(u_det[:, 0])
    det_2 = uniform_detectors(u_det[:, 1])
    if np.any(interfering):
        probs = probability_arrays(relative[interfering], v)
        det_a, det_b = detectors_from_probabilities(probs, u_det[interfering, 0])
        det_1[interfering] = det_a
        det_2[interfering] = det_b

    pairs = route_pairs(topology, t_emit, path_1, path_2, det_1, det_2)
    background = background_columns(rng_background, source, duration)
    stream = assemble_stream(pairs, background, topology, rng_events, duration, seed)
    logger.debug(
        f"sampled {n} pairs ({int(interfering.sum())} interfering) and "
        f"{len(background[2])} background clicks over {duration} s, kind={topology.kind.name}"
    )
    return stream


def franson_window_fraction(
    topology: TopologyConfig, window: Optional[CoincidenceWindow] = None
) -> float:
    """Fraction of Franson cross-party pairs that pass the |dt| <= width/2 test."""
    if topology.kind is not TopologyKind.FRANSON:
        logger.error("franson_window_fraction called with a non-Franson topology")
        raise InvalidParameterError(
            f"franson_window_fraction needs a FRANSON topology, got {topology.kind.name}"
        )
    width = window.width if window is not None else topology.design_window
    if width / 2.0 >= topology.long_short_delay():
        return 1.0
    return topology.coincident_path_fraction()


def expected_cross_rate(topology: TopologyConfig, source: SourceModel) -> float:
    """Mean rate of time-coincident cross-party pairs (all detector pairs summed)."""
    return source.pair_rate * topology.coincident_path_fraction()
