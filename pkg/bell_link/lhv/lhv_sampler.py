from typing import Optional, Sequence
import math
import logging

import numpy as np

from bell_link.data_classes import EventStream, PhaseSettings, ChshSettings, Party
from bell_link.topology.topology_config import TopologyConfig, TopologyKind, SourceModel
from bell_link.topology.event_sampler import (
    emission_times,
    route_pairs,
    background_columns,
    assemble_stream,
)
from bell_link.lhv.strategy import LocalStrategy
from bell_link.utils.rng import SeedLike, task_generators, master_entropy
from bell_link.errors import InvalidParameterError

logger = logging.getLogger(__name__)


def setting_index(phase: float, choices: Sequence[float], label: str) -> int:
    """Index of `phase` among the two CHSH phases of one party, compared modulo 2*pi."""
    for index, choice in enumerate(choices):
        if abs(math.remainder(phase - choice, 2.0 * math.pi)) < 1e-9:
            return index
    raise InvalidParameterError(f"{label} phase {phase} is not one of the CHSH settings {choices}")


def _detector(outcomes: np.ndarray) -> np.ndarray:
    return np.where(outcomes > 0, 1, 2).astype(np.int8)


def sample_lhv_events(
    strategy: LocalStrategy,
    topology: TopologyConfig,
    source: SourceModel,
    settings: PhaseSettings,
    duration: float,
    seed: SeedLike,
    chsh_settings: Optional[ChshSettings] = None,
) -> EventStream:
    """
    Clicks produced by a local strategy instead of the two-photon state.

    Each emission draws a lambda. In a Franson test each party's photon takes the path
    named by its own slot table; in the hug geometry the source slot fixes both paths and
    which party receives each photon follows the usual routing. Detector 1 stands for +1.
    """
    if duration < 0:
        raise InvalidParameterError(f"duration must be >= 0, got {duration}")
    if duration == 0:
        return EventStream.empty(0.0, rng_seed=master_entropy(seed))
    chsh_settings = chsh_settings or ChshSettings.canonical()
    x = setting_index(settings.phi_a, chsh_settings.alice_phases(), "Alice")
    y = setting_index(settings.phi_b, chsh_settings.bob_phases(), "Bob")

    rng_events, _, rng_background = task_generators(seed)
    t_emit = emission_times(rng_events, source.pair_rate, duration)
    lam = rng_events.choice(len(strategy), size=len(t_emit), p=strategy.weights)

    out_a = strategy.outcomes_a[lam, x]
    out_b = strategy.outcomes_b[lam, y]
    if topology.kind is TopologyKind.FRANSON:
        path_1, path_2 = strategy.slots_a[lam, x], strategy.slots_b[lam, y]
        det_1, det_2 = _detector(out_a), _detector(out_b)
    else:
        paths = strategy.source_paths()[lam]
        path_1, path_2 = paths[:, 0], paths[:, 1]
        # photon 1 goes to Alice unless the source sent (L, S), photon 2 to Bob unless (S, L)
        both_alice = (path_1 == 0) & (path_2 == 1)
        both_bob = (path_1 == 1) & (path_2 == 0)
        det_1 = np.where(both_bob, _detector(out_b), _detector(out_a)).astype(np.int8)
        det_2 = np.where(both_alice, _detector(out_a), _detector(out_b)).astype(np.int8)

    pairs = route_pairs(topology, t_emit, path_1, path_2, det_1, det_2)
    background = background_columns(rng_background, source, duration)
    stream = assemble_stream(pairs, background, topology, rng_events, duration, seed)
    logger.debug(
        f"{strategy.name}: {len(t_emit)} emissions on {topology.kind.name} at settings ({x}, {y}), "
        f"{int(np.sum(stream.parties == Party.ALICE.value))} clicks at Alice"
    )
    return stream
