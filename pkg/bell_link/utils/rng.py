"""
Seed handling. Every random draw in bell_link comes from a Generator built here.

Splitting rule: a run's master seed builds SeedSequence(master). Scan point k uses
SeedSequence(master).spawn(n_points)[k]. Inside one task, children are spawned in a fixed
order (events, lock loop, background) so adding a consumer never shifts the others.
"""

from typing import List, Union

from numpy.random import SeedSequence, SFC64, Generator

SeedLike = Union[int, SeedSequence]

EVENTS, LOCK, BACKGROUND = 0, 1, 2
TASK_STREAMS = 3


def as_seed_sequence(seed: SeedLike) -> SeedSequence:
    if isinstance(seed, SeedSequence):
        return seed
    return SeedSequence(int(seed))


def make_generator(seed: SeedLike) -> Generator:
    return Generator(SFC64(as_seed_sequence(seed)))


def spawn_sequences(seed: SeedLike, n: int) -> List[SeedSequence]:
    """
    Spawn n independent child sequences.

    A fresh SeedSequence is rebuilt from the entropy and spawn key each time, so calling this
    twice with the same seed returns the same children (SeedSequence.spawn is stateful).
    """
    root = as_seed_sequence(seed)
    root = SeedSequence(root.entropy, spawn_key=root.spawn_key)
    return root.spawn(n)


def spawn_generators(seed: SeedLike, n: int) -> List[Generator]:
    return [Generator(SFC64(child)) for child in spawn_sequences(seed, n)]


def task_generators(seed: SeedLike) -> List[Generator]:
    """(events, lock, background) generators for one isolated task."""
    return spawn_generators(seed, TASK_STREAMS)


def master_entropy(seed: SeedLike) -> int:
    entropy = as_seed_sequence(seed).entropy
    return int(entropy) if isinstance(entropy, int) else 0


def spawn_key(seed: SeedLike) -> tuple:
    return tuple(as_seed_sequence(seed).spawn_key)
