import numpy as np

from bell_link.utils import spawn_sequences, task_generators, make_generator
from bell_link.utils.rng import master_entropy, spawn_key


def test_spawning_is_repeatable():
    first = [make_generator(s).random() for s in spawn_sequences(42, 3)]
    second = [make_generator(s).random() for s in spawn_sequences(42, 3)]
    assert first == second
    assert len(set(first)) == 3, "children must differ"


def test_task_streams_are_independent():
    events, lock, background = task_generators(spawn_sequences(5, 2)[1])
    draws = [g.standard_normal(4) for g in (events, lock, background)]
    assert not np.array_equal(draws[0], draws[1])
    assert not np.array_equal(draws[1], draws[2])


def test_seed_bookkeeping():
    child = spawn_sequences(99, 4)[3]
    assert master_entropy(child) == 99
    assert spawn_key(child) == (3,)
    assert master_entropy(7) == 7
