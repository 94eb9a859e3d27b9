from .rng import (
    SeedLike,
    make_generator,
    spawn_sequences,
    spawn_generators,
    task_generators,
)
from .logging_setup import setup_logging

# config_loader builds domain objects from every subpackage; import it as
# bell_link.utils.config_loader so the low-level packages can use rng without a cycle.

__all__ = [
    "SeedLike",
    "make_generator",
    "spawn_sequences",
    "spawn_generators",
    "task_generators",
    "setup_logging",
]
