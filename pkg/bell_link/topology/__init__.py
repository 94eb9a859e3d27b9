from .topology_config import (
    TopologyKind,
    TopologyConfig,
    SourceModel,
    to_topology_kind,
    SHORT,
    LONG,
)
from .event_sampler import (
    sample_events,
    franson_window_fraction,
    expected_cross_rate,
)
from .event_io import write_event_stream, read_event_stream

__all__ = [
    "TopologyKind",
    "TopologyConfig",
    "SourceModel",
    "to_topology_kind",
    "SHORT",
    "LONG",
    "sample_events",
    "franson_window_fraction",
    "expected_cross_rate",
    "write_event_stream",
    "read_event_stream",
]
