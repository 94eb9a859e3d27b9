"""
EventStream line format.

    # bell-link events config_hash=<hex> seed=<int> duration_ps=<int>
    A 1 123456789
    B 2 123460000

One record per line: party (A/B), detector (1/2), timestamp in integer picoseconds.
The origin tag is not written; read streams mark every event as PAIR.
"""

from typing import Tuple, Union
from os import PathLike
import logging
import os

import numpy as np

from bell_link.data_classes import EventStream, Party, Origin
from bell_link.errors import InvalidParameterError

logger = logging.getLogger(__name__)

HEADER_PREFIX = "# bell-link events"
PS_PER_S = 1_000_000_000_000
_PARTY_CODES = {Party.ALICE.value: "A", Party.BOB.value: "B"}
_PARTY_LOOKUP = {"A": Party.ALICE.value, "B": Party.BOB.value}


def to_picoseconds(seconds: np.ndarray) -> np.ndarray:
    return np.rint(np.asarray(seconds, dtype=np.float64) * PS_PER_S).astype(np.int64)


def write_event_stream(
    path: Union[str, PathLike], stream: EventStream, config_hash: str = ""
) -> None:
    duration_ps = int(to_picoseconds(stream.duration))
    timestamps_ps = to_picoseconds(stream.timestamps)
    with open(path, "w") as fp:
        fp.write(
            f"{HEADER_PREFIX} config_hash={config_hash} seed={stream.rng_seed} "
            f"duration_ps={duration_ps}\n"
        )
        for party, detector, t_ps in zip(stream.parties, stream.detectors, timestamps_ps):
            fp.write(f"{_PARTY_CODES[int(party)]} {int(detector)} {int(t_ps)}\n")
    logger.info(f"Wrote {len(stream)} events to {path}")


def _parse_header(line: str) -> dict:
    if not line.startswith(HEADER_PREFIX):
        raise InvalidParameterError(f"not an event stream file, header was: {line.strip()!r}")
    fields = {}
    for token in line[len(HEADER_PREFIX):].split():
        key, _, value = token.partition("=")
        fields[key] = value
    return fields


def read_event_stream(path: Union[str, PathLike]) -> Tuple[EventStream, str]:
    """Returns the stream and the config hash found in its header."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Cant find event stream: {path}")
    with open(path, "r") as fp:
        header = _parse_header(fp.readline())
        parties, detectors, times = [], [], []
        for lineno, line in enumerate(fp, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                party, detector, t_ps = line.split()
                parties.append(_PARTY_LOOKUP[party])
                detectors.append(int(detector))
                times.append(int(t_ps))
            except (ValueError, KeyError) as e:
                raise InvalidParameterError(f"{path}:{lineno}: malformed event record {line!r}: {e}")

    timestamps = np.asarray(times, dtype=np.int64).astype(np.float64) / PS_PER_S
    stream = EventStream(
        parties=np.asarray(parties, dtype=np.int8),
        detectors=np.asarray(detectors, dtype=np.int8),
        timestamps=timestamps,
        origins=np.full(len(times), Origin.PAIR.value, dtype=np.int8),
        duration=int(header.get("duration_ps", 0)) / PS_PER_S,
        rng_seed=int(header.get("seed", 0)),
    )
    return stream, header.get("config_hash", "")
