from typing import Iterator, Optional, Tuple
from enum import Enum
import logging

import numpy as np
from attrs import define, field

from bell_link.errors import InvalidParameterError

logger = logging.getLogger(__name__)


class Party(Enum):
    ALICE = 0
    BOB = 1


class Origin(Enum):
    """Diagnostic tag. Analysis code never looks at it."""

    PAIR = 0
    BACKGROUND = 1


def to_party(value):
    if isinstance(value, str):
        try:
            return Party[value.upper()]
        except KeyError:
            raise InvalidParameterError(f"'{value}' is not a valid option for Party")
    if isinstance(value, (int, np.integer)):
        return Party(int(value))
    return value


@define(frozen=True)
class DetectionEvent:
    party: Party = field(converter=to_party)
    detector: int = field(converter=int)
    timestamp: float = field(converter=float)
    origin: Origin = field(default=Origin.PAIR)

    @detector.validator
    def _check_detector(self, att, value):
        if value not in (1, 2):
            raise InvalidParameterError(f"detector index must be 1 or 2, got {value}")

    @timestamp.validator
    def _check_timestamp(self, att, value):
        if value < 0:
            raise InvalidParameterError(f"timestamp must be >= 0, got {value}")


def _as_array(dtype):
    def convert(value):
        return np.ascontiguousarray(value, dtype=dtype)

    return convert


@define(frozen=True, eq=False)
class EventStream:
    """
    Time-ordered detector clicks stored column-wise.

    Attributes:
        parties: Party values as int8 (0 Alice, 1 Bob).
        detectors: detector index (1 or 2) as int8.
        timestamps: seconds, non-decreasing, within [0, duration].
        origins: Origin values as int8.
        duration: length of the run in seconds.
        rng_seed: master seed the stream was drawn from.
        spawn_key: SeedSequence spawn key below the master seed, () for the root.
    """

    parties: np.ndarray = field(converter=_as_array(np.int8))
    detectors: np.ndarray = field(converter=_as_array(np.int8))
    timestamps: np.ndarray = field(converter=_as_array(np.float64))
    origins: np.ndarray = field(converter=_as_array(np.int8))
    duration: float = field(converter=float)
    rng_seed: int = field(default=0, converter=int)
    spawn_key: Tuple[int, ...] = field(default=(), converter=tuple)

    def __attrs_post_init__(self):
        n = len(self.timestamps)
        if not (len(self.parties) == len(self.detectors) == len(self.origins) == n):
            raise InvalidParameterError("EventStream columns must have equal lengths")
        if self.duration < 0:
            raise InvalidParameterError(f"duration must be >= 0, got {self.duration}")
        if n and (self.timestamps[0] < 0 or self.timestamps[-1] > self.duration):
            raise InvalidParameterError("timestamps must lie within [0, duration]")

    @classmethod
    def empty(cls, duration: float = 0.0, rng_seed: int = 0) -> "EventStream":
        return cls(
            parties=np.zeros(0),
            detectors=np.zeros(0),
            timestamps=np.zeros(0),
            origins=np.zeros(0),
            duration=duration,
            rng_seed=rng_seed,
        )

    @classmethod
    def from_unsorted(
        cls,
        parties,
        detectors,
        timestamps,
        origins,
        duration: float,
        rng_seed: int = 0,
        spawn_key: Tuple[int, ...] = (),
    ) -> "EventStream":
        """Sort the columns by timestamp (stable) and drop events after `duration`."""
        timestamps = np.asarray(timestamps, dtype=np.float64)
        keep = (timestamps >= 0) & (timestamps <= duration)
        order = np.argsort(timestamps[keep], kind="stable")
        return cls(
            parties=np.asarray(parties)[keep][order],
            detectors=np.asarray(detectors)[keep][order],
            timestamps=timestamps[keep][order],
            origins=np.asarray(origins)[keep][order],
            duration=duration,
            rng_seed=rng_seed,
            spawn_key=spawn_key,
        )

    def __len__(self) -> int:
        return len(self.timestamps)

    def __iter__(self) -> Iterator[DetectionEvent]:
        for party, detector, t, origin in zip(
            self.parties, self.detectors, self.timestamps, self.origins
        ):
            yield DetectionEvent(Party(int(party)), int(detector), float(t), Origin(int(origin)))

    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.timestamps) >= 0))

    def select(self, mask: np.ndarray) -> "EventStream":
        return EventStream(
            parties=self.parties[mask],
            detectors=self.detectors[mask],
            timestamps=self.timestamps[mask],
            origins=self.origins[mask],
            duration=self.duration,
            rng_seed=self.rng_seed,
            spawn_key=self.spawn_key,
        )

    def for_party(self, party: Party) -> "EventStream":
        return self.select(self.parties == to_party(party).value)

    def split(self) -> Tuple["EventStream", "EventStream"]:
        """(Alice's clicks, Bob's clicks)."""
        return self.for_party(Party.ALICE), self.for_party(Party.BOB)

    def singles_rates(self) -> np.ndarray:
        """Click rate per detector, shape (2,) for detectors 1 and 2."""
        if self.duration <= 0:
            return np.zeros(2)
        return np.array(
            [np.count_nonzero(self.detectors == d) / self.duration for d in (1, 2)]
        )

    @classmethod
    def merge(cls, *streams: "EventStream") -> "EventStream":
        if not streams:
            return cls.empty()
        return cls.from_unsorted(
            parties=np.concatenate([s.parties for s in streams]),
            detectors=np.concatenate([s.detectors for s in streams]),
            timestamps=np.concatenate([s.timestamps for s in streams]),
            origins=np.concatenate([s.origins for s in streams]),
            duration=max(s.duration for s in streams),
            rng_seed=streams[0].rng_seed,
            spawn_key=streams[0].spawn_key,
        )


@define(frozen=True, eq=False)
class PhaseTrajectory:
    """
    Time-varying analyser phases, e.g. Alice's piezo ramp and Bob's locked phase.
    Values between samples are linearly interpolated; outside they are held.
    """

    times: np.ndarray = field(converter=_as_array(np.float64))
    phi_a: np.ndarray = field(converter=_as_array(np.float64))
    phi_b: np.ndarray = field(converter=_as_array(np.float64))

    def __attrs_post_init__(self):
        if not (len(self.times) == len(self.phi_a) == len(self.phi_b)) or len(self.times) == 0:
            raise InvalidParameterError("PhaseTrajectory columns must be equal and non-empty")
        if np.any(np.diff(self.times) < 0):
            raise InvalidParameterError("PhaseTrajectory times must be non-decreasing")

    def at(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return (
            np.interp(t, self.times, self.phi_a),
            np.interp(t, self.times, self.phi_b),
        )

    @classmethod
    def constant(cls, phi_a: float, phi_b: float) -> "PhaseTrajectory":
        return cls(times=[0.0], phi_a=[phi_a], phi_b=[phi_b])

    def shifted(self, dt: float) -> "PhaseTrajectory":
        return PhaseTrajectory(times=self.times + dt, phi_a=self.phi_a, phi_b=self.phi_b)

    def with_phi_a(self, phi_a: Optional[np.ndarray]) -> "PhaseTrajectory":
        return PhaseTrajectory(times=self.times, phi_a=phi_a, phi_b=self.phi_b)
