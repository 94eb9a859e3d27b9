from typing import Optional
from enum import Enum
import math
import logging

from attrs import define, field
from omegaconf import DictConfig

from bell_link.data_classes.events import Party, to_party
from bell_link.errors import InvalidParameterError

logger = logging.getLogger(__name__)

SHORT, LONG = 0, 1


class TopologyKind(Enum):
    """FRANSON: one local unbalanced interferometer per party. HUG: arms crossed around the source."""

    FRANSON = 0
    HUG = 1


def to_topology_kind(value):
    if isinstance(value, str):
        try:
            return TopologyKind[value.upper()]
        except KeyError:
            raise InvalidParameterError(f"'{value}' is not a valid option for TopologyKind")
    return value


def _non_negative(inst, att, value):
    if not (math.isfinite(value) and value >= 0):
        raise InvalidParameterError(f"{att.name} must be finite and >= 0, got {value}")


def _positive(inst, att, value):
    if not (math.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{att.name} must be finite and > 0, got {value}")


@define(frozen=True)
class TopologyConfig:
    """
    Interferometer geometry.

    Attributes:
        kind: FRANSON or HUG.
        long_short_difference: L - S in both interferometers (m).
        long_arm_length_bob: total arm length of Bob's fibre interferometer (km).
        short_arm_length_alice: Alice's short arm (m).
        delay_offset_delta: delay line setting (mm), added to Alice's long arm.
        group_velocity: converts path length to delay (m/s).
        design_window: coincidence window the long-short delay must exceed (s).
        splitter_transmission: probability of the short path at each splitter.
        jitter_sigma: Gaussian detector timing jitter (s), 0 disables it.
    """

    kind: TopologyKind = field(default=TopologyKind.HUG, converter=to_topology_kind)
    long_short_difference: float = field(default=2.0, converter=float, validator=[_positive])
    long_arm_length_bob: float = field(default=1.04, converter=float, validator=[_positive])
    short_arm_length_alice: float = field(default=1.0, converter=float, validator=[_positive])
    delay_offset_delta: float = field(default=0.0, converter=float)
    group_velocity: float = field(default=2.0e8, converter=float, validator=[_positive])
    design_window: float = field(default=4e-9, converter=float, validator=[_positive])
    splitter_transmission: float = field(default=0.5, converter=float)
    jitter_sigma: float = field(default=0.0, converter=float, validator=[_non_negative])

    def __attrs_post_init__(self):
        if not (0.0 < self.splitter_transmission < 1.0):
            raise InvalidParameterError(
                f"splitter_transmission must lie in (0, 1), got {self.splitter_transmission}"
            )
        if abs(self.delay_offset_delta) > 75.0:
            raise InvalidParameterError(
                f"delay_offset_delta {self.delay_offset_delta} mm is outside the 150 mm delay line range"
            )
        if self.long_short_delay() <= self.design_window:
            raise InvalidParameterError(
                f"long-short delay {self.long_short_delay():.3e} s must exceed the "
                f"coincidence window {self.design_window:.3e} s"
            )

    def arm_length(self, party: Party, path: int) -> float:
        """Path length in metres from the source to `party`'s detectors."""
        party = to_party(party)
        if party is Party.ALICE:
            short = self.short_arm_length_alice
            extra = self.long_short_difference + self.delay_offset_delta * 1e-3
        else:
            short = self.long_arm_length_bob * 1e3
            extra = self.long_short_difference
        return short + (extra if path == LONG else 0.0)

    def arrival_delay(self, party: Party, path: int) -> float:
        return self.arm_length(party, path) / self.group_velocity

    def long_short_delay(self) -> float:
        return self.long_short_difference / self.group_velocity

    def cross_party_offset(self) -> float:
        """Bob-minus-Alice arrival delay for a pair that took the short paths."""
        return self.arrival_delay(Party.BOB, SHORT) - self.arrival_delay(Party.ALICE, SHORT)

    def coincident_path_fraction(self) -> float:
        """Probability that both photons take equal paths (SS or LL)."""
        t = self.splitter_transmission
        return t * t + (1.0 - t) * (1.0 - t)

    @classmethod
    def from_omega_conf(cls, conf: DictConfig) -> "TopologyConfig":
        kwargs = {key: conf[key] for key in conf if key in _TOPOLOGY_KEYS}
        return cls(**kwargs)


_TOPOLOGY_KEYS = (
    "kind",
    "long_short_difference",
    "long_arm_length_bob",
    "short_arm_length_alice",
    "delay_offset_delta",
    "group_velocity",
    "design_window",
    "splitter_transmission",
    "jitter_sigma",
)


@define(frozen=True)
class SourceModel:
    """
    Photon-pair source and detector background. Detection efficiency is folded into the rates.
    singles_rate_* and dark_rate are per detector.
    """

    pair_rate: float = field(default=200.0, converter=float, validator=[_non_negative])
    singles_rate_alice: float = field(default=0.0, converter=float, validator=[_non_negative])
    singles_rate_bob: float = field(default=0.0, converter=float, validator=[_non_negative])
    dark_rate: float = field(default=0.0, converter=float, validator=[_non_negative])

    def background_rate(self, party: Party) -> float:
        singles = (
            self.singles_rate_alice if to_party(party) is Party.ALICE else self.singles_rate_bob
        )
        return singles + self.dark_rate

    @classmethod
    def for_cross_rate(
        cls, topology: TopologyConfig, cross_rate: float, **background
    ) -> "SourceModel":
        """Source whose mean total cross-coincidence rate (four detector pairs summed) is cross_rate."""
        return cls(pair_rate=cross_rate / topology.coincident_path_fraction(), **background)

    @classmethod
    def from_omega_conf(
        cls, conf: DictConfig, topology: Optional[TopologyConfig] = None
    ) -> "SourceModel":
        background = {
            key: conf[key]
            for key in ("singles_rate_alice", "singles_rate_bob", "dark_rate")
            if key in conf
        }
        cross_rate = conf.get("cross_coincidence_rate", None)
        if cross_rate is not None:
            return cls.for_cross_rate(topology or TopologyConfig(), cross_rate, **background)
        pair_rate = conf.get("pair_rate", 200.0)
        if pair_rate is None:
            raise InvalidParameterError("source needs pair_rate or cross_coincidence_rate")
        return cls(pair_rate=pair_rate, **background)
