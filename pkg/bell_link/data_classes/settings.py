"""
Value types shared by the closed-form predictions, the samplers and the analysis code.
Phases are radians and are never wrapped on storage.
"""

from typing import Tuple, List, Optional
from enum import Enum
import math

import numpy as np
from attrs import define, field
from omegaconf import DictConfig

from bell_link.errors import InvalidParameterError


def _finite(inst, att, value):
    if not math.isfinite(value):
        raise InvalidParameterError(f"{att.name} must be a finite number, got {value}")


def _unit_interval(inst, att, value):
    if not (0.0 <= value <= 1.0):
        raise InvalidParameterError(f"{att.name} must lie in [0, 1], got {value}")


def _positive(inst, att, value):
    if not value > 0:
        raise InvalidParameterError(f"{att.name} must be > 0, got {value}")


class SettingPair(Enum):
    """The four CHSH setting combinations, in the order they enter S."""

    A_B = 0
    A_PRIME_B = 1
    A_B_PRIME = 2
    A_PRIME_B_PRIME = 3

    @property
    def indices(self) -> Tuple[int, int]:
        """(Alice setting index, Bob setting index), 0 = unprimed, 1 = primed."""
        return {
            SettingPair.A_B: (0, 0),
            SettingPair.A_PRIME_B: (1, 0),
            SettingPair.A_B_PRIME: (0, 1),
            SettingPair.A_PRIME_B_PRIME: (1, 1),
        }[self]

    @property
    def sign(self) -> int:
        return -1 if self is SettingPair.A_PRIME_B_PRIME else 1


@define(frozen=True)
class PhaseSettings:
    """Analyser phases applied in Alice's and Bob's interferometers."""

    phi_a: float = field(default=0.0, converter=float, validator=[_finite])
    phi_b: float = field(default=0.0, converter=float, validator=[_finite])

    @property
    def relative_phase(self) -> float:
        return self.phi_a - self.phi_b

    @classmethod
    def from_omega_conf(cls, conf: DictConfig) -> "PhaseSettings":
        return cls(phi_a=conf.get("phi_a", 0.0), phi_b=conf.get("phi_b", 0.0))


@define(frozen=True)
class ChshSettings:
    phi_a: float = field(converter=float, validator=[_finite])
    phi_a_prime: float = field(converter=float, validator=[_finite])
    phi_b: float = field(converter=float, validator=[_finite])
    phi_b_prime: float = field(converter=float, validator=[_finite])

    @classmethod
    def canonical(cls) -> "ChshSettings":
        """Settings of maximal violation: a = pi/4, a' = -pi/4, b = 0, b' = pi/2."""
        return cls(math.pi / 4, -math.pi / 4, 0.0, math.pi / 2)

    @classmethod
    def from_omega_conf(cls, conf: Optional[DictConfig]) -> "ChshSettings":
        if conf is None:
            return cls.canonical()
        canonical = cls.canonical()
        return cls(
            phi_a=conf.get("phi_a", canonical.phi_a),
            phi_a_prime=conf.get("phi_a_prime", canonical.phi_a_prime),
            phi_b=conf.get("phi_b", canonical.phi_b),
            phi_b_prime=conf.get("phi_b_prime", canonical.phi_b_prime),
        )

    def alice_phases(self) -> Tuple[float, float]:
        return (self.phi_a, self.phi_a_prime)

    def bob_phases(self) -> Tuple[float, float]:
        return (self.phi_b, self.phi_b_prime)

    def settings_for(self, pair: SettingPair) -> PhaseSettings:
        x, y = pair.indices
        return PhaseSettings(self.alice_phases()[x], self.bob_phases()[y])

    def pairs(self) -> List[PhaseSettings]:
        """PhaseSettings for (a,b), (a',b), (a,b'), (a',b')."""
        return [self.settings_for(pair) for pair in SettingPair]


@define(frozen=True)
class TwoPhotonModel:
    """
    Two-photon interference model.

    Attributes:
        base_visibility: visibility reached at perfect path balance.
        envelope_fwhm: FWHM (mm) of the indistinguishability envelope, i.e. the two-photon
            coherence length.
        path_imbalance_offset: residual imbalance (mm) of L_A - S_A against L_B - S_B that is
            present before the delay line is moved.
    """

    base_visibility: float = field(
        default=1.0, converter=float, validator=[_finite, _unit_interval]
    )
    envelope_fwhm: float = field(default=1.0, converter=float, validator=[_positive])
    path_imbalance_offset: float = field(default=0.0, converter=float, validator=[_finite])

    def visibility_at(self, delay: float) -> float:
        """Effective visibility with the delay line set to `delay` mm."""
        from bell_link.quantum.quantum_core import effective_visibility

        return effective_visibility(self, delay + self.path_imbalance_offset)

    @classmethod
    def from_omega_conf(cls, conf: DictConfig) -> "TwoPhotonModel":
        return cls(**{key: conf[key] for key in conf if key in _MODEL_KEYS})


_MODEL_KEYS = ("base_visibility", "envelope_fwhm", "path_imbalance_offset")


@define(frozen=True)
class ChshResult:
    """
    CHSH outcome. e_values follow SettingPair order. s_sigma and significance are NaN when
    no counting statistics exist (closed-form results).
    """

    e_values: Tuple[float, float, float, float] = field(converter=tuple)
    s_value: float = field(converter=float)
    s_sigma: float = field(default=float("nan"), converter=float)
    significance: float = field(default=float("nan"), converter=float)
    e_sigmas: Tuple[float, ...] = field(default=(), converter=tuple)
    totals: Tuple[float, ...] = field(default=(), converter=tuple)
    s_from_fits: float = field(default=float("nan"), converter=float)
    s_sigma_fit: float = field(default=float("nan"), converter=float)

    @e_values.validator
    def _check_e(self, att, value):
        if len(value) != 4:
            raise InvalidParameterError(f"e_values needs 4 entries, got {len(value)}")
        for e in value:
            if not (-1.0 - 1e-12 <= e <= 1.0 + 1e-12):
                raise InvalidParameterError(f"correlation {e} outside [-1, 1]")

    @s_value.validator
    def _check_s(self, att, value):
        if abs(value) > 4.0 + 1e-12:
            raise InvalidParameterError(f"|S| cannot exceed 4, got {value}")

    @classmethod
    def from_correlations(
        cls, e_values, e_sigmas=None, totals=None
    ) -> "ChshResult":
        """S = e1 + e2 + e3 - e4. Adds sigma and significance when e_sigmas are given."""
        e = tuple(float(x) for x in e_values)
        s_value = e[0] + e[1] + e[2] - e[3]
        if e_sigmas is None:
            return cls(e_values=e, s_value=s_value, totals=() if totals is None else totals)
        s_sigma = float(np.sqrt(np.sum(np.square(e_sigmas))))
        significance = (s_value - 2.0) / s_sigma if s_sigma > 0 else float("nan")
        return cls(
            e_values=e,
            s_value=s_value,
            s_sigma=s_sigma,
            significance=significance,
            e_sigmas=e_sigmas,
            totals=() if totals is None else totals,
        )

    def to_dict(self):
        return {
            "e_values": [float(e) for e in self.e_values],
            "e_sigmas": [float(e) for e in self.e_sigmas],
            "totals": [float(n) for n in self.totals],
            "s_value": self.s_value,
            "s_sigma": self.s_sigma,
            "significance": self.significance,
            "s_from_fits": self.s_from_fits,
            "s_sigma_fit": self.s_sigma_fit,
        }
