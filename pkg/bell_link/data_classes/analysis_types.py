from typing import Optional, Dict, Any
from enum import Enum
import logging

import numpy as np
from attrs import define, field, evolve
from omegaconf import DictConfig

from bell_link.errors import InvalidParameterError
from bell_link.data_classes.settings import PhaseSettings

logger = logging.getLogger(__name__)


class PairingRule(Enum):
    ALL_PAIRS = 0
    NEAREST_NO_REUSE = 1


class AccidentalMethod(Enum):
    FROM_SINGLES = 0
    FROM_SHIFTED_WINDOW = 1


def _enum_converter(enum_cls):
    def convert(value):
        if isinstance(value, str):
            try:
                return enum_cls[value.upper()]
            except KeyError:
                raise InvalidParameterError(
                    f"'{value}' is not a valid option for {enum_cls.__name__}"
                )
        return value

    return convert


to_pairing_rule = _enum_converter(PairingRule)
to_accidental_method = _enum_converter(AccidentalMethod)


@define(frozen=True)
class CoincidenceWindow:
    """
    Coincidence test |t_a - (t_b - offset)| <= width / 2.

    offset is the fixed Bob-minus-Alice arrival delay of time-coincident pairs (the long
    fibre arms make it microseconds); it plays the role of the delay set in the
    coincidence electronics.
    """

    width: float = field(default=4e-9, converter=float)
    pairing_rule: PairingRule = field(
        default=PairingRule.NEAREST_NO_REUSE, converter=to_pairing_rule
    )
    offset: float = field(default=0.0, converter=float)

    @width.validator
    def _check_width(self, att, value):
        if not value > 0:
            raise InvalidParameterError(f"coincidence window width must be > 0, got {value}")

    @property
    def half_width(self) -> float:
        return self.width / 2.0

    def with_offset(self, offset: float) -> "CoincidenceWindow":
        return evolve(self, offset=offset)

    @classmethod
    def from_omega_conf(cls, conf: DictConfig) -> "CoincidenceWindow":
        kwargs = {}
        for key in ("width", "pairing_rule", "offset"):
            if key in conf and conf[key] is not None:
                kwargs[key] = conf[key]
        return cls(**kwargs)


def _counts_converter(value):
    counts = np.array(value, dtype=np.float64).reshape(2, 2)
    return counts


@define(frozen=True, eq=False)
class CountTable:
    """
    Coincidence counts per detector pair; counts[i-1, j-1] is Alice detector i with Bob
    detector j. Net (accidental-subtracted) and expected-count tables hold non-integer values.
    """

    counts: np.ndarray = field(converter=_counts_converter)
    integration_time: float = field(converter=float)
    settings: Optional[PhaseSettings] = field(default=None)
    net: bool = field(default=False)

    @counts.validator
    def _check_counts(self, att, value):
        if np.any(value < 0) or not np.all(np.isfinite(value)):
            raise InvalidParameterError("coincidence counts must be finite and >= 0")

    def count(self, detector_a: int, detector_b: int) -> float:
        return float(self.counts[detector_a - 1, detector_b - 1])

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def correlation(self) -> float:
        """(N11 + N22 - N12 - N21) / N_tot; NaN for an empty table."""
        total = self.total
        if total <= 0:
            return float("nan")
        c = self.counts
        return float((c[0, 0] + c[1, 1] - c[0, 1] - c[1, 0]) / total)

    def transposed(self) -> "CountTable":
        return evolve(self, counts=self.counts.T.copy())

    def __add__(self, other: "CountTable") -> "CountTable":
        return CountTable(
            counts=self.counts + other.counts,
            integration_time=self.integration_time + other.integration_time,
            settings=self.settings,
            net=self.net or other.net,
        )

    def to_dict(self) -> Dict[str, Any]:
        ret = {
            "n11": float(self.counts[0, 0]),
            "n12": float(self.counts[0, 1]),
            "n21": float(self.counts[1, 0]),
            "n22": float(self.counts[1, 1]),
            "integration_time": self.integration_time,
            "net": self.net,
        }
        if self.settings is not None:
            ret["phi_a"] = self.settings.phi_a
            ret["phi_b"] = self.settings.phi_b
        return ret


@define(frozen=True)
class FringeFit:
    """
    Fit of N(phi) = offset * [1 + visibility * cos(phi + phase0)].

    degenerate_phase is set when the amplitude is too small for phase0 to mean anything;
    constrained is set when the raw estimate fell outside [0, 1] and was clipped.
    """

    amplitude: float
    offset: float
    phase0: float
    visibility: float
    amplitude_error: float = float("nan")
    offset_error: float = float("nan")
    phase0_error: float = float("nan")
    visibility_error: float = float("nan")
    residual: float = 0.0
    n_points: int = 0
    degenerate_phase: bool = False
    constrained: bool = False
    covariance: Optional[np.ndarray] = field(default=None, eq=False, repr=False)

    def predict(self, phi) -> np.ndarray:
        return self.offset * (1.0 + self.visibility * np.cos(np.asarray(phi) + self.phase0))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "amplitude": self.amplitude,
            "offset": self.offset,
            "phase0": self.phase0,
            "visibility": self.visibility,
            "amplitude_error": self.amplitude_error,
            "offset_error": self.offset_error,
            "phase0_error": self.phase0_error,
            "visibility_error": self.visibility_error,
            "residual": self.residual,
            "n_points": self.n_points,
            "degenerate_phase": self.degenerate_phase,
            "constrained": self.constrained,
        }


@define(frozen=True, eq=False)
class AccidentalEstimate:
    """Accidental coincidence rate (counts/s) per detector pair, indexed like CountTable."""

    rates: np.ndarray = field(converter=_counts_converter)
    method: AccidentalMethod = field(
        default=AccidentalMethod.FROM_SINGLES, converter=to_accidental_method
    )

    @rates.validator
    def _check_rates(self, att, value):
        if np.any(value < 0) or not np.all(np.isfinite(value)):
            raise InvalidParameterError("accidental rates must be finite and >= 0")

    @classmethod
    def uniform(cls, rate: float, method=AccidentalMethod.FROM_SINGLES) -> "AccidentalEstimate":
        return cls(rates=np.full((2, 2), rate), method=method)
