from .settings import (
    PhaseSettings,
    ChshSettings,
    SettingPair,
    TwoPhotonModel,
    ChshResult,
)
from .events import Party, Origin, DetectionEvent, EventStream, PhaseTrajectory, to_party
from .analysis_types import (
    PairingRule,
    AccidentalMethod,
    CoincidenceWindow,
    CountTable,
    FringeFit,
    AccidentalEstimate,
)

__all__ = [
    "PhaseSettings",
    "ChshSettings",
    "SettingPair",
    "TwoPhotonModel",
    "ChshResult",
    "Party",
    "Origin",
    "DetectionEvent",
    "EventStream",
    "PhaseTrajectory",
    "to_party",
    "PairingRule",
    "AccidentalMethod",
    "CoincidenceWindow",
    "CountTable",
    "FringeFit",
    "AccidentalEstimate",
]
