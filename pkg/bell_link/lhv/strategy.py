"""
Deterministic local hidden-variable strategies.

A strategy fixes, per hidden value lambda, each party's outcome and arrival slot (0 short,
1 long) as a function of only that party's own setting index, plus the pair of paths the
source launches. Locality holds by construction: nothing here can read the remote setting.
"""

from typing import Tuple, Dict, Any, Optional
import math
import logging

import numpy as np
from attrs import define, field
from omegaconf import DictConfig, ListConfig, OmegaConf

from bell_link.data_classes import ChshSettings, SettingPair
from bell_link.topology.topology_config import TopologyKind, to_topology_kind
from bell_link.errors import InvalidParameterError, UndefinedCorrelationError

logger = logging.getLogger(__name__)

SOURCE_SLOTS = ("00", "11", "01", "10")
CROSS_SOURCE_SLOTS = ("00", "11")


def _table(dtype):
    def convert(value):
        return np.array(value, dtype=dtype).reshape(-1, 2)

    return convert


@define(frozen=True, eq=False)
class LocalStrategy:
    """
    Attributes:
        weights: probability of each lambda, sums to 1.
        outcomes_a / outcomes_b: (n_lambda, 2) tables of +1/-1 indexed by setting index.
        slots_a / slots_b: (n_lambda, 2) tables of arrival slot 0/1 indexed by setting index.
        source_slots: per lambda the (photon 1, photon 2) paths as "00", "11", "01" or "10".
    """

    weights: np.ndarray = field(converter=lambda w: np.array(w, dtype=np.float64).ravel())
    outcomes_a: np.ndarray = field(converter=_table(np.int8))
    outcomes_b: np.ndarray = field(converter=_table(np.int8))
    slots_a: np.ndarray = field(converter=_table(np.int8))
    slots_b: np.ndarray = field(converter=_table(np.int8))
    source_slots: Tuple[str, ...] = field(converter=lambda s: tuple(str(x) for x in s))
    name: str = field(default="custom")

    def __attrs_post_init__(self):
        n = len(self.weights)
        if n == 0:
            raise InvalidParameterError("a strategy needs at least one lambda")
        for label, table in (
            ("outcomes_a", self.outcomes_a),
            ("outcomes_b", self.outcomes_b),
            ("slots_a", self.slots_a),
            ("slots_b", self.slots_b),
        ):
            if table.shape != (n, 2):
                raise InvalidParameterError(f"{label} must have shape ({n}, 2), got {table.shape}")
        if len(self.source_slots) != n:
            raise InvalidParameterError(f"source_slots needs {n} entries")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise InvalidParameterError("weights must be finite and >= 0")
        if not math.isclose(float(self.weights.sum()), 1.0, abs_tol=1e-9):
            raise InvalidParameterError(f"weights must sum to 1, got {self.weights.sum()}")
        for table in (self.outcomes_a, self.outcomes_b):
            if not np.all(np.isin(table, (-1, 1))):
                raise InvalidParameterError("outcomes must be +1 or -1")
        for table in (self.slots_a, self.slots_b):
            if not np.all(np.isin(table, (0, 1))):
                raise InvalidParameterError("slots must be 0 or 1")
        bad = [s for s in self.source_slots if s not in SOURCE_SLOTS]
        if bad:
            raise InvalidParameterError(f"source slots must be one of {SOURCE_SLOTS}, got {bad}")

    def __len__(self) -> int:
        return len(self.weights)

    def outcome_a(self, lam: int, x: int) -> int:
        return int(self.outcomes_a[lam, x])

    def outcome_b(self, lam: int, y: int) -> int:
        return int(self.outcomes_b[lam, y])

    def slot_a(self, lam: int, x: int) -> int:
        return int(self.slots_a[lam, x])

    def slot_b(self, lam: int, y: int) -> int:
        return int(self.slots_b[lam, y])

    def source_slot(self, lam: int) -> str:
        return self.source_slots[lam]

    def source_paths(self) -> np.ndarray:
        """(n_lambda, 2) array of the source slot digits."""
        return np.array([[int(s[0]), int(s[1])] for s in self.source_slots], dtype=np.int8)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "lambdas": [
                {
                    "weight": float(self.weights[k]),
                    "outcome_a": self.outcomes_a[k].tolist(),
                    "outcome_b": self.outcomes_b[k].tolist(),
                    "slot_a": self.slots_a[k].tolist(),
                    "slot_b": self.slots_b[k].tolist(),
                    "source_slot": self.source_slots[k],
                }
                for k in range(len(self))
            ],
        }

    @classmethod
    def from_omega_conf(cls, conf: DictConfig) -> "LocalStrategy":
        lambdas = conf.get("lambdas", None)
        if not isinstance(lambdas, (ListConfig, list)) or len(lambdas) == 0:
            raise InvalidParameterError("strategy needs a non-empty 'lambdas' list")
        rows = [OmegaConf.to_container(lam) if isinstance(lam, DictConfig) else lam for lam in lambdas]
        try:
            return cls(
                weights=[row["weight"] for row in rows],
                outcomes_a=[row["outcome_a"] for row in rows],
                outcomes_b=[row["outcome_b"] for row in rows],
                slots_a=[row["slot_a"] for row in rows],
                slots_b=[row["slot_b"] for row in rows],
                source_slots=[str(row["source_slot"]).zfill(2) for row in rows],
                name=str(conf.get("name", "custom")),
            )
        except (KeyError, TypeError) as e:
            raise InvalidParameterError(f"strategy lambda entry is incomplete: {e}")


def slot_steering_attack() -> LocalStrategy:
    """
    Two equally weighted lambdas that fake S = 4 in a Franson test.

    Each party picks its arrival slot from its own setting, so which pairs fall in the
    coincidence window (equal slots) depends on both settings jointly. The hug geometry
    fixes the slots at the source and defeats it.
    """
    return LocalStrategy(
        weights=[0.5, 0.5],
        outcomes_a=[[1, 1], [1, 1]],
        outcomes_b=[[1, -1], [1, 1]],
        slots_a=[[0, 1], [0, 1]],
        slots_b=[[0, 1], [1, 0]],
        source_slots=["00", "11"],
        name="slot_steering",
    )


def setting_independent_slots() -> LocalStrategy:
    """The slot-steering outcomes with every slot pinned to short."""
    attack = slot_steering_attack()
    return LocalStrategy(
        weights=attack.weights,
        outcomes_a=attack.outcomes_a,
        outcomes_b=attack.outcomes_b,
        slots_a=np.zeros((2, 2)),
        slots_b=np.zeros((2, 2)),
        source_slots=["00", "00"],
        name="setting_independent",
    )


BUNDLED_STRATEGIES = {
    "slot_steering": slot_steering_attack,
    "setting_independent": setting_independent_slots,
}


@define(frozen=True)
class AttackReport:
    kind: TopologyKind = field(converter=to_topology_kind)
    e_values: Tuple[float, float, float, float] = field(converter=tuple)
    s_value: float = field(converter=float)
    kept_fractions: Tuple[float, float, float, float] = field(converter=tuple)
    strategy_name: str = "custom"

    @kept_fractions.validator
    def _check_fractions(self, att, value):
        if any(not (0.0 <= f <= 1.0 + 1e-12) for f in value):
            raise InvalidParameterError(f"kept fractions must lie in [0, 1], got {value}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.name,
            "strategy": self.strategy_name,
            "e_values": [float(e) for e in self.e_values],
            "s_value": self.s_value,
            "kept_fractions": [float(f) for f in self.kept_fractions],
        }


def kept_mask(strategy: LocalStrategy, kind: TopologyKind, x: int, y: int) -> np.ndarray:
    """Which lambdas give a cross-party coincidence for setting indices (x, y)."""
    if to_topology_kind(kind) is TopologyKind.FRANSON:
        return strategy.slots_a[:, x] == strategy.slots_b[:, y]
    return np.isin(np.array(strategy.source_slots), CROSS_SOURCE_SLOTS)


def evaluate_strategy(
    strategy: LocalStrategy,
    kind: TopologyKind,
    settings: Optional[ChshSettings] = None,
) -> AttackReport:
    """
    Post-selected correlations of a local strategy.

    Franson keeps a lambda when both parties land in the same slot; the hug geometry keeps it
    when the source launched SS or LL. `settings` only labels which phases the indices stand
    for; the strategy sees indices.
    """
    kind = to_topology_kind(kind)
    e_values, kept = [], []
    for pair in SettingPair:
        x, y = pair.indices
        mask = kept_mask(strategy, kind, x, y)
        weight = float(strategy.weights[mask].sum())
        if weight <= 0:
            logger.error(f"{strategy.name}: no kept events for {pair.name} on {kind.name}")
            raise UndefinedCorrelationError(
                f"strategy {strategy.name} keeps no events for {pair.name} ({kind.name})"
            )
        products = strategy.outcomes_a[:, x].astype(np.float64) * strategy.outcomes_b[:, y]
        e_values.append(float(np.sum(strategy.weights[mask] * products[mask]) / weight))
        kept.append(weight)
    s_value = e_values[0] + e_values[1] + e_values[2] - e_values[3]
    logger.debug(f"{strategy.name} on {kind.name}: E={e_values}, S={s_value:.4f}")
    return AttackReport(
        kind=kind,
        e_values=e_values,
        s_value=s_value,
        kept_fractions=kept,
        strategy_name=strategy.name,
    )
