from .strategy import (
    LocalStrategy,
    AttackReport,
    evaluate_strategy,
    kept_mask,
    slot_steering_attack,
    setting_independent_slots,
    BUNDLED_STRATEGIES,
)
from .enumeration import max_s_exhaustive, lambda_signatures
from .lhv_sampler import sample_lhv_events, setting_index
from .strategy_files import load_strategy, save_strategy, resolve_strategy

__all__ = [
    "LocalStrategy",
    "AttackReport",
    "evaluate_strategy",
    "kept_mask",
    "slot_steering_attack",
    "setting_independent_slots",
    "BUNDLED_STRATEGIES",
    "max_s_exhaustive",
    "lambda_signatures",
    "sample_lhv_events",
    "setting_index",
    "load_strategy",
    "save_strategy",
    "resolve_strategy",
]
