from .lock_loop import (
    NoiseModel,
    ControllerConfig,
    SaturationStrategy,
    WavelengthPair,
    LockLoopState,
    LockRun,
    LockSummary,
    step_noise,
    step_controller,
    switch_set_point,
    estimate_residual,
    dither_response,
    feedback_intensity,
    stretcher_range,
    run_lock,
    settling_time,
)

__all__ = [
    "NoiseModel",
    "ControllerConfig",
    "SaturationStrategy",
    "WavelengthPair",
    "LockLoopState",
    "LockRun",
    "LockSummary",
    "step_noise",
    "step_controller",
    "switch_set_point",
    "estimate_residual",
    "dither_response",
    "feedback_intensity",
    "stretcher_range",
    "run_lock",
    "settling_time",
]
