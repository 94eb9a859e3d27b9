import math

import numpy as np
import pytest
from attrs import evolve

from bell_link.stabilization import (
    ControllerConfig,
    NoiseModel,
    WavelengthPair,
    LockLoopState,
    SaturationStrategy,
    step_noise,
    step_controller,
    estimate_residual,
    run_lock,
    settling_time,
)
from bell_link.stabilization.tuning import expected_residual_rms
from bell_link.errors import InvalidParameterError

QUIET = NoiseModel(drift_coefficient=0.0)


def test_no_error_means_no_actuation():
    state = step_controller(LockLoopState.initial(), ControllerConfig())
    assert state.actuator_phase == 0.0
    assert state.residual_phase == 0.0


def test_proportional_step():
    config = ControllerConfig(kp=0.5, ki=0.0, kd=0.0)
    state = step_controller(LockLoopState.initial(drift_phase=-0.3), config)
    assert state.actuator_phase == pytest.approx(0.15, abs=1e-9)
    assert state.residual_phase == pytest.approx(-0.15, abs=1e-9)


def test_quiet_loop_stays_locked():
    on = run_lock(0.05, QUIET, ControllerConfig(), seed=3)
    off = run_lock(0.05, QUIET, ControllerConfig().disabled(), seed=3)
    assert np.all(on.residual == 0.0)
    assert np.array_equal(on.residual, off.residual)


def test_lock_holds_the_default_drift():
    run = run_lock(1.0, NoiseModel(), ControllerConfig(), seed=1)
    assert run.summary.n_steps == 5000
    assert run.summary.residual_rms <= 0.2, f"residual rms {run.summary.residual_rms}"
    assert run.summary.saturation_count == 0


def test_open_loop_follows_the_random_walk():
    run = run_lock(1.0, NoiseModel(), ControllerConfig(enabled=False), seed=2)
    assert np.all(run.actuator == 0.0)
    assert np.allclose(run.residual, run.drift)
    steps = np.diff(run.drift)
    assert np.std(steps) == pytest.approx(10.0 * math.sqrt(2e-4), rel=0.05)


def test_feedback_intensity_tracks_the_residual():
    wavelengths = WavelengthPair()
    run = run_lock(0.2, NoiseModel(), ControllerConfig(), wavelengths, seed=4)
    expected = 0.5 * (1.0 + np.cos(run.residual * 806.0 / 852.0))
    assert np.allclose(run.intensity, expected)


def test_set_point_switch_settles():
    run = run_lock(
        0.2, NoiseModel(), ControllerConfig(), seed=5, set_point_schedule=[(0.1, math.pi / 2)]
    )
    assert run.set_points[-1] == pytest.approx(math.pi / 2)
    settle = settling_time(run, since=0.1)
    assert settle < 0.01, f"settled after {settle} s"
    trajectory = run.phase_trajectory()
    _, phi_b = trajectory.at(np.array([0.19]))
    assert phi_b[0] == pytest.approx(math.pi / 2, abs=0.3)


def test_recovers_from_a_quarter_wave_kick():
    run = run_lock(0.1, QUIET, ControllerConfig(), drift_steps=[(0.02, -math.pi / 2)])
    assert abs(run.residual[-1]) < 0.01


def test_open_loop_never_settles():
    run = run_lock(0.05, QUIET, ControllerConfig(enabled=False), drift_steps=[(0.01, 1.0)])
    assert math.isnan(settling_time(run, since=0.01))


@pytest.mark.parametrize(
    "strategy, expected_actuator, expected_slips",
    [
        (SaturationStrategy.CLAMP, 7.0 * 852.0 / 806.0 / 2.0, 0),
        (SaturationStrategy.SLIP, 3.6 + 0.63 + 0.5 * 0.9 * 2e-4 + 1e-5 * 0.9 / 2e-4 - 2 * math.pi, 1),
    ],
)
def test_actuator_saturation(strategy, expected_actuator, expected_slips):
    config = ControllerConfig(actuator_range=7.0, saturation_strategy=strategy)
    state = LockLoopState.initial(drift_phase=-4.5, actuator_phase=3.6)
    state = step_controller(state, config)
    assert state.saturated
    assert state.actuator_phase == pytest.approx(expected_actuator, abs=1e-9)
    assert state.slips == expected_slips


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        ControllerConfig(actuator_range=1.0)
    with pytest.raises(InvalidParameterError):
        NoiseModel(drift_coefficient=-1.0)
    with pytest.raises(InvalidParameterError):
        run_lock(0.0, QUIET, ControllerConfig())
    assert ControllerConfig().disabled().gains == (0.0, 0.0, 0.0)


def test_noise_step_is_a_scaled_normal_draw():
    noise = NoiseModel(drift_coefficient=10.0, sample_interval=2e-4)
    state = step_noise(LockLoopState.initial(), noise, np.random.default_rng(3))
    z = np.random.default_rng(3).standard_normal()
    assert state.drift_phase == pytest.approx(10.0 * math.sqrt(2e-4) * z)
    assert state.residual_phase == pytest.approx(state.drift_phase)
    assert state.actuator_phase == 0.0

    quiet = step_noise(LockLoopState.initial(drift_phase=0.4), QUIET, np.random.default_rng(3))
    assert quiet.drift_phase == 0.4


@pytest.mark.parametrize("residual", [0.4, -0.4, 1.2])
def test_dither_finds_the_fringe_side(residual):
    wavelengths = WavelengthPair()
    # the controller's own prediction points to the wrong side of the fringe
    state = evolve(LockLoopState.initial(drift_phase=residual), residual_estimate=-residual)
    estimate, _ = estimate_residual(state, wavelengths, 2e-4, dither=0.05)
    assert estimate == pytest.approx(residual, abs=1e-9)
    by_continuity, _ = estimate_residual(state, wavelengths, 2e-4, dither=0.0)
    assert by_continuity == pytest.approx(-residual, abs=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_default_lock_across_seeds(seed):
    run = run_lock(1.0, NoiseModel(), ControllerConfig(), seed=seed)
    assert run.summary.residual_rms <= 0.1, f"residual rms {run.summary.residual_rms}"
    predicted = expected_residual_rms(0.7, NoiseModel(), 2e-4)
    assert run.summary.residual_rms == pytest.approx(predicted, rel=0.25)
    assert run.summary.saturation_count == 0


def test_quarter_wave_kick_settles_under_drift():
    run = run_lock(
        0.1, NoiseModel(), ControllerConfig(), seed=6, drift_steps=[(0.0199, math.pi / 2)]
    )
    after = run.times >= 0.0199
    assert np.abs(run.residual[after]).max() > 0.2
    settle = settling_time(run, since=0.0199, tolerance=0.1)
    assert settle <= 0.05, f"settled after {settle} s"
    late = run.residual[run.times >= 0.03]
    assert np.sqrt(np.mean(late**2)) <= 0.1


def test_wiener_drift_ensemble():
    noise = NoiseModel(drift_coefficient=10.0, sample_interval=1e-3)
    rng = np.random.default_rng(11)
    trials = 10000
    early = np.empty(trials)
    late = np.empty(trials)
    for k in range(trials):
        state = LockLoopState.initial()
        for n in range(4):
            state = step_noise(state, noise, rng)
            if n == 1:
                early[k] = state.drift_phase
        late[k] = state.drift_phase - early[k]
    assert state.time == pytest.approx(4e-3)
    # variance c^2 * t after 4 ms
    assert np.mean((early + late) ** 2) == pytest.approx(100.0 * 4e-3, rel=0.07)
    assert np.mean(early**2) == pytest.approx(100.0 * 2e-3, rel=0.07)
    # increments over [0, 2 ms] and [2 ms, 4 ms] are independent
    assert abs(np.corrcoef(early, late)[0, 1]) < 0.05


def test_dither_validation():
    with pytest.raises(InvalidParameterError):
        ControllerConfig(dither_amplitude=2.0)
    with pytest.raises(InvalidParameterError):
        ControllerConfig(dither_amplitude=-0.1)
