"""
Gain scan for the phase lock: residual RMS of run_lock over a (kp, ki) grid.

    python -m bell_link.stabilization.tuning --kp 0.3 0.5 0.7 0.9 --ki 0 0.5 5 --seeds 3
"""

from typing import Optional, Sequence, List
import argparse
import itertools
import logging
import math

import numpy as np
from attrs import define, evolve

from bell_link.errors import InvalidParameterError
from bell_link.stabilization.lock_loop import (
    ControllerConfig,
    NoiseModel,
    WavelengthPair,
    run_lock,
)

logger = logging.getLogger(__name__)


def expected_residual_rms(kp: float, noise: NoiseModel, tick: float) -> float:
    """Stationary RMS of the proportional loop r <- (1 - kp) * (r + n), n ~ N(0, c^2 * tick)."""
    if not 0.0 < kp < 2.0:
        raise InvalidParameterError(f"the proportional loop is unstable for kp={kp}")
    shrink = (1.0 - kp) ** 2
    return math.sqrt(shrink * noise.drift_coefficient**2 * tick / (1.0 - shrink))


@define(frozen=True)
class GainPoint:
    kp: float
    ki: float
    residual_rms: float
    residual_rms_spread: float
    saturation_count: int
    predicted_rms: float


def scan_gains(
    kp_values: Sequence[float],
    ki_values: Sequence[float],
    noise: Optional[NoiseModel] = None,
    base: Optional[ControllerConfig] = None,
    wavelengths: Optional[WavelengthPair] = None,
    duration: float = 1.0,
    seeds: Sequence[int] = (0, 1, 2),
) -> List[GainPoint]:
    noise = noise or NoiseModel()
    base = base or ControllerConfig()
    points = []
    for kp, ki in itertools.product(kp_values, ki_values):
        config = evolve(base, kp=kp, ki=ki)
        runs = [run_lock(duration, noise, config, wavelengths, seed=seed) for seed in seeds]
        rms = np.array([r.summary.residual_rms for r in runs])
        point = GainPoint(
            kp=float(kp),
            ki=float(ki),
            residual_rms=float(rms.mean()),
            residual_rms_spread=float(rms.std()),
            saturation_count=sum(r.summary.saturation_count for r in runs),
            predicted_rms=expected_residual_rms(kp, noise, config.tick),
        )
        logger.info(f"kp={kp} ki={ki}: residual rms {point.residual_rms:.4f} rad")
        points.append(point)
    return points


def main(argv: Optional[Sequence[str]] = None) -> None:
    parser = argparse.ArgumentParser(prog="bell_link.stabilization.tuning")
    parser.add_argument("--kp", type=float, nargs="+", default=[0.3, 0.5, 0.7, 0.9])
    parser.add_argument("--ki", type=float, nargs="+", default=[0.0, 0.5, 5.0])
    parser.add_argument("--drift", type=float, default=10.0, help="rad/sqrt(s)")
    parser.add_argument("--duration", type=float, default=1.0)
    parser.add_argument("--seeds", type=int, default=3)
    args = parser.parse_args(argv)

    noise = NoiseModel(drift_coefficient=args.drift)
    points = scan_gains(args.kp, args.ki, noise, duration=args.duration, seeds=range(args.seeds))
    print(f"{'kp':>6} {'ki':>6} {'rms':>8} {'spread':>8} {'predicted':>9} {'saturated':>9}")
    for p in points:
        print(
            f"{p.kp:6.2f} {p.ki:6.2f} {p.residual_rms:8.4f} {p.residual_rms_spread:8.4f} "
            f"{p.predicted_rms:9.4f} {p.saturation_count:9d}"
        )


if __name__ == "__main__":
    main()
