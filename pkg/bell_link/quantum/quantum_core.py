"""
Closed-form two-photon predictions for the |SS> + |LL> state behind 50/50 beamsplitters.

The interference term depends on the relative analyser phase phi_a - phi_b. Half of all pairs
are cross-party coincidences; in the hug geometry the other half leave both photons at one
party, which is why the four cross probabilities sum to 1/2.
"""

from typing import Sequence
import math
import logging

import numpy as np

from bell_link.data_classes.settings import (
    PhaseSettings,
    ChshSettings,
    TwoPhotonModel,
    ChshResult,
)
from bell_link.errors import InvalidParameterError

logger = logging.getLogger(__name__)

_FOUR_LN2 = 4.0 * math.log(2.0)


def _check_visibility(v: float) -> float:
    if not (math.isfinite(v) and 0.0 <= v <= 1.0):
        raise InvalidParameterError(f"visibility must lie in [0, 1], got {v}")
    return float(v)


def _check_detector(index: int, name: str) -> int:
    if index not in (1, 2):
        raise InvalidParameterError(f"{name} must be 1 or 2, got {index}")
    return index


def cross_coincidence_probability(
    settings: PhaseSettings, detector_a: int, detector_b: int, v: float
) -> float:
    """P_ij = (1/8) [1 + (-1)^(i+j) v cos(phi_a - phi_b)]."""
    v = _check_visibility(v)
    _check_detector(detector_a, "detector_a")
    _check_detector(detector_b, "detector_b")
    sign = 1.0 if (detector_a + detector_b) % 2 == 0 else -1.0
    return 0.125 * (1.0 + sign * v * math.cos(settings.relative_phase))


def probability_table(settings: PhaseSettings, v: float) -> np.ndarray:
    """All four P_ij as a 2x2 array indexed [i-1, j-1]."""
    return np.array(
        [
            [cross_coincidence_probability(settings, i, j, v) for j in (1, 2)]
            for i in (1, 2)
        ]
    )


def probability_arrays(relative_phase: np.ndarray, v) -> np.ndarray:
    """
    Vectorised P_ij for many relative phases (and optionally per-sample visibilities).
    Returns shape (n, 4) in the order P11, P12, P21, P22.
    """
    c = np.asarray(v) * np.cos(np.asarray(relative_phase, dtype=np.float64))
    same = 0.125 * (1.0 + c)
    diff = 0.125 * (1.0 - c)
    return np.stack(np.broadcast_arrays(same, diff, diff, same), axis=-1)


def correlation_e(settings: PhaseSettings, v: float) -> float:
    """E = (P11 + P22 - P12 - P21) / sum(P) = v cos(phi_a - phi_b)."""
    p = probability_table(settings, v)
    return float((p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0]) / p.sum())


def chsh_from_correlations(e_values: Sequence[float]) -> ChshResult:
    return ChshResult.from_correlations(e_values)


def chsh_s(settings: ChshSettings, v: float) -> ChshResult:
    """S = E(a,b) + E(a',b) + E(a,b') - E(a',b')."""
    _check_visibility(v)
    return chsh_from_correlations([correlation_e(pair, v) for pair in settings.pairs()])


def effective_visibility(model: TwoPhotonModel, delta: float) -> float:
    """Gaussian indistinguishability envelope with FWHM = model.envelope_fwhm (mm)."""
    return model.base_visibility * math.exp(
        -_FOUR_LN2 * (float(delta) / model.envelope_fwhm) ** 2
    )


def max_chsh_on_grid(v: float, n_points: int = 640) -> float:
    """
    max |S| over a uniform periodic phase grid of n_points per period.

    S only depends on phase differences, so Bob's unprimed phase is pinned to 0. For fixed
    b' the terms in a and a' separate:
        S = [cos(a) + cos(a - b')] + [cos(a') - cos(a' - b')]   (times v)
    which turns the 3-d search into an O(n^2) one.
    """
    v = _check_visibility(v)
    if n_points < 8:
        raise InvalidParameterError(f"n_points must be >= 8, got {n_points}")
    grid = np.arange(n_points) * (2.0 * math.pi / n_points)
    cos_grid = np.cos(grid)
    # diff[k, m] = cos(grid[m] - grid[k]) for b' = grid[k]
    diff = np.cos(grid[None, :] - grid[:, None])
    plus = cos_grid[None, :] + diff
    minus = cos_grid[None, :] - diff
    s_max = plus.max(axis=1) + minus.max(axis=1)
    s_min = plus.min(axis=1) + minus.min(axis=1)
    best = max(float(s_max.max()), float(-s_min.min()))
    return v * best
