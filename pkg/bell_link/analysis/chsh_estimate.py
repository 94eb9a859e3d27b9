from typing import Dict, Mapping, Sequence, Tuple, Union
import math
import logging

import numpy as np
from attrs import evolve

from bell_link.data_classes import (
    ChshResult,
    ChshSettings,
    CountTable,
    FringeFit,
    PhaseSettings,
    SettingPair,
)
from bell_link.quantum.quantum_core import probability_table
from bell_link.errors import UndefinedCorrelationError, InvalidParameterError

logger = logging.getLogger(__name__)

DETECTOR_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))
TableSet = Union[Mapping[SettingPair, CountTable], Sequence[CountTable]]


def _ordered_tables(tables: TableSet) -> Tuple[CountTable, ...]:
    if isinstance(tables, Mapping):
        missing = [pair.name for pair in SettingPair if pair not in tables]
        if missing:
            raise InvalidParameterError(f"missing count tables for {missing}")
        return tuple(tables[pair] for pair in SettingPair)
    tables = tuple(tables)
    if len(tables) != 4:
        raise InvalidParameterError(f"need 4 count tables, got {len(tables)}")
    return tables


def estimate_chsh(tables: TableSet) -> ChshResult:
    """
    CHSH from the four setting-pair count tables, in SettingPair order.

    E = (N11 + N22 - N12 - N21) / N, sigma_E = sqrt((1 - E^2) / N), sigma_S adds the four
    in quadrature. Expected-count tables give the closed-form E exactly.
    """
    e_values, e_sigmas, totals = [], [], []
    for pair, table in zip(SettingPair, _ordered_tables(tables)):
        total = table.total
        if total <= 0:
            logger.error(f"no coincidences for setting pair {pair.name}")
            raise UndefinedCorrelationError(f"no coincidences for setting pair {pair.name}")
        e = table.correlation()
        e_values.append(e)
        e_sigmas.append(math.sqrt(max(1.0 - e * e, 0.0) / total))
        totals.append(total)
    result = ChshResult.from_correlations(e_values, e_sigmas=e_sigmas, totals=totals)
    logger.debug(
        f"S = {result.s_value:.4f} +- {result.s_sigma:.4f} from totals {[int(n) for n in totals]}"
    )
    return result


def expected_count_table(
    settings: PhaseSettings, v: float, cross_rate: float, integration_time: float
) -> CountTable:
    """Mean counts: cross_rate * T * P_ij / (sum of P_ij = 1/2)."""
    if cross_rate < 0 or integration_time < 0:
        raise InvalidParameterError("cross_rate and integration_time must be >= 0")
    counts = 2.0 * cross_rate * integration_time * probability_table(settings, v)
    return CountTable(counts=counts, integration_time=integration_time, settings=settings)


def expected_count_tables(
    chsh_settings: ChshSettings, v: float, cross_rate: float, integration_time: float
) -> Dict[SettingPair, CountTable]:
    return {
        pair: expected_count_table(chsh_settings.settings_for(pair), v, cross_rate, integration_time)
        for pair in SettingPair
    }


def _fit_parameters(fit: FringeFit) -> np.ndarray:
    return np.array([fit.offset, fit.visibility, fit.phase0])


def _correlation_from_curves(params: Dict[Tuple[int, int], np.ndarray], phi: float) -> np.ndarray:
    """E at Alice phase phi from sampled fit parameters, each of shape (n, 3)."""
    n = {
        pair: p[:, 0] * (1.0 + p[:, 1] * np.cos(phi + p[:, 2])) for pair, p in params.items()
    }
    total = n[(1, 1)] + n[(1, 2)] + n[(2, 1)] + n[(2, 2)]
    return (n[(1, 1)] + n[(2, 2)] - n[(1, 2)] - n[(2, 1)]) / total


def chsh_from_fringe_fits(
    fits: Mapping[int, Mapping[Tuple[int, int], FringeFit]],
    chsh_settings: ChshSettings,
    rng: np.random.Generator,
    n_draws: int = 2000,
) -> Tuple[float, float]:
    """
    S read off the fitted fringes instead of dedicated acquisitions.

    Arguments:
        fits: Bob setting index (0 for phi_b, 1 for phi_b') -> detector pair -> fit of the
            counts against Alice's phase, taken with Bob at that setting.
        chsh_settings: Alice's phases are where the curves are evaluated.
        rng: draws the fit parameters from their covariances.
    Returns:
        (S from the central fit values, spread of S over the parameter draws).
    """
    for b_index in (0, 1):
        if b_index not in fits or any(pair not in fits[b_index] for pair in DETECTOR_PAIRS):
            raise InvalidParameterError(f"missing fringe fits for Bob setting {b_index}")

    def draws(fit: FringeFit) -> np.ndarray:
        mean = _fit_parameters(fit)
        central = np.tile(mean, (n_draws + 1, 1))
        if fit.covariance is not None and np.all(np.isfinite(fit.covariance)):
            central[1:] = rng.multivariate_normal(mean, fit.covariance, size=n_draws)
        return central

    sampled = {b: {pair: draws(fits[b][pair]) for pair in DETECTOR_PAIRS} for b in (0, 1)}
    s = np.zeros(n_draws + 1)
    for pair in SettingPair:
        x, y = pair.indices
        e = _correlation_from_curves(sampled[y], chsh_settings.alice_phases()[x])
        s += pair.sign * np.clip(e, -1.0, 1.0)
    return float(s[0]), float(np.std(s[1:])) if n_draws > 1 else float("nan")


def with_fit_component(result: ChshResult, s_from_fits: float, s_sigma_fit: float) -> ChshResult:
    return evolve(result, s_from_fits=s_from_fits, s_sigma_fit=s_sigma_fit)
