"""
Exhaustive search over deterministic local strategies with equally weighted lambdas.

Per lambda only two things matter for S: which of the four setting pairs it is kept for and
the outcome product for each kept pair. Every (outcomes, slots, source) table is reduced to
that signature, duplicates are dropped, and multisets of n_lambda signatures are enumerated
in vectorised batches.
"""

from typing import Tuple
import itertools
import logging

import numpy as np

from bell_link.data_classes import SettingPair
from bell_link.topology.topology_config import TopologyKind, to_topology_kind
from bell_link.lhv.strategy import SOURCE_SLOTS, CROSS_SOURCE_SLOTS
from bell_link.errors import InvalidParameterError

logger = logging.getLogger(__name__)

MAX_LAMBDAS = 4
_BATCH = 200_000
_SIGNS = np.array([pair.sign for pair in SettingPair], dtype=np.float64)


def _pairs_of(values) -> list:
    return list(itertools.product(values, repeat=2))


def lambda_signatures(kind: TopologyKind) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distinct per-lambda signatures.

    Returns (kept, corr), both (n_signatures, 4) in SettingPair order; corr is the outcome
    product where kept and 0 elsewhere.
    """
    kind = to_topology_kind(kind)
    indices = [pair.indices for pair in SettingPair]
    rows = set()
    for out_a, out_b in itertools.product(_pairs_of((1, -1)), repeat=2):
        products = [out_a[x] * out_b[y] for x, y in indices]
        if kind is TopologyKind.FRANSON:
            kept_patterns = {
                tuple(int(s_a[x] == s_b[y]) for x, y in indices)
                for s_a, s_b in itertools.product(_pairs_of((0, 1)), repeat=2)
            }
        else:
            kept_patterns = {
                tuple([int(source in CROSS_SOURCE_SLOTS)] * 4) for source in SOURCE_SLOTS
            }
        for kept in kept_patterns:
            rows.add(kept + tuple(k * p for k, p in zip(kept, products)))
    table = np.unique(np.array(sorted(rows), dtype=np.float64), axis=0)
    return table[:, :4], table[:, 4:]


def max_s_exhaustive(kind: TopologyKind, n_lambda: int) -> float:
    """
    Largest post-selected S reachable with n_lambda equally weighted deterministic lambdas.
    Combinations that leave a setting pair without kept events are skipped.
    """
    kind = to_topology_kind(kind)
    if not (1 <= n_lambda <= MAX_LAMBDAS):
        raise InvalidParameterError(f"n_lambda must lie in [1, {MAX_LAMBDAS}], got {n_lambda}")
    kept, corr = lambda_signatures(kind)
    logger.debug(f"{kind.name}: {len(kept)} distinct lambda signatures, n_lambda={n_lambda}")

    best = -np.inf
    combos = itertools.combinations_with_replacement(range(len(kept)), n_lambda)
    while True:
        batch = np.array(list(itertools.islice(combos, _BATCH)), dtype=np.intp)
        if batch.size == 0:
            break
        kept_sum = kept[batch].sum(axis=1)
        corr_sum = corr[batch].sum(axis=1)
        defined = np.all(kept_sum > 0, axis=1)
        if not np.any(defined):
            continue
        s = (corr_sum[defined] / kept_sum[defined]) @ _SIGNS
        best = max(best, float(s.max()))
    if not np.isfinite(best):
        raise InvalidParameterError(f"no strategy with defined correlations for {kind.name}")
    logger.info(f"exhaustive maximum of S on {kind.name} with {n_lambda} lambdas: {best:.4f}")
    return best
