from typing import List, Optional
import logging

from attrs import evolve

from bell_link.data_classes import SettingPair
from bell_link.topology import TopologyKind
from bell_link.lhv import (
    LocalStrategy,
    evaluate_strategy,
    max_s_exhaustive,
    sample_lhv_events,
    resolve_strategy,
)
from bell_link.analysis import estimate_chsh
from bell_link.errors import UndefinedCorrelationError
from bell_link.utils.config_loader import RunConfig
from bell_link.utils.rng import spawn_sequences
from bell_link.scenarios.run_outputs import AttackRecord
from bell_link.scenarios.scenario_common import ScenarioResult, count_stream, to_builtin

logger = logging.getLogger(__name__)


def _record(kind, strategy, source, e_values, s_value, kept) -> AttackRecord:
    e = list(e_values) if e_values is not None else [None] * 4
    return AttackRecord(
        kind=kind.name,
        strategy=strategy.name,
        source=source,
        e_ab=e[0],
        e_a_prime_b=e[1],
        e_ab_prime=e[2],
        e_a_prime_b_prime=e[3],
        s_value=s_value,
        kept_fraction_min=min(kept) if kept else None,
    )


def sampled_attack(
    run: RunConfig, strategy: LocalStrategy, kind: TopologyKind, seeds
) -> AttackRecord:
    """Run the strategy through the topology's timing and count it like real data."""
    topology = evolve(run.topology, kind=kind)
    duration = float(run.attack.duration)
    tables = {}
    for pair, seed in zip(SettingPair, seeds):
        stream = sample_lhv_events(
            strategy,
            topology,
            run.source,
            run.settings.settings_for(pair),
            duration,
            seed,
            chsh_settings=run.settings,
        )
        raw, _, _ = count_stream(stream, run, run.window.with_offset(topology.cross_party_offset()))
        tables[pair] = raw
    try:
        result = estimate_chsh(tables)
    except UndefinedCorrelationError as e:
        logger.warning(f"sampled {strategy.name} on {kind.name}: {e}")
        return _record(kind, strategy, "sampled", None, None, None)
    return _record(kind, strategy, "sampled", result.e_values, result.s_value, None)


def scenario_attack(run: RunConfig, strategy: Optional[LocalStrategy] = None) -> ScenarioResult:
    attack = run.attack
    strategy = strategy or resolve_strategy(str(attack.strategy))
    records: List[AttackRecord] = []
    results = {"strategy": strategy.to_dict(), "analytic": {}, "exhaustive": {}}
    kinds = (TopologyKind.FRANSON, TopologyKind.HUG)
    seeds = spawn_sequences(run.seed, len(kinds) * len(SettingPair))

    for k, kind in enumerate(kinds):
        try:
            report = evaluate_strategy(strategy, kind, run.settings)
            records.append(
                _record(kind, strategy, "analytic", report.e_values, report.s_value, report.kept_fractions)
            )
            results["analytic"][kind.name] = report.to_dict()
            logger.info(f"{strategy.name} on {kind.name}: S = {report.s_value:.4f}")
        except UndefinedCorrelationError as e:
            logger.warning(str(e))
            records.append(_record(kind, strategy, "analytic", None, None, None))
            results["analytic"][kind.name] = None
        if float(attack.duration) > 0:
            records.append(
                sampled_attack(run, strategy, kind, seeds[k * len(SettingPair):(k + 1) * len(SettingPair)])
            )

    if bool(attack.exhaustive):
        for kind in kinds:
            results["exhaustive"][kind.name] = {
                str(n): max_s_exhaustive(kind, n) for n in range(1, int(attack.max_lambdas) + 1)
            }
    return ScenarioResult(results=to_builtin(results), tables={"attack": records})
