"""
Strategy definition files.

    name: slot_steering
    lambdas:
      - {weight: 0.5, outcome_a: [1, 1], outcome_b: [1, -1], slot_a: [0, 1], slot_b: [0, 1], source_slot: "00"}
      - {weight: 0.5, outcome_a: [1, 1], outcome_b: [1, 1], slot_a: [0, 1], slot_b: [1, 0], source_slot: "11"}
"""

from typing import Union
from os import PathLike
import logging
import os

from omegaconf import OmegaConf, DictConfig
from omegaconf.errors import OmegaConfBaseException
import yaml

from bell_link.lhv.strategy import LocalStrategy, BUNDLED_STRATEGIES
from bell_link.errors import StrategyFileError, InvalidParameterError

logger = logging.getLogger(__name__)


def load_strategy(path: Union[str, PathLike]) -> LocalStrategy:
    if not os.path.exists(path):
        raise StrategyFileError(f"Cant find strategy file: {path}")
    try:
        conf = OmegaConf.load(path)
    except (OmegaConfBaseException, yaml.YAMLError) as e:
        logger.error(f"could not parse strategy file {path}: {e}")
        raise StrategyFileError(f"could not parse strategy file {path}: {e}")
    if not isinstance(conf, DictConfig):
        raise StrategyFileError(f"{path}: a strategy file must hold a mapping")
    try:
        strategy = LocalStrategy.from_omega_conf(conf)
    except InvalidParameterError as e:
        logger.error(f"invalid strategy in {path}: {e}")
        raise StrategyFileError(f"{path}: {e}")
    logger.info(f"Loaded strategy '{strategy.name}' with {len(strategy)} lambdas from {path}")
    return strategy


def save_strategy(path: Union[str, PathLike], strategy: LocalStrategy) -> None:
    OmegaConf.save(OmegaConf.create(strategy.to_dict()), path)


def resolve_strategy(name_or_path: str) -> LocalStrategy:
    """A bundled strategy by name, otherwise a strategy file."""
    if name_or_path in BUNDLED_STRATEGIES:
        return BUNDLED_STRATEGIES[name_or_path]()
    return load_strategy(name_or_path)
