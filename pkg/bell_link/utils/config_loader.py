"""
Run configuration: packaged defaults, an optional user file (YAML or key=value lines) and
command-line overrides, merged with OmegaConf in that order.
"""

from typing import Optional, Dict, Any, Union
from os import PathLike
import hashlib
import logging
import os

from attrs import define, field
from omegaconf import OmegaConf, DictConfig
from omegaconf.errors import OmegaConfBaseException
import yaml

from bell_link.data_classes import (
    ChshSettings,
    TwoPhotonModel,
    CoincidenceWindow,
    AccidentalMethod,
)
from bell_link.data_classes.analysis_types import to_accidental_method
from bell_link.topology import TopologyConfig, SourceModel
from bell_link.stabilization import NoiseModel, ControllerConfig, WavelengthPair
from bell_link.errors import InvalidParameterError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "configs",
    "run",
    "default_run.yaml",
)
# sections that never change a result and stay out of the config hash
UNHASHED_SECTIONS = ("output", "runtime", "logging")
SCENARIOS = ("scan-delay", "chsh", "attack", "lock", "counts")


def load_user_config(path: Union[str, PathLike]) -> DictConfig:
    """YAML when the file ends in .yaml/.yml, otherwise `section.key=value` lines."""
    if not os.path.exists(path):
        raise InvalidParameterError(f"Cant find config file: {path}")
    try:
        if str(path).endswith((".yaml", ".yml")):
            conf = OmegaConf.load(path)
        else:
            with open(path, "r") as fp:
                lines = [line.split("#", 1)[0].strip() for line in fp]
            conf = OmegaConf.from_dotlist([line for line in lines if line])
    except (OmegaConfBaseException, yaml.YAMLError) as e:
        raise InvalidParameterError(f"could not parse config file {path}: {e}")
    if not isinstance(conf, DictConfig):
        raise InvalidParameterError(f"{path}: config must be a mapping")
    return conf


def build_config(
    path: Optional[Union[str, PathLike]] = None, overrides: Optional[Dict[str, Any]] = None
) -> DictConfig:
    """
    Merge defaults, the user file and overrides.

    Arguments:
        path: optional user config file.
        overrides: dotted keys from the command line, e.g. {"seed": 3}; None values are skipped.
    """
    conf = OmegaConf.load(DEFAULT_CONFIG_PATH)
    if path is not None:
        conf = OmegaConf.merge(conf, load_user_config(path))
        logger.debug(f"merged user config {path}")
    if overrides:
        dotlist = [f"{key}={value}" for key, value in overrides.items() if value is not None]
        conf = OmegaConf.merge(conf, OmegaConf.from_dotlist(dotlist))
    return conf


def config_hash(conf: DictConfig) -> str:
    """SHA-256 of the resolved YAML of every section that affects results."""
    container = OmegaConf.to_container(conf, resolve=True)
    for section in UNHASHED_SECTIONS:
        container.pop(section, None)
    text = OmegaConf.to_yaml(OmegaConf.create(container), sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@define(frozen=True)
class RunConfig:
    """Everything a scenario needs, built once from the merged configuration tree."""

    scenario: str
    seed: int
    topology: TopologyConfig
    source: SourceModel
    model: TwoPhotonModel
    settings: ChshSettings
    noise: NoiseModel
    controller: ControllerConfig
    wavelengths: WavelengthPair
    window: CoincidenceWindow
    accidental_method: AccidentalMethod = field(converter=to_accidental_method)
    subtract_accidentals: bool
    shift_step: float
    n_shifts: int
    scan: DictConfig
    chsh: DictConfig
    attack: DictConfig
    lock: DictConfig
    counts: DictConfig
    output_directory: str
    output_format: str
    workers: int
    progress: bool
    conf: DictConfig = field(eq=False, repr=False)

    @classmethod
    def from_omega_conf(cls, conf: DictConfig) -> "RunConfig":
        scenario = str(conf.scenario)
        if scenario not in SCENARIOS:
            raise InvalidParameterError(f"scenario must be one of {SCENARIOS}, got {scenario}")
        output_format = str(conf.output.format).lower()
        if output_format not in ("json", "csv"):
            raise InvalidParameterError(f"output format must be json or csv, got {output_format}")
        topology = TopologyConfig.from_omega_conf(conf.topology)
        window = CoincidenceWindow.from_omega_conf(conf.window)
        if conf.window.get("offset", None) is None:
            window = window.with_offset(topology.cross_party_offset())
        workers = int(conf.runtime.get("workers", 1))
        if workers < 1:
            raise InvalidParameterError(f"workers must be >= 1, got {workers}")
        return cls(
            scenario=scenario,
            seed=int(conf.seed),
            topology=topology,
            source=SourceModel.from_omega_conf(conf.source, topology),
            model=TwoPhotonModel.from_omega_conf(conf.model),
            settings=ChshSettings.from_omega_conf(conf.get("settings", None)),
            noise=NoiseModel.from_omega_conf(conf.noise),
            controller=ControllerConfig.from_omega_conf(conf.controller),
            wavelengths=WavelengthPair.from_omega_conf(conf.wavelengths),
            window=window,
            accidental_method=conf.accidentals.method,
            subtract_accidentals=bool(conf.accidentals.subtract),
            shift_step=float(conf.accidentals.shift_step),
            n_shifts=int(conf.accidentals.n_shifts),
            scan=conf.scan,
            chsh=conf.chsh,
            attack=conf.attack,
            lock=conf.lock,
            counts=conf.counts,
            output_directory=str(conf.output.directory),
            output_format=output_format,
            workers=workers,
            progress=bool(conf.runtime.get("progress", True)),
            conf=conf,
        )

    def config_hash(self) -> str:
        return config_hash(self.conf)

    def to_yaml(self) -> str:
        return OmegaConf.to_yaml(self.conf)
