import os

import pytest

import bell_link
from bell_link.utils.config_loader import build_config, config_hash, load_user_config, RunConfig
from bell_link.topology import TopologyKind
from bell_link.stabilization import SaturationStrategy
from bell_link.data_classes import AccidentalMethod, PairingRule
from bell_link.errors import InvalidParameterError

EXAMPLE_CONF = os.path.join(os.path.dirname(bell_link.__file__), "configs", "run", "chsh_example.conf")


def test_defaults():
    run = RunConfig.from_omega_conf(build_config())
    assert run.scenario == "chsh"
    assert run.topology.kind is TopologyKind.HUG
    assert run.source.pair_rate == pytest.approx(200.0)
    assert run.model.base_visibility == pytest.approx(0.8436)
    assert run.window.offset == pytest.approx(run.topology.cross_party_offset())
    assert run.window.pairing_rule is PairingRule.NEAREST_NO_REUSE
    assert run.accidental_method is AccidentalMethod.FROM_SINGLES
    assert run.controller.saturation_strategy is SaturationStrategy.CLAMP
    assert run.controller.actuator_range > 6.28


def test_key_value_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        "# a comment\n"
        "seed=7\n"
        "source.cross_coincidence_rate=50  # halves the rate\n"
        "topology.kind=FRANSON\n"
    )
    run = RunConfig.from_omega_conf(build_config(path))
    assert run.seed == 7
    assert run.topology.kind is TopologyKind.FRANSON
    assert run.source.pair_rate == pytest.approx(100.0)


def test_bundled_example_file():
    conf = load_user_config(EXAMPLE_CONF)
    assert conf.seed == 7
    assert conf.output.format == "csv"


def test_yaml_file_and_overrides(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 11\nwindow:\n  width: 2.0e-9\n")
    conf = build_config(path, {"seed": 12, "output.format": None})
    run = RunConfig.from_omega_conf(conf)
    assert run.seed == 12, "command line overrides beat the file"
    assert run.window.width == pytest.approx(2e-9)
    assert run.output_format == "json"


def test_hash_ignores_output_sections():
    base = build_config()
    moved = build_config(overrides={"output.directory": "elsewhere", "runtime.workers": 8})
    reseeded = build_config(overrides={"seed": 1})
    assert config_hash(base) == config_hash(moved)
    assert config_hash(base) != config_hash(reseeded)
    assert len(config_hash(base)) == 64


def test_invalid_configs(tmp_path):
    with pytest.raises(InvalidParameterError):
        RunConfig.from_omega_conf(build_config(overrides={"scenario": "dance"}))
    with pytest.raises(InvalidParameterError):
        RunConfig.from_omega_conf(build_config(overrides={"output.format": "xml"}))
    with pytest.raises(InvalidParameterError):
        RunConfig.from_omega_conf(build_config(overrides={"model.base_visibility": 1.5}))
    with pytest.raises(InvalidParameterError):
        load_user_config(tmp_path / "missing.yaml")

    broken = tmp_path / "broken.yaml"
    broken.write_text("seed: [\n")
    with pytest.raises(InvalidParameterError):
        load_user_config(broken)


def test_pair_rate_without_cross_rate():
    conf = build_config(overrides={"source.cross_coincidence_rate": "null", "source.pair_rate": 500})
    run = RunConfig.from_omega_conf(conf)
    assert run.source.pair_rate == pytest.approx(500.0)
