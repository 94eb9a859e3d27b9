import math

import numpy as np
import pytest

from bell_link.data_classes import (
    ChshSettings,
    CountTable,
    CoincidenceWindow,
    FringeFit,
    SettingPair,
    TwoPhotonModel,
)
from bell_link.quantum import chsh_s
from bell_link.analysis import (
    estimate_chsh,
    expected_count_tables,
    chsh_from_fringe_fits,
    count_coincidences,
    with_fit_component,
)
from bell_link.topology import TopologyConfig, SourceModel, sample_events
from bell_link.utils import spawn_sequences
from bell_link.errors import UndefinedCorrelationError, InvalidParameterError

CANONICAL = ChshSettings.canonical()


@pytest.mark.parametrize("v", [1.0, 0.8436, 0.0])
def test_expected_tables_reproduce_closed_form(v):
    result = estimate_chsh(expected_count_tables(CANONICAL, v, 100.0, 2.0))
    assert result.s_value == pytest.approx(chsh_s(CANONICAL, v).s_value, abs=1e-12)


def test_standard_error_of_a_correlation():
    table = CountTable(counts=[[60, 15], [15, 60]], integration_time=1.0)
    result = estimate_chsh([table] * 4)
    assert result.e_values[0] == pytest.approx(0.6)
    assert result.e_sigmas[0] == pytest.approx(math.sqrt(0.64 / 150))
    assert result.s_value == pytest.approx(1.2)
    assert result.s_sigma == pytest.approx(2 * math.sqrt(0.64 / 150))


def test_empty_setting_is_undefined():
    tables = expected_count_tables(CANONICAL, 1.0, 100.0, 1.0)
    tables[SettingPair.A_PRIME_B] = CountTable(counts=np.zeros((2, 2)), integration_time=1.0)
    with pytest.raises(UndefinedCorrelationError):
        estimate_chsh(tables)
    with pytest.raises(InvalidParameterError):
        estimate_chsh(list(tables.values())[:3])


def test_sampled_hug_run_matches_prediction():
    topology = TopologyConfig()
    source = SourceModel.for_cross_rate(topology, 100.0)
    model = TwoPhotonModel(base_visibility=0.8436)
    window = CoincidenceWindow(offset=topology.cross_party_offset())
    seeds = spawn_sequences(20170505, 4)
    tables = {}
    for pair, seed in zip(SettingPair, seeds):
        settings = CANONICAL.settings_for(pair)
        stream = sample_events(topology, source, model, settings, 2.0, seed)
        alice, bob = stream.split()
        tables[pair] = count_coincidences(alice, bob, window, settings)

    result = estimate_chsh(tables)
    assert 0.08 <= result.s_sigma <= 0.16, f"sigma_S {result.s_sigma}"
    assert abs(result.s_value - 2.386) <= 3 * result.s_sigma, f"S {result.s_value}"


def _exact_fits(v):
    """Fringes of the four detector pairs against Alice's phase, Bob held at b or b'."""
    fits = {}
    for b_index, phi_b in enumerate(CANONICAL.bob_phases()):
        fits[b_index] = {}
        for pair, sign in (((1, 1), 1), ((1, 2), -1), ((2, 1), -1), ((2, 2), 1)):
            phase0 = -phi_b if sign > 0 else -phi_b + math.pi
            fits[b_index][pair] = FringeFit(
                amplitude=50.0 * v, offset=50.0, phase0=phase0, visibility=v
            )
    return fits


def test_chsh_from_fits():
    rng = np.random.default_rng(0)
    s, spread = chsh_from_fringe_fits(_exact_fits(0.9), CANONICAL, rng, n_draws=100)
    assert s == pytest.approx(0.9 * 2 * math.sqrt(2), abs=1e-9)
    assert spread == pytest.approx(0.0, abs=1e-12)

    result = with_fit_component(chsh_s(CANONICAL, 0.9), s, spread)
    assert result.s_from_fits == pytest.approx(s)

    with pytest.raises(InvalidParameterError):
        chsh_from_fringe_fits({0: _exact_fits(0.9)[0]}, CANONICAL, rng)
