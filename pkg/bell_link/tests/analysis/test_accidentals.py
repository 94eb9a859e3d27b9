import numpy as np
import pytest

from bell_link.data_classes import (
    CoincidenceWindow,
    CountTable,
    AccidentalEstimate,
    AccidentalMethod,
    PhaseSettings,
    TwoPhotonModel,
)
from bell_link.analysis import (
    accidental_rate_from_singles,
    estimate_accidentals,
    subtract_accidentals,
    net_visibility,
)
from bell_link.topology import TopologyConfig, SourceModel, sample_events
from bell_link.errors import InvalidParameterError


def test_rate_from_singles():
    rate = accidental_rate_from_singles(74000, 54000, CoincidenceWindow(width=4e-9))
    assert rate == pytest.approx(15.98, rel=1e-3)
    with pytest.raises(InvalidParameterError):
        accidental_rate_from_singles(-1.0, 10.0, CoincidenceWindow())


def test_net_visibility():
    assert net_visibility(0.8436, 100.0, 11.3) == pytest.approx(0.9511, abs=5e-4)
    assert net_visibility(0.5, 100.0, 0.0) == pytest.approx(0.5)
    assert net_visibility(0.9, 100.0, 50.0) == 1.0
    with pytest.raises(InvalidParameterError):
        net_visibility(0.5, 10.0, 10.0)


def test_subtraction_clamps_at_zero():
    table = CountTable(counts=[[1, 0], [0, 5]], integration_time=2.0)
    net = subtract_accidentals(table, AccidentalEstimate.uniform(1.0))
    assert net.net
    assert net.counts.tolist() == [[0.0, 0.0], [0.0, 3.0]]
    assert subtract_accidentals(table, None) is table


def test_shifted_window_agrees_with_singles():
    topology = TopologyConfig()
    stream = sample_events(
        topology,
        SourceModel(pair_rate=0, singles_rate_alice=20000, singles_rate_bob=20000),
        TwoPhotonModel(),
        PhaseSettings(),
        5.0,
        2024,
    )
    alice, bob = stream.split()
    window = CoincidenceWindow(width=4e-9, offset=topology.cross_party_offset())
    singles = estimate_accidentals(alice, bob, window, AccidentalMethod.FROM_SINGLES)
    shifted = estimate_accidentals(alice, bob, window, AccidentalMethod.FROM_SHIFTED_WINDOW)

    # 16 shifts over 5 s: one detector pair sees about 128 accidental counts
    sigma = np.sqrt(singles.rates * 16 * 5.0) / (16 * 5.0)
    assert np.all(singles.rates == pytest.approx(1.6, rel=0.05))
    assert np.all(np.abs(shifted.rates - singles.rates) < 4 * sigma), (
        f"shifted {shifted.rates} vs singles {singles.rates}"
    )


def test_shifted_window_needs_a_wide_step():
    stream = sample_events(
        TopologyConfig(), SourceModel(pair_rate=100), TwoPhotonModel(), PhaseSettings(), 0.1, 1
    )
    alice, bob = stream.split()
    with pytest.raises(InvalidParameterError):
        estimate_accidentals(
            alice, bob, CoincidenceWindow(), AccidentalMethod.FROM_SHIFTED_WINDOW, shift_step=1e-9
        )
