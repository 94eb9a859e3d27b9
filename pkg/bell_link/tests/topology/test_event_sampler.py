import numpy as np
import pytest
from scipy import stats

from bell_link.data_classes import (
    PhaseSettings,
    TwoPhotonModel,
    CoincidenceWindow,
    PairingRule,
    Origin,
)
from bell_link.topology import (
    TopologyConfig,
    TopologyKind,
    SourceModel,
    sample_events,
    franson_window_fraction,
    expected_cross_rate,
)
from bell_link.analysis import count_coincidences
from bell_link.quantum import probability_table
from bell_link.errors import InvalidParameterError

HUG = TopologyConfig(kind="HUG")
FRANSON = TopologyConfig(kind="FRANSON")


def _window(topology, width=4e-9, rule=PairingRule.NEAREST_NO_REUSE):
    return CoincidenceWindow(width=width, pairing_rule=rule, offset=topology.cross_party_offset())


def test_same_seed_gives_identical_streams():
    source = SourceModel(pair_rate=500, singles_rate_alice=100, singles_rate_bob=100)
    a = sample_events(HUG, source, TwoPhotonModel(), PhaseSettings(0.2, 0.0), 2.0, 11)
    b = sample_events(HUG, source, TwoPhotonModel(), PhaseSettings(0.2, 0.0), 2.0, 11)
    assert np.array_equal(a.timestamps, b.timestamps)
    assert np.array_equal(a.detectors, b.detectors)
    assert np.array_equal(a.parties, b.parties)
    assert a.is_sorted()


def test_rejects_non_positive_duration():
    with pytest.raises(InvalidParameterError):
        sample_events(HUG, SourceModel(), TwoPhotonModel(), PhaseSettings(), 0.0, 1)


def test_background_only_stream():
    source = SourceModel(pair_rate=0, singles_rate_alice=1000, singles_rate_bob=500)
    stream = sample_events(HUG, source, TwoPhotonModel(), PhaseSettings(), 1.0, 5)
    assert len(stream) > 0
    assert np.all(stream.origins == Origin.BACKGROUND.value)
    assert np.all(stream.timestamps <= stream.duration)


def test_hug_cross_pairs_do_not_depend_on_settings():
    source = SourceModel(pair_rate=1000)
    a = sample_events(HUG, source, TwoPhotonModel(), PhaseSettings(0.0, 0.0), 1.0, 21)
    b = sample_events(HUG, source, TwoPhotonModel(), PhaseSettings(2.0, -1.0), 1.0, 21)
    assert np.array_equal(a.timestamps, b.timestamps), "settings changed the timing"
    assert np.array_equal(a.parties, b.parties), "settings changed which party clicked"


def test_hug_half_of_pairs_are_cross_coincidences():
    source = SourceModel(pair_rate=2000)
    stream = sample_events(HUG, source, TwoPhotonModel(), PhaseSettings(), 5.0, 3)
    n_pairs = np.count_nonzero(stream.origins == Origin.PAIR.value) / 2
    alice, bob = stream.split()
    table = count_coincidences(alice, bob, _window(HUG))
    assert abs(table.total - 0.5 * n_pairs) < 4 * np.sqrt(0.25 * n_pairs)
    assert expected_cross_rate(HUG, source) == pytest.approx(1000.0)


def test_hug_perfect_correlation_at_equal_phases():
    stream = sample_events(
        HUG, SourceModel(pair_rate=1000), TwoPhotonModel(), PhaseSettings(0.4, 0.4), 2.0, 8
    )
    alice, bob = stream.split()
    table = count_coincidences(alice, bob, _window(HUG))
    assert table.total > 500
    assert table.correlation() == 1.0


def test_franson_unequal_paths_fall_outside_the_window():
    source = SourceModel(pair_rate=2000)
    stream = sample_events(FRANSON, source, TwoPhotonModel(), PhaseSettings(), 5.0, 4)
    n_pairs = len(stream) / 2
    alice, bob = stream.split()
    narrow = count_coincidences(alice, bob, _window(FRANSON))
    wide = count_coincidences(alice, bob, _window(FRANSON, width=30e-9, rule=PairingRule.ALL_PAIRS))
    assert abs(narrow.total - 0.5 * n_pairs) < 4 * np.sqrt(0.25 * n_pairs)
    assert wide.total == pytest.approx(n_pairs, abs=5)


def test_franson_window_fraction():
    assert franson_window_fraction(FRANSON) == pytest.approx(0.5)
    assert franson_window_fraction(FRANSON, CoincidenceWindow(width=30e-9)) == 1.0
    with pytest.raises(InvalidParameterError):
        franson_window_fraction(HUG)


def test_topology_validation():
    with pytest.raises(InvalidParameterError):
        TopologyConfig(long_short_difference=0.5)
    with pytest.raises(InvalidParameterError):
        TopologyConfig(delay_offset_delta=80.0)
    assert TopologyConfig().kind is TopologyKind.HUG


def test_source_for_cross_rate():
    assert SourceModel.for_cross_rate(HUG, 100.0).pair_rate == pytest.approx(200.0)
    with pytest.raises(InvalidParameterError):
        SourceModel(pair_rate=-1.0)


def test_detector_pair_frequencies_follow_the_quantum_table():
    rng = np.random.default_rng(2024)
    # two-sided 4 sigma
    threshold = 2.0 * stats.norm.sf(4.0)
    for trial in range(25):
        phi_a, phi_b = rng.uniform(-np.pi, np.pi, size=2)
        v = float(rng.uniform(0.0, 0.95))
        settings = PhaseSettings(float(phi_a), float(phi_b))
        stream = sample_events(
            HUG, SourceModel(pair_rate=4000), TwoPhotonModel(base_visibility=v), settings, 1.0, trial
        )
        alice, bob = stream.split()
        observed = count_coincidences(alice, bob, _window(HUG)).counts.ravel()
        p = probability_table(settings, v).ravel()
        expected = observed.sum() * p / p.sum()
        result = stats.chisquare(observed, expected)
        assert result.pvalue > threshold, (
            f"trial {trial}: chi2={result.statistic:.1f} for {settings}, v={v:.3f}"
        )
