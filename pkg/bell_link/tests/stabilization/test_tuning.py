import pytest

from bell_link.stabilization import NoiseModel
from bell_link.stabilization.tuning import expected_residual_rms, scan_gains, main
from bell_link.errors import InvalidParameterError


def test_expected_residual_rms():
    assert expected_residual_rms(0.7, NoiseModel(), 2e-4) == pytest.approx(0.04447, rel=1e-3)
    assert expected_residual_rms(1.0, NoiseModel(), 2e-4) == 0.0
    with pytest.raises(InvalidParameterError):
        expected_residual_rms(2.5, NoiseModel(), 2e-4)


def test_gain_scan_matches_the_prediction():
    points = scan_gains([0.7], [0.5], duration=0.5, seeds=(0, 1))
    assert len(points) == 1
    point = points[0]
    assert point.saturation_count == 0
    assert point.residual_rms == pytest.approx(point.predicted_rms, rel=0.25)


def test_gain_scan_command(capsys):
    main(["--kp", "0.5", "0.7", "--ki", "0.5", "--duration", "0.05", "--seeds", "1"])
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split()[:3] == ["kp", "ki", "rms"]
    assert len(lines) == 3
