from .coincidences import count_coincidences, find_coincidences
from .accidentals import (
    accidental_rate_from_singles,
    estimate_accidentals,
    subtract_accidentals,
    net_visibility,
)
from .fringe_fit import fit_fringe, fit_fringe_arrays, fit_envelope, EnvelopeFit
from .chsh_estimate import (
    estimate_chsh,
    expected_count_table,
    expected_count_tables,
    chsh_from_fringe_fits,
    with_fit_component,
)

__all__ = [
    "count_coincidences",
    "find_coincidences",
    "accidental_rate_from_singles",
    "estimate_accidentals",
    "subtract_accidentals",
    "net_visibility",
    "fit_fringe",
    "fit_fringe_arrays",
    "fit_envelope",
    "EnvelopeFit",
    "estimate_chsh",
    "expected_count_table",
    "expected_count_tables",
    "chsh_from_fringe_fits",
    "with_fit_component",
]
