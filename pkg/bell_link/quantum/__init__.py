from .quantum_core import (
    cross_coincidence_probability,
    probability_table,
    probability_arrays,
    correlation_e,
    chsh_s,
    chsh_from_correlations,
    effective_visibility,
    max_chsh_on_grid,
)

__all__ = [
    "cross_coincidence_probability",
    "probability_table",
    "probability_arrays",
    "correlation_e",
    "chsh_s",
    "chsh_from_correlations",
    "effective_visibility",
    "max_chsh_on_grid",
]
