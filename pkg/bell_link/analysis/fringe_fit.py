"""
Fringe and envelope fits.

fit_fringe fits N(phi) = offset * [1 + V cos(phi + phase0)] to coincidence counts taken along
a phase sweep. fit_envelope fits a delay scan, where the fringe runs under a Gaussian
indistinguishability envelope:

    N_k = offset * [1 + V * exp(-4 ln2 ((delta_k - center) / fwhm)^2) * cos(phi_k + phase0)]
"""

from typing import Sequence, Tuple, Optional, Dict, Any
import math
import warnings
import logging

import numpy as np
from attrs import define, field
from scipy.optimize import curve_fit, OptimizeWarning

from bell_link.data_classes import CountTable, FringeFit
from bell_link.errors import InvalidParameterError, FitConvergenceError

logger = logging.getLogger(__name__)

MIN_POINTS = 6
_FOUR_LN2 = 4.0 * math.log(2.0)
# amplitude below this fraction of the offset leaves phase0 meaningless
_DEGENERATE_AMPLITUDE = 1e-9


def _poisson_sigma(counts: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(counts, 1.0))


def _largest_phase_gap(phases: np.ndarray) -> float:
    wrapped = np.sort(np.mod(phases, 2.0 * math.pi))
    gaps = np.diff(np.concatenate([wrapped, wrapped[:1] + 2.0 * math.pi]))
    return float(gaps.max())


def _fringe_model(phi, offset, visibility, phase0):
    return offset * (1.0 + visibility * np.cos(phi + phase0))


def _fringe_covariance(phi, sigma, offset, visibility, phase0) -> np.ndarray:
    """(J^T W J)^-1 from the analytic Jacobian of the fringe model."""
    c, s = np.cos(phi + phase0), np.sin(phi + phase0)
    jac = np.stack([1.0 + visibility * c, offset * c, -offset * visibility * s], axis=1)
    jac = jac / sigma[:, None]
    return np.linalg.inv(jac.T @ jac)


def fit_fringe_arrays(phases: Sequence[float], counts: Sequence[float]) -> FringeFit:
    """
    Fit a single fringe.

    The sweep needs at least six points and must cover the period: no gap between the
    wrapped phases may reach pi. A linear fit on (1, cos, sin) gives the start point; the
    Poisson-weighted curve_fit gives the standard errors.
    """
    phi = np.asarray(phases, dtype=np.float64)
    y = np.asarray(counts, dtype=np.float64)
    diagnostics = {"n_points": len(phi)}
    if len(phi) != len(y):
        raise InvalidParameterError("phases and counts must have equal lengths")
    if len(phi) < MIN_POINTS:
        raise InvalidParameterError(f"fringe fit needs >= {MIN_POINTS} points, got {len(phi)}")
    gap = _largest_phase_gap(phi)
    diagnostics["largest_phase_gap"] = round(gap, 4)
    if gap >= math.pi:
        raise InvalidParameterError(
            f"phases do not span a full period (largest gap {gap:.3f} rad)"
        )

    sigma = _poisson_sigma(y)
    design = np.stack([np.ones_like(phi), np.cos(phi), np.sin(phi)], axis=1)
    coef, *_ = np.linalg.lstsq(design / sigma[:, None], y / sigma, rcond=None)
    c0, c1, c2 = (float(c) for c in coef)
    if c0 <= 0:
        logger.error(f"fringe fit has non-positive offset {c0}")
        raise FitConvergenceError("fringe offset is not positive", diagnostics)

    amplitude = math.hypot(c1, c2)
    if amplitude <= _DEGENERATE_AMPLITUDE * c0:
        logger.warning("fringe amplitude is zero, phase0 is undefined")
        offset_error = float(1.0 / math.sqrt(np.sum(1.0 / sigma**2)))
        return FringeFit(
            amplitude=0.0,
            offset=c0,
            phase0=0.0,
            visibility=0.0,
            offset_error=offset_error,
            amplitude_error=float("nan"),
            residual=float(np.sum(((y - c0) / sigma) ** 2) / max(len(y) - 3, 1)),
            n_points=len(y),
            degenerate_phase=True,
        )

    p0 = [c0, amplitude / c0, math.atan2(-c2, c1)]
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", OptimizeWarning)
            popt, pcov = curve_fit(
                _fringe_model, phi, y, p0=p0, sigma=sigma, absolute_sigma=True, maxfev=5000
            )
    except (RuntimeError, ValueError) as e:
        diagnostics["optimizer"] = str(e)
        logger.error(f"fringe fit did not converge: {e}")
        raise FitConvergenceError("fringe fit did not converge", diagnostics)

    # an exact start point leaves curve_fit without a covariance estimate
    if any(issubclass(w.category, OptimizeWarning) for w in caught) or not np.all(
        np.isfinite(pcov)
    ):
        logger.debug("fringe covariance taken from the analytic Jacobian")
        try:
            pcov = _fringe_covariance(phi, sigma, *(float(p) for p in popt))
        except np.linalg.LinAlgError as e:
            diagnostics["optimizer"] = str(e)
            logger.error(f"fringe fit covariance is singular: {e}")
            raise FitConvergenceError("fringe fit covariance is singular", diagnostics)

    offset, visibility, phase0 = (float(p) for p in popt)
    if visibility < 0:
        visibility, phase0 = -visibility, phase0 + math.pi
    phase0 = (phase0 + math.pi) % (2.0 * math.pi) - math.pi
    errors = np.sqrt(np.clip(np.diag(pcov), 0.0, None))
    constrained = False
    if visibility > 1.0:
        logger.warning(f"fitted visibility {visibility:.4f} above 1, clipped")
        visibility, constrained = 1.0, True

    # amplitude = offset * V
    amp_var = (
        visibility**2 * pcov[0, 0]
        + offset**2 * pcov[1, 1]
        + 2.0 * offset * visibility * pcov[0, 1]
    )
    chi2 = float(np.sum(((y - _fringe_model(phi, *popt)) / sigma) ** 2))
    return FringeFit(
        amplitude=offset * visibility,
        offset=offset,
        phase0=phase0,
        visibility=visibility,
        amplitude_error=float(math.sqrt(max(amp_var, 0.0))),
        offset_error=float(errors[0]),
        phase0_error=float(errors[2]),
        visibility_error=float(errors[1]),
        residual=chi2 / max(len(y) - 3, 1),
        n_points=len(y),
        constrained=constrained,
        covariance=pcov,
    )


def fit_fringe(
    points: Sequence[Tuple[float, CountTable]], detector_pair: Tuple[int, int] = (1, 1)
) -> FringeFit:
    """Fit one detector pair's fringe from (phase, CountTable) points."""
    i, j = detector_pair
    phases = [phi for phi, _ in points]
    counts = [table.count(i, j) for _, table in points]
    return fit_fringe_arrays(phases, counts)


@define(frozen=True)
class EnvelopeFit:
    """Fringe visibility at the envelope centre, envelope width and where it sits (mm)."""

    visibility: float
    fwhm: float
    center: float
    offset: float
    phase0: float
    visibility_error: float = float("nan")
    fwhm_error: float = float("nan")
    center_error: float = float("nan")
    residual: float = 0.0
    converged: bool = True
    covariance: Optional[np.ndarray] = field(default=None, eq=False, repr=False)

    def envelope(self, delays) -> np.ndarray:
        return self.visibility * np.exp(
            -_FOUR_LN2 * ((np.asarray(delays) - self.center) / self.fwhm) ** 2
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "visibility": self.visibility,
            "visibility_error": self.visibility_error,
            "fwhm": self.fwhm,
            "fwhm_error": self.fwhm_error,
            "center": self.center,
            "center_error": self.center_error,
            "offset": self.offset,
            "phase0": self.phase0,
            "residual": self.residual,
            "converged": self.converged,
        }


def _envelope_model(x, offset, visibility, center, fwhm, phase0):
    delays, phases = x
    g = np.exp(-_FOUR_LN2 * ((delays - center) / fwhm) ** 2)
    return offset * (1.0 + visibility * g * np.cos(phases + phase0))


def _grid_start(delays, phases, y, sigma, centers, widths):
    """Linear (offset, a, b) fit for every (center, fwhm) on a grid; keep the best chi2."""
    best = None
    for center in centers:
        for fwhm in widths:
            g = np.exp(-_FOUR_LN2 * ((delays - center) / fwhm) ** 2)
            design = np.stack([np.ones_like(y), g * np.cos(phases), g * np.sin(phases)], axis=1)
            coef, *_ = np.linalg.lstsq(design / sigma[:, None], y / sigma, rcond=None)
            chi2 = float(np.sum(((design @ coef - y) / sigma) ** 2))
            if best is None or chi2 < best[0]:
                best = (chi2, center, fwhm, coef)
    chi2, center, fwhm, (c0, c1, c2) = best
    visibility = math.hypot(c1, c2) / c0 if c0 > 0 else 0.0
    return [max(c0, 1e-9), min(visibility, 1.0), center, fwhm, math.atan2(-c2, c1)], chi2


def fit_envelope(
    delays: Sequence[float],
    phases: Sequence[float],
    counts: Sequence[float],
    fwhm_bounds: Tuple[float, float] = (0.5, 10.0),
    center_bound: float = 0.5,
) -> EnvelopeFit:
    """
    Global fit of a delay scan.

    Arguments:
        delays: delay line setting of each point (mm).
        phases: Alice-minus-Bob analyser phase during each point (rad).
        counts: net coincidences of one detector pair.
        fwhm_bounds: allowed envelope FWHM (mm).
        center_bound: the envelope centre must lie within +-center_bound of zero (mm).
    Returns:
        EnvelopeFit; converged is False when curve_fit failed and the grid start is returned.
    """
    delays = np.asarray(delays, dtype=np.float64)
    phases = np.asarray(phases, dtype=np.float64)
    y = np.asarray(counts, dtype=np.float64)
    if not (len(delays) == len(phases) == len(y)):
        raise InvalidParameterError("delays, phases and counts must have equal lengths")
    if len(y) < MIN_POINTS:
        raise InvalidParameterError(f"envelope fit needs >= {MIN_POINTS} points, got {len(y)}")
    if not np.any(y > 0):
        raise FitConvergenceError("delay scan holds no counts", {"n_points": len(y)})

    sigma = _poisson_sigma(y)
    centers = np.linspace(-center_bound, center_bound, 11)
    widths = np.geomspace(fwhm_bounds[0], fwhm_bounds[1], 15)
    p0, grid_chi2 = _grid_start(delays, phases, y, sigma, centers, widths)
    dof = max(len(y) - 5, 1)
    lower = [0.0, 0.0, -center_bound, fwhm_bounds[0], -4.0 * math.pi]
    upper = [np.inf, 1.0, center_bound, fwhm_bounds[1], 4.0 * math.pi]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", OptimizeWarning)
            popt, pcov = curve_fit(
                _envelope_model,
                (delays, phases),
                y,
                p0=p0,
                sigma=sigma,
                absolute_sigma=True,
                bounds=(lower, upper),
                maxfev=20000,
            )
    except (RuntimeError, OptimizeWarning, ValueError) as e:
        logger.warning(f"envelope fit fell back to the grid start: {e}")
        return EnvelopeFit(
            visibility=p0[1],
            fwhm=p0[3],
            center=p0[2],
            offset=p0[0],
            phase0=p0[4],
            residual=grid_chi2 / dof,
            converged=False,
        )

    errors = np.sqrt(np.clip(np.diag(pcov), 0.0, None))
    chi2 = float(np.sum(((y - _envelope_model((delays, phases), *popt)) / sigma) ** 2))
    offset, visibility, center, fwhm, phase0 = (float(p) for p in popt)
    logger.info(
        f"envelope fit: V={visibility:.4f}+-{errors[1]:.4f}, fwhm={fwhm:.3f} mm, "
        f"center={center:.3f} mm"
    )
    return EnvelopeFit(
        visibility=visibility,
        fwhm=fwhm,
        center=center,
        offset=offset,
        phase0=(phase0 + math.pi) % (2.0 * math.pi) - math.pi,
        visibility_error=float(errors[1]),
        fwhm_error=float(errors[3]),
        center_error=float(errors[2]),
        residual=chi2 / dof,
        covariance=pcov,
    )
