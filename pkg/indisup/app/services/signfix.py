"""
Covariance-based orientation of a trained model and physical rescaling.

The indirect loss cannot tell f from −f. The physics chain fixes the sign of
cov(UCS, E_dyn), so the orientation whose covariance with E_dyn matches that
sign is taken as the true solution.
"""

from dataclasses import dataclass

import numpy as np
import structlog

from indisup.app.core.errors import DegenerateError, DimensionMismatchError, LengthError, ScaleError
from indisup.app.services.physics import (
    DEFAULT_CONSTANTS,
    PhysicsConstants,
    SonicSample,
    expected_correlation_sign,
    ucs_from_logs,
)
from indisup.app.services.projection import NORMALIZE_EPS

log = structlog.get_logger(__name__)

CONFIDENCE_THRESHOLD = 0.05


@dataclass(frozen=True)
class OrientationReport:
    covariance: float
    correlation: float
    resolved_sign: int
    confident: bool


def covariance_sign(
    f,
    e,
    expected_sign: int | None = None,
    threshold: float = CONFIDENCE_THRESHOLD,
    eps: float = NORMALIZE_EPS,
) -> OrientationReport:
    """
    Pick the sign s such that s·f correlates with e the way the physics demands.

    Below the confidence threshold the sign is left at +1 and confident=False.
    Either input with population std <= eps is a DegenerateError.
    """
    f = np.asarray(f, dtype=np.float64).ravel()
    e = np.asarray(e, dtype=np.float64).ravel()
    if f.size != e.size:
        raise DimensionMismatchError(f"prediction length {f.size} != indirect-label length {e.size}")
    if f.size < 3:
        raise LengthError(f"covariance analysis needs at least 3 samples, got {f.size}")
    if expected_sign is None:
        expected_sign = expected_correlation_sign(DEFAULT_CONSTANTS)

    fc = f - f.mean()
    ec = e - e.mean()
    sff = float(fc @ fc)
    see = float(ec @ ec)
    if not (np.sqrt(sff / f.size) > eps and np.sqrt(see / e.size) > eps):
        raise DegenerateError("covariance analysis on a constant vector")

    sfe = float(fc @ ec)
    covariance = sfe / (f.size - 1)
    correlation = float(np.clip(sfe / np.sqrt(sff * see), -1.0, 1.0))
    confident = abs(correlation) >= threshold

    if confident:
        resolved = (1 if covariance > 0 else -1) * expected_sign
    else:
        resolved = 1
        log.warning("orientation_low_confidence", correlation=correlation, threshold=threshold)

    return OrientationReport(
        covariance=covariance,
        correlation=correlation,
        resolved_sign=resolved,
        confident=confident,
    )


def resolve_orientation(f, report: OrientationReport) -> np.ndarray:
    return report.resolved_sign * np.asarray(f, dtype=np.float64)


def rescale_to_physical(f_oriented, ucs_mean: float, ucs_std: float) -> np.ndarray:
    """Map a zero-mean unit-std prediction to UCS units with training-set moments."""
    if not ucs_std > 0:
        raise ScaleError(f"ucs_std must be positive, got {ucs_std}")
    return np.asarray(f_oriented, dtype=np.float64) * ucs_std + ucs_mean


@dataclass(frozen=True)
class UcsMoments:
    mean: float
    std: float


def training_ucs_moments(wells, k: PhysicsConstants = DEFAULT_CONSTANTS) -> UcsMoments:
    """
    Population mean/std of physics-derived UCS over the given (training) wells.

    Uses only sonic + density logs; the target itself is never observed.
    """
    ucs = np.concatenate([
        np.atleast_1d(ucs_from_logs(SonicSample(w.density, w.dts, w.dtp), k))
        for w in wells
    ])
    std = float(ucs.std())
    if not std > 0:
        raise DegenerateError("training UCS is constant; cannot rescale")
    return UcsMoments(mean=float(ucs.mean()), std=std)
