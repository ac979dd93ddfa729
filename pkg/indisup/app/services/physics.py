"""
Rock-physics chain from sonic + density logs to uniaxial compressive strength.

  E_dyn  = c · (ρ / Δt_s²) · (3Δt_s² − 4Δt_p²) / (Δt_s² − Δt_p²)
  E_stat = a_stat · E_dyn + b_stat
  UCS    = b_ucs + a_ucs · E_stat

Only E_dyn is nonlinear in the logs; the two affine steps are what the projection
operator absorbs. Functions accept scalars or numpy arrays (elementwise).
"""

from dataclasses import dataclass
import math

import numpy as np

from indisup.app.core.config import Settings
from indisup.app.core.errors import DegenerateError, PhysicsDomainError

# Vp/Vs must exceed 2/√3 for a positive modulus
MIN_SLOWNESS_RATIO = 2.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class PhysicsConstants:
    c: float = 1.0
    a_stat: float = 0.414
    b_stat: float = -1.05
    a_ucs: float = 4.1089
    b_ucs: float = 2.28

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        for name in ("a_stat", "b_stat", "a_ucs", "b_ucs"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def composite_slope(self) -> float:
        """dUCS/dE_dyn."""
        return self.a_stat * self.a_ucs

    @classmethod
    def from_settings(cls, cfg: Settings) -> "PhysicsConstants":
        return cls(c=cfg.c, a_stat=cfg.a_stat, b_stat=cfg.b_stat, a_ucs=cfg.a_ucs, b_ucs=cfg.b_ucs)


DEFAULT_CONSTANTS = PhysicsConstants()


@dataclass(frozen=True)
class SonicSample:
    rho: float | np.ndarray   # bulk density
    dts: float | np.ndarray   # shear slowness
    dtp: float | np.ndarray   # compressional slowness


def _scalar_or_array(x: np.ndarray) -> float | np.ndarray:
    return float(x) if x.ndim == 0 else x


def validity_mask(rho, dts, dtp) -> np.ndarray:
    """True where a sample lies inside the physics validity region."""
    rho = np.asarray(rho, dtype=np.float64)
    dts = np.asarray(dts, dtype=np.float64)
    dtp = np.asarray(dtp, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        return (
            np.isfinite(rho) & np.isfinite(dts) & np.isfinite(dtp)
            & (rho > 0) & (dtp > 0) & (dts > MIN_SLOWNESS_RATIO * dtp)
        )


def dynamic_youngs_modulus(s: SonicSample, k: PhysicsConstants = DEFAULT_CONSTANTS) -> float | np.ndarray:
    """
    Dynamic Young's modulus.

    Raises PhysicsDomainError if any sample has Δt_s ≤ (2/√3)·Δt_p, ρ ≤ 0 or Δt_p ≤ 0.
    Invalid samples are rejected, never clamped.
    """
    rho = np.asarray(s.rho, dtype=np.float64)
    dts = np.asarray(s.dts, dtype=np.float64)
    dtp = np.asarray(s.dtp, dtype=np.float64)

    ok = validity_mask(rho, dts, dtp)
    if not np.all(ok):
        n_bad = int(np.size(ok) - np.count_nonzero(ok))
        raise PhysicsDomainError(
            f"{n_bad} sample(s) outside validity region "
            f"(need rho > 0, dtp > 0, dts > {MIN_SLOWNESS_RATIO:.6f}·dtp)"
        )

    dts2 = dts * dts
    dtp2 = dtp * dtp
    e_dyn = k.c * (rho / dts2) * ((3.0 * dts2 - 4.0 * dtp2) / (dts2 - dtp2))
    return _scalar_or_array(e_dyn)


def static_from_dynamic(e_dyn, k: PhysicsConstants = DEFAULT_CONSTANTS):
    return k.a_stat * e_dyn + k.b_stat


def ucs_from_static(e_stat, k: PhysicsConstants = DEFAULT_CONSTANTS):
    return k.b_ucs + k.a_ucs * e_stat


def ucs_from_dynamic(e_dyn, k: PhysicsConstants = DEFAULT_CONSTANTS):
    return ucs_from_static(static_from_dynamic(e_dyn, k), k)


def ucs_from_logs(s: SonicSample, k: PhysicsConstants = DEFAULT_CONSTANTS) -> float | np.ndarray:
    return ucs_from_dynamic(dynamic_youngs_modulus(s, k), k)


def expected_correlation_sign(k: PhysicsConstants = DEFAULT_CONSTANTS) -> int:
    """Sign of the correlation between E_dyn (indirect label) and UCS (target)."""
    slope = k.composite_slope
    if slope == 0:
        raise DegenerateError("composite UCS(E_dyn) slope is zero; orientation undefined")
    return 1 if slope > 0 else -1
