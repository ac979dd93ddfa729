"""
Indirect physics-constrained loss.

  plain:      L(f) = Σ (Pf − f)²
  normalized: L(f) = Σ (normalize(Pf) − f)²

Neither form needs the target variable; only the indirect-label column inside P.
Both are even in f (L(f) = L(−f)) and invariant to e → αe + β, which is why a
trained model has two mirror solutions and why the physics constants drop out.

Gradients are exact. For the plain form (P symmetric, P(P − I) = 0):
  ∇L = 2(f − Pf).
For the normalized form with z = normalize(p), p = Pf, r = z − f, σ = std(p):
  ∇L = 2P·Jᵀr − 2r,  Jᵀr = (r − mean(r) − z·mean(r∘z)) / σ
where the first term is dropped when the projection branch is detached.
"""

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from indisup.app.core.errors import DegenerateError, DimensionMismatchError
from indisup.app.services.projection import NORMALIZE_EPS, ProjectionOperator, project

MIN_STEP = 1e-7
MAX_STEP = 1e-3


class LossConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    normalize_projection: bool = True
    detach_projection_branch: bool = False
    normalize_eps: float = Field(default=NORMALIZE_EPS, gt=0)


@dataclass(frozen=True)
class LossValue:
    value: float
    grad: np.ndarray


def _as_prediction(op: ProjectionOperator, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64).ravel()
    if f.size != op.n:
        raise DimensionMismatchError(f"prediction length {f.size} does not match operator n={op.n}")
    return f


def indirect_loss(
    op: ProjectionOperator,
    f,
    cfg: LossConfig = LossConfig(),
) -> LossValue:
    f = _as_prediction(op, f)
    p = project(op, f)

    if not cfg.normalize_projection:
        r = p - f
        return LossValue(value=float(r @ r), grad=-2.0 * r)

    centered = p - p.mean()
    sigma = float(np.sqrt(np.mean(centered * centered)))
    if not sigma > cfg.normalize_eps:
        raise DegenerateError(
            f"projected prediction is constant (std={sigma:.3e}); predictions have collapsed"
        )
    z = centered / sigma
    r = z - f
    value = float(r @ r)

    if cfg.detach_projection_branch:
        return LossValue(value=value, grad=-2.0 * r)

    # Vector-Jacobian product of normalize() at p, then through P (symmetric)
    jt_r = (r - r.mean() - z * np.mean(r * z)) / sigma
    grad = 2.0 * project(op, jt_r) - 2.0 * r
    return LossValue(value=value, grad=grad)


def naive_loss(f, target) -> LossValue:
    """Plain squared error against a directly supplied target (two-stage baseline)."""
    f = np.asarray(f, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    if f.size != target.size:
        raise DimensionMismatchError(f"prediction length {f.size} != target length {target.size}")
    r = f - target
    return LossValue(value=float(r @ r), grad=2.0 * r)


def loss_gradient_check(
    op: ProjectionOperator,
    f,
    cfg: LossConfig = LossConfig(),
    h: float = 1e-5,
) -> float:
    """
    Max relative error between the analytic gradient and central differences.

    Relative error is max|g − ĝ| / max(1, max|g|, max|ĝ|), so components near zero
    are compared absolutely instead of amplifying finite-difference noise.
    """
    if not MIN_STEP <= h <= MAX_STEP:
        raise ValueError(f"step h must lie in [{MIN_STEP}, {MAX_STEP}], got {h}")
    f = _as_prediction(op, f)
    analytic = indirect_loss(op, f, cfg).grad

    numeric = np.empty_like(f)
    x = f.copy()
    for i in range(f.size):
        x[i] = f[i] + h
        up = indirect_loss(op, x, cfg).value
        x[i] = f[i] - h
        down = indirect_loss(op, x, cfg).value
        x[i] = f[i]
        numeric[i] = (up - down) / (2.0 * h)

    scale = max(1.0, float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))))
    return float(np.max(np.abs(analytic - numeric)) / scale)
