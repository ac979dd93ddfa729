"""
Projection onto range(A), A = [e, 1] ∈ R^{n×2}.

P = A(AᵀA)⁻¹Aᵀ is never formed. With the 2×2 Gram inverse cached, projecting a
vector costs two dot products and an axpy, so a 128×150 batch (n = 19,200) needs
O(n) memory instead of the n×n matrix.

For the unregularized operator the projection is evaluated in centered form,
  Py = ȳ + (⟨e − ē, y⟩ / ‖e − ē‖²)(e − ē),
which is algebraically identical to A·gram_inv·Aᵀy and loses less precision
when |ē| ≫ std(e).
"""

from dataclasses import dataclass, field

import numpy as np
import structlog

from indisup.app.core.errors import (
    CollinearityError,
    DegenerateError,
    DimensionMismatchError,
    LengthError,
    NonFiniteError,
)

log = structlog.get_logger(__name__)

MIN_ROWS = 3
COLLINEARITY_RTOL = 1e-12
RIDGE_SCALE = 1e-8
NORMALIZE_EPS = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProjectionOperator:
    e: np.ndarray
    gram_inv: np.ndarray
    n: int
    e_mean: float
    e_centered: np.ndarray = field(repr=False)
    sxx: float = 0.0
    ridge_lambda: float = 0.0

    @property
    def gram(self) -> np.ndarray:
        """AᵀA (with the ridge term when one was applied)."""
        s1 = float(self.e.sum())
        s2 = float(self.e @ self.e)
        return np.array([[s2 + self.ridge_lambda, s1], [s1, self.n + self.ridge_lambda]])

    def design_transpose_times(self, y: np.ndarray) -> np.ndarray:
        """Aᵀy."""
        return np.array([self.e @ y, y.sum()])


@dataclass(frozen=True)
class LeastSquaresSolution:
    theta: np.ndarray     # (slope on e, intercept)
    fitted: np.ndarray    # Aθ
    residual: np.ndarray  # Aθ − y


def build_projection(
    e,
    ridge: bool = False,
    collinearity_rtol: float = COLLINEARITY_RTOL,
    ridge_scale: float = RIDGE_SCALE,
) -> ProjectionOperator:
    """
    Build the operator for the indirect-label column e.

    Rejects len(e) < 3 and var(e) < rtol·(1 + ē²). With ridge=True a degenerate
    column is regularized instead (λ = ridge_scale·trace(AᵀA)/2 on the diagonal).
    """
    e = np.array(e, dtype=np.float64).ravel()
    n = e.size
    if n < MIN_ROWS:
        raise LengthError(f"projection needs at least {MIN_ROWS} samples, got {n}")
    if not np.all(np.isfinite(e)):
        raise NonFiniteError("indirect labels contain NaN or infinity")

    e_mean = float(e.mean())
    e_centered = e - e_mean
    sxx = float(e_centered @ e_centered)
    variance = sxx / n

    s1 = float(e.sum())
    s2 = float(e @ e)
    ridge_lambda = 0.0

    if variance < collinearity_rtol * (1.0 + e_mean * e_mean):
        if not ridge:
            raise CollinearityError(
                f"indirect-label column is collinear with the intercept "
                f"(variance {variance:.3e}, n={n})"
            )
        ridge_lambda = ridge_scale * (s2 + n) / 2.0
        log.warning("projection_ridge_fallback", n=n, variance=variance, ridge_lambda=ridge_lambda)

    a11 = s2 + ridge_lambda
    a22 = n + ridge_lambda
    # det = n·sxx exactly when unregularized; use that to avoid cancellation
    det = n * sxx if ridge_lambda == 0.0 else a11 * a22 - s1 * s1
    gram_inv = np.array([[a22, -s1], [-s1, a11]]) / det

    return ProjectionOperator(
        e=_readonly(e),
        gram_inv=_readonly(gram_inv),
        n=n,
        e_mean=e_mean,
        e_centered=_readonly(e_centered),
        sxx=sxx,
        ridge_lambda=ridge_lambda,
    )


def _check_length(op: ProjectionOperator, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != op.n:
        raise DimensionMismatchError(f"expected vector of length {op.n}, got {y.size}")
    return y


def least_squares_coeffs(op: ProjectionOperator, y) -> LeastSquaresSolution:
    """θ* = (AᵀA)⁻¹Aᵀy with fitted values and residual."""
    y = _check_length(op, y)
    if op.ridge_lambda == 0.0:
        slope = float(op.e_centered @ y) / op.sxx
        intercept = float(y.mean()) - slope * op.e_mean
        theta = np.array([slope, intercept])
    else:
        theta = op.gram_inv @ op.design_transpose_times(y)
    fitted = theta[0] * op.e + theta[1]
    return LeastSquaresSolution(theta=theta, fitted=fitted, residual=fitted - y)


def project(op: ProjectionOperator, y) -> np.ndarray:
    """y* = Py, in O(n) time and memory."""
    y = _check_length(op, y)
    if op.ridge_lambda == 0.0:
        slope = float(op.e_centered @ y) / op.sxx
        return y.mean() + slope * op.e_centered
    theta = op.gram_inv @ op.design_transpose_times(y)
    return theta[0] * op.e + theta[1]


def normalize(v, eps: float = NORMALIZE_EPS) -> np.ndarray:
    """Zero mean, unit population standard deviation."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size < 2:
        raise LengthError(f"normalize needs at least 2 values, got {v.size}")
    centered = v - v.mean()
    std = float(np.sqrt(np.mean(centered * centered)))
    if not std > eps:
        raise DegenerateError(f"cannot normalize a constant vector (std={std:.3e})")
    return centered / std
