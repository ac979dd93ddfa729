"""
Evaluation against physics-derived ground truth.

The target never enters training, but sonic logs of the test wells give its
ground truth through the physics chain. Predictions and truth are compared after
pooling every test well and standardizing each side (the model's output scale
is arbitrary under the indirect loss); physical-scale numbers come from
rescaling both with the training UCS moments.
"""

from dataclasses import dataclass, field

import numpy as np
import structlog

from indisup.app.core.errors import DegenerateError, WindowError
from indisup.app.services.data import Dataset
from indisup.app.services.model import ModelParameters, forward
from indisup.app.services.physics import expected_correlation_sign, ucs_from_logs
from indisup.app.services.projection import normalize
from indisup.app.services.signfix import (
    OrientationReport,
    UcsMoments,
    covariance_sign,
    rescale_to_physical,
)
from indisup.app.services.training.config import TrainConfig

log = structlog.get_logger(__name__)


@dataclass(frozen=True)
class WellPrediction:
    depth: np.ndarray
    prediction_physical: np.ndarray
    ground_truth: np.ndarray


@dataclass
class RunReport:
    test_mse_normalized: float
    test_mse_physical: float
    pearson_r: float
    resolved_sign: int
    confident: bool
    covariance: float
    loss_history: np.ndarray = field(default_factory=lambda: np.empty(0))
    wall_time: float = 0.0
    predictions: dict[str, WellPrediction] = field(default_factory=dict, repr=False)

    @property
    def orientation(self) -> int:
        """+1 when the final prediction follows the true trend, −1 when mirrored."""
        return 1 if self.pearson_r > 0 else -1

    def metrics(self) -> dict[str, float | int | bool]:
        """Deterministic scalar metrics (wall time excluded)."""
        return {
            "test_mse_normalized": self.test_mse_normalized,
            "test_mse_physical": self.test_mse_physical,
            "pearson_r": self.pearson_r,
            "resolved_sign": self.resolved_sign,
            "orientation": self.orientation,
            "confident": self.confident,
            "covariance": self.covariance,
            "final_loss": float(self.loss_history[-1]) if self.loss_history.size else float("nan"),
        }


def window_starts(n_samples: int, seq_len: int) -> list[int]:
    """
    Consecutive non-overlapping windows; a final partial window is shifted back to
    end at the last sample, and its overlap wins when outputs are stitched.
    """
    if n_samples < 1 or seq_len < 1:
        raise WindowError(f"cannot window {n_samples} samples with seq_len {seq_len}")
    seq_len = min(seq_len, n_samples)
    starts = list(range(0, n_samples - seq_len + 1, seq_len))
    if starts[-1] + seq_len < n_samples:
        starts.append(n_samples - seq_len)
    return starts


def predict_well(params: ModelParameters, X: np.ndarray, seq_len: int) -> np.ndarray:
    """Eval-mode prediction for one whole well; X is (samples, 4) standardized.

    A well shorter than seq_len runs as a single window.
    """
    seq_len = min(seq_len, X.shape[0])
    starts = window_starts(X.shape[0], seq_len)
    windows = np.stack([X[s:s + seq_len] for s in starts])
    out, _ = forward(params, windows, mode="eval")
    pred = np.empty(X.shape[0])
    for s, row in zip(starts, out):
        pred[s:s + seq_len] = row
    return pred


def evaluate_predictions(
    predictions: dict[str, np.ndarray],
    test_ds: Dataset,
    train_ucs_moments: UcsMoments,
    cfg: TrainConfig,
    loss_history: np.ndarray | None = None,
) -> RunReport:
    k = cfg.physics
    ids = test_ds.well_ids
    f = np.concatenate([np.asarray(predictions[i], dtype=np.float64) for i in ids])
    e = np.concatenate([w.dynamic_modulus(k) for w in test_ds.wells])
    truth = np.concatenate([np.atleast_1d(ucs_from_logs(w.sonic(), k)) for w in test_ds.wells])

    try:
        orientation = covariance_sign(
            f, e, expected_correlation_sign(k), cfg.confidence_threshold, cfg.normalize_eps
        )
    except DegenerateError as exc:
        log.warning("orientation_undetermined", error=str(exc))
        orientation = OrientationReport(covariance=0.0, correlation=0.0, resolved_sign=1, confident=False)

    sign = orientation.resolved_sign if cfg.covariance_fix_enabled else 1
    f_hat = normalize(sign * f, cfg.normalize_eps)
    t_hat = normalize(truth, cfg.normalize_eps)

    mse_normalized = float(np.mean((f_hat - t_hat) ** 2))
    pred_physical = rescale_to_physical(f_hat, train_ucs_moments.mean, train_ucs_moments.std)
    truth_physical = rescale_to_physical(t_hat, train_ucs_moments.mean, train_ucs_moments.std)
    mse_physical = float(np.mean((pred_physical - truth_physical) ** 2))
    # Both sides have zero mean and unit population std
    pearson_r = float(np.clip(np.mean(f_hat * t_hat), -1.0, 1.0))

    per_well: dict[str, WellPrediction] = {}
    offset = 0
    for w in test_ds.wells:
        n = len(w)
        per_well[w.well_id] = WellPrediction(
            depth=w.depth,
            prediction_physical=pred_physical[offset:offset + n],
            ground_truth=truth[offset:offset + n],
        )
        offset += n

    return RunReport(
        test_mse_normalized=mse_normalized,
        test_mse_physical=mse_physical,
        pearson_r=pearson_r,
        resolved_sign=orientation.resolved_sign,
        confident=orientation.confident,
        covariance=orientation.covariance,
        loss_history=np.asarray(loss_history if loss_history is not None else np.empty(0)),
        predictions=per_well,
    )


def evaluate(
    params: ModelParameters,
    test_ds: Dataset,
    train_ucs_moments: UcsMoments,
    cfg: TrainConfig,
    loss_history: np.ndarray | None = None,
) -> RunReport:
    """Predict every test well in eval mode, then score. test_ds must carry the training standardization."""
    predictions = {
        w.well_id: predict_well(params, test_ds.standardized_inputs(w), cfg.seq_len)
        for w in test_ds.wells
    }
    report = evaluate_predictions(predictions, test_ds, train_ucs_moments, cfg, loss_history)
    log.info(
        "evaluation_complete",
        mse_normalized=report.test_mse_normalized,
        pearson_r=report.pearson_r,
        resolved_sign=report.resolved_sign,
        confident=report.confident,
    )
    return report
