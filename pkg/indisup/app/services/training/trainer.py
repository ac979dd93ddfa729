"""
Training loop.

Per iteration: draw a batch, run the model in train mode, build the projection
from the batch's E_dyn, evaluate the indirect loss, backpropagate, take an Adam
step. The loss history records value / n for readability; the optimized quantity
is the plain sum.

With supervision="naive" the same loop regresses the model directly onto
standardized E_dyn (the two-stage baseline); UCS then follows from the
monotone physics chain.
"""

from dataclasses import dataclass

import numpy as np
import structlog

from indisup.app.core.errors import DivergenceError
from indisup.app.services.data import Dataset, Standardization, make_batches
from indisup.app.services.loss import indirect_loss, naive_loss
from indisup.app.services.model import (
    ModelParameters,
    OptimizerState,
    backward,
    forward,
    init_parameters,
    optimizer_step,
)
from indisup.app.services.projection import build_projection
from indisup.app.services.training.config import TrainConfig, derive_seeds

log = structlog.get_logger(__name__)


@dataclass
class TrainResult:
    params: ModelParameters
    loss_history: np.ndarray
    standardization: Standardization


def initial_parameters(cfg: TrainConfig) -> ModelParameters:
    init_seed, _ = derive_seeds(cfg.seed)
    return init_parameters(
        init_seed,
        cfg.hidden_size,
        use_batchnorm=cfg.use_batchnorm,
        bn_momentum=cfg.bn_momentum,
        bn_eps=cfg.bn_eps,
    )


def train(cfg: TrainConfig, train_ds: Dataset) -> TrainResult:
    if train_ds.standardization is None:
        train_ds = train_ds.fit_standardization()

    params = initial_parameters(cfg)
    history = np.empty(cfg.iterations)
    if cfg.iterations == 0:
        return TrainResult(params=params, loss_history=history, standardization=train_ds.standardization)

    _, batch_seed = derive_seeds(cfg.seed)
    batches = make_batches(train_ds, cfg.batch_size, cfg.seq_len, batch_seed, cfg.physics)
    state = OptimizerState(lr=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.adam_eps)
    loss_cfg = cfg.loss_config

    if cfg.supervision == "naive":
        e_all = np.concatenate([w.dynamic_modulus(cfg.physics) for w in train_ds.wells])
        e_mean, e_std = float(e_all.mean()), float(e_all.std())

    log.info(
        "training_started",
        iterations=cfg.iterations,
        batch_size=cfg.batch_size,
        seq_len=cfg.seq_len,
        n=cfg.samples_per_batch,
        supervision=cfg.supervision,
    )

    for it, batch in zip(range(cfg.iterations), batches):
        f, cache = forward(params, batch.X, mode="train")
        if cfg.supervision == "naive":
            lv = naive_loss(f, (batch.e - e_mean) / e_std)
        else:
            op = build_projection(
                batch.e,
                ridge=cfg.ridge_fallback,
                collinearity_rtol=cfg.collinearity_rtol,
                ridge_scale=cfg.ridge_scale,
            )
            lv = indirect_loss(op, f, loss_cfg)

        if not np.isfinite(lv.value):
            log.error("training_diverged", iteration=it, loss=lv.value)
            raise DivergenceError(it, lv.value)

        backward(params, cache, lv.grad.reshape(f.shape))
        optimizer_step(params, state)
        if not params.all_finite():
            log.error("parameters_non_finite", iteration=it)
            raise DivergenceError(it, float("nan"))

        history[it] = lv.value / batch.n
        if (it + 1) % cfg.log_every == 0:
            window = history[max(0, it + 1 - cfg.log_every): it + 1]
            log.info("training_progress", iteration=it + 1, mean_loss=float(window.mean()))

    return TrainResult(params=params, loss_history=history, standardization=train_ds.standardization)
