from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from indisup.app.core.config import Settings
from indisup.app.services.loss import LossConfig
from indisup.app.services.physics import DEFAULT_CONSTANTS, PhysicsConstants
from indisup.app.services.projection import COLLINEARITY_RTOL, NORMALIZE_EPS, RIDGE_SCALE


class TrainConfig(BaseModel):
    """Everything that determines one training run. Immutable; copy with `with_updates`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    batch_size: int = Field(default=128, ge=1)
    seq_len: int = Field(default=150, ge=1)
    use_batchnorm: bool = True
    hidden_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    iterations: int = Field(default=2000, ge=0)
    seed: int = Field(default=0, ge=0)

    normalize_projection: bool = True
    detach_projection_branch: bool = False
    covariance_fix_enabled: bool = True
    ridge_fallback: bool = False
    supervision: Literal["indirect", "naive"] = "indirect"

    train_frac: float = Field(default=0.7, gt=0, lt=1)
    bn_momentum: float = Field(default=0.9, ge=0, lt=1)
    bn_eps: float = Field(default=1e-8, gt=0)
    confidence_threshold: float = Field(default=0.05, ge=0, le=1)
    collinearity_rtol: float = Field(default=COLLINEARITY_RTOL, gt=0)
    ridge_scale: float = Field(default=RIDGE_SCALE, gt=0)
    normalize_eps: float = Field(default=NORMALIZE_EPS, gt=0)
    physics: PhysicsConstants = DEFAULT_CONSTANTS
    log_every: int = Field(default=100, ge=1)

    @model_validator(mode="after")
    def _projection_needs_three_rows(self) -> "TrainConfig":
        if self.batch_size * self.seq_len < 3:
            raise ValueError(
                f"batch_size·seq_len must be >= 3 for the projection, got {self.batch_size * self.seq_len}"
            )
        return self

    @property
    def loss_config(self) -> LossConfig:
        return LossConfig(
            normalize_projection=self.normalize_projection,
            detach_projection_branch=self.detach_projection_branch,
            normalize_eps=self.normalize_eps,
        )

    @property
    def samples_per_batch(self) -> int:
        return self.batch_size * self.seq_len

    def with_updates(self, **updates: Any) -> "TrainConfig":
        """Validated copy (pydantic's model_copy skips validation)."""
        return TrainConfig.model_validate({**self.model_dump(), **updates})

    @classmethod
    def from_settings(cls, s: Settings, **overrides: Any) -> "TrainConfig":
        values: dict[str, Any] = {
            "batch_size": s.batch_size,
            "seq_len": s.seq_len,
            "hidden_size": s.hidden_size,
            "learning_rate": s.learning_rate,
            "beta1": s.beta1,
            "beta2": s.beta2,
            "adam_eps": s.adam_eps,
            "iterations": s.iterations,
            "seed": s.seed,
            "train_frac": s.train_frac,
            "bn_momentum": s.bn_momentum,
            "bn_eps": s.bn_eps,
            "confidence_threshold": s.confidence_threshold,
            "collinearity_rtol": s.collinearity_rtol,
            "ridge_scale": s.ridge_scale,
            "normalize_eps": s.normalize_eps,
            "physics": PhysicsConstants.from_settings(s),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(values)


def derive_seeds(seed: int) -> tuple[int, int]:
    """Independent (parameter-init, batch-stream) seeds from one run seed."""
    init_seed, batch_seed = np.random.SeedSequence(seed).generate_state(2)
    return int(init_seed), int(batch_seed)
