from indisup.app.services.model.checkpoint import load_checkpoint, save_checkpoint
from indisup.app.services.model.lstm import (
    ForwardCache,
    ModelParameters,
    backward,
    forward,
    init_parameters,
    negate_head,
)
from indisup.app.services.model.optim import OptimizerState, optimizer_step

__all__ = [
    "ForwardCache",
    "ModelParameters",
    "OptimizerState",
    "backward",
    "forward",
    "init_parameters",
    "load_checkpoint",
    "negate_head",
    "optimizer_step",
    "save_checkpoint",
]
