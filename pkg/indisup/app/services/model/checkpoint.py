"""
Model checkpoints.

A checkpoint is an .npz archive: every parameter tensor under its own name, the
batch-norm running statistics, and a `__meta__` entry holding JSON (format
version, architecture, and whatever run metadata the caller attaches: config,
standardization and UCS moments). Arrays are stored raw, so loading is bit-exact.
"""

import json
from pathlib import Path
from typing import Any

import numpy as np
import structlog

from indisup.app.core.errors import CheckpointError
from indisup.app.services.model.lstm import ModelParameters

log = structlog.get_logger(__name__)

FORMAT_VERSION = 1
_META_KEY = "__meta__"
_RUNNING_MEAN = "__running_mean__"
_RUNNING_VAR = "__running_var__"


def save_checkpoint(path: str | Path, params: ModelParameters, meta: dict[str, Any] | None = None) -> Path:
    path = Path(path)
    header = {
        "format_version": FORMAT_VERSION,
        "hidden_size": params.hidden_size,
        "input_size": params.input_size,
        "use_batchnorm": params.use_batchnorm,
        "bn_momentum": params.bn_momentum,
        "bn_eps": params.bn_eps,
        "tensors": {k: list(v.shape) for k, v in params.tensors.items()},
        "meta": meta or {},
    }
    arrays = dict(params.tensors)
    arrays[_RUNNING_MEAN] = params.running_mean
    arrays[_RUNNING_VAR] = params.running_var
    arrays[_META_KEY] = np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        np.savez(fh, **arrays)
    log.info("checkpoint_saved", path=str(path), tensors=len(params.tensors))
    return path


def load_checkpoint(path: str | Path) -> tuple[ModelParameters, dict[str, Any]]:
    """Returns (parameters with zeroed gradients, caller metadata)."""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            arrays = {k: archive[k] for k in archive.files}
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc

    if _META_KEY not in arrays:
        raise CheckpointError(f"{path} has no metadata entry")
    header = json.loads(arrays.pop(_META_KEY).tobytes().decode("utf-8"))
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version!r}")

    running_mean = arrays.pop(_RUNNING_MEAN)
    running_var = arrays.pop(_RUNNING_VAR)
    expected = header["tensors"]
    if set(expected) != set(arrays):
        raise CheckpointError(f"tensor set mismatch: expected {sorted(expected)}, found {sorted(arrays)}")
    for name, shape in expected.items():
        if list(arrays[name].shape) != shape:
            raise CheckpointError(f"tensor {name} has shape {arrays[name].shape}, expected {tuple(shape)}")

    params = ModelParameters(
        hidden_size=header["hidden_size"],
        use_batchnorm=header["use_batchnorm"],
        tensors=arrays,
        grads={k: np.zeros_like(v) for k, v in arrays.items()},
        running_mean=running_mean,
        running_var=running_var,
        input_size=header["input_size"],
        bn_momentum=header["bn_momentum"],
        bn_eps=header["bn_eps"],
    )
    return params, header["meta"]
