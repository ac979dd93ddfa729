"""
Single-layer LSTM → optional batch norm → dense head, with exact BPTT.

Shapes: X is (batch, seq, input_size); predictions are (batch, seq).
Gate layout along the 4H axis is [input, forget, cell, output].

Batch norm acts on hidden states per feature, pooling statistics over batch and
time. Train mode uses batch statistics and updates the running estimates; eval
mode uses the running estimates, so eval outputs do not depend on batch size.
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import expit

from indisup.app.core.errors import ShapeMismatchError, StaleCacheError

INPUT_SIZE = 4
BN_MOMENTUM = 0.9
BN_EPS = 1e-8
FORGET_BIAS = 1.0

Mode = Literal["train", "eval"]

TRAINABLE = ("W_x", "W_h", "b", "bn_gamma", "bn_beta", "w_out", "b_out")


@dataclass
class ModelParameters:
    hidden_size: int
    use_batchnorm: bool
    tensors: dict[str, np.ndarray]
    grads: dict[str, np.ndarray]
    running_mean: np.ndarray
    running_var: np.ndarray
    input_size: int = INPUT_SIZE
    bn_momentum: float = BN_MOMENTUM
    bn_eps: float = BN_EPS

    def trainable_names(self) -> list[str]:
        return [k for k in TRAINABLE if k in self.tensors]

    def zero_grad(self) -> None:
        for g in self.grads.values():
            g.fill(0.0)

    def copy(self) -> "ModelParameters":
        return ModelParameters(
            hidden_size=self.hidden_size,
            use_batchnorm=self.use_batchnorm,
            tensors={k: v.copy() for k, v in self.tensors.items()},
            grads={k: v.copy() for k, v in self.grads.items()},
            running_mean=self.running_mean.copy(),
            running_var=self.running_var.copy(),
            input_size=self.input_size,
            bn_momentum=self.bn_momentum,
            bn_eps=self.bn_eps,
        )

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.tensors.values())


def init_parameters(
    seed: int,
    hidden_size: int,
    use_batchnorm: bool = True,
    input_size: int = INPUT_SIZE,
    bn_momentum: float = BN_MOMENTUM,
    bn_eps: float = BN_EPS,
) -> ModelParameters:
    """
    Weights uniform in ±1/√fan_in (fan_in = input_size + H for the gates, H for
    the head); forget-gate bias 1, other biases 0; batch-norm scale 1, shift 0.
    """
    if hidden_size < 1:
        raise ValueError(f"hidden_size must be >= 1, got {hidden_size}")
    H = hidden_size
    rng = np.random.default_rng(seed)

    gate_bound = 1.0 / np.sqrt(input_size + H)
    head_bound = 1.0 / np.sqrt(H)
    b = np.zeros(4 * H)
    b[H:2 * H] = FORGET_BIAS

    tensors = {
        "W_x": rng.uniform(-gate_bound, gate_bound, size=(input_size, 4 * H)),
        "W_h": rng.uniform(-gate_bound, gate_bound, size=(H, 4 * H)),
        "b": b,
        "w_out": rng.uniform(-head_bound, head_bound, size=H),
        "b_out": np.zeros(1),
    }
    if use_batchnorm:
        tensors["bn_gamma"] = np.ones(H)
        tensors["bn_beta"] = np.zeros(H)

    return ModelParameters(
        hidden_size=H,
        use_batchnorm=use_batchnorm,
        tensors=tensors,
        grads={k: np.zeros_like(v) for k, v in tensors.items()},
        running_mean=np.zeros(H),
        running_var=np.ones(H),
        input_size=input_size,
        bn_momentum=bn_momentum,
        bn_eps=bn_eps,
    )


@dataclass
class ForwardCache:
    mode: Mode
    X: np.ndarray
    gates: np.ndarray        # (B, T, 4H) post-activation [i, f, g, o]
    cells: np.ndarray        # (B, T+1, H), index 0 is the zero initial state
    hiddens: np.ndarray      # (B, T+1, H)
    tanh_cells: np.ndarray   # (B, T, H)
    head_input: np.ndarray   # (B, T, H) what the dense head saw
    bn_xhat: np.ndarray | None = None
    bn_inv_std: np.ndarray | None = None
    hidden_size: int = 0
    output_shape: tuple[int, int] = field(default=(0, 0))


def _check_input(params: ModelParameters, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[2] != params.input_size:
        raise ShapeMismatchError(
            f"expected input of shape (batch, seq, {params.input_size}), got {X.shape}"
        )
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ShapeMismatchError(f"batch and sequence length must be >= 1, got {X.shape}")
    return X


def forward(params: ModelParameters, X, mode: Mode = "train") -> tuple[np.ndarray, ForwardCache]:
    X = _check_input(params, X)
    B, T, _ = X.shape
    H = params.hidden_size
    p = params.tensors

    gates = np.empty((B, T, 4 * H))
    cells = np.zeros((B, T + 1, H))
    hiddens = np.zeros((B, T + 1, H))
    tanh_cells = np.empty((B, T, H))

    # Input contribution for every step at once
    x_proj = X @ p["W_x"] + p["b"]
    for t in range(T):
        a = x_proj[:, t] + hiddens[:, t] @ p["W_h"]
        i = expit(a[:, :H])
        f = expit(a[:, H:2 * H])
        g = np.tanh(a[:, 2 * H:3 * H])
        o = expit(a[:, 3 * H:])
        c = f * cells[:, t] + i * g
        tc = np.tanh(c)
        gates[:, t, :H] = i
        gates[:, t, H:2 * H] = f
        gates[:, t, 2 * H:3 * H] = g
        gates[:, t, 3 * H:] = o
        cells[:, t + 1] = c
        tanh_cells[:, t] = tc
        hiddens[:, t + 1] = o * tc

    hs = hiddens[:, 1:]
    cache = ForwardCache(
        mode=mode, X=X, gates=gates, cells=cells, hiddens=hiddens,
        tanh_cells=tanh_cells, head_input=hs, hidden_size=H, output_shape=(B, T),
    )

    if params.use_batchnorm:
        if mode == "train":
            mu = hs.mean(axis=(0, 1))
            var = hs.var(axis=(0, 1))
            m = params.bn_momentum
            params.running_mean = m * params.running_mean + (1.0 - m) * mu
            params.running_var = m * params.running_var + (1.0 - m) * var
        else:
            mu = params.running_mean
            var = params.running_var
        inv_std = 1.0 / np.sqrt(var + params.bn_eps)
        xhat = (hs - mu) * inv_std
        cache.bn_xhat = xhat
        cache.bn_inv_std = inv_std
        cache.head_input = p["bn_gamma"] * xhat + p["bn_beta"]

    out = cache.head_input @ p["w_out"] + p["b_out"][0]
    return out, cache


def backward(params: ModelParameters, cache: ForwardCache, dL_df) -> dict[str, np.ndarray]:
    """
    Accumulate exact parameter gradients into params.grads and return them.

    dL_df is the gradient of a scalar loss with respect to the (batch, seq) predictions.
    """
    dL_df = np.asarray(dL_df, dtype=np.float64)
    if dL_df.shape != cache.output_shape or cache.hidden_size != params.hidden_size:
        raise StaleCacheError(
            f"gradient of shape {dL_df.shape} does not match cached forward {cache.output_shape}"
        )
    H = params.hidden_size
    p = params.tensors
    g = params.grads
    B, T = cache.output_shape

    g["b_out"] += dL_df.sum()
    g["w_out"] += np.einsum("bt,bth->h", dL_df, cache.head_input)
    d_head_in = dL_df[..., None] * p["w_out"]

    if params.use_batchnorm:
        xhat = cache.bn_xhat
        g["bn_gamma"] += np.einsum("bth,bth->h", d_head_in, xhat)
        g["bn_beta"] += d_head_in.sum(axis=(0, 1))
        dxhat = d_head_in * p["bn_gamma"]
        if cache.mode == "train":
            N = B * T
            dh_all = (cache.bn_inv_std / N) * (
                N * dxhat
                - dxhat.sum(axis=(0, 1))
                - xhat * np.einsum("bth,bth->h", dxhat, xhat)
            )
        else:
            dh_all = dxhat * cache.bn_inv_std
    else:
        dh_all = d_head_in

    dW_x = np.zeros_like(p["W_x"])
    dW_h = np.zeros_like(p["W_h"])
    db = np.zeros_like(p["b"])
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))

    for t in reversed(range(T)):
        i = cache.gates[:, t, :H]
        f = cache.gates[:, t, H:2 * H]
        gg = cache.gates[:, t, 2 * H:3 * H]
        o = cache.gates[:, t, 3 * H:]
        tc = cache.tanh_cells[:, t]

        dh = dh_all[:, t] + dh_next
        do = dh * tc
        dc = dh * o * (1.0 - tc * tc) + dc_next

        da = np.empty((B, 4 * H))
        da[:, :H] = dc * gg * i * (1.0 - i)
        da[:, H:2 * H] = dc * cache.cells[:, t] * f * (1.0 - f)
        da[:, 2 * H:3 * H] = dc * i * (1.0 - gg * gg)
        da[:, 3 * H:] = do * o * (1.0 - o)

        dW_x += cache.X[:, t].T @ da
        dW_h += cache.hiddens[:, t].T @ da
        db += da.sum(axis=0)
        dh_next = da @ p["W_h"].T
        dc_next = dc * f

    g["W_x"] += dW_x
    g["W_h"] += dW_h
    g["b"] += db
    return g


def negate_head(params: ModelParameters) -> ModelParameters:
    """Mirror model: same hidden representation, predictions multiplied by −1."""
    mirrored = params.copy()
    mirrored.tensors["w_out"] *= -1.0
    mirrored.tensors["b_out"] *= -1.0
    return mirrored
