"""
Unit tests for the LSTM → batch norm → dense head model.

Forward outputs are checked against the scalar-loop oracle; gradients of
(model ∘ indirect loss) against central differences over every tensor.
"""

import numpy as np
import pytest

from indisup.app.core.errors import ShapeMismatchError, StaleCacheError
from indisup.app.services.loss import LossConfig, indirect_loss
from indisup.app.services.model import backward, forward, init_parameters, negate_head
from indisup.app.services.projection import build_projection
from tests.oracle import numeric_grad, reference_lstm_forward


def _randomize(params, rng, scale=0.5):
    for name, t in params.tensors.items():
        t[...] = rng.uniform(-scale, scale, size=t.shape)
    return params


def _relative_error(analytic, numeric):
    scale = max(1.0, float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))))
    return float(np.max(np.abs(analytic - numeric))) / scale


# ─── Forward ──────────────────────────────────────────────────────────────────

class TestForward:

    @pytest.mark.unit
    @pytest.mark.parametrize("use_bn", [False, True], ids=["plain", "batchnorm"])
    def test_matches_scalar_oracle(self, rng, use_bn):
        for _ in range(100):
            B, T, H = int(rng.integers(1, 5)), int(rng.integers(1, 9)), int(rng.integers(1, 9))
            if use_bn and B * T < 2:
                T = 2
            params = _randomize(init_parameters(0, H, use_batchnorm=use_bn), rng)
            X = rng.standard_normal((B, T, 4))
            out, _ = forward(params, X, mode="train")
            expected = np.array(reference_lstm_forward(params.tensors, X, use_batchnorm=use_bn))
            np.testing.assert_allclose(out, expected, rtol=0, atol=1e-10)

    @pytest.mark.unit
    @pytest.mark.parametrize("use_bn", [False, True], ids=["plain", "batchnorm"])
    def test_zero_parameters_give_zero_output(self, rng, use_bn):
        params = init_parameters(0, 5, use_batchnorm=use_bn)
        for t in params.tensors.values():
            t.fill(0.0)
        out, _ = forward(params, rng.standard_normal((3, 7, 4)), mode="train")
        np.testing.assert_array_equal(out, np.zeros((3, 7)))

    @pytest.mark.unit
    def test_batch_permutation_without_batchnorm(self, rng):
        params = init_parameters(1, 6, use_batchnorm=False)
        X = rng.standard_normal((4, 8, 4))
        perm = np.array([2, 0, 3, 1])
        out, _ = forward(params, X)
        out_perm, _ = forward(params, X[perm])
        np.testing.assert_array_equal(out_perm, out[perm])

    @pytest.mark.unit
    def test_single_step_sequence(self, rng):
        params = init_parameters(2, 3, use_batchnorm=False)
        X = rng.standard_normal((2, 1, 4))
        out, _ = forward(params, X)
        assert out.shape == (2, 1)
        np.testing.assert_allclose(out, reference_lstm_forward(params.tensors, X), atol=1e-12)

    @pytest.mark.unit
    def test_bad_input_shape(self):
        params = init_parameters(0, 3)
        with pytest.raises(ShapeMismatchError):
            forward(params, np.zeros((2, 5, 3)))
        with pytest.raises(ShapeMismatchError):
            forward(params, np.zeros((5, 4)))

    @pytest.mark.unit
    def test_negated_head_negates_predictions(self, rng):
        params = init_parameters(4, 6, use_batchnorm=True)
        X = rng.standard_normal((3, 10, 4))
        out, _ = forward(params.copy(), X, mode="train")
        mirrored, _ = forward(negate_head(params), X, mode="train")
        np.testing.assert_array_equal(mirrored, -out)


# ─── Batch normalization ──────────────────────────────────────────────────────

class TestBatchNorm:

    @pytest.mark.unit
    def test_train_mode_standardizes_hidden_features(self, rng):
        params = init_parameters(0, 8, use_batchnorm=True)
        params.tensors["W_x"] *= 6.0
        X = rng.standard_normal((16, 20, 4)) * 2.0
        _, cache = forward(params, X, mode="train")
        xhat = cache.bn_xhat.reshape(-1, 8)
        np.testing.assert_allclose(xhat.mean(axis=0), 0.0, atol=1e-10)
        np.testing.assert_allclose(xhat.var(axis=0), 1.0, atol=1e-6)

    @pytest.mark.unit
    def test_running_statistics_update(self, rng):
        params = init_parameters(0, 4, use_batchnorm=True)
        X = rng.standard_normal((5, 6, 4))
        _, cache = forward(params, X, mode="train")
        hs = cache.hiddens[:, 1:].reshape(-1, 4)
        np.testing.assert_allclose(params.running_mean, 0.1 * hs.mean(axis=0), atol=1e-14)
        np.testing.assert_allclose(params.running_var, 0.9 + 0.1 * hs.var(axis=0), atol=1e-14)

    @pytest.mark.unit
    def test_eval_mode_leaves_running_statistics(self, rng):
        params = init_parameters(0, 4, use_batchnorm=True)
        forward(params, rng.standard_normal((5, 6, 4)), mode="eval")
        np.testing.assert_array_equal(params.running_mean, np.zeros(4))
        np.testing.assert_array_equal(params.running_var, np.ones(4))

    @pytest.mark.unit
    def test_eval_outputs_independent_of_batch(self, rng):
        params = init_parameters(0, 4, use_batchnorm=True)
        for _ in range(3):
            forward(params, rng.standard_normal((8, 10, 4)), mode="train")
        X = rng.standard_normal((6, 10, 4))
        full, _ = forward(params, X, mode="eval")
        single, _ = forward(params, X[2:3], mode="eval")
        np.testing.assert_allclose(single[0], full[2], atol=1e-12)


# ─── Backward ─────────────────────────────────────────────────────────────────

class TestBackward:

    @pytest.mark.unit
    @pytest.mark.parametrize("use_bn", [False, True], ids=["plain", "batchnorm"])
    @pytest.mark.parametrize("normalized", [False, True], ids=["plain_loss", "normalized_loss"])
    def test_every_tensor_matches_finite_differences(self, rng, use_bn, normalized):
        B, T, H = 2, 3, 3
        params = _randomize(init_parameters(0, H, use_batchnorm=use_bn), rng)
        X = rng.standard_normal((B, T, 4))
        op = build_projection(rng.uniform(5.0, 30.0, size=B * T))
        cfg = LossConfig(normalize_projection=normalized)

        out, cache = forward(params, X, mode="train")
        lv = indirect_loss(op, out.ravel(), cfg)
        params.zero_grad()
        analytic = {k: v.copy() for k, v in backward(params, cache, lv.grad.reshape(B, T)).items()}

        for name in params.trainable_names():
            def loss_at(value, name=name):
                probe = params.copy()
                probe.tensors[name] = value
                f, _ = forward(probe, X, mode="train")
                return indirect_loss(op, f.ravel(), cfg).value

            numeric = numeric_grad(loss_at, params.tensors[name], h=1e-5)
            assert _relative_error(analytic[name], numeric) <= 1e-4, name

    @pytest.mark.unit
    def test_eval_mode_batchnorm_gradient(self, rng):
        params = _randomize(init_parameters(0, 3, use_batchnorm=True), rng)
        params.running_mean = rng.uniform(-0.2, 0.2, 3)
        params.running_var = rng.uniform(0.5, 1.5, 3)
        X = rng.standard_normal((2, 4, 4))
        w = rng.standard_normal((2, 4))

        out, cache = forward(params, X, mode="eval")
        params.zero_grad()
        grads = backward(params, cache, w)
        for name in params.trainable_names():
            def objective(value, name=name):
                probe = params.copy()
                probe.tensors[name] = value
                f, _ = forward(probe, X, mode="eval")
                return float(np.sum(w * f))

            numeric = numeric_grad(objective, params.tensors[name], h=1e-5)
            assert _relative_error(grads[name], numeric) <= 1e-6, name

    @pytest.mark.unit
    def test_stale_cache_rejected(self, rng):
        params = init_parameters(0, 3)
        _, cache = forward(params, rng.standard_normal((2, 3, 4)))
        with pytest.raises(StaleCacheError):
            backward(params, cache, np.ones((2, 4)))

    @pytest.mark.unit
    def test_gradients_accumulate_until_cleared(self, rng):
        params = init_parameters(0, 3, use_batchnorm=False)
        X = rng.standard_normal((2, 3, 4))
        _, cache = forward(params, X)
        once = backward(params, cache, np.ones((2, 3)))["w_out"].copy()
        twice = backward(params, cache, np.ones((2, 3)))["w_out"]
        np.testing.assert_allclose(twice, 2 * once)
        params.zero_grad()
        assert not np.any(params.grads["w_out"])


# ─── Initialization ───────────────────────────────────────────────────────────

class TestInit:

    @pytest.mark.unit
    def test_same_seed_same_parameters(self):
        a, b = init_parameters(7, 16), init_parameters(7, 16)
        for name in a.tensors:
            np.testing.assert_array_equal(a.tensors[name], b.tensors[name])

    @pytest.mark.unit
    def test_bounds_and_biases(self):
        H = 16
        p = init_parameters(3, H)
        assert np.max(np.abs(p.tensors["W_x"])) <= 1.0 / np.sqrt(4 + H)
        assert np.max(np.abs(p.tensors["W_h"])) <= 1.0 / np.sqrt(4 + H)
        assert np.max(np.abs(p.tensors["w_out"])) <= 1.0 / np.sqrt(H)
        np.testing.assert_array_equal(p.tensors["b"][H:2 * H], np.ones(H))
        assert not np.any(p.tensors["b"][:H])
        np.testing.assert_array_equal(p.tensors["bn_gamma"], np.ones(H))

    @pytest.mark.unit
    def test_batchnorm_tensors_only_when_enabled(self):
        assert "bn_gamma" not in init_parameters(0, 4, use_batchnorm=False).tensors
        assert "bn_gamma" in init_parameters(0, 4, use_batchnorm=True).tensors

    @pytest.mark.unit
    def test_invalid_hidden_size(self):
        with pytest.raises(ValueError):
            init_parameters(0, 0)
