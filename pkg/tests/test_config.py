"""
Unit tests for settings loading and the training configuration.
"""

import json

import pytest
from pydantic import ValidationError

from indisup.app.core.config import Settings, load_settings, read_config_file
from indisup.app.services.physics import DEFAULT_CONSTANTS
from indisup.app.services.training import TrainConfig, derive_seeds


# ─── Settings ─────────────────────────────────────────────────────────────────

class TestSettings:

    @pytest.mark.unit
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("INDIRECT_PHYS_SEED", raising=False)
        s = load_settings()
        assert s.seed == 0
        assert s.wells == 39
        assert s.samples == 2000
        assert s.train_frac == 0.7

    @pytest.mark.unit
    def test_environment_seed(self, monkeypatch):
        monkeypatch.setenv("INDIRECT_PHYS_SEED", "17")
        assert load_settings().seed == 17

    @pytest.mark.unit
    def test_file_beats_environment_and_override_beats_file(self, monkeypatch, tmp_path):
        monkeypatch.setenv("INDIRECT_PHYS_SEED", "17")
        monkeypatch.setenv("INDIRECT_PHYS_HIDDEN_SIZE", "8")
        path = tmp_path / "c.toml"
        path.write_text("seed = 4\nbatch_size = 64\n", encoding="utf-8")

        s = load_settings(path)
        assert (s.seed, s.batch_size, s.hidden_size) == (4, 64, 8)

        s = load_settings(path, seed=99, batch_size=None)
        assert (s.seed, s.batch_size) == (99, 64)

    @pytest.mark.unit
    def test_json_config_with_settings_table(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"settings": {"seq_len": 50, "log_level": "DEBUG"}}), encoding="utf-8")
        assert read_config_file(path) == {"seq_len": 50, "log_level": "DEBUG"}
        assert load_settings(path).seq_len == 50

    @pytest.mark.unit
    def test_json_logs_outside_development(self):
        assert not Settings(env="development").json_logs
        assert Settings(env="production").json_logs

    @pytest.mark.unit
    def test_missing_config_file(self, tmp_path):
        with pytest.raises(OSError):
            load_settings(tmp_path / "nope.toml")


# ─── Training configuration ───────────────────────────────────────────────────

class TestTrainConfig:

    @pytest.mark.unit
    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.batch_size, cfg.seq_len) == (128, 150)
        assert cfg.samples_per_batch == 19_200
        assert cfg.use_batchnorm and cfg.covariance_fix_enabled and cfg.normalize_projection
        assert cfg.physics == DEFAULT_CONSTANTS

    @pytest.mark.unit
    @pytest.mark.parametrize("bad", [
        {"batch_size": 0},
        {"seq_len": 0},
        {"learning_rate": 0.0},
        {"train_frac": 1.0},
        {"supervision": "direct"},
        {"unknown_option": 1},
    ])
    def test_rejects_invalid_values(self, bad):
        with pytest.raises(ValidationError):
            TrainConfig(**bad)

    @pytest.mark.unit
    def test_projection_needs_three_samples_per_batch(self):
        with pytest.raises(ValidationError):
            TrainConfig(batch_size=1, seq_len=2)
        assert TrainConfig(batch_size=1, seq_len=3).samples_per_batch == 3

    @pytest.mark.unit
    def test_with_updates_validates(self):
        cfg = TrainConfig()
        assert cfg.with_updates(seq_len=50).seq_len == 50
        assert cfg.seq_len == 150
        with pytest.raises(ValidationError):
            cfg.with_updates(seq_len=-1)

    @pytest.mark.unit
    def test_frozen(self):
        with pytest.raises(ValidationError):
            TrainConfig().seed = 3

    @pytest.mark.unit
    def test_from_settings(self):
        s = Settings(seed=5, hidden_size=12, a_ucs=3.0, learning_rate=2e-3)
        cfg = TrainConfig.from_settings(s, use_batchnorm=False, normalize_projection=None)
        assert (cfg.seed, cfg.hidden_size, cfg.learning_rate) == (5, 12, 2e-3)
        assert cfg.physics.a_ucs == 3.0
        assert cfg.use_batchnorm is False
        assert cfg.normalize_projection is True

    @pytest.mark.unit
    def test_from_settings_carries_projection_numerics(self, monkeypatch):
        monkeypatch.setenv("INDIRECT_PHYS_COLLINEARITY_RTOL", "1e-6")
        s = load_settings(ridge_scale=1e-4, normalize_eps=1e-9)
        cfg = TrainConfig.from_settings(s)
        assert (cfg.collinearity_rtol, cfg.ridge_scale, cfg.normalize_eps) == (1e-6, 1e-4, 1e-9)
        assert cfg.loss_config.normalize_eps == 1e-9

    @pytest.mark.unit
    def test_loss_config_mirrors_flags(self):
        loss_cfg = TrainConfig(normalize_projection=False, detach_projection_branch=True).loss_config
        assert not loss_cfg.normalize_projection
        assert loss_cfg.detach_projection_branch

    @pytest.mark.unit
    def test_json_round_trip(self):
        cfg = TrainConfig(seed=4, use_batchnorm=False)
        assert TrainConfig.model_validate(cfg.model_dump(mode="json")) == cfg


class TestDeriveSeeds:

    @pytest.mark.unit
    def test_deterministic_and_distinct(self):
        assert derive_seeds(3) == derive_seeds(3)
        init_seed, batch_seed = derive_seeds(3)
        assert init_seed != batch_seed
        assert derive_seeds(3) != derive_seeds(4)
