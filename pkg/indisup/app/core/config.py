import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="INDIRECT_PHYS_",
        env_file=".env",
        extra="ignore",
    )

    # App
    env: str = "development"
    log_level: str = "INFO"
    seed: int = 0
    jobs: int = 1

    # Rock physics (E_dyn -> E_stat -> UCS)
    c: float = 1.0
    a_stat: float = 0.414
    b_stat: float = -1.05
    a_ucs: float = 4.1089
    b_ucs: float = 2.28

    # Projection / loss numerics
    collinearity_rtol: float = 1e-12
    ridge_scale: float = 1e-8
    normalize_eps: float = 1e-12
    confidence_threshold: float = 0.05

    # Model + optimizer
    hidden_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    iterations: int = 2000
    bn_momentum: float = 0.9
    bn_eps: float = 1e-8

    # Data
    wells: int = 39
    samples: int = 2000
    train_frac: float = 0.7
    batch_size: int = 128
    seq_len: int = 150

    @property
    def json_logs(self) -> bool:
        return self.env != "development"


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Read a TOML or JSON config file into a flat dict of settings overrides."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix == ".json":
        data = json.loads(raw.decode("utf-8"))
    else:
        data = tomllib.loads(raw.decode("utf-8"))
    # Allow a [settings] table or top-level keys
    if isinstance(data.get("settings"), dict):
        data = data["settings"]
    return data


def load_settings(config_file: str | Path | None = None, **overrides: Any) -> Settings:
    """
    Build the effective settings.

    Precedence: explicit overrides > config file > INDIRECT_PHYS_* environment > defaults.
    Init kwargs outrank the environment in pydantic-settings, so the file is passed as kwargs.
    """
    values: dict[str, Any] = {}
    if config_file is not None:
        values.update(read_config_file(config_file))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)


settings = Settings()
