from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from indisup.app.core.config import Settings
from indisup.app.services.training import TrainConfig

Command = Literal["generate", "train", "sweep", "symmetry", "evaluate"]

# Grid values used when `sweep` is given no explicit grid
DEFAULT_GRIDS: dict[str, list[Any]] = {
    "batch_size": [32, 64, 128],
    "seq_len": [1, 20, 50, 100, 150, 200],
    "use_batchnorm": [True, False],
}


class ExperimentSpec(BaseModel):
    """One fully resolved command invocation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    out: Path
    data: Path | None = None
    checkpoint: Path | None = None
    train: TrainConfig = Field(default_factory=TrainConfig)
    repeats: int = Field(default=1, ge=1)
    jobs: int = Field(default=1, ge=1)
    grids: dict[str, list[Any]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_command_inputs(self) -> "ExperimentSpec":
        if self.command != "generate" and self.data is None:
            raise ValueError(f"{self.command} needs --data")
        if self.command == "evaluate" and self.checkpoint is None:
            raise ValueError("evaluate needs --checkpoint")
        if self.command == "sweep" and not any(self.grids.values()):
            raise ValueError("sweep grids must not be empty")
        if self.command != "generate" and self.out.exists() and not self.out.is_dir():
            raise ValueError(f"output path {self.out} exists and is not a directory")
        return self

    def provenance(self, settings: Settings) -> dict[str, Any]:
        """The merged configuration echoed into every output directory."""
        return {
            **self.model_dump(mode="json"),
            "settings": settings.model_dump(mode="json"),
        }
