"""
Well-log containers.

WellRecord stores one well column-wise (numpy arrays, one per log). Dataset is an
immutable, id-sorted collection of wells plus the input standardization fitted on
training wells. Both compare by value.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from indisup.app.core.errors import DegenerateError, NotFittedError, PhysicsDomainError
from indisup.app.services.physics import (
    DEFAULT_CONSTANTS,
    PhysicsConstants,
    SonicSample,
    dynamic_youngs_modulus,
    validity_mask,
)

# Model input channels, in order
INPUT_CHANNELS = ("depth", "density", "resistivity", "gamma")
LOG_COLUMNS = ("depth", "density", "resistivity", "gamma", "dts", "dtp")


@dataclass(frozen=True, eq=False)
class WellRecord:
    well_id: str
    depth: np.ndarray
    density: np.ndarray
    resistivity: np.ndarray
    gamma: np.ndarray
    dts: np.ndarray
    dtp: np.ndarray

    def __post_init__(self):
        n = None
        for name in LOG_COLUMNS:
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if arr.ndim != 1:
                raise ValueError(f"well {self.well_id}: {name} must be 1-D")
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise ValueError(f"well {self.well_id}: {name} has {arr.size} samples, expected {n}")
        if n == 0:
            raise ValueError(f"well {self.well_id} has no samples")
        if n > 1 and not np.all(np.diff(self.depth) > 0):
            raise ValueError(f"well {self.well_id}: depth must be strictly increasing")
        if not np.all(validity_mask(self.density, self.dts, self.dtp)):
            raise PhysicsDomainError(f"well {self.well_id} contains samples outside the physics validity region")

    def __len__(self) -> int:
        return int(self.depth.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WellRecord):
            return NotImplemented
        return self.well_id == other.well_id and all(
            np.array_equal(getattr(self, c), getattr(other, c)) for c in LOG_COLUMNS
        )

    def inputs(self) -> np.ndarray:
        """Raw model inputs, shape (samples, 4)."""
        return np.column_stack([getattr(self, c) for c in INPUT_CHANNELS])

    def sonic(self) -> SonicSample:
        return SonicSample(rho=self.density, dts=self.dts, dtp=self.dtp)

    def dynamic_modulus(self, k: PhysicsConstants = DEFAULT_CONSTANTS) -> np.ndarray:
        return np.atleast_1d(dynamic_youngs_modulus(self.sonic(), k))


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, raw: np.ndarray) -> np.ndarray:
        return (raw - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Standardization":
        return cls(mean=np.asarray(data["mean"], dtype=np.float64), std=np.asarray(data["std"], dtype=np.float64))


@dataclass(frozen=True)
class RowRejection:
    line: int
    well_id: str
    reason: str


@dataclass(frozen=True, eq=False)
class Dataset:
    wells: tuple[WellRecord, ...]
    standardization: Standardization | None = None
    rejections: tuple[RowRejection, ...] = field(default=())

    def __post_init__(self):
        ordered = tuple(sorted(self.wells, key=lambda w: w.well_id))
        ids = [w.well_id for w in ordered]
        if len(set(ids)) != len(ids):
            raise ValueError("well ids must be unique")
        object.__setattr__(self, "wells", ordered)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.wells == other.wells

    def __len__(self) -> int:
        return len(self.wells)

    @property
    def well_ids(self) -> list[str]:
        return [w.well_id for w in self.wells]

    @property
    def total_samples(self) -> int:
        return sum(len(w) for w in self.wells)

    @property
    def shortest_well(self) -> int:
        return min(len(w) for w in self.wells)

    def well(self, well_id: str) -> WellRecord:
        for w in self.wells:
            if w.well_id == well_id:
                return w
        raise KeyError(well_id)

    def subset(self, well_ids) -> "Dataset":
        wanted = set(well_ids)
        return Dataset(wells=tuple(w for w in self.wells if w.well_id in wanted))

    def fit_standardization(self) -> "Dataset":
        """Fit per-channel mean/std (population) on these wells' raw inputs."""
        raw = np.concatenate([w.inputs() for w in self.wells])
        mean = raw.mean(axis=0)
        std = raw.std(axis=0)
        if np.any(std <= 0):
            constant = [c for c, s in zip(INPUT_CHANNELS, std) if s <= 0]
            raise DegenerateError(f"constant input channel(s): {constant}")
        return replace(self, standardization=Standardization(mean=mean, std=std))

    def with_standardization(self, standardization: Standardization) -> "Dataset":
        return replace(self, standardization=standardization)

    def standardized_inputs(self, well: WellRecord) -> np.ndarray:
        if self.standardization is None:
            raise NotFittedError("input standardization has not been fitted")
        return self.standardization.apply(well.inputs())
