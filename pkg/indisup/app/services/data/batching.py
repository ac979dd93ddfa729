"""
Well-level splitting and minibatch assembly.

Windows are drawn with replacement every iteration, uniformly over all valid
(well, start) pairs. X is standardized with the training moments; the indirect
labels e stay in raw E_dyn units because the projection consumes them directly.
"""

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from indisup.app.core.errors import InsufficientWellsError, NotFittedError, WindowError
from indisup.app.services.data.records import Dataset
from indisup.app.services.physics import DEFAULT_CONSTANTS, PhysicsConstants


@dataclass(frozen=True)
class Batch:
    X: np.ndarray              # (batch, seq, 4) standardized inputs
    e: np.ndarray              # (batch·seq,) raw E_dyn, row-major over (batch, seq)
    well_ids: tuple[str, ...]  # source well of each window
    starts: np.ndarray         # start sample of each window

    @property
    def batch_size(self) -> int:
        return self.X.shape[0]

    @property
    def seq_len(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.e.size


def split_wells(ds: Dataset, train_frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """Random split at well granularity; the train side gets round(train_frac·wells)."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must lie in (0, 1), got {train_frac}")
    n_wells = len(ds)
    n_train = round(train_frac * n_wells)
    if n_train < 1 or n_train > n_wells - 1:
        raise InsufficientWellsError(
            f"cannot split {n_wells} well(s) with train_frac={train_frac} into two non-empty sides"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_wells)
    ids = ds.well_ids
    train_ids = [ids[i] for i in order[:n_train]]
    test_ids = [ids[i] for i in order[n_train:]]
    return ds.subset(train_ids), ds.subset(test_ids)


def make_batches(
    ds: Dataset,
    batch_size: int,
    seq_len: int,
    seed: int,
    k: PhysicsConstants = DEFAULT_CONSTANTS,
) -> Iterator[Batch]:
    """Endless, seeded stream of batches."""
    if ds.standardization is None:
        raise NotFittedError("fit input standardization before assembling batches")
    if batch_size < 1 or seq_len < 1:
        raise ValueError("batch_size and seq_len must be >= 1")
    if seq_len > ds.shortest_well:
        raise WindowError(f"seq_len {seq_len} exceeds the shortest well ({ds.shortest_well} samples)")

    # Flatten all wells once; windows become index arithmetic
    flat_X = np.concatenate([ds.standardized_inputs(w) for w in ds.wells])
    flat_e = np.concatenate([w.dynamic_modulus(k) for w in ds.wells])
    lengths = np.array([len(w) for w in ds.wells])
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    n_windows = lengths - seq_len + 1
    cum_windows = np.cumsum(n_windows)
    total = int(cum_windows[-1])
    ids = ds.well_ids
    steps = np.arange(seq_len)

    rng = np.random.default_rng(seed)
    return _batch_stream(rng, flat_X, flat_e, offsets, cum_windows, total, ids, steps, batch_size)


def _batch_stream(rng, flat_X, flat_e, offsets, cum_windows, total, ids, steps, batch_size) -> Iterator[Batch]:
    while True:
        window = rng.integers(total, size=batch_size)
        well = np.searchsorted(cum_windows, window, side="right")
        start = window - np.where(well > 0, cum_windows[well - 1], 0)
        positions = (offsets[well] + start)[:, None] + steps
        yield Batch(
            X=flat_X[positions],
            e=flat_e[positions].ravel(),
            well_ids=tuple(ids[i] for i in well),
            starts=start,
        )
