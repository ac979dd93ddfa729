"""
Repeated experiments, hyperparameter sweeps and the prediction-descent probe.

- run_single      → split, train, evaluate one seeded run; failures are captured
- run_repeated    → k runs with seeds seed+0..k−1, optionally in worker processes
- run_sweep       → one repeated experiment per grid point
- prediction_descent → gradient descent on a free prediction vector (no model),
                    used to show what projection normalization prevents

Runs never share state: every run owns its split, model and batch stream, so
results do not depend on the number of worker processes.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
import structlog
from pydantic import ValidationError

from indisup.app.core.config import Settings
from indisup.app.core.observability import configure_logging
from indisup.app.services.data import Dataset, Standardization, split_wells
from indisup.app.services.loss import LossConfig, indirect_loss
from indisup.app.services.model import ModelParameters
from indisup.app.services.physics import DEFAULT_CONSTANTS, PhysicsConstants
from indisup.app.services.projection import MIN_ROWS, build_projection
from indisup.app.services.signfix import UcsMoments, training_ucs_moments
from indisup.app.services.training.config import TrainConfig
from indisup.app.services.training.evaluation import RunReport, evaluate
from indisup.app.services.training.trainer import train

log = structlog.get_logger(__name__)


# ─── Single run ───────────────────────────────────────────────────────────────

@dataclass
class RunArtifacts:
    params: ModelParameters
    standardization: Standardization
    ucs_moments: UcsMoments


@dataclass
class RunOutcome:
    run: int
    seed: int
    report: RunReport | None = None
    error: str | None = None
    artifacts: RunArtifacts | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.report is not None


def run_single(cfg: TrainConfig, dataset: Dataset, run: int = 0, keep_artifacts: bool = False) -> RunOutcome:
    """One split/train/evaluate cycle seeded by cfg.seed. Never raises on run failure."""
    with structlog.contextvars.bound_contextvars(run=run, seed=cfg.seed):
        started = time.perf_counter()
        try:
            train_ds, test_ds = split_wells(dataset, cfg.train_frac, cfg.seed)
            train_ds = train_ds.fit_standardization()
            result = train(cfg, train_ds)
            test_ds = test_ds.with_standardization(result.standardization)
            moments = training_ucs_moments(train_ds.wells, cfg.physics)
            report = evaluate(result.params, test_ds, moments, cfg, result.loss_history)
        except Exception as exc:
            log.exception("run_failed", error=str(exc))
            return RunOutcome(run=run, seed=cfg.seed, error=f"{type(exc).__name__}: {exc}")

        report.wall_time = time.perf_counter() - started
        log.info("run_complete", wall_time=round(report.wall_time, 3), pearson_r=report.pearson_r)
        artifacts = (
            RunArtifacts(result.params, result.standardization, moments) if keep_artifacts else None
        )
        return RunOutcome(run=run, seed=cfg.seed, report=report, artifacts=artifacts)


def _run_job(job: tuple[TrainConfig, Dataset, int, bool]) -> RunOutcome:
    cfg, dataset, run, keep = job
    return run_single(cfg, dataset, run, keep)


# ─── Repeated runs ────────────────────────────────────────────────────────────

def _mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size >= 2 else 0.0
    return float(arr.mean()), std


@dataclass
class RepeatedSummary:
    outcomes: list[RunOutcome]

    @property
    def k(self) -> int:
        return len(self.outcomes)

    @property
    def reports(self) -> list[RunReport]:
        return [o.report for o in self.outcomes if o.report is not None]

    @property
    def failures(self) -> list[RunOutcome]:
        return [o for o in self.outcomes if not o.ok]

    @property
    def mse_normalized(self) -> tuple[float, float]:
        return _mean_std([r.test_mse_normalized for r in self.reports])

    @property
    def mse_physical(self) -> tuple[float, float]:
        return _mean_std([r.test_mse_physical for r in self.reports])

    @property
    def pearson_mean(self) -> float:
        return _mean_std([r.pearson_r for r in self.reports])[0]

    @property
    def resolved_sign_counts(self) -> dict[int, int]:
        signs = [r.resolved_sign for r in self.reports]
        return {1: signs.count(1), -1: signs.count(-1)}

    @property
    def orientation_counts(self) -> dict[int, int]:
        """How many completed runs ended aligned (+1) vs mirrored (−1) against ground truth."""
        orient = [r.orientation for r in self.reports]
        return {1: orient.count(1), -1: orient.count(-1)}

    @property
    def confident_count(self) -> int:
        return sum(1 for r in self.reports if r.confident)


def run_repeated(
    cfg: TrainConfig,
    dataset: Dataset,
    k: int,
    jobs: int = 1,
    keep_artifacts: bool = False,
    log_settings: Settings | None = None,
) -> RepeatedSummary:
    if k < 1:
        raise ValueError(f"repetition count must be >= 1, got {k}")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")

    work = [(cfg.with_updates(seed=cfg.seed + i), dataset, i, keep_artifacts) for i in range(k)]
    log.info("repeated_started", k=k, jobs=jobs, base_seed=cfg.seed)

    if jobs == 1 or k == 1:
        outcomes = [_run_job(job) for job in work]
    else:
        with ProcessPoolExecutor(
            max_workers=min(jobs, k),
            initializer=configure_logging,
            initargs=(log_settings,),
        ) as pool:
            outcomes = list(pool.map(_run_job, work))

    summary = RepeatedSummary(outcomes=outcomes)
    mse_mean, mse_std = summary.mse_normalized
    log.info(
        "repeated_complete",
        k=k,
        failures=len(summary.failures),
        mse_mean=mse_mean,
        mse_std=mse_std,
        orientation=summary.orientation_counts,
    )
    return summary


# ─── Sweeps ───────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SweepRow:
    param_name: str
    param_value: Any
    mse_mean: float
    mse_std: float
    k: int
    failures: int


def run_sweep(
    cfg: TrainConfig,
    dataset: Dataset,
    grids: dict[str, Iterable[Any]],
    k: int,
    jobs: int = 1,
    log_settings: Settings | None = None,
) -> list[SweepRow]:
    """Vary one parameter at a time around cfg; grid order is preserved in the rows."""
    grids = {name: list(values) for name, values in grids.items()}
    if not any(grids.values()):
        raise ValueError("sweep needs at least one non-empty grid")

    rows: list[SweepRow] = []
    for name, values in grids.items():
        for value in values:
            log.info("sweep_point", param=name, value=value)
            try:
                point_cfg = cfg.with_updates(**{name: value})
            except ValidationError as exc:
                log.error("sweep_point_invalid", param=name, value=value, error=str(exc))
                rows.append(SweepRow(name, value, float("nan"), float("nan"), k, k))
                continue
            summary = run_repeated(point_cfg, dataset, k, jobs=jobs, log_settings=log_settings)
            mean, std = summary.mse_normalized
            rows.append(SweepRow(name, value, mean, std, k, len(summary.failures)))
    return rows


# ─── Prediction descent ───────────────────────────────────────────────────────

def prediction_descent(
    dataset: Dataset,
    normalize_projection: bool,
    iterations: int = 300,
    chunk_size: int = 19_200,
    step: float = 0.25,
    seed: int = 0,
    k: PhysicsConstants = DEFAULT_CONSTANTS,
) -> np.ndarray:
    """
    Optimize the indirect loss over a free prediction per sample.

    Starts from unit-std noise over every sample of the dataset. Each iteration
    shuffles the samples into chunks of about chunk_size and takes one gradient
    step per chunk, so every sample moves every iteration. Returns the population
    std of the predictions after each iteration (entry 0 is the start).
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    e = np.concatenate([w.dynamic_modulus(k) for w in dataset.wells])
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(e.size)
    f = (f - f.mean()) / f.std()
    n_chunks = max(1, e.size // max(chunk_size, MIN_ROWS))

    loss_cfg = LossConfig(normalize_projection=normalize_projection)
    stds = np.empty(iterations + 1)
    stds[0] = f.std()
    for it in range(iterations):
        for idx in np.array_split(rng.permutation(e.size), n_chunks):
            lv = indirect_loss(build_projection(e[idx]), f[idx], loss_cfg)
            f[idx] -= step * lv.grad
        stds[it + 1] = f.std()
    log.info("prediction_descent_complete", normalize=normalize_projection, final_std=float(stds[-1]))
    return stds
