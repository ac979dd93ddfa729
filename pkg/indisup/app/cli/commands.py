"""
Command interface, registry, and dispatcher.

Commands are the reproducible entry points of the toolkit:
- generate  → write a synthetic well-log field to the tabular format
- train     → split, train, evaluate (one run, or --repeats k)
- symmetry  → train with the covariance fix off, 50 repeats by default
- sweep     → repeated runs per hyperparameter grid point
- evaluate  → re-score a saved checkpoint on a dataset's test split

Commands are registered in COMMAND_REGISTRY; main() builds one argparse
subcommand per entry. A command returns its exit status: 0 when every requested
run completed, 1 when any run failed, 2 for usage errors.
"""

import argparse
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import structlog
from pydantic import ValidationError

from indisup.app.core.config import Settings, load_settings, read_config_file
from indisup.app.core.errors import UsageError
from indisup.app.cli.experiment import DEFAULT_GRIDS, ExperimentSpec
from indisup.app.services.data import (
    Dataset,
    Standardization,
    generate_synthetic_field,
    load_table,
    split_wells,
    write_table,
)
from indisup.app.services.data.synthetic import MIN_SAMPLES, MIN_WELLS
from indisup.app.services.model import load_checkpoint, save_checkpoint
from indisup.app.services.signfix import UcsMoments
from indisup.app.services.training import (
    RunOutcome,
    TrainConfig,
    evaluate,
    run_repeated,
    run_single,
    run_sweep,
)
from indisup.app.services.training.reports import (
    write_effective_config,
    write_repeated,
    write_run_report,
    write_sweep,
)

log = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

CHECKPOINT_NAME = "model.npz"


# ─── Flag parsing ─────────────────────────────────────────────────────────────

def on_off(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered == "on":
        return True
    if lowered == "off":
        return False
    raise argparse.ArgumentTypeError(f"expected on|off, got {value!r}")


def int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None


def on_off_list(value: str) -> list[bool]:
    return [on_off(v) for v in value.split(",") if v.strip()]


# Flag dest → Settings field
SETTINGS_FLAGS = {
    "seed": "seed",
    "jobs": "jobs",
    "log_level": "log_level",
    "wells": "wells",
    "samples": "samples",
    "batch_size": "batch_size",
    "seq_len": "seq_len",
    "hidden": "hidden_size",
    "lr": "learning_rate",
    "iters": "iterations",
    "train_frac": "train_frac",
}

# Flag dest → TrainConfig field without a Settings counterpart
TRAIN_FLAGS = {
    "batchnorm": "use_batchnorm",
    "covariance_fix": "covariance_fix_enabled",
    "normalize_projection": "normalize_projection",
    "detach_projection": "detach_projection_branch",
    "ridge": "ridge_fallback",
    "supervision": "supervision",
}


def add_common_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="TOML or JSON settings file")
    p.add_argument("--seed", type=int, default=None, help="Base seed (default: INDIRECT_PHYS_SEED or 0)")
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    p.add_argument("--jobs", type=int, default=None, help="Worker processes for repeated runs")


def add_training_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", type=Path, required=True, help="Log table (CSV)")
    p.add_argument("--out", type=Path, required=True, help="Output directory")
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--seq-len", type=int, default=None)
    p.add_argument("--batchnorm", type=on_off, default=None, metavar="on|off")
    p.add_argument("--hidden", type=int, default=None, help="LSTM hidden size")
    p.add_argument("--lr", type=float, default=None, help="Adam learning rate")
    p.add_argument("--iters", type=int, default=None, help="Training iterations")
    p.add_argument("--train-frac", type=float, default=None, help="Share of wells used for training")
    p.add_argument("--covariance-fix", type=on_off, default=None, metavar="on|off")
    p.add_argument("--normalize-projection", type=on_off, default=None, metavar="on|off")
    p.add_argument("--detach-projection", type=on_off, default=None, metavar="on|off")
    p.add_argument("--ridge", type=on_off, default=None, metavar="on|off")
    p.add_argument("--supervision", choices=["indirect", "naive"], default=None)


def settings_from_args(args: argparse.Namespace) -> Settings:
    overrides = {field: getattr(args, dest, None) for dest, field in SETTINGS_FLAGS.items()}
    return load_settings(getattr(args, "config", None), **overrides)


def train_config_from_args(args: argparse.Namespace, settings: Settings) -> TrainConfig:
    """Settings-backed defaults, then config-file training keys, then flags."""
    overrides: dict[str, Any] = {}
    if getattr(args, "config", None) is not None:
        file_values = read_config_file(args.config)
        overrides.update({k: v for k, v in file_values.items() if k in TrainConfig.model_fields
                          and k not in Settings.model_fields})
    for dest, field in TRAIN_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[field] = value
    return TrainConfig.from_settings(settings, **overrides)


# ─── Registry ─────────────────────────────────────────────────────────────────

CommandFunc = Callable[[argparse.Namespace, Settings], int]


@dataclass(frozen=True)
class CommandSpec:
    name: str
    help: str
    configure: Callable[[argparse.ArgumentParser], None]
    func: CommandFunc


COMMAND_REGISTRY: dict[str, CommandSpec] = {}


def register_command(
    name: str,
    help: str,
    configure: Callable[[argparse.ArgumentParser], None],
    func: CommandFunc,
) -> None:
    COMMAND_REGISTRY[name] = CommandSpec(name=name, help=help, configure=configure, func=func)


def execute_command(name: str, args: argparse.Namespace, settings: Settings) -> int:
    spec = COMMAND_REGISTRY.get(name)
    if not spec:
        log.error("unknown_command", name=name)
        return EXIT_USAGE
    try:
        return spec.func(args, settings)
    except (UsageError, ValidationError) as exc:
        log.error("usage_error", command=name, error=str(exc))
        return EXIT_USAGE
    except OSError as exc:
        log.error("filesystem_error", command=name, path=getattr(exc, "filename", None), error=str(exc))
        return EXIT_FAILED
    except Exception as exc:
        log.exception("command_failed", command=name, error=str(exc))
        return EXIT_FAILED


# ─── Helpers ──────────────────────────────────────────────────────────────────

def _load_dataset(path: Path) -> Dataset:
    if not path.exists():
        raise UsageError(f"data file not found: {path}")
    ds = load_table(path)
    if ds.rejections:
        print(f"rejected {len(ds.rejections)} row(s) from {path}")
    return ds


def _write_outcome(outcome: RunOutcome, cfg: TrainConfig, out_dir: Path) -> None:
    write_run_report(outcome.report, out_dir, extra={"samples_per_batch": cfg.samples_per_batch})
    art = outcome.artifacts
    meta = {
        "train_config": cfg.model_dump(mode="json"),
        "standardization": art.standardization.to_dict(),
        "ucs_moments": {"mean": art.ucs_moments.mean, "std": art.ucs_moments.std},
    }
    save_checkpoint(out_dir / CHECKPOINT_NAME, art.params, meta)


def _report_failures(outcomes: list[RunOutcome]) -> int:
    failed = [o for o in outcomes if not o.ok]
    for o in failed:
        log.error("run_failed", run=o.run, seed=o.seed, error=o.error)
    return EXIT_FAILED if failed else EXIT_OK


# ─── Commands ─────────────────────────────────────────────────────────────────

def _configure_generate(p: argparse.ArgumentParser) -> None:
    p.add_argument("--wells", type=int, default=None, help="Number of wells")
    p.add_argument("--samples", type=int, default=None, help="Samples per well")
    p.add_argument("--out", type=Path, required=True, help="Output CSV path")


def cmd_generate(args: argparse.Namespace, settings: Settings) -> int:
    if settings.wells < MIN_WELLS:
        raise UsageError(f"--wells must be >= {MIN_WELLS} (a single well cannot be split), got {settings.wells}")
    if settings.samples < MIN_SAMPLES:
        raise UsageError(f"--samples must be >= {MIN_SAMPLES}, got {settings.samples}")

    ds = generate_synthetic_field(settings.seed, settings.wells, settings.samples)
    path = write_table(ds, args.out)
    reloaded = load_table(path)
    print(
        f"wrote {path}: wells={len(reloaded)} samples={reloaded.total_samples} "
        f"rejected={len(reloaded.rejections)}"
    )
    return EXIT_OK


def _configure_train(p: argparse.ArgumentParser) -> None:
    add_training_arguments(p)
    p.add_argument("--repeats", type=int, default=None, help="Independent runs with seeds seed+0..k-1")


def _train(args: argparse.Namespace, settings: Settings, symmetry: bool) -> int:
    cfg = train_config_from_args(args, settings)
    if symmetry:
        cfg = cfg.with_updates(covariance_fix_enabled=False)
    default_repeats = 50 if symmetry else 1
    spec = ExperimentSpec(
        command="symmetry" if symmetry else "train",
        data=args.data,
        out=args.out,
        train=cfg,
        repeats=args.repeats if args.repeats is not None else default_repeats,
        jobs=settings.jobs,
    )
    dataset = _load_dataset(spec.data)
    write_effective_config(spec.provenance(settings), spec.out)

    if spec.repeats == 1:
        outcome = run_single(cfg, dataset, keep_artifacts=True)
        if not outcome.ok:
            return _report_failures([outcome])
        _write_outcome(outcome, cfg, spec.out)
        r = outcome.report
        print(
            f"n={cfg.samples_per_batch} mse_normalized={r.test_mse_normalized:.6g} "
            f"mse_physical={r.test_mse_physical:.6g} pearson_r={r.pearson_r:.4f} "
            f"resolved_sign={r.resolved_sign:+d} confident={r.confident}"
        )
        return EXIT_OK

    summary = run_repeated(
        cfg, dataset, spec.repeats, jobs=spec.jobs, keep_artifacts=True, log_settings=settings
    )
    write_repeated(summary, spec.out)
    first = summary.outcomes[0]
    if first.ok:
        _write_outcome(first, cfg.with_updates(seed=first.seed), spec.out / "run_000")
    mse_mean, mse_std = summary.mse_normalized
    counts = summary.orientation_counts
    print(
        f"runs={summary.k} failed={len(summary.failures)} mse_normalized={mse_mean:.6g}±{mse_std:.3g} "
        f"orientation positive={counts[1]} negative={counts[-1]} confident={summary.confident_count}"
    )
    return _report_failures(summary.outcomes)


def cmd_train_eval(args: argparse.Namespace, settings: Settings) -> int:
    return _train(args, settings, symmetry=False)


def cmd_symmetry(args: argparse.Namespace, settings: Settings) -> int:
    return _train(args, settings, symmetry=True)


def _configure_sweep(p: argparse.ArgumentParser) -> None:
    add_training_arguments(p)
    p.add_argument("--repeats", type=int, default=10, help="Runs per grid point")
    p.add_argument("--batch-size-grid", type=int_list, default=None, metavar="32,64,128")
    p.add_argument("--seq-len-grid", type=int_list, default=None, metavar="1,20,50")
    p.add_argument("--batchnorm-grid", type=on_off_list, default=None, metavar="on,off")


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    cfg = train_config_from_args(args, settings)
    requested = {
        "batch_size": args.batch_size_grid,
        "seq_len": args.seq_len_grid,
        "use_batchnorm": args.batchnorm_grid,
    }
    grids = {k: v for k, v in requested.items() if v is not None}
    if not grids:
        grids = DEFAULT_GRIDS
    spec = ExperimentSpec(
        command="sweep",
        data=args.data,
        out=args.out,
        train=cfg,
        repeats=args.repeats,
        jobs=settings.jobs,
        grids=grids,
    )
    dataset = _load_dataset(spec.data)
    write_effective_config(spec.provenance(settings), spec.out)

    rows = run_sweep(cfg, dataset, spec.grids, spec.repeats, jobs=spec.jobs, log_settings=settings)
    write_sweep(rows, spec.out)
    for row in rows:
        print(f"{row.param_name}={row.param_value} mse={row.mse_mean:.6g}±{row.mse_std:.3g} failures={row.failures}")
    failed = [r for r in rows if r.failures]
    for r in failed:
        log.error("sweep_point_failures", param=r.param_name, value=r.param_value, failures=r.failures)
    return EXIT_FAILED if failed else EXIT_OK


def _configure_evaluate(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", type=Path, required=True, help="Log table (CSV)")
    p.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint written by train")
    p.add_argument("--out", type=Path, required=True, help="Output directory")


def cmd_evaluate(args: argparse.Namespace, settings: Settings) -> int:
    params, meta = load_checkpoint(args.checkpoint)
    cfg = TrainConfig.model_validate(meta["train_config"])
    spec = ExperimentSpec(command="evaluate", data=args.data, out=args.out, checkpoint=args.checkpoint, train=cfg)
    dataset = _load_dataset(spec.data)
    write_effective_config(spec.provenance(settings), spec.out)

    _, test_ds = split_wells(dataset, cfg.train_frac, cfg.seed)
    test_ds = test_ds.with_standardization(Standardization.from_dict(meta["standardization"]))
    moments = UcsMoments(**meta["ucs_moments"])
    report = evaluate(params, test_ds, moments, cfg)
    write_run_report(report, spec.out)
    print(f"mse_normalized={report.test_mse_normalized:.6g} pearson_r={report.pearson_r:.4f}")
    return EXIT_OK


# ─── Registration ─────────────────────────────────────────────────────────────

register_command("generate", "Write a synthetic well-log field", _configure_generate, cmd_generate)
register_command("train", "Split, train and evaluate", _configure_train, cmd_train_eval)
register_command("symmetry", "Repeated training with the covariance fix off", _configure_train, cmd_symmetry)
register_command("sweep", "Repeated runs over hyperparameter grids", _configure_sweep, cmd_sweep)
register_command("evaluate", "Evaluate a saved checkpoint", _configure_evaluate, cmd_evaluate)
