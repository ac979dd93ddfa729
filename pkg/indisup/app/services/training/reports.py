"""
Report writers.

Every artifact is a UTF-8 CSV with a header row and `.` decimals, written with
pandas so floats round-trip exactly. Wall-clock times are logged, never written,
so repeated commands produce byte-identical files.
"""

import json
from pathlib import Path
from typing import Any

import pandas as pd
import structlog

from indisup.app.services.training.evaluation import RunReport
from indisup.app.services.training.experiments import RepeatedSummary, SweepRow

log = structlog.get_logger(__name__)

RUN_REPORT = "run_report.csv"
LOSS_HISTORY = "loss_history.csv"
RUNS = "runs.csv"
ORIENTATION_COUNTS = "orientation_counts.csv"
SWEEP = "sweep.csv"
EFFECTIVE_CONFIG = "effective_config.json"


def _write(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    log.debug("report_written", path=str(path), rows=len(frame))
    return path


def predictions_filename(well_id: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in well_id)
    return f"predictions_{safe}.csv"


def write_run_report(report: RunReport, out_dir: str | Path, extra: dict[str, Any] | None = None) -> list[Path]:
    """run_report.csv, loss_history.csv and one predictions file per test well."""
    out_dir = Path(out_dir)
    metrics = {**report.metrics(), **(extra or {})}
    written = [
        _write(pd.DataFrame({"metric": list(metrics), "value": list(metrics.values())}), out_dir / RUN_REPORT),
        _write(
            pd.DataFrame({"iteration": range(len(report.loss_history)), "loss": report.loss_history}),
            out_dir / LOSS_HISTORY,
        ),
    ]
    for well_id, pred in report.predictions.items():
        frame = pd.DataFrame({
            "depth": pred.depth,
            "prediction_physical": pred.prediction_physical,
            "ground_truth": pred.ground_truth,
        })
        written.append(_write(frame, out_dir / predictions_filename(well_id)))
    return written


def runs_frame(summary: RepeatedSummary) -> pd.DataFrame:
    rows = []
    for o in summary.outcomes:
        r = o.report
        rows.append({
            "run": o.run,
            "seed": o.seed,
            "status": "ok" if o.ok else "failed",
            "test_mse_normalized": r.test_mse_normalized if r else float("nan"),
            "test_mse_physical": r.test_mse_physical if r else float("nan"),
            "pearson_r": r.pearson_r if r else float("nan"),
            "resolved_sign": r.resolved_sign if r else 0,
            "confident": r.confident if r else False,
            "error": o.error or "",
        })
    return pd.DataFrame(rows)


def write_repeated(summary: RepeatedSummary, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    counts = summary.orientation_counts
    orientation = pd.DataFrame({"orientation": ["positive", "negative"], "count": [counts[1], counts[-1]]})
    return [
        _write(runs_frame(summary), out_dir / RUNS),
        _write(orientation, out_dir / ORIENTATION_COUNTS),
    ]


def _grid_value(value: Any) -> Any:
    if isinstance(value, bool):
        return "on" if value else "off"
    return value


def write_sweep(rows: list[SweepRow], out_dir: str | Path) -> Path:
    frame = pd.DataFrame(
        [
            {
                "param_name": r.param_name,
                "param_value": _grid_value(r.param_value),
                "mse_mean": r.mse_mean,
                "mse_std": r.mse_std,
                "k": r.k,
                "failures": r.failures,
            }
            for r in rows
        ],
        columns=["param_name", "param_value", "mse_mean", "mse_std", "k", "failures"],
    )
    return _write(frame, Path(out_dir) / SWEEP)


def write_effective_config(config: dict[str, Any], out_dir: str | Path) -> Path:
    path = Path(out_dir) / EFFECTIVE_CONFIG
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config, sort_keys=True, indent=2, default=str) + "\n", encoding="utf-8")
    return path
