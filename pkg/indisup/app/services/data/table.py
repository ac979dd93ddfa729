"""
Tabular log format.

Delimiter-separated UTF-8 text, header row exactly
`well_id,depth,density,resistivity,gamma,dts,dtp`, one row per depth sample.

Loading rules:
- a malformed value is a TableParseError carrying its file line number
- a well whose rows are not in depth order is sorted, with a warning
- rows with repeated depths or outside the physics validity region are rejected
  and reported, never repaired
- a well left with no valid rows is an EmptyWellError
"""

from pathlib import Path

import numpy as np
import pandas as pd
import structlog

from indisup.app.core.errors import EmptyWellError, TableParseError
from indisup.app.services.data.records import LOG_COLUMNS, Dataset, RowRejection, WellRecord
from indisup.app.services.physics import validity_mask

log = structlog.get_logger(__name__)

TABLE_COLUMNS = ("well_id",) + LOG_COLUMNS


def _parse_float_column(values: pd.Series, column: str) -> np.ndarray:
    out = np.empty(len(values), dtype=np.float64)
    for i, raw in enumerate(values):
        try:
            out[i] = float(raw)
        except (TypeError, ValueError):
            raise TableParseError(f"column {column!r}: cannot parse {raw!r} as a number", line=i + 2) from None
    return out


def _read_frame(path: Path, delimiter: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise TableParseError("file is empty", line=1) from None
    except pd.errors.ParserError as exc:
        raise TableParseError(str(exc)) from exc

    header = [c.strip() for c in frame.columns]
    if tuple(header) != TABLE_COLUMNS:
        raise TableParseError(f"expected columns {list(TABLE_COLUMNS)}, got {header}", line=1)
    frame.columns = header
    return frame


def load_table(path: str | Path, delimiter: str = ",") -> Dataset:
    path = Path(path)
    frame = _read_frame(path, delimiter)

    well_ids = frame["well_id"].fillna("").str.strip().to_numpy()
    for i, wid in enumerate(well_ids):
        if not wid:
            raise TableParseError("empty well_id", line=i + 2)
    columns = {c: _parse_float_column(frame[c], c) for c in LOG_COLUMNS}
    lines = np.arange(len(frame)) + 2

    wells: list[WellRecord] = []
    rejections: list[RowRejection] = []

    for wid in sorted(set(well_ids)):
        rows = np.flatnonzero(well_ids == wid)

        # Invalid rows are dropped before sorting and dedup
        valid = validity_mask(columns["density"][rows], columns["dts"][rows], columns["dtp"][rows])
        valid &= np.isfinite(columns["depth"][rows])
        for row in rows[~valid]:
            rejections.append(RowRejection(int(lines[row]), wid, "outside physics validity region"))
        rows = rows[valid]
        if rows.size == 0:
            raise EmptyWellError(f"well {wid} has no valid samples")

        depth = columns["depth"][rows]
        if np.any(np.diff(depth) < 0):
            log.warning("well_depth_not_monotone", well_id=wid, action="sorted")
            rows = rows[np.argsort(depth, kind="stable")]
            depth = columns["depth"][rows]

        duplicate = np.concatenate([[False], np.diff(depth) == 0])
        for row in rows[duplicate]:
            rejections.append(RowRejection(int(lines[row]), wid, "repeated depth"))
        rows = rows[~duplicate]
        wells.append(WellRecord(well_id=str(wid), **{c: columns[c][rows] for c in LOG_COLUMNS}))

    rejections.sort(key=lambda r: r.line)
    if rejections:
        log.warning("rows_rejected", path=str(path), count=len(rejections))
        for r in rejections:
            log.debug("row_rejected", line=r.line, well_id=r.well_id, reason=r.reason)
    log.info("table_loaded", path=str(path), wells=len(wells), rows=len(frame))
    return Dataset(wells=tuple(wells), rejections=tuple(rejections))


def dataset_frame(ds: Dataset) -> pd.DataFrame:
    parts = [
        pd.DataFrame({"well_id": w.well_id, **{c: getattr(w, c) for c in LOG_COLUMNS}})
        for w in ds.wells
    ]
    return pd.concat(parts, ignore_index=True)[list(TABLE_COLUMNS)]


def write_table(ds: Dataset, path: str | Path, delimiter: str = ",") -> Path:
    """Write wells in id order, rows in depth order. Floats are written round-trip exact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dataset_frame(ds).to_csv(path, sep=delimiter, index=False, lineterminator="\n", encoding="utf-8")
    return path
