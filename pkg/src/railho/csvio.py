"""CSV writers and readers for records, sweep statistics and per-tick traces.

All files are UTF-8 with LF line endings, '.' decimal separators and floats
rendered to 6 significant digits. Missing values are empty fields.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .config import RunConfig
from .handover import HandoverRecord
from .simulate import RunTrace, SweepStatistics

RECORD_COLUMNS = [
    "run_id",
    "speed_kmh",
    "environment",
    "offset_db",
    "trigger_tick",
    "report_tick",
    "command_tick",
    "completion_tick",
    "start_position_m",
    "delay_ms",
    "outcome",
]

STATS_COLUMNS = [
    "speed_kmh",
    "environment",
    "offset_db",
    "ttt_ms",
    "runs",
    "n_records",
    "n_success",
    "success_rate",
    "weighted_start_point_m",
    "mean_delay_ms",
    "delay_in_samples",
]

HISTOGRAM_COLUMNS = ["speed_kmh", "environment", "offset_db", "start_snapshot", "probability"]


@dataclass(frozen=True)
class RecordRow:
    """One records-CSV row: a handover record stamped with its configuration."""

    run_id: int
    speed_kmh: float
    environment: str
    offset_db: float
    trigger_tick: int | None
    report_tick: int | None
    command_tick: int | None
    completion_tick: int | None
    start_position_m: float | None
    delay_ms: float | None
    outcome: str


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _parse_int(text: str) -> int | None:
    return int(text) if text else None


def _parse_float(text: str) -> float | None:
    return float(text) if text else None


def record_row(record: HandoverRecord, cfg: RunConfig) -> RecordRow:
    delay_ms = None if record.total_delay_s is None else record.total_delay_s * 1000.0
    return RecordRow(
        run_id=record.run_id,
        speed_kmh=cfg.speed_kmh,
        environment=cfg.environment_label,
        offset_db=cfg.handover.hysteresis_db,
        trigger_tick=record.trigger_tick,
        report_tick=record.report_tick,
        command_tick=record.command_tick,
        completion_tick=record.completion_tick,
        start_position_m=record.start_position_m,
        delay_ms=delay_ms,
        outcome=record.outcome.value,
    )


def _open_writer(path: Path):
    return open(path, "w", encoding="utf-8", newline="")


def write_records_csv(rows: Iterable[RecordRow], path: str | Path) -> None:
    path = Path(path)
    with _open_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    _fmt(row.run_id),
                    _fmt(row.speed_kmh),
                    row.environment,
                    _fmt(row.offset_db),
                    _fmt(row.trigger_tick),
                    _fmt(row.report_tick),
                    _fmt(row.command_tick),
                    _fmt(row.completion_tick),
                    _fmt(row.start_position_m),
                    _fmt(row.delay_ms),
                    row.outcome,
                ]
            )


def read_records_csv(path: str | Path) -> list[RecordRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RECORD_COLUMNS:
            raise ValueError(f"{path}: unexpected records header {header}")
        rows = []
        for raw in reader:
            rows.append(
                RecordRow(
                    run_id=int(raw[0]),
                    speed_kmh=float(raw[1]),
                    environment=raw[2],
                    offset_db=float(raw[3]),
                    trigger_tick=_parse_int(raw[4]),
                    report_tick=_parse_int(raw[5]),
                    command_tick=_parse_int(raw[6]),
                    completion_tick=_parse_int(raw[7]),
                    start_position_m=_parse_float(raw[8]),
                    delay_ms=_parse_float(raw[9]),
                    outcome=raw[10],
                )
            )
        return rows


def stats_csv_row(stats: SweepStatistics, cfg: RunConfig) -> list[str]:
    mean_delay_ms = None if math.isnan(stats.mean_delay_s) else stats.mean_delay_s * 1000.0
    weighted = None if math.isnan(stats.weighted_start_point_m) else stats.weighted_start_point_m
    return [
        _fmt(cfg.speed_kmh),
        cfg.environment_label,
        _fmt(cfg.handover.hysteresis_db),
        _fmt(cfg.handover.ttt_s * 1000.0),
        _fmt(stats.runs),
        _fmt(stats.n_records),
        _fmt(stats.n_success),
        _fmt(stats.success_rate),
        _fmt(weighted),
        _fmt(mean_delay_ms),
        _fmt(stats.delay_in_samples),
    ]


def write_stats_csv(rows: Sequence[Sequence[str]], path: str | Path) -> None:
    with _open_writer(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(STATS_COLUMNS)
        writer.writerows(rows)


def histogram_csv_rows(stats: SweepStatistics, cfg: RunConfig) -> list[list[str]]:
    return [
        [
            _fmt(cfg.speed_kmh),
            cfg.environment_label,
            _fmt(cfg.handover.hysteresis_db),
            _fmt(snapshot),
            _fmt(probability),
        ]
        for snapshot, probability in sorted(stats.start_point_histogram.items())
    ]


def write_histogram_csv(rows: Sequence[Sequence[str]], path: str | Path) -> None:
    with _open_writer(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTOGRAM_COLUMNS)
        writer.writerows(rows)


def write_trace_csv(trace: RunTrace, path: str | Path) -> None:
    n_cells = trace.snr_db.shape[1]
    columns = (
        ["tick", "snapshot", "position_m"]
        + [f"snr_db_cell{c}" for c in range(n_cells)]
        + [f"eff_snr_db_cell{c}" for c in range(n_cells)]
        + ["serving_cell", "interrupted", "throughput_bps"]
    )
    with _open_writer(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for t in range(trace.tick_snapshots.size):
            writer.writerow(
                [t, int(trace.tick_snapshots[t]), _fmt(float(trace.positions_m[t]))]
                + [_fmt(float(trace.snr_db[t, c])) for c in range(n_cells)]
                + [_fmt(float(trace.effective_snr_db[t, c])) for c in range(n_cells)]
                + [
                    int(trace.serving_cell[t]),
                    int(trace.interrupted[t]),
                    _fmt(float(trace.throughput_bps[t])),
                ]
            )
