"""CSV artifacts: per-trial records, RT-ratio histogram, summary, sweep and trace."""

import math
from collections.abc import Iterable
from pathlib import Path

import pandas as pd
from loguru import logger

from .exceptions import OutputError
from .harness import TRIAL_COLUMNS, Summary, TrialResult
from .models import FramePlan, TrialRecord

HISTOGRAM_COLUMNS = ("protocol", "bin_start", "bin_end", "pdf", "cdf")
SUMMARY_COLUMNS = (
    "protocol",
    "ergodic_mbps",
    "gain_vs_single",
    "outage_1_00",
    "outage_0_95",
    "rt_min",
    "rt_max",
    "rt_mean",
    "excluded",
    "concurrent_fraction",
)
SWEEP_COLUMNS = ("nt", "protocol", "ergodic_mbps", "estimation_error_variance_mw")
TRACE_COLUMNS = (
    "trial", "protocol", "frame", "scheme", "m1", "m2", "mcs_link1", "mcs_link2", "mdus_link1", "mdus_link2",
)

FILE_NAMES = {
    "trials": "trials.csv",
    "histogram": "rt_ratio_hist.csv",
    "summary": "summary.csv",
}


def _out_dir(out_dir: Path | str) -> Path:
    if str(out_dir).strip() == "":
        raise OutputError(out_dir, "empty output path")
    path = Path(out_dir)
    if path.exists() and not path.is_dir():
        raise OutputError(path, "not a directory")
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(path, str(e))
    return path


def _write(frame: pd.DataFrame, columns: Iterable[str], path: Path) -> Path:
    try:
        frame.to_csv(path, columns=list(columns), index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(path, str(e))
    logger.info(f"Wrote {path}")
    return path


def emit_csv(summary: Summary, out_dir: Path | str) -> dict[str, Path]:
    path = _out_dir(out_dir)
    return {
        "trials": _write(summary.trials, TRIAL_COLUMNS, path / FILE_NAMES["trials"]),
        "histogram": _write(
            summary.histogram.reindex(columns=list(HISTOGRAM_COLUMNS)),
            HISTOGRAM_COLUMNS,
            path / FILE_NAMES["histogram"],
        ),
        "summary": _write(summary.protocols, SUMMARY_COLUMNS, path / FILE_NAMES["summary"]),
    }


def read_trial_records(path: Path) -> list[TrialRecord]:
    """Parse ``trials.csv`` back into records (empty ratio cells become ``None``)."""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise OutputError(path, str(e))

    records = []
    for trial, rows in frame.groupby("trial", sort=True):
        throughput, ratio, concurrent = {}, {}, {}
        for protocol, links in rows.groupby("protocol", sort=False):
            links = links.sort_values("link")
            throughput[protocol] = tuple(float(v) for v in links["throughput_mbps"])
            ratio[protocol] = tuple(None if math.isnan(v) else float(v) for v in links["rt_ratio"])
            first = links.iloc[0]
            concurrent[protocol] = (bool(first["concurrent_f1"]), bool(first["concurrent_f2"]))
        records.append(
            TrialRecord(trial=int(trial), throughput_mbps=throughput, rt_ratio=ratio, concurrent=concurrent)
        )
    return records


def write_sweep(frame: pd.DataFrame, out_dir: Path | str) -> Path:
    return _write(frame, SWEEP_COLUMNS, _out_dir(out_dir) / "sweep_nt.csv")


def _mcs_field(indices: tuple[int | None, ...]) -> str:
    return "-".join("x" if i is None else str(i) for i in indices)


def trace_row(trial: int, protocol: str, plan: FramePlan) -> dict[str, object]:
    cfg = plan.config
    return dict(
        zip(
            TRACE_COLUMNS,
            (
                trial,
                protocol,
                plan.frame,
                plan.scheme,
                cfg.m1,
                cfg.m2,
                _mcs_field(cfg.mcs1),
                _mcs_field(cfg.mcs2),
                plan.mdus[0],
                plan.mdus[1],
            ),
        )
    )


def write_trace(results: Iterable[TrialResult], out_dir: Path | str) -> Path:
    """Per-frame stream allocation and MCS of every protocol, ordered by trial."""
    rows = [
        trace_row(result.record.trial, protocol, plan)
        for result in sorted(results, key=lambda r: r.record.trial)
        for protocol, plans in result.plans.items()
        for plan in plans
    ]
    return _write(pd.DataFrame(rows, columns=list(TRACE_COLUMNS)), TRACE_COLUMNS, _out_dir(out_dir) / "trace.csv")
