"""Monte-Carlo driver and RT-ratio / throughput metrics."""

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from functools import partial

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from loguru import logger

from .channel import FadingRealization, draw_fading, dump_channels, estimate_channel, fixed_topology, random_topology
from .exceptions import ConfigurationError, InvariantError
from .executor import SerialExecutor, TrialExecutor
from .link_adapt import RateTable, build_rate_table, credited_mdus
from .mac import (
    FramePair,
    TablePair,
    draw_backoff_slots,
    payload_duration,
    plan_adaptive_ideal,
    plan_adaptive_practical,
    plan_mima_mac,
    plan_mst_mac,
    plan_single_link_mac,
)
from .models import PROTOCOL_ORDER, AppConfig, BackoffConfig, FramePlan, Mode, Protocol, TrialRecord
from .rng import TrialStreams

BIN_WIDTH = 0.1
TRIAL_COLUMNS = ("trial", "protocol", "link", "throughput_mbps", "rt_ratio", "concurrent_f1", "concurrent_f2")

Planner = Callable[[TablePair], FramePair]


def planner_for(protocol: Protocol, mode: Mode) -> Planner:
    if protocol == "adaptive":
        return plan_adaptive_ideal if mode == "ideal" else plan_adaptive_practical
    return {"single": plan_single_link_mac, "mima": plan_mima_mac, "mst": plan_mst_mac}[protocol]


class TrialResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    record: TrialRecord
    plans: dict[Protocol, FramePair]


def _channels(config: AppConfig, streams: TrialStreams) -> tuple[list[FadingRealization], list[FadingRealization]]:
    run, system = config.run, config.system
    if run.topology == "random":
        topology = random_topology(streams["topology"], system)
    else:
        topology = fixed_topology(run.topology, system)

    truth = [draw_fading(topology, f, streams[f"fading_f{f}"], system) for f in (1, 2)]
    if run.mode == "ideal":
        return truth, truth
    est_cfg = config.estimation_for_run()
    estimates = [estimate_channel(h, est_cfg, streams[f"estimate_f{h.frame_id}"]) for h in truth]
    return truth, estimates


def _credit(plan: FramePlan, chosen: RateTable, truth: RateTable, duration: float, config: AppConfig) -> FramePlan:
    m1, m2 = plan.config.m1, plan.config.m2
    mdus = tuple(
        credited_mdus(chosen.choice(link, m1, m2), truth.choice(link, m1, m2), duration, config.system)
        for link in (1, 2)
    )
    return plan.model_copy(update={"mdus": mdus})


def simulate_trial(config: AppConfig, trial_id: int) -> TrialResult:
    run, system = config.run, config.system
    timing = config.timing_for_run()
    streams = TrialStreams(run.seed, trial_id)
    frame_s = timing.frame_us / 1e6

    truth, estimates = _channels(config, streams)
    if run.dump_channels:
        dump_channels(
            run.out_dir / "channels" / f"trial_{trial_id:05d}.npz",
            {"true_f1": truth[0], "true_f2": truth[1], "est_f1": estimates[0], "est_f2": estimates[1]},
        )

    backoff = BackoffConfig(backoff_db=run.effective_backoff_db)
    chosen = tuple(build_rate_table(h, frame_s, backoff, system, config.mcs) for h in estimates)
    if run.mode == "ideal" and backoff.backoff_db == 0:
        true_tables = chosen
    else:
        true_tables = tuple(build_rate_table(h, frame_s, BackoffConfig(), system, config.mcs) for h in truth)

    if run.mode == "practical":
        slots = [draw_backoff_slots(timing, streams[f"contention_f{f}"]) for f in (1, 2)]
    else:
        slots = [0, 0]

    plans: dict[Protocol, FramePair] = {}
    throughput: dict[Protocol, tuple[float, float]] = {}
    concurrent: dict[Protocol, tuple[bool, bool]] = {}
    for protocol in run.protocols:
        planned = planner_for(protocol, run.mode)(chosen)
        credited = tuple(
            _credit(p, chosen[f], true_tables[f], payload_duration(p.handshake, timing, run.mode, slots[f]), config)
            for f, p in enumerate(planned)
        )
        plans[protocol] = credited
        bits = [sum(p.mdus[link] for p in credited) * 8 * system.mdu_bytes for link in (0, 1)]
        throughput[protocol] = (bits[0] / (2 * frame_s) / 1e6, bits[1] / (2 * frame_s) / 1e6)
        concurrent[protocol] = tuple(p.scheme == "concurrent" for p in credited)

    base = throughput["single"]
    rt_ratio = {
        protocol: tuple(tp / ref if ref > 0 else None for tp, ref in zip(pair, base))
        for protocol, pair in throughput.items()
    }
    logger.debug(f"Trial {trial_id}: " + ", ".join(f"{p}={t[0]:.1f}/{t[1]:.1f}" for p, t in throughput.items()))
    record = TrialRecord(trial=trial_id, throughput_mbps=throughput, rt_ratio=rt_ratio, concurrent=concurrent)
    return TrialResult(record=record, plans=plans)


def run_trial(config: AppConfig, trial_id: int) -> TrialRecord:
    return simulate_trial(config, trial_id).record


def run_monte_carlo(config: AppConfig, executor: TrialExecutor | None = None) -> list[TrialResult]:
    executor = executor or SerialExecutor()
    run = config.run
    logger.info(
        f"Running {run.n_trials} {run.mode} trials (seed={run.seed}, N_T={run.n_training}, "
        f"backoff={run.effective_backoff_db} dB, topology={run.topology})"
    )
    results = executor.map(partial(simulate_trial, config), range(run.n_trials))
    return sorted(results, key=lambda r: r.record.trial)


# --- Metrics ---

@dataclass(frozen=True)
class Summary:
    trials: pd.DataFrame
    histogram: pd.DataFrame
    protocols: pd.DataFrame


def records_frame(records: Iterable[TrialRecord]) -> pd.DataFrame:
    rows = [
        {
            "trial": r.trial,
            "protocol": protocol,
            "link": link + 1,
            "throughput_mbps": r.throughput_mbps[protocol][link],
            "rt_ratio": r.rt_ratio[protocol][link],
            "concurrent_f1": int(r.concurrent[protocol][0]),
            "concurrent_f2": int(r.concurrent[protocol][1]),
        }
        for r in sorted(records, key=lambda r: r.trial)
        for protocol in PROTOCOL_ORDER
        if protocol in r.throughput_mbps
        for link in (0, 1)
    ]
    frame = pd.DataFrame(rows, columns=list(TRIAL_COLUMNS))
    frame["rt_ratio"] = frame["rt_ratio"].astype(float)
    return frame


def outage_probability(ratios: Sequence[float] | np.ndarray, threshold: float) -> float:
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size == 0:
        return float("nan")
    return float(np.mean(ratios < threshold))


def ratio_histogram(ratios: Sequence[float] | np.ndarray, width: float = BIN_WIDTH) -> pd.DataFrame:
    """PDF/CDF over ``[x0, x0 + width)`` bins starting at 0."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size == 0:
        return pd.DataFrame(columns=["bin_start", "bin_end", "pdf", "cdf"])
    # rounding keeps values such as 1.2 out of the [1.1, 1.2) bin
    bins = np.floor(np.round(ratios / width, 9)).astype(int)
    counts = np.bincount(bins)
    pdf = counts / ratios.size
    edges = np.arange(counts.size)
    return pd.DataFrame(
        {
            "bin_start": np.round(edges * width, 10),
            "bin_end": np.round((edges + 1) * width, 10),
            "pdf": pdf,
            "cdf": np.cumsum(pdf),
        }
    )


def aggregate(records: Sequence[TrialRecord]) -> Summary:
    if not records:
        raise InvariantError("no trial records to aggregate")
    trials = records_frame(records)

    ergodic = trials.groupby("protocol", sort=False)["throughput_mbps"].mean()
    single = ergodic.get("single")
    rows, hist_frames = [], []
    for protocol in PROTOCOL_ORDER:
        if protocol not in ergodic.index:
            continue
        subset = trials[trials["protocol"] == protocol]
        ratios = subset["rt_ratio"].dropna().to_numpy()
        excluded = int(subset["rt_ratio"].isna().sum())
        if excluded:
            logger.warning(f"{protocol}: {excluded} RT-ratio samples excluded (zero single-link throughput)")
        rows.append(
            {
                "protocol": protocol,
                "ergodic_mbps": float(ergodic[protocol]),
                "gain_vs_single": float(ergodic[protocol] / single - 1) if single else float("nan"),
                "outage_1_00": outage_probability(ratios, 1.0),
                "outage_0_95": outage_probability(ratios, 0.95),
                "rt_min": float(ratios.min()) if ratios.size else float("nan"),
                "rt_max": float(ratios.max()) if ratios.size else float("nan"),
                "rt_mean": float(ratios.mean()) if ratios.size else float("nan"),
                "excluded": excluded,
                "concurrent_fraction": float(
                    subset[["concurrent_f1", "concurrent_f2"]].to_numpy().mean()
                ),
            }
        )
        hist = ratio_histogram(ratios)
        hist.insert(0, "protocol", protocol)
        hist_frames.append(hist)

    histogram = pd.concat(hist_frames, ignore_index=True) if hist_frames else pd.DataFrame()
    return Summary(trials=trials, histogram=histogram, protocols=pd.DataFrame(rows))


def sweep_training(
    config: AppConfig,
    nt_values: Sequence[int] = (1, 2, 4, 8, 16, 32),
    executor: TrialExecutor | None = None,
) -> pd.DataFrame:
    if config.run.mode != "practical":
        raise ConfigurationError("Training sweep needs practical mode (ideal mode has no training overhead)")
    rows = []
    for nt in nt_values:
        point = config.model_copy(update={"run": config.run.model_copy(update={"n_training": nt})})
        logger.info(f"Training sweep: N_T={nt}")
        summary = aggregate([r.record for r in run_monte_carlo(point, executor)])
        variance = point.estimation_for_run().error_variance
        for row in summary.protocols.itertuples():
            rows.append(
                {
                    "nt": nt,
                    "protocol": row.protocol,
                    "ergodic_mbps": row.ergodic_mbps,
                    "estimation_error_variance_mw": variance,
                }
            )
    return pd.DataFrame(rows)
