import sys
from collections.abc import Callable
from pathlib import Path

import numpy as np
from cyclopts import App
from loguru import logger

from .channel import PAIRS, load_channels
from .config import apply_overrides, get_config_path, load_config
from .config_service import ConfigService
from .exceptions import ConfigurationError, SwitchSimError
from .executor import ExecutorFactory
from .harness import Summary, aggregate, run_monte_carlo, sweep_training
from .mac import CONTROL_SEQUENCE, handshake_efficiency, mean_backoff_slots
from .models import AppConfig, Mode, TimingModel, TopologyMode
from .report import emit_csv, write_sweep, write_trace

app = App(name="mimo-switch", help="Two-link MIMO single/concurrent switching simulator.")

config_app = App(name="config", help="Manage the configuration file.")
app.command(config_app)


def _setup_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")

def _guarded(action: Callable[[], None]) -> None:
    try:
        action()
    except SwitchSimError as e:
        logger.error(str(e))
        sys.exit(1)
    except Exception:
        logger.exception("Unexpected error")
        sys.exit(1)

def _split_csv(value: str | None, cast=str) -> tuple | None:
    if value is None:
        return None
    try:
        return tuple(cast(v.strip()) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigurationError(f"Cannot parse list '{value}'")

def _build_config(config: Path | None, **flags) -> AppConfig:
    return apply_overrides(load_config(config), **flags)

def _print_summary(summary: Summary) -> None:
    print(f"{'PROTOCOL':<10} {'ERGODIC':>9} {'GAIN':>8} {'OUT<1.0':>8} {'OUT<.95':>8} {'RT MIN':>7} {'RT MAX':>7} {'CONC':>6}")
    print("-" * 72)
    for row in summary.protocols.itertuples():
        print(
            f"{row.protocol:<10} {row.ergodic_mbps:>9.2f} {row.gain_vs_single:>+8.1%} {row.outage_1_00:>8.3f} "
            f"{row.outage_0_95:>8.3f} {row.rt_min:>7.3f} {row.rt_max:>7.3f} {row.concurrent_fraction:>6.2f}"
        )

def _simulate(cfg: AppConfig) -> Summary:
    results = run_monte_carlo(cfg, ExecutorFactory.create(cfg.run.workers))
    summary = aggregate([r.record for r in results])
    emit_csv(summary, cfg.run.out_dir)
    if cfg.run.trace:
        write_trace(results, cfg.run.out_dir)
    return summary


@app.command(name="run")
def run(
    *,
    mode: Mode | None = None,
    protocols: str | None = None,
    trials: int | None = None,
    seed: int | None = None,
    nt: int | None = None,
    backoff_db: float | None = None,
    topology: TopologyMode | None = None,
    out: Path | None = None,
    workers: int | None = None,
    trace: bool | None = None,
    dump_channels: bool | None = None,
    config: Path | None = None,
    verbose: bool = False,
):
    """Run the Monte-Carlo comparison and write trials, histogram and summary CSVs."""
    _setup_logging(verbose)

    def action():
        cfg = _build_config(
            config,
            mode=mode,
            protocols=_split_csv(protocols),
            n_trials=trials,
            seed=seed,
            n_training=nt,
            backoff_db=backoff_db,
            topology=topology,
            out_dir=out,
            workers=workers,
            trace=trace,
            dump_channels=dump_channels,
        )
        summary = _simulate(cfg)
        _print_summary(summary)
        logger.success(f"{cfg.run.n_trials} trials done, results in {cfg.run.out_dir}")

    _guarded(action)


@app.command(name="sweep-nt")
def sweep_nt(
    *,
    nt_values: str = "1,2,4,8,16,32",
    protocols: str | None = None,
    trials: int | None = None,
    seed: int | None = None,
    backoff_db: float | None = None,
    topology: TopologyMode | None = None,
    out: Path | None = None,
    workers: int | None = None,
    config: Path | None = None,
    verbose: bool = False,
):
    """Sweep the number of training symbols in practical mode."""
    _setup_logging(verbose)

    def action():
        cfg = _build_config(
            config,
            mode="practical",
            protocols=_split_csv(protocols),
            n_trials=trials,
            seed=seed,
            backoff_db=backoff_db,
            topology=topology,
            out_dir=out,
            workers=workers,
        )
        values = _split_csv(nt_values, int)
        if not values or min(values) < 1:
            raise ConfigurationError(f"Training symbol counts must be positive, got '{nt_values}'")
        table = sweep_training(cfg, values, ExecutorFactory.create(cfg.run.workers))
        write_sweep(table, cfg.run.out_dir)

        print(f"{'N_T':>4} {'PROTOCOL':<10} {'ERGODIC':>9} {'EST VAR (mW)':>14}")
        print("-" * 40)
        for row in table.itertuples():
            print(f"{row.nt:>4} {row.protocol:<10} {row.ergodic_mbps:>9.2f} {row.estimation_error_variance_mw:>14.3e}")
        logger.success(f"Sweep over N_T={list(values)} done")

    _guarded(action)


@app.command(name="topology-demo")
def topology_demo(
    *,
    topology: TopologyMode | None = None,
    mode: Mode | None = None,
    trials: int = 500,
    seed: int | None = None,
    out: Path | None = None,
    workers: int | None = None,
    config: Path | None = None,
    verbose: bool = False,
):
    """Run the representative same-direction (a) and opposite-direction (b) topologies."""
    _setup_logging(verbose)

    def action():
        kinds = [topology] if topology else ["a", "b"]
        if "random" in kinds:
            raise ConfigurationError("topology-demo runs the fixed topologies 'a' and 'b' only")
        base = _build_config(config, mode=mode, n_trials=trials, seed=seed, out_dir=out, workers=workers)
        for kind in kinds:
            cfg = apply_overrides(base, topology=kind, out_dir=base.run.out_dir / f"topology_{kind}")
            logger.info(f"Topology ({kind})")
            summary = _simulate(cfg)
            by_protocol = summary.protocols.set_index("protocol")
            if "adaptive" in by_protocol.index:
                share = 1 - by_protocol.loc["adaptive", "concurrent_fraction"]
                print(f"Topology ({kind}): adaptive MAC chose single-link in {share:.1%} of frames")
            _print_summary(summary)
            print()
        logger.success("Topology demo done")

    _guarded(action)


@app.command(name="timing")
def timing(*, nt: int = 4, config: Path | None = None, verbose: bool = False):
    """Print handshaking overhead and efficiency for both schemes."""
    _setup_logging(verbose)

    def action():
        cfg = _build_config(config, n_training=nt)
        model: TimingModel = cfg.timing_for_run()
        mean_slots = mean_backoff_slots(model)
        print(f"N_T={nt}, N_A={model.n_antennas}, frame={model.frame_us:.0f} us")
        print(f"{'SCHEME':<11} {'EFFICIENCY':>10} {'MEAN BACKOFF':>13}  SEQUENCE")
        print("-" * 75)
        for scheme, sequence in CONTROL_SEQUENCE.items():
            print(
                f"{scheme:<11} {handshake_efficiency(scheme, model):>10.2%} "
                f"{handshake_efficiency(scheme, model, mean_slots):>13.2%}  {' '.join(sequence)}"
            )

    _guarded(action)


@app.command(name="inspect-channels")
def inspect_channels(path: Path, *, verbose: bool = False):
    """Summarize a channel dump written by ``run --dump-channels``."""
    _setup_logging(verbose)

    def action():
        realizations = load_channels(path)
        if not realizations:
            print("No channels in file.")
            return
        pairs = "".join(f" {f'R{k}T{l} (dBm)':>12}" for k, l in PAIRS)
        print(f"{'LABEL':<10} {'FRAME':>5} {'KIND':<9}{pairs}")
        print("-" * (27 + 13 * len(PAIRS)))
        for label, real in realizations.items():
            powers = "".join(
                f" {10 * np.log10(np.mean(np.abs(real.pair(k, l)) ** 2)):>12.1f}" for k, l in PAIRS
            )
            kind = "estimate" if real.estimated else "true"
            print(f"{label:<10} {real.frame_id:>5} {kind:<9}{powers}")

    _guarded(action)


@config_app.command(name="init")
def config_init(*, force: bool = False):
    """Write a config file with the built-in defaults."""
    svc = ConfigService(get_config_path())
    try:
        svc.init(force=force)
        print(f"Config written to {svc.config_path}.")
    except Exception as e:
        print(f"Error: {e}")
        sys.exit(1)

@config_app.command(name="show")
def config_show():
    """Print the config file."""
    svc = ConfigService(get_config_path())
    try:
        print(svc.show(), end="")
    except Exception as e:
        print(f"Error: {e}")
        sys.exit(1)

@config_app.command(name="set")
def config_set(key: str, value: str):
    """Set one value, e.g. ``run.n_trials 500``."""
    svc = ConfigService(get_config_path())
    try:
        svc.set(key, value)
        print(f"{key} = {svc.get(key)}")
    except Exception as e:
        print(f"Error: {e}")
        sys.exit(1)

@config_app.command(name="mcs")
def config_mcs():
    """List the MCS table in effect."""
    svc = ConfigService(get_config_path())
    try:
        table = svc.list_mcs()
        print(f"{'INDEX':<6} {'MODULATION':<11} {'RATE':>6} {'BITS/SYM':>9} {'THRESHOLD (dB)':>15}")
        print("-" * 51)
        for entry in table:
            print(
                f"{entry.index:<6} {entry.modulation:<11} {entry.code_rate:>6.3f} "
                f"{entry.bits_per_symbol:>9.2f} {entry.threshold_db:>15.1f}"
            )
    except Exception as e:
        print(f"Error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    app()
