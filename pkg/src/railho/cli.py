"""Command line interface.

Subcommands:
  simulate   run one configuration and write records + stats CSVs
  sweep      run a speed x offset (x environment) grid and write a stats CSV
  trace      dump the per-tick SINR / throughput trace of a single run

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import csvio
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .simulate import monte_carlo, simulate_run

_ENV_CHOICES = ["viaduct", "cutting", "urban", "mixed"]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON run configuration file")
    parser.add_argument("--speed", type=float, metavar="KMH", help="train speed in km/h")
    parser.add_argument("--env", choices=_ENV_CHOICES, help="environment along the track")
    parser.add_argument("--offset-db", type=float, help="A3 hysteresis margin in dB")
    parser.add_argument("--ttt-ms", type=int, help="time-to-trigger in ms (multiple of 40)")
    parser.add_argument("--runs", type=int, help="Monte Carlo runs per configuration")
    parser.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--workers", type=int, default=1, help="parallel workers")


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="railho",
        description="LTE hard-handover simulator for a high-speed train on a trackside RRH deployment",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one configuration")
    _add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a speed x offset grid")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--speeds", type=_csv_floats, default=[100.0, 300.0, 500.0], metavar="KMH,KMH,...",
        help="comma-separated speeds in km/h",
    )
    p_sweep.add_argument(
        "--offsets", type=_csv_floats, default=[0.0, 2.0, 4.0], metavar="DB,DB,...",
        help="comma-separated hysteresis offsets in dB",
    )
    p_sweep.add_argument(
        "--envs", default=None, metavar="ENV,ENV,...",
        help="comma-separated environments (default: the configured one)",
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_trace = sub.add_parser("trace", help="dump one run's per-tick trace")
    _add_common(p_trace)
    p_trace.add_argument("--run", type=int, default=0, help="run index to trace")
    p_trace.set_defaults(func=_cmd_trace)
    return parser


def _load(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return apply_overrides(
        cfg,
        speed_kmh=args.speed,
        environment=args.env,
        offset_db=args.offset_db,
        ttt_ms=args.ttt_ms,
        runs=args.runs,
        seed=args.seed,
    )


def _ensure_out(args: argparse.Namespace) -> Path:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = _ensure_out(args)
    stats = monte_carlo(cfg, workers=args.workers)
    rows = [csvio.record_row(rec, cfg) for rec in stats.records]
    csvio.write_records_csv(rows, out / "records.csv")
    csvio.write_stats_csv([csvio.stats_csv_row(stats, cfg)], out / "stats.csv")
    csvio.write_histogram_csv(csvio.histogram_csv_rows(stats, cfg), out / "start_hist.csv")
    print(
        f"{cfg.speed_kmh:g} km/h {cfg.environment_label} offset {cfg.handover.hysteresis_db:g} dB: "
        f"{stats.n_success}/{stats.n_records} handovers succeeded, "
        f"weighted start point {stats.weighted_start_point_m:.1f} m, "
        f"delay {stats.delay_in_samples} samples"
    )
    print(f"wrote {out / 'records.csv'}, {out / 'stats.csv'}, {out / 'start_hist.csv'}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = _load(args)
    if not args.speeds or not args.offsets:
        raise ConfigError("sweep needs at least one speed and one offset")
    envs = args.envs.split(",") if args.envs else [None]
    out = _ensure_out(args)
    stats_rows, record_rows, hist_rows = [], [], []
    for env in envs:
        env = env.strip() if env else None
        if env is not None and env not in _ENV_CHOICES:
            raise ConfigError(f"unknown environment {env!r}")
        for speed in args.speeds:
            for offset in args.offsets:
                cfg = apply_overrides(base, speed_kmh=speed, environment=env, offset_db=offset)
                stats = monte_carlo(cfg, workers=args.workers)
                stats_rows.append(csvio.stats_csv_row(stats, cfg))
                record_rows.extend(csvio.record_row(rec, cfg) for rec in stats.records)
                hist_rows.extend(csvio.histogram_csv_rows(stats, cfg))
                print(
                    f"{cfg.speed_kmh:g} km/h {cfg.environment_label} offset {offset:g} dB: "
                    f"start point {stats.weighted_start_point_m:.1f} m, "
                    f"success rate {stats.success_rate:.3f}"
                )
    csvio.write_stats_csv(stats_rows, out / "sweep_stats.csv")
    csvio.write_records_csv(record_rows, out / "sweep_records.csv")
    csvio.write_histogram_csv(hist_rows, out / "sweep_hist.csv")
    print(f"wrote {out / 'sweep_stats.csv'}, {out / 'sweep_records.csv'}, {out / 'sweep_hist.csv'}")
    return 0


def _cmd_trace(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if args.run < 0 or args.run >= cfg.runs:
        raise ConfigError(f"run index {args.run} outside [0, {cfg.runs})")
    out = _ensure_out(args)
    result = simulate_run(cfg, args.run, want_trace=True)
    path = out / f"trace_run{args.run}.csv"
    csvio.write_trace_csv(result.trace, path)
    outcomes = ", ".join(rec.outcome.value for rec in result.records)
    print(f"run {args.run}: {len(result.records)} records ({outcomes})")
    print(f"wrote {path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
