"""Command-line entry points for calibration, experiments and plotting.

Exit codes: 0 success, 2 configuration error, 3 calibration failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._version import __version__
from .config import ConfigError, load_scenario
from .experiments import (
    calibrate_scenario,
    calibration_key,
    resolve_jobs,
    run_comm_mc,
    run_radar_mc,
)
from .results import (
    ResultsError,
    emit_plots,
    lookup_penalty,
    store_penalty,
    write_results,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CALIBRATION = 3
EXIT_IO = 4


class CalibrationUnavailable(RuntimeError):
    """A required penalty is neither configured nor present in the cache."""


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="scenario JSON; omitted keys take the built-in defaults")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the master seed from the config")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker threads (STARISAC_JOBS overrides)")


def _add_comm_flag(parser: argparse.ArgumentParser, default: bool) -> None:
    parser.add_argument("--with-comm", dest="with_comm", action="store_true",
                        help="bursts carry random messages")
    parser.add_argument("--no-comm", dest="with_comm", action="store_false",
                        help="radar-only code sequences")
    parser.set_defaults(with_comm=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starisac",
        description="Monte Carlo experiments for a dual-sided reconfigurable-"
                    "surface transceiver that senses and communicates at once.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="solve detector penalties for the false-alarm target")
    _add_common(cal)
    _add_comm_flag(cal, default=True)
    cal.add_argument("--trials", type=int, default=None,
                     help="noise-only bursts per burst length")
    cal.add_argument("--out", type=Path, default=Path("calibration.json"),
                     help="penalty cache file (JSON)")

    rad = sub.add_parser("radar", help="detection and velocity-error sweep over RCS")
    _add_common(rad)
    _add_comm_flag(rad, default=True)
    rad.add_argument("--trials", type=int, default=None, help="bursts per cell")
    rad.add_argument("--calibration", type=Path, default=Path("calibration.json"),
                     help="penalty cache produced by the calibrate command")
    rad.add_argument("--out", type=Path, default=None,
                     help="output CSV (default radar_with_comm.csv / radar_only.csv)")

    ber = sub.add_parser("ber", help="bit-error-rate sweep over reference SNR")
    _add_common(ber)
    ber.add_argument("--trials", type=int, default=None, help="slots per cell")
    ber.add_argument("--out", type=Path, default=Path("ber_results.csv"),
                     help="output CSV")

    plot = sub.add_parser("plot", help="render SVG trend plots from result CSVs")
    plot.add_argument("results", type=Path, nargs="+", help="result CSV files (one experiment family)")
    plot.add_argument("--out", type=Path, default=Path("plots"), help="output directory")
    return parser


def _load_config(args) -> "ScenarioConfig":
    if args.config is None:
        raw = {}
    else:
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: not valid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{args.config}: top level must be a JSON object")
    if args.seed is not None:
        raw = {**raw, "seed": args.seed}
    return load_scenario(raw)


def _cmd_calibrate(args) -> int:
    cfg = _load_config(args)
    jobs = resolve_jobs(args.jobs)
    trials = cfg.detector.calibration_trials if args.trials is None else args.trials
    for p in cfg.p_grid:
        try:
            penalty = calibrate_scenario(cfg, args.with_comm, p, trials=trials, jobs=jobs)
        except ValueError as exc:
            raise CalibrationUnavailable(str(exc)) from exc
        key = calibration_key(cfg, args.with_comm, p, trials)
        store_penalty(args.out, key, penalty)
        print(f"P={p} with_comm={args.with_comm}: penalty={penalty!r} "
              f"(target {cfg.detector.fa_target}, {trials} trials) -> {args.out}")
    return EXIT_OK


def _resolve_penalties(cfg, args, trials: int) -> dict[int, float]:
    if cfg.detector.penalty is not None:
        return {p: cfg.detector.penalty for p in cfg.p_grid}
    penalties = {}
    cal_trials = cfg.detector.calibration_trials
    for p in cfg.p_grid:
        key = calibration_key(cfg, args.with_comm, p, cal_trials)
        value = lookup_penalty(args.calibration, key)
        if value is None:
            raise CalibrationUnavailable(
                f"no calibrated penalty for P={p}, with_comm={args.with_comm} in "
                f"{args.calibration}; run `starisac calibrate` with the same "
                f"config and seed first, or set detector.penalty in the config"
            )
        penalties[p] = value
    return penalties


def _cmd_radar(args) -> int:
    cfg = _load_config(args)
    jobs = resolve_jobs(args.jobs)
    trials = cfg.radar_trials_per_cell if args.trials is None else args.trials
    penalties = _resolve_penalties(cfg, args, trials)
    record = run_radar_mc(cfg, args.with_comm, penalties, trials=trials, jobs=jobs)
    out = args.out
    if out is None:
        out = Path("radar_with_comm.csv" if args.with_comm else "radar_only.csv")
    csv_path, manifest = write_results(record, out)
    print(f"{len(record.cells)} cells -> {csv_path} (+ {manifest.name})")
    return EXIT_OK


def _cmd_ber(args) -> int:
    cfg = _load_config(args)
    jobs = resolve_jobs(args.jobs)
    slots = cfg.slots_per_cell if args.trials is None else args.trials
    record = run_comm_mc(cfg, slots=slots, jobs=jobs)
    csv_path, manifest = write_results(record, args.out)
    print(f"{len(record.cells)} cells -> {csv_path} (+ {manifest.name})")
    return EXIT_OK


def _cmd_plot(args) -> int:
    written = emit_plots(args.results, args.out)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "calibrate": _cmd_calibrate,
        "radar": _cmd_radar,
        "ber": _cmd_ber,
        "plot": _cmd_plot,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationUnavailable as exc:
        print(f"calibration failure: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except ResultsError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
