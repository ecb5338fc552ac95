#!/usr/bin/env python3
"""Reproduce the default experiment suite end to end.

Calibrates the detector penalty for both emission modes, runs the radar
detection / velocity sweep in each mode, runs the bit-error-rate sweep, and
renders plots — all through the ``starisac`` command-line interface, so every
step leaves a CSV + JSON-manifest pair (and SVG figures) in the output
directory exactly as the CLI would.

The full-size run (the package defaults: 1e6 calibration bursts per burst
length and mode, 1e4 radar trials per cell, 1e5 slots per rate cell) takes on
the order of ten minutes on one core.  ``--quick`` swaps in a reduced
scenario — a looser false-alarm target so fewer calibration bursts suffice,
fewer trials, a coarser target-strength grid — that exercises the identical
pipeline in about a minute; its numbers are for smoke-testing, not reporting.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from starisac.cli import main as cli_main

QUICK_SCENARIO = {
    "code": {"p_grid": [8, 16]},
    "target": {"rcs_grid_m2": [0.1, 1.0, 10.0]},
    "detector": {"fa_target": 1e-3, "calibration_trials": 100_000},
    "radar": {"trials_per_cell": 2000},
    "comm": {"slots_per_cell": 5000},
}


def run(argv: list[str]) -> None:
    print(f"$ starisac {' '.join(argv)}", flush=True)
    rc = cli_main(argv)
    if rc != 0:
        sys.exit(rc)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("results"),
                        help="output directory (default: results/)")
    parser.add_argument("--config", type=Path, default=None,
                        help="scenario JSON; omitted = package defaults")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker threads (STARISAC_JOBS overrides)")
    parser.add_argument("--quick", action="store_true",
                        help="minutes-scale rehearsal with reduced trial counts")
    args = parser.parse_args()

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    if args.quick and args.config is not None:
        parser.error("--quick and --config are mutually exclusive")
    config = args.config
    if args.quick:
        config = out / "quick_config.json"
        config.write_text(json.dumps(QUICK_SCENARIO, indent=2) + "\n")

    common: list[str] = []
    if config is not None:
        common += ["--config", str(config)]
    if args.seed is not None:
        common += ["--seed", str(args.seed)]
    if args.jobs is not None:
        common += ["--jobs", str(args.jobs)]

    calibration = out / "calibration.json"
    radar_csvs: list[Path] = []
    for mode_flag, stem in (("--with-comm", "radar_with_comm"), ("--no-comm", "radar_only")):
        run(["calibrate", *common, mode_flag, "--out", str(calibration)])
        csv_path = out / f"{stem}.csv"
        run(["radar", *common, mode_flag,
             "--calibration", str(calibration), "--out", str(csv_path)])
        radar_csvs.append(csv_path)

    ber_csv = out / "ber_results.csv"
    run(["ber", *common, "--out", str(ber_csv)])

    run(["plot", *map(str, radar_csvs), "--out", str(out / "plots" / "radar")])
    run(["plot", str(ber_csv), "--out", str(out / "plots" / "ber")])

    print(f"\nAll results in {out.resolve()}")


if __name__ == "__main__":
    main()
