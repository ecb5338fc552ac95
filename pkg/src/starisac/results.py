"""Result persistence and plot emission.

Experiment records are written as CSV (one row per cell, stable column order)
next to a JSON manifest holding the resolved configuration, penalties and
runtime.  Cell values are formatted with shortest round-trip float repr, so a
rerun with the same config and seed reproduces the CSV byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .experiments import MetricsRecord

__all__ = [
    "ResultsError",
    "write_results",
    "read_results",
    "emit_plots",
    "load_penalty_entries",
    "lookup_penalty",
    "store_penalty",
]


class ResultsError(Exception):
    """Raised when result files are missing, empty or not writable as asked."""


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _parse_cell(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def manifest_path_for(csv_path: Path) -> Path:
    return csv_path.with_suffix(".manifest.json")


def write_results(record: MetricsRecord, csv_path) -> tuple[Path, Path]:
    """Write one record as CSV plus a JSON manifest sidecar; returns both paths."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(record.columns)
        for cell in record.cells:
            writer.writerow([_format_cell(cell[c]) for c in record.columns])
    manifest = {
        "experiment": record.experiment,
        "columns": list(record.columns),
        "n_cells": len(record.cells),
        **record.meta,
    }
    mpath = manifest_path_for(csv_path)
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return csv_path, mpath


def read_results(path) -> list[dict]:
    """Load CSV rows back as dicts with numeric fields parsed."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return []
        return [dict(zip(header, map(_parse_cell, row))) for row in reader]


# ----------------------------------------------------------------------------
# penalty calibration cache
# ----------------------------------------------------------------------------

def load_penalty_entries(path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    with open(path) as fh:
        data = json.load(fh)
    entries = data.get("entries", [])
    if not isinstance(entries, list):
        raise ResultsError(f"{path}: 'entries' must be a list")
    return entries


def lookup_penalty(path, key: dict) -> float | None:
    """Penalty stored for this exact calibration identity, or None."""
    for entry in load_penalty_entries(path):
        if entry.get("key") == json.loads(json.dumps(key)):
            return float(entry["penalty"])
    return None


def store_penalty(path, key: dict, penalty: float) -> None:
    """Insert or replace the cache entry for this calibration identity."""
    path = Path(path)
    entries = [e for e in load_penalty_entries(path) if e.get("key") != json.loads(json.dumps(key))]
    entries.append({"key": key, "penalty": float(penalty)})
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump({"entries": entries}, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------------
# plots
# ----------------------------------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _sorted_xy(rows: list[dict], xkey: str, ykey: str):
    pts = sorted((r[xkey], r[ykey]) for r in rows)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return xs, ys


def _group(rows: list[dict], keys: tuple[str, ...]) -> dict[tuple, list[dict]]:
    out: dict[tuple, list[dict]] = {}
    for row in rows:
        out.setdefault(tuple(row[k] for k in keys), []).append(row)
    return dict(sorted(out.items(), key=lambda kv: tuple(map(str, kv[0]))))


def _plot_ber(rows: list[dict], out_dir: Path) -> list[Path]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 5))
    styles = {"transmissive": "--", "reflective": "-"}
    palette = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    color_of: dict[tuple, str] = {}
    for (m, b, side), group in _group(rows, ("m", "b", "side")).items():
        color = color_of.setdefault((m, b), palette[len(color_of) % len(palette)])
        xs, ys = _sorted_xy(group, "snr_db", "ber")
        ax.semilogy(xs, ys, marker="o", linestyle=styles.get(side, "-"),
                    color=color, label=f"M={m}, b={b}, {side}")
    ax.set_xlabel("reference SNR (dB)")
    ax.set_ylabel("bit error rate")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "ber_vs_snr.svg"
    fig.savefig(path)
    plt.close(fig)
    return [path]


def _plot_radar(rows: list[dict], out_dir: Path) -> list[Path]:
    plt = _pyplot()
    paths = []
    groups = _group(rows, ("p", "with_comm"))

    def style(p, with_comm, color_of, palette):
        color = color_of.setdefault(p, palette[len(color_of) % len(palette)])
        dash = "--" if with_comm else "-"
        tag = "with data" if with_comm else "radar only"
        return color, dash, f"P={p}, {tag}"

    fig, ax = plt.subplots(figsize=(7, 5))
    palette = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    color_of: dict = {}
    for (p, wc), group in groups.items():
        color, dash, label = style(p, wc, color_of, palette)
        xs, ys = _sorted_xy(group, "rcs_m2", "pd")
        ax.semilogx(xs, ys, marker="o", linestyle=dash, color=color, label=label)
    ax.set_xlabel("radar cross-section (m^2)")
    ax.set_ylabel("two-target detection probability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    pd_path = out_dir / "pd_vs_rcs.svg"
    fig.savefig(pd_path)
    plt.close(fig)
    paths.append(pd_path)

    fig, axes = plt.subplots(1, 2, figsize=(11, 5), sharey=True)
    color_of = {}
    for ax, (ykey, title) in zip(
        axes,
        (("rmse_v_tr", "transmissive side"), ("rmse_v_re", "reflective side")),
    ):
        for (p, wc), group in groups.items():
            color, dash, label = style(p, wc, color_of, palette)
            pts = [(r["rcs_m2"], r[ykey]) for r in group
                   if isinstance(r[ykey], (int, float)) and math.isfinite(r[ykey])]
            if not pts:
                continue
            pts.sort()
            ax.loglog([x for x, _ in pts], [y for _, y in pts],
                      marker="o", linestyle=dash, color=color, label=label)
        ax.set_xlabel("radar cross-section (m^2)")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.4)
    axes[0].set_ylabel("velocity RMSE (m/s)")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    rmse_path = out_dir / "rmse_vs_rcs.svg"
    fig.savefig(rmse_path)
    plt.close(fig)
    paths.append(rmse_path)
    return paths


def emit_plots(result_paths, out_dir) -> list[Path]:
    """Render SVG trend plots for one experiment family from its CSV files.

    All inputs must carry the same experiment label; raises ValueError on a
    mix and ResultsError when no data rows are found.
    """
    rows: list[dict] = []
    for path in result_paths:
        rows.extend(read_results(path))
    if not rows:
        raise ResultsError("no result rows found; nothing to plot")
    labels = {row.get("experiment") for row in rows}
    if len(labels) > 1:
        raise ValueError(
            f"mismatched experiment ids {sorted(map(str, labels))}; plot one family at a time"
        )
    label = labels.pop()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if label == "comm":
        return _plot_ber(rows, out_dir)
    if label == "radar":
        return _plot_radar(rows, out_dir)
    raise ValueError(f"unknown experiment id {label!r}")
