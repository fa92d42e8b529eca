"""Render experiment CSVs into the standard figure set.

Consumes only the CSV contract of the simulation package: fixed header
``experiment,seed,mode,M,K,snr_db,x_name,x_value,analytic_nats,mc_mean_nats,
mc_ci95,solver_t_star``; the experiment column may carry a ``@confighash``
provenance suffix.  Analytic columns render as lines, Monte Carlo means as
markers with error bars; empty optional columns simply drop that layer.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "figuregen"  # stable element ids
import matplotlib.pyplot as plt  # noqa: E402

EXPECTED_HEADER = ("experiment,seed,mode,M,K,snr_db,x_name,x_value,"
                   "analytic_nats,mc_mean_nats,mc_ci95,solver_t_star")

LN2 = math.log(2.0)

#: figure id -> (x-axis label, series key builder)
FIGURES = {
    "snr-sweep": ("transmit SNR [dB]",
                  lambda r: f"{r['mode']}, M={r['M']}"),
    "aperture-coupling": ("antenna elements M",
                          lambda r: f"{r['mode']}"),
    "mf-vs-optimal": ("antenna elements M",
                      lambda r: f"{r['mode']}, K={r['K']}"),
    "csi-error": ("channel estimation error [dB]",
                  lambda r: f"{r['mode']}, M={r['M']}"),
    "snr-levels": ("antenna elements M",
                   lambda r: f"{r['mode']}, {r['snr_db']} dB"),
}


class SchemaError(ValueError):
    """A CSV does not conform to the expected column contract."""


def read_rows(path: Path) -> tuple[str, list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != EXPECTED_HEADER:
            raise SchemaError(f"{path}: unexpected columns {header!r}")
        rows = list(csv.DictReader(fh, fieldnames=EXPECTED_HEADER.split(",")))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    figure_id = rows[0]["experiment"].split("@", 1)[0]
    if figure_id not in FIGURES:
        raise SchemaError(f"{path}: unknown experiment id {figure_id!r}")
    return figure_id, rows


def _maybe(value: str):
    return float(value) if value != "" else None


def render_figure(figure_id: str, rows: list[dict], out_path: Path,
                  unit: str = "nats") -> Path:
    xlabel, series_key = FIGURES[figure_id]
    scale = 1.0 / LN2 if unit == "bits" else 1.0
    series: dict[str, dict[str, list]] = defaultdict(
        lambda: {"x": [], "mc": [], "ci": [], "ax": [], "ay": []})
    for row in rows:
        key = series_key(row)
        x = float(row["x_value"])
        mc = _maybe(row["mc_mean_nats"])
        ci = _maybe(row["mc_ci95"])
        ana = _maybe(row["analytic_nats"])
        bucket = series[key]
        if mc is not None:
            bucket["x"].append(x)
            bucket["mc"].append(mc * scale)
            bucket["ci"].append((ci or 0.0) * scale)
        if ana is not None:
            bucket["ax"].append(x)
            bucket["ay"].append(ana * scale)

    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    colors = plt.cm.tab10.colors
    for i, (key, bucket) in enumerate(sorted(series.items())):
        color = colors[i % len(colors)]
        if bucket["ay"]:
            order = sorted(range(len(bucket["ax"])),
                           key=bucket["ax"].__getitem__)
            ax.plot([bucket["ax"][j] for j in order],
                    [bucket["ay"][j] for j in order],
                    color=color, lw=1.4, label=f"{key} (analytic)")
        if bucket["mc"]:
            order = sorted(range(len(bucket["x"])), key=bucket["x"].__getitem__)
            ax.errorbar([bucket["x"][j] for j in order],
                        [bucket["mc"][j] for j in order],
                        yerr=[bucket["ci"][j] for j in order],
                        fmt="o", ms=4.0, capsize=2.5, color=color,
                        linestyle="none", label=f"{key} (MC)")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(f"average throughput [{unit}]")
    ax.set_title(figure_id)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    # drop volatile timestamps so identical inputs give identical bytes
    suffix = out_path.suffix.lower()
    metadata = ({"Date": None} if suffix == ".svg"
                else {"CreationDate": None} if suffix == ".pdf" else None)
    fig.savefig(out_path, metadata=metadata)
    plt.close(fig)
    return out_path


def render_figures(csv_dir, out_dir, unit: str = "nats",
                   image_format: str = "svg") -> list[Path]:
    """Render every recognized experiment CSV in ``csv_dir``; returns paths."""
    csv_dir = Path(csv_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    produced = []
    for path in sorted(csv_dir.glob("*.csv")):
        figure_id, rows = read_rows(path)
        out_path = out_dir / f"{figure_id}.{image_format}"
        produced.append(render_figure(figure_id, rows, out_path, unit))
    if not produced:
        raise FileNotFoundError(f"no CSV files found under {csv_dir}")
    return produced


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figuregen", description="Render experiment CSVs into figures")
    parser.add_argument("--csv-dir", required=True)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--unit", choices=("nats", "bits"), default="nats")
    parser.add_argument("--format", default="svg",
                        help="image format (svg, pdf, png, ...)")
    args = parser.parse_args(argv)
    try:
        paths = render_figures(args.csv_dir, args.out_dir, args.unit,
                               args.format)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
