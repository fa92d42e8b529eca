"""Command-line entry point: run experiments, validate oracles, describe configs."""

from __future__ import annotations

import argparse
import sys

from .experiments import (EXPERIMENT_IDS, describe, parse_config,
                          run_experiment)
from .throughput import LN2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hmimolab",
        description="Coupling-aware multi-user MIMO downlink laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config, write CSV")
    p_run.add_argument("config", help="path to the experiment config file")
    p_run.add_argument("--output-dir", default=None,
                       help="override the config's output directory")
    p_run.add_argument("--unit", choices=("nats", "bits"), default="nats",
                       help="unit for the on-screen summary (CSV stays in nats)")

    p_val = sub.add_parser("validate", help="run the oracle suite")
    p_val.add_argument("--full", action="store_true",
                       help="run the slower full oracle grid")

    p_desc = sub.add_parser("describe", help="print an experiment's default config")
    p_desc.add_argument("experiment", choices=EXPERIMENT_IDS)

    p_dump = sub.add_parser("dump-model",
                            help="write a config's coupling matrices to CSV "
                                 "for debugging")
    p_dump.add_argument("config")
    p_dump.add_argument("--m", type=int, default=None,
                        help="array size (default: first m_values entry)")
    p_dump.add_argument("--output-dir", default="model-dump")

    args = parser.parse_args(argv)

    if args.command == "describe":
        sys.stdout.write(describe(args.experiment))
        return 0

    if args.command == "validate":
        from .validate import run_validation
        report, ok = run_validation(full=args.full)
        print(report)
        return 0 if ok else 1

    if args.command == "dump-model":
        return _dump_model(args)

    cfg = parse_config(args.config)
    path = run_experiment(cfg, output_dir=args.output_dir)
    print(f"wrote {path}")
    if args.unit == "bits":
        _print_summary(path, bits=True)
    return 0


def _dump_model(args) -> int:
    from pathlib import Path

    import numpy as np

    from .experiments import build_model_for

    cfg = parse_config(args.config)
    m = args.m if args.m is not None else cfg.m_values[0]
    model = build_model_for(cfg, m)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / f"coupling_m{m}.csv", model.c, delimiter=",")
    np.savetxt(out / f"correlation_m{m}.csv", model.q.real, delimiter=",")
    np.savetxt(out / f"eigenvalues_m{m}.csv", model.spectrum.eigenvalues,
               delimiter=",")
    print(f"wrote coupling, correlation and eigenvalue CSVs to {out}")
    return 0


def _print_summary(csv_path, bits: bool) -> None:
    import csv as _csv

    factor = 1.0 / LN2 if bits else 1.0
    unit = "bits" if bits else "nats"
    with open(csv_path, newline="") as fh:
        reader = _csv.DictReader(fh)
        print(f"mode       M    K  x        mc[{unit}]   analytic[{unit}]")
        for row in reader:
            mc = row["mc_mean_nats"]
            an = row["analytic_nats"]
            mc_s = f"{float(mc) * factor:9.4f}" if mc else "        -"
            an_s = f"{float(an) * factor:9.4f}" if an else "        -"
            print(f"{row['mode']:<9} {row['M']:>4} {row['K']:>3}  "
                  f"{row['x_name']}={float(row['x_value']):g}: {mc_s} {an_s}")


if __name__ == "__main__":
    raise SystemExit(main())
