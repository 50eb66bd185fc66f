"""Command line interface.

Subcommands: ``phantom`` (generate a synthetic dataset), ``run`` (execute a
replicated experiment from a config file), ``eval`` (score a label file
against a truth file), ``sweep`` (grid over regularization weights) and
``report`` (render box-plot figures from metric CSVs).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import (experiment_from_config, parse_config_file,
                     phantom_from_config, sweep_values)
from .dataio import (read_geometry_csv, read_labels_csv, read_matrix_csv,
                     write_geometry_csv, write_labels_csv, write_matrix_csv)
from .experiment import METRICS_HEADER, metrics_rows, run_experiment
from .metrics import all_measures, contingency
from .phantom import Dataset, generate_phantom


def _load_dataset(cfg: dict, config_path) -> Dataset:
    if "data_dir" in cfg:
        base = Path(cfg["data_dir"])
        if not base.is_absolute():
            base = Path(config_path).parent / base
        return Dataset(
            x=read_matrix_csv(base / "x.csv"),
            geometry=read_geometry_csv(base / "geometry.csv"),
            truth=read_labels_csv(base / "truth.csv"),
        )
    return generate_phantom(phantom_from_config(cfg))


def _cmd_phantom(args) -> int:
    cfg = parse_config_file(args.config)
    spec = phantom_from_config(cfg, seed_override=args.seed)
    dataset = generate_phantom(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(dataset.x, out / "x.csv")
    write_geometry_csv(dataset.geometry, out / "geometry.csv")
    write_labels_csv(dataset.truth, out / "truth.csv")
    print(f"wrote phantom ({dataset.x.shape[0]} spectra, "
          f"{dataset.x.shape[1]} channels) to {out}")
    return 0


def _cmd_run(args) -> int:
    cfg = parse_config_file(args.config)
    experiment = experiment_from_config(cfg, seed_override=args.seed)
    dataset = _load_dataset(cfg, args.config)
    records = run_experiment(experiment, dataset, out_dir=args.out,
                             threads=args.threads)
    failures = [r for r in records if r.measures is None]
    print(f"{experiment.method}: {len(records) - len(failures)}/{len(records)} "
          f"replicates scored; results in {args.out}")
    for rec in failures:
        print(f"  replicate {rec.replicate} failed: {rec.error}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    pred = read_labels_csv(args.pred)
    truth = read_labels_csv(args.truth)
    k = args.k if args.k is not None else int(max(pred.max(), truth.max())) + 1
    measures = all_measures(contingency(pred, truth, k))
    header = "E,VI,VD,VDn,VIn"
    row = ",".join("%.12g" % measures[key] for key in header.split(","))
    if args.out:
        Path(args.out).write_text(header + "\n" + row + "\n")
    print(header)
    print(row)
    return 0


def _cmd_sweep(args) -> int:
    cfg = parse_config_file(args.config)
    base = experiment_from_config(cfg, seed_override=args.seed)
    dataset = _load_dataset(cfg, args.config)

    taus = sweep_values(cfg, "sweep_tau") or [base.tau]
    sigma1s = sweep_values(cfg, "sweep_sigma1") or [base.sigma1]
    sigma2s = sweep_values(cfg, "sweep_sigma2") or [base.sigma2]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / "sweep.csv"
    with open(target, "w") as fh:
        fh.write("tau,sigma1,sigma2," + METRICS_HEADER + "\n")
        for tau in taus:
            for s1 in sigma1s:
                for s2 in sigma2s:
                    point = replace(base, tau=tau, sigma1=s1, sigma2=s2)
                    records = run_experiment(point, dataset, out_dir=None,
                                             threads=args.threads)
                    prefix = "%.12g,%.12g,%.12g," % (tau, s1, s2)
                    for row in metrics_rows(records):
                        fh.write(prefix + row + "\n")
    print(f"wrote {target}")
    return 0


def _cmd_report(args) -> int:
    from .report import render_report

    written = render_report(args.metrics, args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvclust",
        description="Spatially coherent clustering via orthogonal NMF with "
                    "TV regularization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_phantom = sub.add_parser("phantom", help="generate a synthetic dataset")
    p_phantom.add_argument("--config", required=True)
    p_phantom.add_argument("--out", required=True)
    p_phantom.add_argument("--seed", type=int, default=None)
    p_phantom.set_defaults(func=_cmd_phantom)

    p_run = sub.add_parser("run", help="run a replicated experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_eval = sub.add_parser("eval", help="score labels against a truth file")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--k", type=int, default=None)
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="grid over tau and sigma values")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_report = sub.add_parser("report", help="render figures from metric CSVs")
    p_report.add_argument("--metrics", nargs="+", required=True)
    p_report.add_argument("--out", required=True)
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
