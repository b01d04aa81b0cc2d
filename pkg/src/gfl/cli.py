"""Command line: ``gfl train``, ``gfl bench``, ``gfl synth``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .bench import loglog_slope, timing_benchmark, write_csv
from .config import TrainConfig
from .graph import load_tu_dataset, write_tu_dataset
from .synthetic import generate_synthetic, read_spec
from .train import run_cv


def _train(args) -> int:
    cfg = TrainConfig.from_file(args.config, seed=args.seed)
    if args.deterministic:
        cfg.workers = 1
    metrics = run_cv(cfg, dump_barcodes=args.dump_barcodes, deterministic=args.deterministic)
    payload = json.dumps(metrics.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    print(f"accuracy {100 * metrics.mean:.1f} +- {100 * metrics.std:.1f} over {len(metrics.fold_accuracies)} folds")
    return 0


def _bench(args) -> int:
    ds = load_tu_dataset(args.dataset)
    rows = timing_benchmark(ds.graphs, repeats=args.repeats, seed=args.seed)
    write_csv(rows, args.out)
    if len({m for m, _ in rows}) > 1:
        print(f"{len(rows)} graphs, log-log slope {loglog_slope(rows):.3f}")
    return 0


def _synth(args) -> int:
    spec = read_spec(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    ds = generate_synthetic(spec)
    path = write_tu_dataset(ds, args.out)
    print(f"wrote {len(ds)} graphs ({ds.num_classes} classes) to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gfl", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="cross-validated training")
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--deterministic", action="store_true", help="run folds serially for exact repeatability")
    p.add_argument("--dump-barcodes", metavar="DIR", help="write test-graph barcodes per fold")
    p.add_argument("--out", metavar="METRICS_JSON")
    p.set_defaults(func=_train)

    p = sub.add_parser("bench", help="persistence runtime per graph")
    p.add_argument("--dataset", required=True, help="TU dataset directory")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="TIMINGS_CSV")
    p.set_defaults(func=_bench)

    p = sub.add_parser("synth", help="generate a synthetic dataset in TU format")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"gfl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
