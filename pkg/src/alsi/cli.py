"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 data/contract error, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .exceptions import (ContractViolation, DataError, FactorizationError,
                         SingularMatrixError)
from .pipeline import Pipeline, RunConfig, load_config, save_config
from .synth import generate_synthetic, write_expression_csv, write_truth_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

STAGE_COMMANDS = {
    "filter": "run_filter",
    "similarity": "run_similarity",
    "fuse": "run_fuse",
    "embed": "run_embed",
    "cluster": "run_cluster",
    "map": "run_map",
    "baselines": "run_baselines",
    "report": "run_report",
    "run-all": "run_all",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_config_flags(p: _Parser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--input", help="expression CSV")
    p.add_argument("--outdir", help="artifact directory")
    p.add_argument("--cv-threshold", type=float, dest="cv_threshold")
    p.add_argument("--cv-convention", dest="cv_convention",
                   choices=["sd-over-mean", "mean-over-sd"])
    p.add_argument("--binarize-override", type=float, dest="binarize_override")
    p.add_argument("--tau", type=float)
    p.add_argument("--combiner", choices=["arithmetic", "geometric", "harmonic"])
    p.add_argument("--combiner-t", type=float, dest="combiner_t")
    p.add_argument("--ridge", type=float)
    p.add_argument("--energy", type=float)
    p.add_argument("--whitened", action="store_const", const=True)
    p.add_argument("--q", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--rel-tol", type=float, dest="rel_tol")
    p.add_argument("--gmm-ridge", type=float, dest="gmm_ridge")
    p.add_argument("--covariance", choices=["diagonal", "full"])
    p.add_argument("--dims", type=int)
    p.add_argument("--top-k", type=int, dest="top_k")
    p.add_argument("--seed", type=int)
    p.add_argument("--no-svg", action="store_const", const=False, dest="svg")


def build_parser() -> _Parser:
    parser = _Parser(prog="alsi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGE_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        _add_config_flags(p)

    g = sub.add_parser("synth", help="generate a synthetic expression corpus")
    g.add_argument("--n", type=int, default=8, help="experiments")
    g.add_argument("--p", type=int, default=20, help="signal genes")
    g.add_argument("--depth", type=int, default=3, help="hierarchy depth")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="expression CSV path")
    g.add_argument("--truth", help="ground-truth CSV path")

    c = sub.add_parser("write-config", help="write a default config file")
    c.add_argument("--out", required=True)
    return parser


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            setattr(cfg, f.name, val)
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        if args.command == "synth":
            y, truth = generate_synthetic(args.n, args.p, depth=args.depth,
                                          seed=args.seed)
            write_expression_csv(args.out, y)
            if args.truth:
                write_truth_csv(args.truth, truth)
            print(f"wrote {args.out}: {len(y.experiments)} experiments x "
                  f"{len(y.genes)} genes")
            return EXIT_OK
        if args.command == "write-config":
            save_config(RunConfig(), args.out)
            print(f"wrote {args.out}")
            return EXIT_OK
        cfg = config_from_args(args)
        pipe = Pipeline(cfg)
        getattr(pipe, STAGE_COMMANDS[args.command])()
        print(f"{args.command}: ok ({Path(cfg.outdir) / 'manifest.json'})")
        return EXIT_OK
    except (DataError, ContractViolation, FileNotFoundError) as exc:
        print(f"alsi: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FactorizationError, SingularMatrixError) as exc:
        print(f"alsi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
