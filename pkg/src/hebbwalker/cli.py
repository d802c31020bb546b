"""Command-line interface.

Verbs: train, eval, analyze, compare. Exit codes: 0 success, 1 usage or
configuration error, 2 runtime failure.
"""

import argparse
import sys

from .errors import ConfigError, InputError


def _parse_seeds(text):
    try:
        return tuple(int(s) for s in str(text).split(",") if s != "")
    except ValueError:
        raise InputError(f"--seeds expects comma-separated integers, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hebbwalker",
        description="Train and analyze plastic locomotion controllers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run one training configuration")
    p.add_argument("--config", required=True, help="path to the run config JSON")
    p.add_argument("--out", help="override the config's output directory")
    p.add_argument("--workers", type=int, help="population evaluation workers")
    p.add_argument("--resume", help="checkpoint file to continue from")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p = sub.add_parser("eval", help="evaluate a checkpointed policy")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--terrain", help="'flat' or 'blocks[:h_max[:seed]]' (default: training terrain)")
    p.add_argument("--damage", default="none", help="damage preset, e.g. lf, rh, lf_rf")
    p.add_argument("--seeds", default="0", help="comma-separated evaluation seeds")
    p.add_argument("--trace", action="store_true", help="write EpisodeTrace files")
    p.add_argument("--out", help="output directory (default: next to the checkpoint)")
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("analyze", help="PCA / attractor / spread reports for traces")
    p.add_argument("traces", nargs="+", help="trace files to analyze")
    p.add_argument("-q", "--components", type=int, default=3)
    p.add_argument("--skip", type=int, default=100, help="steps to skip for PC spread")
    p.add_argument("--out", default=".")
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("compare", help="train-or-load configs and run the shared battery")
    p.add_argument("--config", action="append", required=True,
                   help="run config JSON (repeat for each policy)")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--out", default="compare_out")
    p.add_argument("--workers", type=int)
    p.add_argument("--no-figures", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return 0 if exc.code == 0 else 1

    from . import harness

    try:
        if args.command == "train":
            harness.cmd_train(
                args.config, out=args.out, workers=args.workers, resume=args.resume,
                render_figures=not args.no_figures,
            )
        elif args.command == "eval":
            harness.cmd_eval(
                args.checkpoint, terrain=args.terrain, damage=args.damage,
                seeds=_parse_seeds(args.seeds), save_traces=args.trace,
                out=args.out, render_figures=not args.no_figures,
            )
        elif args.command == "analyze":
            harness.cmd_analyze(
                args.traces, q=args.components, skip=args.skip, out=args.out,
                render_figures=not args.no_figures,
            )
        elif args.command == "compare":
            harness.cmd_compare(
                args.config, seeds=_parse_seeds(args.seeds), out=args.out,
                workers=args.workers, render_figures=not args.no_figures,
            )
    except (ConfigError, InputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
