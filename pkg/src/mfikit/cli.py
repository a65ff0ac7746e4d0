"""Command-line entry points.

Subcommands mirror the experiment campaigns (``ksweep``, ``accuracy``,
``cd-tolerance``, ``complexity``) plus a one-shot ``classify`` for a single
sample-frame file. All experiment outputs are deterministic CSV for a
fixed config and seed.
"""

from __future__ import annotations

import argparse
import json
import sys

from mfikit.frameio import FrameFormatError, read_frame
from mfikit.frontend import compensate_cd, to_symbol_rate
from mfikit.harness import (
    ExperimentConfig,
    run_accuracy,
    run_cd_tolerance,
    run_complexity,
    run_ksweep,
)
from mfikit.histokey import histogram_to_csv
from mfikit.mfi import DecisionTable, identify
from mfikit.sim import ModFormat


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        cfg = ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if getattr(args, "trials", None) is not None:
        cfg.trials = args.trials
    if getattr(args, "n_symbols", None) is not None:
        cfg.n_symbols = args.n_symbols
    if getattr(args, "format", None):
        cfg.formats = [ModFormat.from_label(v) for v in args.format]
    if getattr(args, "osnr", None):
        cfg.osnr_grid_db = [float(v) for v in args.osnr]
    if getattr(args, "cd", None):
        cfg.cd_grid_ps_nm = [float(v) for v in args.cd]
    # re-validate after overrides
    return ExperimentConfig(**vars(cfg))


def _add_common(parser: argparse.ArgumentParser, with_grid_overrides: bool = True) -> None:
    parser.add_argument("--config", help="experiment config JSON file")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument("--seed", type=int, help="override the base seed")
    parser.add_argument("--jobs", type=int, help="parallel worker processes")
    if with_grid_overrides:
        parser.add_argument("--trials", type=int, help="override trials per grid point")
        parser.add_argument("--n-symbols", dest="n_symbols", type=int, help="override symbols per trial")
        parser.add_argument(
            "--format", action="append", metavar="FMT",
            help="restrict to a format (repeatable): QPSK, 8PSK, 16QAM, 32QAM, 64QAM",
        )
        parser.add_argument("--osnr", action="append", metavar="DB", help="override OSNR grid (repeatable)")
        parser.add_argument("--cd", action="append", metavar="PS_NM", help="override residual-CD grid (repeatable)")


def _cmd_classify(args) -> int:
    try:
        frame = read_frame(args.input)
    except (FrameFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.compensate_cd:
            frame = compensate_cd(frame, args.compensate_cd)
        if frame.samples_per_symbol > 1:
            symbols = to_symbol_rate(frame, args.rolloff)
        else:
            symbols = frame.samples
        table = DecisionTable.load(args.table) if args.table else None
        decision = identify(symbols, table=table, seed=args.seed or 0)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = {
        "format": decision.label,
        "k_star": decision.k_star,
        "f_star": None if decision.sweep is None else round(decision.f_star, 9),
        "key_blocks": len(decision.key_blocks),
    }
    print(json.dumps(payload))
    if args.fcurve_out and decision.sweep is not None:
        _write_text(args.fcurve_out, decision.sweep.to_csv())
    if args.hist_out:
        _write_text(args.hist_out, histogram_to_csv(decision.histogram))
    return 0 if decision.fmt is not None else 2


def _cmd_ksweep(args) -> int:
    _write_text(args.out, run_ksweep(_load_config(args)))
    return 0


def _cmd_accuracy(args) -> int:
    _write_text(args.out, run_accuracy(_load_config(args)))
    return 0


def _cmd_cd_tolerance(args) -> int:
    _write_text(args.out, run_cd_tolerance(_load_config(args)))
    return 0


def _cmd_complexity(args) -> int:
    result = run_complexity(_load_config(args))
    _write_text(args.out, result.summary_csv())
    if args.detail_out:
        _write_text(args.detail_out, result.detail_csv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfikit",
        description="Modulation format identification experiments on a simulated coherent link.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="identify the format of one sample-frame file")
    p.add_argument("input", help="binary sample-frame file")
    p.add_argument("--compensate-cd", type=float, default=0.0, metavar="PS_NM",
                   help="dispersion to compensate before identification")
    p.add_argument("--rolloff", type=float, default=0.1, help="matched-filter rolloff")
    p.add_argument("--table", help="decision-table JSON path")
    p.add_argument("--seed", type=int, help="clustering seed")
    p.add_argument("--fcurve-out", help="write the f(k) curve CSV here")
    p.add_argument("--hist-out", help="write the 2D histogram CSV here")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("ksweep", help="k* per (format, OSNR, trial)")
    _add_common(p)
    p.set_defaults(func=_cmd_ksweep)

    p = sub.add_parser("accuracy", help="identification accuracy per (format, OSNR)")
    _add_common(p)
    p.set_defaults(func=_cmd_accuracy)

    p = sub.add_parser("cd-tolerance", help="accuracy vs residual CD at operating OSNR")
    _add_common(p)
    p.set_defaults(func=_cmd_cd_tolerance)

    p = sub.add_parser("complexity", help="runtime of the proposed pipeline vs DBSCAN")
    _add_common(p)
    p.add_argument("--detail-out", help="write per-trial timing CSV here")
    p.set_defaults(func=_cmd_complexity)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
