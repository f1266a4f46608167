"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from . import oracle
from .exceptions import ConfigError
from .sweep import PROTOCOLS, FIGURES, SweepConfig, figure_config, run_sweep, to_csv, write_outputs

log = logging.getLogger("wmdistill")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_param_options(p):
    for name in ("d", "w", "d1", "d2", "w1", "w2"):
        p.add_argument(f"--{name}", help=f"{name} value or start:stop:step range")
    p.add_argument("--N", help="number of parties (W states); value or range")
    p.add_argument("--m", type=int, help="recurrence rounds (default 10)")
    p.add_argument("--n", type=int, help="bisection copies, a power of two (default 32)")
    p.add_argument("--epsilon", type=float, help="target infidelity (default 1e-6)")


def _params_into(cfg: SweepConfig, args) -> None:
    for name in ("d", "w", "d1", "d2", "w1", "w2", "N"):
        value = getattr(args, name, None)
        if value is None:
            continue
        if ":" in value:
            cfg.axes[name] = value
        else:
            cfg.fixed[name] = float(value) if name != "N" else int(value)
    for name in ("m", "n", "epsilon"):
        value = getattr(args, name, None)
        if value is not None:
            cfg.fixed[name] = value
    # re-run normalization of axis ranges
    cfg.__post_init__()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wmdistill", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", help="evaluate a protocol on a parameter grid")
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--config", help="JSON file with protocol/axes/fixed/out/jobs")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--jobs", type=int, help="worker processes")
    _add_param_options(p)

    p = sub.add_parser("figure", help="reproduce the data behind a figure")
    p.add_argument("figure_id", choices=sorted(FIGURES))
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("optimal-w", help="optimal filter strength over a d range")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--N", default="3")
    p.add_argument("--d", default="0.001:0.249:0.001")
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("validate", help="run the density-matrix oracle against every closed form")
    p.add_argument("--seed", type=int, default=oracle.DEFAULT_SEED)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--N", type=int, nargs="+", default=[3, 4, 5], help="W-state party counts")
    p.add_argument("--out", help="CSV report path")
    return parser


def _emit(cfg: SweepConfig, header, rows) -> None:
    if cfg.out:
        write_outputs(cfg, header, rows, cfg.out)
        log.info("wrote %d rows to %s", len(rows), cfg.out)
    else:
        sys.stdout.write(to_csv(header, rows))


def _cmd_sweep(args) -> int:
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = SweepConfig.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    elif args.protocol:
        cfg = SweepConfig(args.protocol)
    else:
        raise ConfigError("sweep needs --protocol or --config")
    if args.protocol:
        cfg.protocol = args.protocol
    if args.out:
        cfg.out = args.out
    if args.jobs:
        cfg.jobs = args.jobs
    _params_into(cfg, args)
    if cfg.protocol == "validate":
        return _run_validation(oracle.DEFAULT_SEED, 50, [3, 4, 5], cfg.out)
    header, rows = run_sweep(cfg)
    _emit(cfg, header, rows)
    return EXIT_OK


def _cmd_figure(args) -> int:
    cfg = figure_config(args.figure_id, args.out, args.jobs)
    header, rows = run_sweep(cfg)
    _emit(cfg, header, rows)
    return EXIT_OK


def _cmd_optimal_w(args) -> int:
    cfg = SweepConfig("optimal-w", out=args.out, jobs=args.jobs)
    _params_into(cfg, args)
    header, rows = run_sweep(cfg)
    _emit(cfg, header, rows)
    return EXIT_OK


def _run_validation(seed, samples, parties, out) -> int:
    run = oracle.run_all(seed=seed, samples=samples, w_parties=parties)
    fields = ["quantity", "case", "closed_form", "simulated", "abs_error", "tolerance", "pass"]
    target = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.DictWriter(target, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for r in run.reports:
            row = r.as_row()
            writer.writerow({k: (format(row[k], ".17g") if isinstance(row[k], float) else row[k]) for k in fields})
    finally:
        if out:
            target.close()
    n_fail = len(run.failures)
    print(f"validation seed={seed} samples={samples}: {len(run.reports) - n_fail}/{len(run.reports)} checks passed",
          file=sys.stderr)
    return EXIT_OK if n_fail == 0 else EXIT_VALIDATION


def _cmd_validate(args) -> int:
    return _run_validation(args.seed, args.samples, args.N, args.out)


COMMANDS = {"sweep": _cmd_sweep, "figure": _cmd_figure, "optimal-w": _cmd_optimal_w, "validate": _cmd_validate}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"wmdistill: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
