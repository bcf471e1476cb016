"""``antbalance`` command line: ``run``, ``sweep`` and ``compare``.

Exit codes: 0 success, 1 configuration error, 2 runtime error (for example an
unwritable output path).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from . import experiments
from .config import ALL_KEYS, ConfigError, parse_config
from .engine import Simulation, write_trace
from .metrics import REPORT_FIELDS

OUTPUT_DIR_ENV = "ANTBALANCE_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("antbalance")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat TOML file; keys match the flag names with underscores")
    group = p.add_argument_group("config overrides")
    for key in ALL_KEYS:
        flags = ["--" + key.replace("_", "-")]
        if key == "num_ants":
            flags.append("--ants")
        # values are parsed by the config layer so file and flags share validation
        group.add_argument(*flags, dest=key, default=None, metavar=key.upper())
    p.add_argument("--format", choices=("csv", "json-lines"), default="csv")
    p.add_argument("-o", "--output", type=Path, help=f"output file (default: ${OUTPUT_DIR_ENV}/<cmd>.<ext> or stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep/compare")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="antbalance", description="Ant-colony load balancing simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one simulation and write its report")
    _add_config_flags(run)
    run.add_argument("--trace", type=Path, help="write the event trace as json-lines")

    sweep = sub.add_parser("sweep", help="ant-count sweep against the published pheromone bands")
    _add_config_flags(sweep)
    sweep.add_argument("--plot-data", type=Path, help="write two-column (ants, pheromone_mean) data")

    compare = sub.add_parser("compare", help="compare ACO with random, round-robin and least-loaded dispatch")
    _add_config_flags(compare)
    return parser


@contextlib.contextmanager
def _open_output(path: Path | None, command: str, fmt: str):
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        ext = "csv" if fmt == "csv" else "jsonl"
        path = Path(os.environ[OUTPUT_DIR_ENV]) / f"{command}.{ext}"
    if path is None:
        yield sys.stdout
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _write_report(report, fh, fmt: str) -> None:
    rec = report.as_record()
    if fmt == "csv":
        fh.write(",".join(REPORT_FIELDS) + "\n")
        fh.write(",".join(_fmt(rec[k]) for k in REPORT_FIELDS) + "\n")
    else:
        rec["load_stddev_timeseries"] = [round(v, 10) for v in report.load_stddev_timeseries]
        fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def _fmt(value) -> str:
    return f"{value:.10f}" if isinstance(value, float) else str(value)


def dispatch(args: argparse.Namespace) -> int:
    overrides = {k: getattr(args, k) for k in ALL_KEYS}
    try:
        data = args.config.read_bytes() if args.config else None
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_CONFIG
    try:
        settings = parse_config(data, overrides)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    if args.jobs < 1:
        log.error("config error: --jobs must be positive")
        return EXIT_CONFIG

    try:
        if args.command == "run":
            sim = Simulation(settings.sim)
            report = sim.run()
            if args.trace:
                args.trace.parent.mkdir(parents=True, exist_ok=True)
                with open(args.trace, "w", encoding="utf-8", newline="") as fh:
                    write_trace(sim.trace, fh)
            with _open_output(args.output, "run", args.format) as fh:
                _write_report(report, fh, args.format)
        elif args.command == "sweep":
            rows = experiments.sweep_table1(settings.sweep, jobs=args.jobs)
            with _open_output(args.output, "sweep", args.format) as fh:
                experiments.write_sweep(rows, fh, args.format)
            if args.plot_data:
                with open(args.plot_data, "w", encoding="utf-8", newline="") as fh:
                    experiments.write_plot_data(rows, fh)
        elif args.command == "compare":
            comp = experiments.compare_policies(settings.sim, list(settings.seeds), jobs=args.jobs)
            with _open_output(args.output, "compare", args.format) as fh:
                experiments.write_comparison(comp, fh, args.format)
    except OSError as exc:
        log.error("runtime error: %s", exc)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
