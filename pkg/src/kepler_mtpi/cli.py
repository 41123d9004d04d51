"""Command-line interface: ``kepler-mtpi run|compare|paper``.

Exit codes: 0 success, 2 configuration error, 3 integrator failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

from . import bench, config
from .bench import FailedRun, RunResult
from .diagnostics import METRICS
from .errors import ConfigError, KeplerError

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRATOR, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output directory (default: $KEPLER_OUT_DIR or ./out)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--plot", action="store_true", help="also write SVG plots")
    p.add_argument("--periods", type=float, default=None, help="duration in orbital periods")
    p.add_argument("--stride", type=int, default=None, help="record every K-th step")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kepler-mtpi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a single scenario")
    run.add_argument("--config", help="TOML scenario file")
    run.add_argument("--method", choices=bench.METHODS)
    run.add_argument("--step", type=float, help="dt for fixed-step methods, h0 for mtpi")
    run.add_argument("--steps", type=int, help="duration in steps")
    run.add_argument("--q0", type=float, nargs=3, metavar=("X", "Y", "Z"))
    run.add_argument("--p0", type=float, nargs=3, metavar=("X", "Y", "Z"))
    run.add_argument("--m", type=float)
    run.add_argument("--k", type=float)
    run.add_argument("--label")
    _common(run)

    cmp_ = sub.add_parser("compare", help="run every [[scenario]] of a config file")
    cmp_.add_argument("config", help="TOML file with [[scenario]] tables")
    _common(cmp_)

    paper = sub.add_parser("paper", help="reference four-method comparison")
    _common(paper)
    return parser


def _run_values(args) -> dict:
    values = {
        "q0": list(bench.REF_Q0),
        "p0": list(bench.REF_P0),
        "m": bench.REF_M,
        "k": bench.REF_K,
        "method": "mtpi",
    }
    if args.config:
        defaults, tables = config.load(args.config)
        if len(tables) > 1:
            raise ConfigError("run takes a single scenario; use compare for [[scenario]] lists")
        values.update(defaults)
        if tables:
            values.update(tables[0])
    for key, attr in (("method", "method"), ("step", "step"), ("q0", "q0"), ("p0", "p0"),
                      ("m", "m"), ("k", "k"), ("label", "label"), ("stride", "stride")):
        v = getattr(args, attr)
        if v is not None:
            values[key] = v
    if args.steps is not None:
        values["n_steps"], values["n_periods"] = args.steps, None
    if args.periods is not None:
        values["n_periods"], values["n_steps"] = args.periods, None
    if values.get("step") is None:
        values["step"] = bench.REF_STEPS.get(values["method"])
    return values


def _scenarios(args) -> list[bench.Scenario]:
    if args.command == "run":
        return [config.build_scenario(_run_values(args))]
    if args.command == "compare":
        defaults, tables = config.load(args.config)
        if not tables:
            raise ConfigError("scenario: compare needs at least one [[scenario]] table")
        out = []
        for t in tables:
            values = {**defaults, **t}
            if args.periods is not None:
                values["n_periods"], values["n_steps"] = args.periods, None
            if args.stride is not None:
                values["stride"] = args.stride
            out.append(config.build_scenario(values))
        labels = [s.label for s in out]
        if len(set(labels)) != len(labels):
            raise ConfigError("label: scenario labels must be unique (they name the output files)")
        return out
    periods = 5.0 if args.periods is None else args.periods
    return bench.paper_scenarios(periods, args.stride or 1)


def _fmt(v) -> str:
    return "-" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.3e}"


def _report(results) -> None:
    head = f"{'label':<14}{'steps':>10}{'steps/period':>14}" + "".join(f"{m:>11}" for m in METRICS)
    print(head)
    for r in results:
        if isinstance(r, FailedRun):
            print(f"{r.scenario.label:<14} FAILED: {r.error}")
            continue
        s = r.summary
        print(f"{r.scenario.label:<14}{r.n_steps:>10}{r.steps_per_period:>14.6g}"
              + "".join(f"{_fmt(getattr(s, m)):>11}" for m in METRICS))


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out or os.environ.get("KEPLER_OUT_DIR") or "out"
    try:
        scenarios = _scenarios(args)
        results = bench.run_comparison(scenarios)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeplerError as exc:
        print(f"integrator failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        bench.write_outputs(results, out_dir, args.format, args.plot)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    _report(results)
    print(f"outputs written to {out_dir}")
    if any(isinstance(r, FailedRun) for r in results):
        return EXIT_INTEGRATOR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
