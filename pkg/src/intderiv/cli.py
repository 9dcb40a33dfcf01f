"""Command-line front end.

    intderiv run <config.json> [--out DIR] [--decimate M] [--plot]
    intderiv check-config <config.json>
    intderiv alpha <n> <alpha_n>
    intderiv routh <c_n> ... <c_0>
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, IntegrationDiverged
from .scenarios import load_scenario, plot_trace, run_scenario, write_report, write_trace_csv
from .stability import alpha_chain, routh_hurwitz


def _cmd_run(args):
    spec = load_scenario(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        trace, lines, extra = run_scenario(spec)
    except IntegrationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.trace is not None:
            write_trace_csv(out / f"{spec.name}.partial.csv", exc.trace, ["diverged = 1"], spec.to_dict())
        return 3
    config = spec.to_dict()
    if trace is not None:
        write_trace_csv(out / f"{spec.name}.csv", trace.decimate(args.decimate), lines, config)
        if args.plot:
            labels = spec.observer.channel_labels
            plot_trace(out / f"{spec.name}.svg", trace.decimate(args.decimate), labels)
    else:
        # sweep: one CSV per valid member, summary in the metrics file
        for row in extra.rows:
            if row.trace is not None:
                member = dict(config, observer=dict(config["observer"], epsilon=row.epsilon))
                member["scheme"] = dict(config["scheme"], dt=row.dt)
                write_trace_csv(
                    out / f"{spec.name}_eps{row.epsilon:g}.csv",
                    row.trace.decimate(args.decimate),
                    row.metrics.lines(),
                    member,
                )
    write_report(out / f"{spec.name}.metrics.txt", lines)
    print("\n".join(lines))
    return 0


def _cmd_check(args):
    try:
        spec = load_scenario(args.config)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(d)
        return 1
    print(f"ok: {spec.tag} scenario {spec.name!r} with observer {spec.observer.channel_labels}")
    return 0


def _cmd_alpha(args):
    chain = alpha_chain(args.n, args.alpha_n)
    for i, a in enumerate(chain.alphas, start=1):
        print(f"alpha_{i} = {a:.17g}")
    return 0


def _cmd_routh(args):
    table = routh_hurwitz(args.coeffs)
    print(table.format())
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="intderiv", description="integral-derivative observer toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario document")
    p.add_argument("config", type=Path)
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--decimate", type=int, default=1, help="keep every M-th trace row in the CSV")
    p.add_argument("--plot", action="store_true", help="also write an SVG plot")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("check-config", help="print every validation diagnostic")
    p.add_argument("config", type=Path)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("alpha", help="print the exponent chain")
    p.add_argument("n", type=int)
    p.add_argument("alpha_n", type=float)
    p.set_defaults(func=_cmd_alpha)

    p = sub.add_parser("routh", help="Routh table and verdict, coefficients in descending powers")
    p.add_argument("coeffs", type=float, nargs="+")
    p.set_defaults(func=_cmd_routh)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
