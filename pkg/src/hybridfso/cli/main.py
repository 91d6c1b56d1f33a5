"""Command-line entry point.

Exit codes: 0 success, 1 configuration or usage error, 2 verification
failure, 3 numerical failure in at least one cell.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ConfigError
from .config import Mode, parse_config
from .presets import PRESETS, figure_preset
from .sweep import run_sweep, verify, write_curves, write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--trials", type=int, help="Monte Carlo trials per cell (overrides the config)")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--out", help="output CSV path (figure: output directory)")

    p = _Parser(prog="hybridfso", description="Outage and BER of the relay-assisted hybrid FSO/RF link.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("analytic", "closed-form values"), ("simulate", "Monte Carlo estimates")):
        sp = sub.add_parser(name, parents=[common], help=f"evaluate a sweep: {text}")
        sp.add_argument("config")
    sp = sub.add_parser("verify", parents=[common], help="gate closed forms against Monte Carlo")
    sp.add_argument("config")
    sp.add_argument("--tolerance-stderr-mult", type=float, default=3.0,
                    help="allowed |analytic - sim| in standard errors (default 3)")
    sp = sub.add_parser("figure", parents=[common], help="regenerate a figure preset")
    sp.add_argument("name", choices=sorted(PRESETS))
    sp.add_argument("--analytic-only", action="store_true", help="skip the Monte Carlo columns")
    return p


def _apply_overrides(spec, args, mode):
    changes = {"mode": mode}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    return spec.with_(**changes)


def _numerical_failures(rows) -> int:
    bad = [r for r in rows if r.failed]
    for r in bad:
        print(f"numerical failure: {r.scheme} N={r.n_users} gamma_avg_db={r.gamma_avg_db!r} "
              f"metric={r.metric}: {r.status}", file=sys.stderr)
    return len(bad)


def _default_out(config: str, command: str) -> Path:
    return Path(f"{Path(config).stem}-{command}.csv")


def _run(args) -> int:
    if args.workers < 1:
        raise ConfigError(f"--workers: must be positive, got {args.workers}")
    if args.trials is not None and args.trials < 1:
        raise ConfigError(f"--trials: must be positive, got {args.trials}")

    if args.command == "figure":
        spec = figure_preset(args.name)
        spec = _apply_overrides(spec, args, Mode.ANALYTIC if args.analytic_only else Mode.BOTH)
        out_dir = Path(args.out or ".")
        rows = run_sweep(spec, workers=args.workers)
        path = write_outputs(rows, spec, out_dir / f"{args.name}.csv")
        curves = write_curves(rows, out_dir, args.name)
        print(f"wrote {path} and {len(curves)} curve files")
        return EXIT_NUMERICAL if _numerical_failures(rows) else EXIT_OK

    spec = parse_config(args.config)
    if args.command == "analytic":
        mode = Mode.ANALYTIC
    elif args.command == "simulate":
        mode = Mode.BOTH if spec.mode is Mode.BOTH else Mode.SIMULATE
    else:
        mode = Mode.BOTH
    spec = _apply_overrides(spec, args, mode)
    out = Path(args.out or spec.output_path or _default_out(args.config, args.command))
    rows = run_sweep(spec, workers=args.workers)
    path = write_outputs(rows, spec, out)
    print(f"wrote {path} ({len(rows)} rows)")
    n_bad = _numerical_failures(rows)

    if args.command != "verify":
        return EXIT_NUMERICAL if n_bad else EXIT_OK

    report = verify(rows, args.tolerance_stderr_mult)
    report_path = path.with_name(path.name + ".verify.json")
    report_path.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for c in report.checks:
        dev = "zero/full count" if c.deviation is None else f"{c.deviation:.2f} stderr"
        r = c.row
        print(f"{'PASS' if c.passed else 'FAIL'} {r.scheme} N={r.n_users} xi={r.xi!r} "
              f"gamma_avg_db={r.gamma_avg_db!r} {r.metric}: analytic={r.analytic_value!r} "
              f"sim={r.sim_value!r} ({dev})")
    print(f"verify: {len(report.failures)}/{len(report.checks)} cells outside "
          f"{report.stderr_mult:g} stderr ({100 * report.fail_fraction:.1f}%, allowed 2%) -> "
          f"{'PASS' if report.passed else 'FAIL'}")
    if n_bad:
        return EXIT_NUMERICAL
    return EXIT_OK if report.passed else EXIT_VERIFY


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
