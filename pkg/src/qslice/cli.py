"""Command-line entry point: ``qslice verify``, ``qslice report``, ``qslice table``.

Exit codes: 0 when every selected check passes, 1 when any fails, 2 for a
configuration error (bad flag, bad config file, unknown check id).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .checks import SuiteConfig, check_ids, parse_pairs, run_suite
from .errors import CheckUnknown, ConfigInvalid, InvalidMoments
from .measures import make_measure

__all__ = ["main", "build_parser"]

_CONFIG_KEYS = [f.name for f in fields(SuiteConfig) if f.name not in ("tol", "timing")]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="flat key=value config file")
    for key in _CONFIG_KEYS:
        flag = "--" + key.replace("_", "-")
        p.add_argument(flag, dest=key, metavar="VALUE", default=None,
                       help=f"override config key {key}")
    p.add_argument("--tol", action="append", default=[], metavar="ID/PART=VALUE",
                   help="override one tolerance, e.g. op.bch/composition=1e-6")
    p.add_argument("--no-timing", action="store_true",
                   help="record ms=0 so reports are byte-identical across runs")
    p.add_argument("--check", action="append", default=[], metavar="ID",
                   help="run only this check (repeatable)")
    p.add_argument("--json", metavar="OUT", help="write the JSON report to OUT ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qslice",
                                     description="Numerical verification of quaternionic "
                                                 "slice coherent-state identities.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run checks and print one line per check")
    _add_config_flags(v)
    r = sub.add_parser("report", help="run checks and write the JSON report")
    _add_config_flags(r)
    sub.add_parser("list", help="list check ids")

    t = sub.add_parser("table", help="print tables of derived quantities")
    t.add_argument("what", choices=["moments"])
    t.add_argument("--measure", default="exponential")
    t.add_argument("--upto", type=int, default=10)
    return parser


def _config_from_args(args) -> SuiteConfig:
    base = SuiteConfig()
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config file: {exc}") from exc
        base = SuiteConfig.from_text(text)
    pairs = {k: getattr(args, k) for k in _CONFIG_KEYS if getattr(args, k) is not None}
    for item in args.tol:
        k, sep, val = item.partition("=")
        if not sep:
            raise ConfigInvalid(f"--tol expects ID/PART=VALUE, got {item!r}")
        pairs["tol." + k.strip()] = val
    if args.no_timing:
        pairs["timing"] = "false"
    return SuiteConfig.from_pairs(pairs, base)


def _write(dest: str, text: str) -> None:
    if dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _run(args, print_lines: bool) -> int:
    cfg = _config_from_args(args)
    report = run_suite(cfg, args.check or "all")
    if print_lines:
        for line in report.lines():
            print(line)
    if args.json:
        _write(args.json, report.to_json())
    return report.exit_code


def _table_moments(measure: str, upto: int) -> int:
    if upto < 0:
        raise ConfigInvalid(f"--upto must be >= 0, got {upto}")
    m = make_measure(measure)
    x = m.ratios(upto)
    mu = m.moments(upto)
    rows = [("n", "x_n", "mu_n", "x_n!")]
    for n in range(upto + 1):
        rows.append((str(n), "-" if n == 0 else f"{x[n]:.12g}", f"{mu[n]:.12g}",
                     f"{mu[n]:.12g}"))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return _run(args, print_lines=True)
        if args.command == "report":
            if not args.json:
                raise ConfigInvalid("report needs --json=OUT")
            return _run(args, print_lines=False)
        if args.command == "list":
            for i in check_ids():
                print(i)
            return 0
        return _table_moments(args.measure, args.upto)
    except CheckUnknown as exc:
        print(f"qslice: unknown check id {exc.args[0]!r}; known: {', '.join(check_ids())}",
              file=sys.stderr)
        return 2
    except (ConfigInvalid, InvalidMoments) as exc:
        print(f"qslice: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
