"""plotkit command line: render charts from experiment CSVs.

Either point --spec at a JSON file, or give CSV paths positionally
with --kind and --out.  Exit codes: 0 success, 1 unusable input data,
2 bad invocation or spec.
"""

from __future__ import annotations

import argparse
import json
import sys

from .charts import KINDS, PlotSpec, render
from .csvio import EmptyInputError, MissingColumnError, SchemaMismatchError

SPEC_KEYS = {"inputs", "kind", "out", "log_y", "labels", "title"}


class SpecError(ValueError):
    pass


def load_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    unknown = set(data) - SPEC_KEYS
    if unknown:
        raise SpecError(f"unknown spec key(s): {', '.join(sorted(unknown))}")
    try:
        return PlotSpec(
            inputs=tuple(data.get("inputs", ())),
            kind=data.get("kind", ""),
            out=data.get("out", ""),
            log_y=bool(data.get("log_y", False)),
            labels=tuple(data.get("labels", ())),
            title=data.get("title", ""),
        )
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(prog="plotkit",
                                     description="charts from experiment CSVs")
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render one chart or the panel figure")
    rend.add_argument("csvs", nargs="*", help="input CSV paths")
    rend.add_argument("--spec", help="JSON plot spec; overrides positional form")
    rend.add_argument("--kind", choices=KINDS)
    rend.add_argument("--out")
    rend.add_argument("--log-y", action="store_true")
    rend.add_argument("--label", action="append", default=[],
                      help="legend prefix per input, repeatable")
    rend.add_argument("--title", default="")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.spec:
            spec = load_spec(args.spec)
        else:
            if not args.csvs or not args.kind or not args.out:
                parser.error("render needs --spec, or CSV paths with --kind and --out")
            spec = PlotSpec(inputs=tuple(args.csvs), kind=args.kind, out=args.out,
                            log_y=args.log_y, labels=tuple(args.label),
                            title=args.title)
    except (SpecError, ValueError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    try:
        out = render(spec)
    except (SchemaMismatchError, EmptyInputError, MissingColumnError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
