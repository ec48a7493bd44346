"""CLI: `figrender render --spec <spec.json>` or `figrender render --bundle <dir>`.

A spec file is JSON with keys family, input_csv, output_svg, and optional
low_support_floor / title. Bundle mode reads bundle_manifest.json and
renders every listed CSV next to it (or under --out).
"""

from __future__ import annotations

import argparse
import json
import sys

from .render import FigureSpec, render, render_bundle
from .schema import SchemaError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figrender")
    sub = parser.add_subparsers(dest="command")
    r = sub.add_parser("render", help="render one spec or a whole bundle")
    r.add_argument("--spec", help="JSON figure spec")
    r.add_argument("--bundle", help="directory with bundle_manifest.json")
    r.add_argument("--out", help="output directory (bundle mode)")
    r.add_argument("--floor", type=int, default=None,
                   help="low-support floor override")
    return parser


def run(argv) -> int:
    args = _build_parser().parse_args(argv)
    if args.command != "render" or not (args.spec or args.bundle):
        _build_parser().print_usage(sys.stderr)
        return 2
    try:
        if args.spec:
            payload = json.loads(open(args.spec, encoding="utf-8").read())
            if args.floor is not None:
                payload["low_support_floor"] = args.floor
            render(FigureSpec(**payload))
        else:
            render_bundle(args.bundle, args.out, args.floor)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
