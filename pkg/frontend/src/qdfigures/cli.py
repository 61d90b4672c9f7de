"""CLI: qdfigures render --figure figN --data <dir> --out <file>."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_IDS, RenderError, default_spec, render


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser():
    parser = _Parser(prog="qdfigures")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure from a data directory")
    p_render.add_argument("--figure", required=True, choices=FIGURE_IDS)
    p_render.add_argument("--data", required=True, help="directory with the CSV/JSON datasets")
    p_render.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        render(default_spec(args.figure, args.data), args.out)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
