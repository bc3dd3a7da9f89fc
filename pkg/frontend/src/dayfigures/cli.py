"""Command line entry point: render one figure from an artifact directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, FigureSpec, render
from .io import RenderInputError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a figure from daycourse pipeline artifacts.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="pipeline artifact directory")
    parser.add_argument("--out", required=True, help="output image file")
    args = parser.parse_args(argv)

    spec = FigureSpec(kind=args.kind, in_dir=Path(args.in_dir), out_path=Path(args.out))
    try:
        written = render(spec)
    except RenderInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {written}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
