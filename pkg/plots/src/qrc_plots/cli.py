"""Command line entry point: ``qrc-plots <figure-spec.json> [more specs...]``."""

from __future__ import annotations

import argparse
import sys

from .figspec import FigureSpec, SpecError
from .render import SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qrc-plots",
        description="Render figures from qrc-lab experiment CSVs.")
    parser.add_argument("specs", nargs="+", help="figure-spec JSON files")
    args = parser.parse_args(argv)
    status = 0
    for spec_path in args.specs:
        try:
            out = render(FigureSpec.from_file(spec_path))
            print(out)
        except (SpecError, SchemaError, FileNotFoundError) as exc:
            print(f"qrc-plots: {spec_path}: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
