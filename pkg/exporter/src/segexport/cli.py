"""Exporter command line: run a config file end to end."""

import argparse
import sys

from .config import load_config
from .errors import ExportError
from .export import export_predictions


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="segexport",
        description="Export out-of-sample segmentation predictions into the "
        "scoring toolkit's dataset formats.",
    )
    parser.add_argument("--config", required=True, help="JSON or YAML config file")
    args = parser.parse_args(argv)
    try:
        manifest = export_predictions(load_config(args.config))
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"exported {len(manifest['entries'])} images")
    return 0


if __name__ == "__main__":
    sys.exit(main())
