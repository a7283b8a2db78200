"""Command-line front end.

Exit codes: 0 success, 1 bad usage or configuration, 2 unreadable or
inconsistent input data, 3 unexpected failure.  A JSON config file can
predefine any flag value; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import (
    AlignmentError,
    GeotilingError,
    InvalidArgumentError,
    MissingTileError,
    RasterFormatError,
    UnsupportedCrsError,
)
from .pipeline import (
    JobConfig,
    job_compare,
    job_fuse,
    job_rasterize,
    job_stats,
    job_tile,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

log = logging.getLogger(__name__)


def _add_scheme_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tile-m", type=float, default=None,
                        help="tile extent in ground meters")
    parser.add_argument("--tile-px", type=int, default=None,
                        help="tile extent in pixels")
    parser.add_argument("--stride-div", type=int, default=None, dest="stride_div",
                        help="stride divisor m; stride becomes tile/m (default 1)")
    parser.add_argument("--rounding", choices=("floor", "ceil"), default=None,
                        help="resolve fractional tile counts down or up (default floor)")
    parser.add_argument("--anchor", choices=("center", "corner"), default=None,
                        help="symmetric placement or pin at the raster origin")
    parser.add_argument("--model-px", type=int, default=None, dest="model_px",
                        help="model input size; tiles are resampled to this")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geotiling",
        description="Tile georeferenced rasters, rasterize labels, and fuse "
        "overlapping tile predictions.",
    )
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file with default flag values")
    parser.add_argument("--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p_tile = sub.add_parser("tile", help="cut rasters into model-ready tiles")
    p_tile.add_argument("rasters", nargs="+", type=Path)
    p_tile.add_argument("--out", type=Path, required=True, help="output directory")
    _add_scheme_flags(p_tile)
    p_tile.add_argument("--format", choices=("pgm", "png"), default=None,
                        dest="image_format", help="tile image format (default pgm)")
    p_tile.add_argument("--resample", choices=("nearest", "bilinear"), default=None,
                        help="resampling toward --model-px (default nearest)")
    p_tile.add_argument("--jobs", type=int, default=None, help="parallel rasters")

    p_rast = sub.add_parser("rasterize", help="burn GeoJSON labels into a class grid")
    p_rast.add_argument("--raster", type=Path, required=True)
    p_rast.add_argument("--labels", type=Path, required=True)
    p_rast.add_argument("--out", type=Path, required=True)
    p_rast.add_argument("--class-property", default=None, dest="class_property",
                        help="feature property holding the class id (default class)")
    p_rast.add_argument("--background", type=int, default=None,
                        help="class id for unlabeled pixels (default 0)")

    p_fuse = sub.add_parser("fuse", help="fuse tile predictions into one raster")
    p_fuse.add_argument("--manifest", type=Path, required=True)
    p_fuse.add_argument("--predictions", type=Path, required=True,
                        help="directory of per-tile prediction images")
    p_fuse.add_argument("--out", type=Path, required=True)

    p_stats = sub.add_parser("stats", help="error rate by distance from tile center")
    p_stats.add_argument("--manifest", type=Path, required=True)
    p_stats.add_argument("--predictions", type=Path, required=True)
    p_stats.add_argument("--ground-truth", type=Path, required=True, dest="ground_truth")
    p_stats.add_argument("--out", type=Path, required=True)

    p_cmp = sub.add_parser("compare", help="compare tiling strategies across rasters")
    p_cmp.add_argument("rasters", nargs="+", type=Path)
    p_cmp.add_argument("--out", type=Path, required=True)
    p_cmp.add_argument("--tile-m", type=float, default=None)
    p_cmp.add_argument("--tile-px", type=int, default=None)
    p_cmp.add_argument("--zoom", type=int, default=None)
    p_cmp.add_argument("--rounding", choices=("floor", "ceil"), default=None,
                       help="tile count rounding for the grids (default ceil)")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8008)

    return parser


_CONFIG_KEYS = (
    "tile_m", "tile_px", "stride_div", "rounding", "anchor", "model_px",
    "zoom", "include_partial", "image_format", "resample", "class_property",
    "background", "jobs",
)


def config_from_args(args: argparse.Namespace) -> JobConfig:
    """Defaults, overlaid with the config file, overlaid with explicit flags."""
    cfg = JobConfig()
    if args.config is not None:
        try:
            file_obj = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidArgumentError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(file_obj, dict):
            raise InvalidArgumentError(f"config {args.config} must hold a JSON object")
        cfg = JobConfig.from_dict(file_obj, base=cfg)
    flag_values = {
        key: getattr(args, key) for key in _CONFIG_KEYS if getattr(args, key, None) is not None
    }
    return JobConfig.from_dict(flag_values, base=cfg)


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "serve":
            import uvicorn

            from .service.app import create_app

            uvicorn.run(create_app(), host=args.host, port=args.port)
            return EXIT_OK

        cfg = config_from_args(args)
        if args.command == "tile":
            results, failures = job_tile(args.rasters, args.out, cfg)
            for result in results:
                print(f"{result.raster_id}: {result.tile_count} tiles -> {result.manifest_path}")
            if failures:
                for failure in failures:
                    print(f"error: {failure.raster}: {failure.error}", file=sys.stderr)
                print(
                    f"error: {len(failures)} of {len(args.rasters)} rasters failed",
                    file=sys.stderr,
                )
                return EXIT_DATA
        elif args.command == "rasterize":
            out = job_rasterize(args.raster, args.labels, args.out, cfg)
            print(out)
        elif args.command == "fuse":
            out = job_fuse(args.manifest, args.predictions, args.out)
            print(out)
        elif args.command == "stats":
            out = job_stats(args.manifest, args.predictions, args.ground_truth, args.out)
            print(out)
        elif args.command == "compare":
            out = job_compare(args.rasters, args.out, cfg)
            print(out)
        else:  # pragma: no cover - argparse enforces the choices
            return EXIT_USAGE
        return EXIT_OK
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RasterFormatError, MissingTileError, AlignmentError, UnsupportedCrsError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except GeotilingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
