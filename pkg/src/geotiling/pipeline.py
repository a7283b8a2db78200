"""File-level jobs shared by the command line and the HTTP service.

Each job takes paths plus a JobConfig, does one unit of work (tile one or
more rasters, rasterize labels, fuse predictions, compute statistics,
compare schemes), and returns the paths it wrote.  Jobs raise package
errors; exit-code and HTTP-status mapping live with the callers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .compare import compare_rasters, reports_to_csv
from .errors import (
    InvalidArgumentError,
    MissingTileError,
    RasterFormatError,
    UnsupportedCrsError,
)
from .fusion import (
    FusionPlan,
    build_index,
    error_vs_center_distance,
    fuse,
    plan_fusion,
    stats_to_csv,
)
from .georef import ModelSpec, RasterMeta
from .raster_io import (
    RasterSource,
    TileManifest,
    open_raster,
    read_image,
    read_manifest,
    read_tile,
    write_label_raster,
    write_manifest,
    write_tile_image,
)
from .rasterize import parse_geojson, rasterize
from .scheme import (
    Centered,
    CornerAnchored,
    PixelWindow,
    RoundingMode,
    SchemeSpec,
    TilingScheme,
    enumerate_tiles,
    build_scheme,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class JobConfig:
    """One bag of knobs for all jobs; unused fields are ignored per job."""

    tile_m: float | None = None
    tile_px: int | None = None
    stride_div: int = 1
    rounding: str | None = None
    anchor: str = "center"
    model_px: int | None = None
    zoom: int = 19
    include_partial: bool = True
    image_format: str = "pgm"
    resample: str = "nearest"
    class_property: str = "class"
    background: int = 0
    jobs: int = 4

    def __post_init__(self):
        # None means "use the job's own default": floor for tiling, ceil for compare.
        if self.rounding not in (None, "floor", "ceil"):
            raise InvalidArgumentError(f"rounding must be floor or ceil, got {self.rounding!r}")
        if self.anchor not in ("center", "corner"):
            raise InvalidArgumentError(f"anchor must be center or corner, got {self.anchor!r}")
        if self.image_format not in ("pgm", "png"):
            raise InvalidArgumentError(f"format must be pgm or png, got {self.image_format!r}")
        if self.resample not in ("nearest", "bilinear"):
            raise InvalidArgumentError(f"resample must be nearest or bilinear, got {self.resample!r}")
        if self.stride_div < 1:
            raise InvalidArgumentError(f"stride divisor must be >= 1, got {self.stride_div}")
        if self.jobs < 1:
            raise InvalidArgumentError(f"worker count must be >= 1, got {self.jobs}")

    @classmethod
    def from_dict(cls, obj: dict, base: "JobConfig | None" = None) -> "JobConfig":
        """Config from a JSON-style dict layered over `base`; unknown keys fail."""
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        merged = base or cls()
        present = {k: v for k, v in obj.items() if v is not None}
        return replace(merged, **present)

    def require_tile_size(self) -> None:
        if (self.tile_m is None) == (self.tile_px is None):
            raise InvalidArgumentError("exactly one of tile_m or tile_px is required")


def scheme_specs_for(meta: RasterMeta, cfg: JobConfig) -> tuple[SchemeSpec, SchemeSpec]:
    """(base watertight spec, inference spec with stride / m), in pixels."""
    cfg.require_tile_size()
    rounding = RoundingMode(cfg.rounding or "floor")
    origin = Centered() if cfg.anchor == "center" else CornerAnchored(0.0, 0.0)
    if cfg.tile_px is not None:
        extent = (float(cfg.tile_px), float(cfg.tile_px))
        base = SchemeSpec(tile_extent=extent, stride=extent, rounding=rounding, origin=origin)
    else:
        extent = (cfg.tile_m, cfg.tile_m)
        base = SchemeSpec(
            tile_extent=extent, stride=extent, rounding=rounding, origin=origin, unit="m"
        ).to_pixels(meta.gsd)
    return base, base.with_stride_divisor(cfg.stride_div)


def model_spec_for(cfg: JobConfig) -> ModelSpec | None:
    if cfg.model_px is None:
        return None
    return ModelSpec((cfg.model_px, cfg.model_px))


def raster_id_for(path: str | Path) -> str:
    return Path(path).stem


@dataclass(frozen=True)
class TileJobResult:
    raster_id: str
    manifest_path: Path
    tile_count: int


@dataclass(frozen=True)
class TileJobFailure:
    raster: str
    error: str


def tile_one_raster(raster_path: str | Path, out_dir: str | Path, cfg: JobConfig) -> TileJobResult:
    """Tile a single raster: write tile images and the manifest."""
    raster_path = Path(raster_path)
    source = open_raster(raster_path)
    _, spec = scheme_specs_for(source.meta, cfg)
    scheme = build_scheme(source.meta.extent_px, spec)
    tiles = enumerate_tiles(scheme)
    model = model_spec_for(cfg)

    raster_id = raster_id_for(raster_path)
    raster_dir = Path(out_dir) / raster_id
    tiles_dir = raster_dir / "tiles"
    tiles_dir.mkdir(parents=True, exist_ok=True)

    manifest = TileManifest(
        raster_id=raster_id,
        raster=source.meta,
        spec=spec,
        counts=scheme.counts,
        offset=scheme.offset,
        tiles=tiles,
        stride_divisor=cfg.stride_div,
        model_px=model.input_px if model else None,
        image_format=cfg.image_format,
    )
    for tile in tiles:
        arr, _ = read_tile(source, tile, model=model, method=cfg.resample)
        if arr.ndim == 3 and cfg.image_format == "pgm":
            raise RasterFormatError(
                f"{raster_id}: PGM cannot hold {arr.shape[2]} bands, use --format png"
            )
        write_tile_image(arr, tiles_dir / manifest.tile_image_name(tile.id))
    manifest_path = write_manifest(manifest, raster_dir / "manifest.json")
    log.info("tiled %s into %d tiles", raster_id, len(tiles))
    return TileJobResult(raster_id=raster_id, manifest_path=manifest_path, tile_count=len(tiles))


def job_tile(
    raster_paths: list[str | Path], out_dir: str | Path, cfg: JobConfig
) -> tuple[list[TileJobResult], list[TileJobFailure]]:
    """Tile several rasters in a bounded worker pool, preserving input order.

    An unreadable raster does not stop the batch: its error is collected and
    the remaining rasters are still processed.
    """
    cfg.require_tile_size()
    workers = min(cfg.jobs, max(1, len(raster_paths)))
    results: list[TileJobResult] = []
    failures: list[TileJobFailure] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(tile_one_raster, p, out_dir, cfg) for p in raster_paths]
        for path, future in zip(raster_paths, futures):
            try:
                results.append(future.result())
            except (RasterFormatError, FileNotFoundError, UnsupportedCrsError) as exc:
                log.warning("skipping %s: %s", path, exc)
                failures.append(TileJobFailure(raster=str(path), error=str(exc)))
    return results, failures


def job_rasterize(
    raster_path: str | Path,
    labels_path: str | Path,
    out_path: str | Path,
    cfg: JobConfig,
) -> Path:
    """Burn GeoJSON labels into a class grid aligned with the raster."""
    meta = open_raster(raster_path).meta
    labels = parse_geojson(
        Path(labels_path).read_bytes(), class_property=cfg.class_property
    )
    if labels.crs and meta.crs and labels.crs.upper() != meta.crs.upper():
        raise RasterFormatError(
            f"labels are in {labels.crs}, raster is in {meta.crs}"
        )
    grid = rasterize(labels, meta, background=cfg.background)
    return write_label_raster(grid.data, meta, out_path)


def plan_from_manifest(manifest: TileManifest) -> tuple[FusionPlan, TilingScheme]:
    aux = manifest.scheme()
    base = build_scheme(manifest.raster.extent_px, manifest.base_spec())
    index = build_index(manifest.tiles)
    return plan_fusion(base, aux, index=index), aux


def load_predictions(
    manifest: TileManifest, directory: str | Path, tile_ids: list[str]
) -> dict[str, np.ndarray]:
    directory = Path(directory)
    out: dict[str, np.ndarray] = {}
    for tile_id in tile_ids:
        candidates = [directory / f"{tile_id}.{ext}" for ext in (manifest.image_format, "png", "pgm")]
        path = next((c for c in candidates if c.exists()), None)
        if path is None:
            raise MissingTileError(tile_id)
        arr = read_image(path)
        if arr.ndim != 2:
            raise RasterFormatError(f"{path}: predictions must be single band")
        out[tile_id] = arr.astype(np.uint8, copy=False)
    return out


def job_fuse(
    manifest_path: str | Path, predictions_dir: str | Path, out_path: str | Path
) -> Path:
    """Fuse per-tile predictions into a full-raster label image."""
    manifest = read_manifest(manifest_path)
    plan, _ = plan_from_manifest(manifest)
    predictions = load_predictions(manifest, predictions_dir, plan.donor_ids)
    model = ModelSpec(manifest.model_px) if manifest.model_px else None
    fused = fuse(plan, predictions, model=model)
    return write_label_raster(fused.data, manifest.raster, out_path)


def job_stats(
    manifest_path: str | Path,
    predictions_dir: str | Path,
    truth_path: str | Path,
    out_path: str | Path,
) -> Path:
    """Error rate by distance from tile center, written as CSV."""
    manifest = read_manifest(manifest_path)
    truth_source = open_raster(truth_path)
    truth, _ = truth_source.read_region(
        PixelWindow(0, 0, truth_source.meta.width, truth_source.meta.height)
    )
    if truth.ndim != 2:
        raise RasterFormatError(f"{truth_path}: ground truth must be single band")
    if (truth_source.meta.width, truth_source.meta.height) != (
        manifest.raster.width,
        manifest.raster.height,
    ):
        raise RasterFormatError(
            f"ground truth is {truth_source.meta.width}x{truth_source.meta.height}, "
            f"manifest raster is {manifest.raster.width}x{manifest.raster.height}"
        )
    ids = [t.id for t in manifest.tiles]
    predictions = load_predictions(manifest, predictions_dir, ids)
    model = ModelSpec(manifest.model_px) if manifest.model_px else None
    rows = error_vs_center_distance(
        manifest.tiles, predictions, truth.astype(np.uint8, copy=False), model=model
    )
    out_path = Path(out_path)
    out_path.write_text(stats_to_csv(rows))
    return out_path


def job_compare(
    raster_paths: list[str | Path], out_path: str | Path, cfg: JobConfig
) -> Path:
    """Scheme comparison CSV across rasters."""
    metas = [(raster_id_for(p), open_raster(p).meta) for p in raster_paths]
    reports = compare_rasters(
        metas,
        tile_px=cfg.tile_px or 512,
        tile_m=cfg.tile_m or 75.0,
        zoom=cfg.zoom,
        rounding=RoundingMode(cfg.rounding or "ceil"),
    )
    out_path = Path(out_path)
    out_path.write_text(reports_to_csv(reports))
    return out_path
