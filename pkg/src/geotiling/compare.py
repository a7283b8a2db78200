"""Side-by-side metrics for pixel, ground-extent, and web-mercator tilings.

The point of the comparison is the consistency of the metric tile extent
across rasters: a fixed pixel grid drifts with each raster's ground
sampling distance, mercator tiles shrink with latitude, and only the
ground-extent scheme keeps every tile the same size on the ground.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError
from .georef import (
    RasterMeta,
    lonlat_to_mercator_m,
    mercator_m_to_lonlat,
    mercator_tile_extent_m,
    mercator_tiles_for_bounds,
)
from .scheme import RoundingMode, SchemeSpec, build_scheme

SCHEME_PIXEL = "pixel-grid"
SCHEME_GROUND_EXTENT = "ground-extent"
SCHEME_MERCATOR = "mercator"

AGGREGATE_ID = "ALL"


@dataclass(frozen=True)
class SchemeReport:
    """Tile statistics for one scheme applied to one raster (or pooled)."""

    raster_id: str
    scheme: str
    tile_count: int
    extents_m: tuple[tuple[float, float], ...]
    covered_fraction: float
    overhang_fraction: float

    def extent_stats(self) -> tuple[float, float, float, float]:
        """(mean_x, std_x, mean_y, std_y) over per-tile ground extents."""
        return (*_mean_std([e[0] for e in self.extents_m]),
                *_mean_std([e[1] for e in self.extents_m]))


def _mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return (0.0, 0.0)
    if all(v == values[0] for v in values):
        # identical values have zero spread; skip the float round trip
        return (values[0], 0.0)
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return (mean, math.sqrt(var))


def _coverage_fractions(
    raster: tuple[float, float, float, float],
    coverage: tuple[float, float, float, float],
) -> tuple[float, float]:
    """(covered, overhang) area ratios of a coverage box against a raster box."""
    rx = raster[2] - raster[0]
    ry = raster[3] - raster[1]
    area = rx * ry
    ix = max(0.0, min(raster[2], coverage[2]) - max(raster[0], coverage[0]))
    iy = max(0.0, min(raster[3], coverage[3]) - max(raster[1], coverage[1]))
    cov_area = (coverage[2] - coverage[0]) * (coverage[3] - coverage[1])
    inside = ix * iy
    return (inside / area, (cov_area - inside) / area)


def _grid_report(
    raster_id: str,
    scheme_name: str,
    meta: RasterMeta,
    spec: SchemeSpec,
    extent_m: tuple[float, float] | None,
) -> SchemeReport:
    """Report for a rectangular scheme; extent_m overrides the px*gsd product."""
    scheme = build_scheme(meta.extent_px, spec.to_pixels(meta.gsd))
    if extent_m is None:
        per_tile = (
            scheme.spec.tile_extent[0] * meta.gsd[0],
            scheme.spec.tile_extent[1] * meta.gsd[1],
        )
    else:
        per_tile = extent_m
    nx, ny = scheme.counts
    sx, sy = scheme.spec.stride
    tx, ty = scheme.spec.tile_extent
    coverage = (
        scheme.offset[0],
        scheme.offset[1],
        scheme.offset[0] + (nx - 1) * sx + tx,
        scheme.offset[1] + (ny - 1) * sy + ty,
    )
    covered, overhang = _coverage_fractions(
        (0.0, 0.0, meta.extent_px[0], meta.extent_px[1]), coverage
    )
    return SchemeReport(
        raster_id=raster_id,
        scheme=scheme_name,
        tile_count=scheme.total,
        extents_m=tuple([per_tile] * scheme.total),
        covered_fraction=covered,
        overhang_fraction=overhang,
    )


def _mercator_report(raster_id: str, meta: RasterMeta, zoom: int) -> SchemeReport:
    tiles = mercator_tiles_for_bounds(meta, zoom, include_partial=True)
    extents = []
    for tile in tiles:
        mid_y = (tile.bounds_m[1] + tile.bounds_m[3]) / 2.0
        lat = mercator_m_to_lonlat(0.0, mid_y)[1]
        side = mercator_tile_extent_m(zoom, lat)
        extents.append((side, side))
    corners = [
        lonlat_or_mercator(meta, px, py)
        for px in (0.0, meta.extent_px[0])
        for py in (0.0, meta.extent_px[1])
    ]
    raster_box = (
        min(c[0] for c in corners),
        min(c[1] for c in corners),
        max(c[0] for c in corners),
        max(c[1] for c in corners),
    )
    coverage = (
        min(t.bounds_m[0] for t in tiles),
        min(t.bounds_m[1] for t in tiles),
        max(t.bounds_m[2] for t in tiles),
        max(t.bounds_m[3] for t in tiles),
    )
    covered, overhang = _coverage_fractions(raster_box, coverage)
    return SchemeReport(
        raster_id=raster_id,
        scheme=SCHEME_MERCATOR,
        tile_count=len(tiles),
        extents_m=tuple(extents),
        covered_fraction=covered,
        overhang_fraction=overhang,
    )


def lonlat_or_mercator(meta: RasterMeta, px: float, py: float) -> tuple[float, float]:
    """Pixel to EPSG:3857 meters for the raster's supported CRS."""
    crs = meta.crs.upper().replace(" ", "")
    x, y = meta.transform.apply(px, py)
    if crs == "EPSG:4326":
        return lonlat_to_mercator_m(x, y)
    return (x, y)


def compare_rasters(
    rasters: list[tuple[str, RasterMeta]],
    tile_px: int = 512,
    tile_m: float = 75.0,
    zoom: int = 19,
    rounding: RoundingMode = RoundingMode.CEIL,
) -> list[SchemeReport]:
    """Per-raster and pooled reports for the three tiling strategies.

    The pooled rows (raster_id ALL) concatenate the per-tile extents, so
    their spread reflects cross-raster consistency.
    """
    if not rasters:
        raise InvalidArgumentError("no rasters to compare")
    reports: list[SchemeReport] = []
    for raster_id, meta in rasters:
        pixel_spec = SchemeSpec(
            tile_extent=(float(tile_px), float(tile_px)),
            stride=(float(tile_px), float(tile_px)),
            rounding=rounding,
        )
        metric_spec = SchemeSpec(
            tile_extent=(tile_m, tile_m),
            stride=(tile_m, tile_m),
            rounding=rounding,
            unit="m",
        )
        reports.append(_grid_report(raster_id, SCHEME_PIXEL, meta, pixel_spec, None))
        reports.append(
            _grid_report(raster_id, SCHEME_GROUND_EXTENT, meta, metric_spec, (tile_m, tile_m))
        )
        reports.append(_mercator_report(raster_id, meta, zoom))
    for scheme_name in (SCHEME_PIXEL, SCHEME_GROUND_EXTENT, SCHEME_MERCATOR):
        rows = [r for r in reports if r.scheme == scheme_name]
        extents: list[tuple[float, float]] = []
        for r in rows:
            extents.extend(r.extents_m)
        reports.append(
            SchemeReport(
                raster_id=AGGREGATE_ID,
                scheme=scheme_name,
                tile_count=sum(r.tile_count for r in rows),
                extents_m=tuple(extents),
                covered_fraction=sum(r.covered_fraction for r in rows) / len(rows),
                overhang_fraction=sum(r.overhang_fraction for r in rows) / len(rows),
            )
        )
    return reports


def reports_to_csv(reports: list[SchemeReport]) -> str:
    lines = [
        "raster_id,scheme,tile_count,extent_m_x_mean,extent_m_x_std,"
        "extent_m_y_mean,extent_m_y_std,covered_fraction,overhang_fraction"
    ]
    for r in reports:
        mx, sx, my, sy = r.extent_stats()
        lines.append(
            f"{r.raster_id},{r.scheme},{r.tile_count},{mx:.6f},{sx:.6g},"
            f"{my:.6f},{sy:.6g},{r.covered_fraction:.6f},{r.overhang_fraction:.6f}"
        )
    return "\n".join(lines) + "\n"
