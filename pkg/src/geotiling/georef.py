"""Affine georeferencing and web-mercator helpers.

A raster's geotransform maps pixel coordinates (column, row) to world
coordinates as a 2x3 affine: X = a*px + b*py + c, Y = d*px + e*py + f,
stored row-major as (a, b, c, d, e, f).  Tile geotransforms are composed
from the raster transform and the tile-local scaling, so a model working
in its own input resolution can be georeferenced without resampling math
at the call site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError, UnsupportedCrsError
from .scheme import (
    CornerAnchored,
    PixelWindow,
    RoundingMode,
    SchemeSpec,
    TileRef,
    build_scheme,
    enumerate_tiles,
    round_half_up,
)

# 2 * pi * 6378137, the WGS84 equatorial circumference used by web mercator
MERCATOR_CIRCUMFERENCE_M = 40075016.6856
_MERCATOR_RADIUS_M = MERCATOR_CIRCUMFERENCE_M / (2.0 * math.pi)
# web mercator clips latitude where the square world tile ends
MERCATOR_MAX_LAT_DEG = 85.05112878


@dataclass(frozen=True)
class GeoTransform:
    """Invertible 2x3 affine from pixel space to world space."""

    scale: tuple[float, float]
    skew: tuple[float, float] = (0.0, 0.0)
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if abs(self.det) < 1e-300:
            raise InvalidArgumentError(f"geotransform is singular: {self}")

    @property
    def det(self) -> float:
        a, e = self.scale
        b, d = self.skew
        return a * e - b * d

    def coefficients(self) -> tuple[float, float, float, float, float, float]:
        """Row-major (a, b, c, d, e, f)."""
        a, e = self.scale
        b, d = self.skew
        c, f = self.origin
        return (a, b, c, d, e, f)

    @classmethod
    def from_coefficients(cls, coeffs) -> "GeoTransform":
        a, b, c, d, e, f = (float(v) for v in coeffs)
        return cls(scale=(a, e), skew=(b, d), origin=(c, f))

    def apply(self, px: float, py: float) -> tuple[float, float]:
        a, b, c, d, e, f = self.coefficients()
        return (a * px + b * py + c, d * px + e * py + f)

    def invert(self) -> "GeoTransform":
        a, b, c, d, e, f = self.coefficients()
        det = self.det
        ia = e / det
        ib = -b / det
        id_ = -d / det
        ie = a / det
        ic = -(ia * c + ib * f)
        if_ = -(id_ * c + ie * f)
        return GeoTransform(scale=(ia, ie), skew=(ib, id_), origin=(ic, if_))

    def compose(self, inner: "GeoTransform") -> "GeoTransform":
        """Transform applying `inner` first, then self."""
        a1, b1, c1, d1, e1, f1 = self.coefficients()
        a2, b2, c2, d2, e2, f2 = inner.coefficients()
        return GeoTransform(
            scale=(a1 * a2 + b1 * d2, d1 * b2 + e1 * e2),
            skew=(a1 * b2 + b1 * e2, d1 * a2 + e1 * d2),
            origin=(a1 * c2 + b1 * f2 + c1, d1 * c2 + e1 * f2 + f1),
        )


@dataclass(frozen=True)
class RasterMeta:
    """Size, ground sampling distance, and georeferencing of one raster."""

    width: int
    height: int
    gsd: tuple[float, float]
    transform: GeoTransform
    crs: str = ""
    nodata: int | None = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidArgumentError(
                f"raster extent must be positive, got {self.width}x{self.height}"
            )
        if self.gsd[0] <= 0 or self.gsd[1] <= 0:
            raise InvalidArgumentError(f"gsd must be positive, got {self.gsd}")

    @classmethod
    def from_transform(
        cls,
        width: int,
        height: int,
        transform: GeoTransform,
        crs: str = "",
        nodata: int | None = None,
    ) -> "RasterMeta":
        """Derive the per-axis gsd from the transform's column lengths."""
        a, b, c, d, e, f = transform.coefficients()
        gsd = (math.hypot(a, d), math.hypot(b, e))
        return cls(width, height, gsd, transform, crs, nodata)

    @property
    def extent_px(self) -> tuple[float, float]:
        return (float(self.width), float(self.height))

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """World-space (min_x, min_y, max_x, max_y) of the full raster."""
        corners = [
            self.transform.apply(px, py)
            for px in (0.0, float(self.width))
            for py in (0.0, float(self.height))
        ]
        xs = [c[0] for c in corners]
        ys = [c[1] for c in corners]
        return (min(xs), min(ys), max(xs), max(ys))


@dataclass(frozen=True)
class ModelSpec:
    """Input raster size a segmentation model consumes, in pixels."""

    input_px: tuple[int, int]

    def __post_init__(self):
        if self.input_px[0] < 1 or self.input_px[1] < 1:
            raise InvalidArgumentError(f"model input must be >= 1 px, got {self.input_px}")


def meters_to_pixels(meters: float, gsd: float) -> float:
    """Ground length to pixel length at the given sampling distance."""
    if gsd <= 0:
        raise InvalidArgumentError(f"gsd must be positive, got {gsd}")
    return meters / gsd


def pixels_to_meters(pixels: float, gsd: float) -> float:
    if gsd <= 0:
        raise InvalidArgumentError(f"gsd must be positive, got {gsd}")
    return pixels * gsd


def tile_georef(
    raster_transform: GeoTransform,
    tile: TileRef,
    model: ModelSpec | None = None,
) -> GeoTransform:
    """Geotransform of one tile, optionally at a model's input resolution.

    With a model spec, local pixels are first scaled by extent / input so
    the result georeferences the model-sized grid directly.
    """
    ox, oy = tile.origin_px
    if model is None:
        fx, fy = 1.0, 1.0
    else:
        fx = tile.extent_px[0] / model.input_px[0]
        fy = tile.extent_px[1] / model.input_px[1]
    local = GeoTransform(scale=(fx, fy), origin=(ox, oy))
    return raster_transform.compose(local)


def mercator_tile_extent_m(zoom: int, lat_deg: float = 0.0) -> float:
    """Ground extent in meters of one web-mercator tile side at a latitude."""
    if zoom < 0 or zoom > 30:
        raise InvalidArgumentError(f"zoom must be in [0, 30], got {zoom}")
    if abs(lat_deg) > MERCATOR_MAX_LAT_DEG:
        raise InvalidArgumentError(f"latitude {lat_deg} outside mercator domain")
    return MERCATOR_CIRCUMFERENCE_M * math.cos(math.radians(lat_deg)) / (1 << zoom)


def lonlat_to_mercator_m(lon: float, lat: float) -> tuple[float, float]:
    """EPSG:4326 degrees to EPSG:3857 meters."""
    if abs(lat) > MERCATOR_MAX_LAT_DEG:
        raise InvalidArgumentError(f"latitude {lat} outside mercator domain")
    x = _MERCATOR_RADIUS_M * math.radians(lon)
    y = _MERCATOR_RADIUS_M * math.log(math.tan(math.pi / 4.0 + math.radians(lat) / 2.0))
    return (x, y)


def mercator_m_to_lonlat(x: float, y: float) -> tuple[float, float]:
    lon = math.degrees(x / _MERCATOR_RADIUS_M)
    lat = math.degrees(2.0 * math.atan(math.exp(y / _MERCATOR_RADIUS_M)) - math.pi / 2.0)
    return (lon, lat)


@dataclass(frozen=True)
class MercatorTile:
    """One slippy-map tile key plus its footprint on a specific raster."""

    zoom: int
    x: int
    y: int
    bounds_m: tuple[float, float, float, float]
    window: PixelWindow
    fully_inside: bool

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.zoom, self.x, self.y)


def mercator_tile_bounds_m(zoom: int, x: int, y: int) -> tuple[float, float, float, float]:
    """EPSG:3857 (min_x, min_y, max_x, max_y) of a slippy tile."""
    n = 1 << zoom
    side = MERCATOR_CIRCUMFERENCE_M / n
    half = MERCATOR_CIRCUMFERENCE_M / 2.0
    min_x = -half + x * side
    max_y = half - y * side
    return (min_x, max_y - side, min_x + side, max_y)


def _pixel_to_mercator(meta: RasterMeta):
    """Pixel -> EPSG:3857 meters function for the raster's CRS, or raise."""
    crs = meta.crs.upper().replace(" ", "")
    if crs in ("EPSG:3857", "EPSG:900913"):
        return meta.transform.apply
    if crs == "EPSG:4326":
        def convert(px: float, py: float) -> tuple[float, float]:
            lon, lat = meta.transform.apply(px, py)
            return lonlat_to_mercator_m(lon, lat)

        return convert
    raise UnsupportedCrsError(
        f"mercator tiling needs EPSG:4326 or EPSG:3857, got {meta.crs!r}"
    )


def _mercator_to_pixel(meta: RasterMeta):
    crs = meta.crs.upper().replace(" ", "")
    inverse = meta.transform.invert()
    if crs in ("EPSG:3857", "EPSG:900913"):
        return inverse.apply
    def convert(mx: float, my: float) -> tuple[float, float]:
        lon, lat = mercator_m_to_lonlat(mx, my)
        return inverse.apply(lon, lat)

    return convert


def mercator_tiles_for_bounds(
    meta: RasterMeta, zoom: int, include_partial: bool = True
) -> list[MercatorTile]:
    """Slippy tiles at `zoom` whose footprint intersects the raster.

    With include_partial=False only tiles lying entirely inside the raster
    bounds are kept.  Pixel windows are the tile footprints mapped through
    the inverse geotransform and may extend past the raster edges.
    """
    if zoom < 0 or zoom > 30:
        raise InvalidArgumentError(f"zoom must be in [0, 30], got {zoom}")
    forward = _pixel_to_mercator(meta)
    backward = _mercator_to_pixel(meta)
    corners = [
        forward(px, py)
        for px in (0.0, float(meta.width))
        for py in (0.0, float(meta.height))
    ]
    min_x = min(c[0] for c in corners)
    max_x = max(c[0] for c in corners)
    min_y = min(c[1] for c in corners)
    max_y = max(c[1] for c in corners)

    n = 1 << zoom
    side = MERCATOR_CIRCUMFERENCE_M / n
    half = MERCATOR_CIRCUMFERENCE_M / 2.0
    # half-open on the far edge, with a relative tolerance so bounds landing
    # exactly on a tile line do not pull in a zero-overlap neighbor
    tol = 1e-9
    tx0 = max(0, math.floor((min_x + half) / side + tol))
    tx1 = min(n - 1, math.ceil((max_x + half) / side - tol) - 1)
    ty0 = max(0, math.floor((half - max_y) / side + tol))
    ty1 = min(n - 1, math.ceil((half - min_y) / side - tol) - 1)

    eps = 1e-9 * side
    tiles = []
    for ty in range(ty0, ty1 + 1):
        for tx in range(tx0, tx1 + 1):
            bm = mercator_tile_bounds_m(zoom, tx, ty)
            fully = (
                bm[0] >= min_x - eps
                and bm[1] >= min_y - eps
                and bm[2] <= max_x + eps
                and bm[3] <= max_y + eps
            )
            if not include_partial and not fully:
                continue
            pix = [
                backward(mx, my)
                for mx in (bm[0], bm[2])
                for my in (bm[1], bm[3])
            ]
            window = PixelWindow(
                round_half_up(min(p[0] for p in pix)),
                round_half_up(min(p[1] for p in pix)),
                round_half_up(max(p[0] for p in pix)),
                round_half_up(max(p[1] for p in pix)),
            )
            tiles.append(
                MercatorTile(
                    zoom=zoom, x=tx, y=ty, bounds_m=bm, window=window, fully_inside=fully
                )
            )
    return tiles


def pixel_grid_tiles(
    meta: RasterMeta, tile_px: int, include_partial: bool = True
) -> list[TileRef]:
    """Fixed watertight pixel grid anchored at the raster origin.

    The include_partial flag picks ceil (edge tiles overhang) or floor
    (edge remainders dropped) for the grid size.
    """
    if tile_px < 1:
        raise InvalidArgumentError(f"tile_px must be >= 1, got {tile_px}")
    spec = SchemeSpec(
        tile_extent=(float(tile_px), float(tile_px)),
        stride=(float(tile_px), float(tile_px)),
        rounding=RoundingMode.CEIL if include_partial else RoundingMode.FLOOR,
        origin=CornerAnchored(0.0, 0.0),
    )
    return enumerate_tiles(build_scheme(meta.extent_px, spec))
