"""Sliding-window tiling schemes over a finite raster extent.

All lengths share one linear unit, fixed by SchemeSpec.unit (pixels or meters).
A scheme is defined per axis by the raster extent r, the tile extent t and
the stride s between consecutive tile origins.  The tile count is

    n = rho((r + s - t) / s)   clamped to >= 0

where rho is floor or ceil.  Floor yields the largest grid whose tiles all
fit inside the raster, ceil the smallest grid that covers it.  The covered
length is n*s + t - s and the symmetric placement offset is half of the
uncovered remainder, so floor schemes have a non-negative margin and ceil
schemes overhang symmetrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import InvalidArgumentError


class RoundingMode(Enum):
    """How fractional tile counts are resolved."""

    FLOOR = "floor"
    CEIL = "ceil"

    def apply(self, value: float) -> int:
        if self is RoundingMode.FLOOR:
            return math.floor(value)
        return math.ceil(value)


@dataclass(frozen=True)
class Centered:
    """Place the tiling symmetrically: equal slack on both sides of each axis."""


@dataclass(frozen=True)
class CornerAnchored:
    """Pin the first tile origin at a fixed offset from the raster origin."""

    offset_x: float = 0.0
    offset_y: float = 0.0


OriginPolicy = Centered | CornerAnchored


def round_half_up(value: float) -> int:
    """Round to the nearest integer, ties away from minus infinity.

    Used when discretizing fractional window edges so that both edges of a
    half-open interval shift consistently and windows never overlap.
    """
    return math.floor(value + 0.5)


@dataclass(frozen=True)
class SchemeSpec:
    """Per-axis tile extents and strides plus rounding and placement policy.

    `unit` is "px" or "m" and applies to both extents and strides.  A metric
    spec must be converted with `to_pixels` before tiles can be enumerated
    against a raster.
    """

    tile_extent: tuple[float, float]
    stride: tuple[float, float]
    rounding: RoundingMode = RoundingMode.FLOOR
    origin: OriginPolicy = field(default_factory=Centered)
    unit: str = "px"

    def __post_init__(self):
        if self.unit not in ("px", "m"):
            raise InvalidArgumentError(f"unknown unit {self.unit!r}")
        for v in (*self.tile_extent, *self.stride):
            if not math.isfinite(v) or v <= 0:
                raise InvalidArgumentError(
                    f"tile extents and strides must be finite and positive, got {v}"
                )

    def to_pixels(self, gsd: tuple[float, float]) -> "SchemeSpec":
        """Convert a metric spec to pixel units using the ground sampling distance."""
        if self.unit == "px":
            return self
        gx, gy = abs(gsd[0]), abs(gsd[1])
        if gx <= 0 or gy <= 0:
            raise InvalidArgumentError(f"gsd must be non-zero, got {gsd}")
        return replace(
            self,
            tile_extent=(self.tile_extent[0] / gx, self.tile_extent[1] / gy),
            stride=(self.stride[0] / gx, self.stride[1] / gy),
            unit="px",
        )

    def with_stride_divisor(self, m: int) -> "SchemeSpec":
        """Spec with stride tile_extent / m, the augmented form of this scheme."""
        if not isinstance(m, int) or m < 1:
            raise InvalidArgumentError(f"stride divisor must be an integer >= 1, got {m}")
        return replace(
            self, stride=(self.tile_extent[0] / m, self.tile_extent[1] / m)
        )


def tile_count_1d(r: float, s: float, t: float, rounding: RoundingMode) -> int:
    """Number of tiles of extent t at stride s along a raster axis of extent r."""
    if r <= 0 or s <= 0 or t <= 0:
        raise InvalidArgumentError(
            f"extents and stride must be positive, got r={r} s={s} t={t}"
        )
    return max(0, rounding.apply((r + s - t) / s))


def coverage_1d(r: float, s: float, t: float, rounding: RoundingMode) -> float:
    """Total length spanned by the tiling, from first tile start to last tile end."""
    n = tile_count_1d(r, s, t, rounding)
    return n * s + t - s


def offset_1d(r: float, s: float, t: float, rounding: RoundingMode) -> float:
    """Signed start of a symmetrically placed tiling relative to the raster origin.

    Non-negative for floor (margin), non-positive for ceil (overhang), zero
    when the tiling fits exactly.
    """
    return (r - coverage_1d(r, s, t, rounding)) / 2.0


def augmented_count(r: float, t: float, m: int, rounding: RoundingMode) -> int:
    """Tile count along one axis when the stride is shrunk to t / m.

    Equals tile_count_1d(r, t / m, t, rounding); with m = 1 it reduces to the
    watertight count for s = t.  Written over a common denominator so integer
    configurations stay exact.
    """
    if not isinstance(m, int) or m < 1:
        raise InvalidArgumentError(f"stride divisor must be an integer >= 1, got {m}")
    if r <= 0 or t <= 0:
        raise InvalidArgumentError(f"extents must be positive, got r={r} t={t}")
    return max(0, rounding.apply((m * (r - t) + t) / t))


@dataclass(frozen=True)
class PixelWindow:
    """Half-open integer pixel rectangle [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise InvalidArgumentError(f"degenerate window {self}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width), the numpy array shape covering this window."""
        return (self.height, self.width)

    def intersect(self, other: "PixelWindow") -> "PixelWindow | None":
        x0 = max(self.x0, other.x0)
        y0 = max(self.y0, other.y0)
        x1 = min(self.x1, other.x1)
        y1 = min(self.y1, other.y1)
        if x1 <= x0 or y1 <= y0:
            return None
        return PixelWindow(x0, y0, x1, y1)

    def contains(self, other: "PixelWindow") -> bool:
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and other.x1 <= self.x1
            and other.y1 <= self.y1
        )


@dataclass(frozen=True)
class TileRef:
    """One tile of a scheme: grid index, exact placement, and pixel window.

    `origin_px` and `extent_px` are the exact fractional placement; `window`
    is that rectangle with both edges rounded half-up, so its width and
    height differ from the exact extents by less than one pixel.
    """

    index: tuple[int, int]
    origin_px: tuple[float, float]
    extent_px: tuple[float, float]
    window: PixelWindow
    id: str

    @property
    def center_px(self) -> tuple[float, float]:
        return (
            self.origin_px[0] + self.extent_px[0] / 2.0,
            self.origin_px[1] + self.extent_px[1] / 2.0,
        )


@dataclass(frozen=True)
class TilingScheme:
    """A spec realized against a concrete raster extent (both in pixels)."""

    spec: SchemeSpec
    raster_extent: tuple[float, float]
    counts: tuple[int, int]
    offset: tuple[float, float]

    @property
    def total(self) -> int:
        return self.counts[0] * self.counts[1]

    def tile_origin(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.offset[0] + ix * self.spec.stride[0],
            self.offset[1] + iy * self.spec.stride[1],
        )

    def tile(self, ix: int, iy: int) -> TileRef:
        nx, ny = self.counts
        if not (0 <= ix < nx and 0 <= iy < ny):
            raise InvalidArgumentError(
                f"tile index ({ix}, {iy}) outside grid {nx}x{ny}"
            )
        ox, oy = self.tile_origin(ix, iy)
        tx, ty = self.spec.tile_extent
        window = PixelWindow(
            round_half_up(ox),
            round_half_up(oy),
            round_half_up(ox + tx),
            round_half_up(oy + ty),
        )
        return TileRef(
            index=(ix, iy),
            origin_px=(ox, oy),
            extent_px=(tx, ty),
            window=window,
            id=f"{ix:04d}_{iy:04d}",
        )


def build_scheme(raster_extent: tuple[float, float], spec: SchemeSpec) -> TilingScheme:
    """Realize a pixel-unit spec against a raster extent.

    Raises InvalidArgumentError for metric specs (convert with to_pixels
    first) and for floor schemes where no tile fits along some axis.
    """
    if spec.unit != "px":
        raise InvalidArgumentError("spec must be in pixel units; call to_pixels first")
    rx, ry = raster_extent
    counts = (
        tile_count_1d(rx, spec.stride[0], spec.tile_extent[0], spec.rounding),
        tile_count_1d(ry, spec.stride[1], spec.tile_extent[1], spec.rounding),
    )
    if counts[0] == 0 or counts[1] == 0:
        raise InvalidArgumentError(
            f"no tiles fit: raster {raster_extent}, tile {spec.tile_extent}, "
            f"stride {spec.stride}, rounding {spec.rounding.value}"
        )
    if isinstance(spec.origin, CornerAnchored):
        offset = (spec.origin.offset_x, spec.origin.offset_y)
    else:
        offset = (
            offset_1d(rx, spec.stride[0], spec.tile_extent[0], spec.rounding),
            offset_1d(ry, spec.stride[1], spec.tile_extent[1], spec.rounding),
        )
    return TilingScheme(spec=spec, raster_extent=raster_extent, counts=counts, offset=offset)


def enumerate_tiles(scheme: TilingScheme) -> list[TileRef]:
    """All tiles of a scheme in row-major order (y outer, x inner)."""
    return [
        scheme.tile(ix, iy)
        for iy in range(scheme.counts[1])
        for ix in range(scheme.counts[0])
    ]
