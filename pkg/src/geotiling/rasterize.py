"""GeoJSON polygon labels burned into per-pixel class grids.

The fill rule is scanline even-odd with pixel centers: a pixel belongs to
a polygon when its center (column + 0.5, row + 0.5) lies inside.  Holes
revert to the background class and later features overwrite earlier ones,
matching the usual label-burning semantics.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, RasterFormatError
from .georef import RasterMeta

log = logging.getLogger(__name__)

IGNORE_CLASS = 255


@dataclass
class LabelGrid:
    """Per-pixel class ids; 255 marks pixels carrying no decision."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.dtype != np.uint8:
            raise InvalidArgumentError(
                f"label grid must be 2D uint8, got {self.data.shape} {self.data.dtype}"
            )

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def classes(self) -> list[int]:
        present = np.unique(self.data)
        return [int(c) for c in present if c != IGNORE_CLASS]


@dataclass(frozen=True)
class VectorFeature:
    """One polygon (exterior plus holes) with its class id, in world coords."""

    rings: tuple[np.ndarray, ...]
    class_id: int


@dataclass
class VectorLabelSet:
    features: list[VectorFeature] = field(default_factory=list)
    crs: str = ""
    skipped: int = 0


def _close_ring(coords: list) -> np.ndarray | None:
    arr = np.asarray(coords, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 3 or arr.shape[1] < 2:
        return None
    arr = arr[:, :2]
    if not np.array_equal(arr[0], arr[-1]):
        arr = np.vstack([arr, arr[:1]])
    return arr


def _polygon_features(geometry: dict, class_id: int) -> list[VectorFeature]:
    gtype = geometry.get("type")
    if gtype == "Polygon":
        polygons = [geometry.get("coordinates", [])]
    elif gtype == "MultiPolygon":
        polygons = geometry.get("coordinates", [])
    else:
        return []
    out = []
    for polygon in polygons:
        rings = [_close_ring(ring) for ring in polygon]
        rings = [r for r in rings if r is not None]
        if rings:
            out.append(VectorFeature(rings=tuple(rings), class_id=class_id))
    return out


def parse_geojson(
    data: bytes | str,
    class_property: str = "class",
    default_class: int = 1,
) -> VectorLabelSet:
    """Polygonal features from a GeoJSON FeatureCollection.

    Non-polygon geometries and features with an unusable class property are
    skipped with a warning count rather than failing the whole set.
    """
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise RasterFormatError(f"labels are not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise RasterFormatError("labels must be a GeoJSON object")
    if obj.get("type") == "FeatureCollection":
        features = obj.get("features", [])
    elif obj.get("type") == "Feature":
        features = [obj]
    else:
        raise RasterFormatError(f"unsupported GeoJSON type {obj.get('type')!r}")

    crs = ""
    crs_obj = obj.get("crs")
    if isinstance(crs_obj, dict):
        crs = str(crs_obj.get("properties", {}).get("name", ""))

    out = VectorLabelSet(crs=crs)
    for feat in features:
        if not isinstance(feat, dict) or not isinstance(feat.get("geometry"), dict):
            out.skipped += 1
            continue
        props = feat.get("properties") or {}
        raw_class = props.get(class_property, default_class)
        try:
            class_id = int(raw_class)
        except (TypeError, ValueError):
            out.skipped += 1
            continue
        if not (0 <= class_id <= 254):
            out.skipped += 1
            continue
        polys = _polygon_features(feat["geometry"], class_id)
        if not polys:
            out.skipped += 1
            continue
        out.features.extend(polys)
    if out.skipped:
        log.warning("skipped %d unusable label features", out.skipped)
    return out


def _fill_rings(grid: np.ndarray, rings: list[np.ndarray], value: int) -> None:
    """Even-odd scanline fill of pixel-space rings into the grid."""
    height, width = grid.shape
    edges = []
    for ring in rings:
        for k in range(len(ring) - 1):
            x0, y0 = ring[k]
            x1, y1 = ring[k + 1]
            if y0 != y1:
                edges.append((x0, y0, x1, y1))
    if not edges:
        return
    y_min = min(min(e[1], e[3]) for e in edges)
    y_max = max(max(e[1], e[3]) for e in edges)
    row0 = max(0, int(np.floor(y_min - 0.5)))
    row1 = min(height - 1, int(np.ceil(y_max)))
    for row in range(row0, row1 + 1):
        yc = row + 0.5
        xs = []
        for x0, y0, x1, y1 in edges:
            # half-open in y so shared vertices count exactly once
            if (y0 <= yc < y1) or (y1 <= yc < y0):
                xs.append(x0 + (yc - y0) * (x1 - x0) / (y1 - y0))
        if not xs:
            continue
        xs.sort()
        for i in range(0, len(xs) - 1, 2):
            # pixels whose center falls in [xs[i], xs[i+1])
            a = max(0, int(np.ceil(xs[i] - 0.5)))
            b = min(width, int(np.ceil(xs[i + 1] - 0.5)))
            if b > a:
                grid[row, a:b] = value


def rasterize(
    labels: VectorLabelSet,
    meta: RasterMeta,
    background: int = 0,
) -> LabelGrid:
    """Burn polygon features into a class grid aligned with the raster.

    Feature coordinates are taken in the raster's CRS and mapped to pixel
    space through the inverse geotransform.  Hole interiors stay unpainted.
    """
    if not (0 <= background <= 254):
        raise InvalidArgumentError(f"background class must be in [0, 254], got {background}")
    grid = np.full((meta.height, meta.width), background, dtype=np.uint8)
    inverse = meta.transform.invert()
    a, b, c, d, e, f = inverse.coefficients()
    for feature in labels.features:
        pixel_rings = []
        for ring in feature.rings:
            px = a * ring[:, 0] + b * ring[:, 1] + c
            py = d * ring[:, 0] + e * ring[:, 1] + f
            pixel_rings.append(np.column_stack([px, py]))
        _fill_rings(grid, pixel_rings, feature.class_id)
    return LabelGrid(grid)
