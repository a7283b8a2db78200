"""Reliability-based fusion of overlapping tile predictions.

Segmentation quality degrades toward tile borders, so when a raster is
tiled at stride s = t / m every pixel is predicted by several tiles and
the fused output should take each pixel from the tile whose center is
nearest.  Per axis that tile is the one whose reliable interval
[center - s/2, center + s/2) contains the pixel; the intervals of one
axis meet exactly, so the fused raster is assembled from rectangular
donor windows with no seams or double writes.  The first and last
interval of each axis are extended to the raster edges, where no better
donor exists.  Ties at interval boundaries go to the lower grid index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import AlignmentError, InvalidArgumentError, MissingTileError
from .georef import ModelSpec
from .rasterize import IGNORE_CLASS, LabelGrid
from .rtree import Rect, RTree
from .scheme import Centered, PixelWindow, TileRef, TilingScheme, round_half_up

_REL_TOL = 1e-9


def reliable_interval(center: float, stride: float) -> tuple[float, float]:
    """Half-open interval of pixels closest to this tile center along one axis."""
    if stride <= 0:
        raise InvalidArgumentError(f"stride must be positive, got {stride}")
    return (center - stride / 2.0, center + stride / 2.0)


def substitution_neighbor_count(tile_extent: float, stride: float) -> int:
    """Tiles per axis whose reliable intervals fall inside one tile's extent.

    This is how many same-axis neighbors can substitute predictions for a
    dropped tile: 2 * ceil((t - s) / (2s)), zero for watertight tilings.
    """
    if tile_extent <= 0 or stride <= 0:
        raise InvalidArgumentError(
            f"extents must be positive, got t={tile_extent} s={stride}"
        )
    ratio = (tile_extent - stride) / (2.0 * stride)
    return max(0, 2 * math.ceil(ratio - _REL_TOL * max(1.0, abs(ratio))))


def substitution_neighbor_count_2d(
    tile_extent: tuple[float, float], stride: tuple[float, float]
) -> int:
    """Substituting neighbors in the plane: axis counts combine as a grid."""
    sx = substitution_neighbor_count(tile_extent[0], stride[0])
    sy = substitution_neighbor_count(tile_extent[1], stride[1])
    return (sx + 1) * (sy + 1) - 1


@dataclass(frozen=True)
class ReliableRegion:
    """Pixels a tile donates to the fused output, exact and discretized."""

    tile_id: str
    interval_x: tuple[float, float]
    interval_y: tuple[float, float]
    window: PixelWindow


@dataclass
class SpatialIndex:
    """R-tree over the exact tile rectangles of one scheme."""

    tiles: list[TileRef]
    tree: RTree

    def query(self, rect: Rect) -> list[TileRef]:
        return [self.tiles[i] for i in self.tree.query(rect)]


def build_index(tiles: Sequence[TileRef], capacity: int = 16) -> SpatialIndex:
    tiles = list(tiles)
    rects = [
        Rect(
            t.origin_px[0],
            t.origin_px[1],
            t.origin_px[0] + t.extent_px[0],
            t.origin_px[1] + t.extent_px[1],
        )
        for t in tiles
    ]
    return SpatialIndex(tiles=tiles, tree=RTree(rects, capacity=capacity))


def _axis_cuts(scheme: TilingScheme, axis: int, raster_len: int) -> list[int]:
    """Pixel columns (or rows) where donor ownership changes along one axis.

    Cut k separates tile k-1 from tile k; the outermost boundaries are the
    raster edges.  Ownership is half-open, so a pixel on a cut belongs to
    the higher cut's left tile, which is the lower grid index.
    """
    n = scheme.counts[axis]
    stride = scheme.spec.stride[axis]
    extent = scheme.spec.tile_extent[axis]
    cuts = [0]
    for k in range(1, n):
        center_prev = scheme.offset[axis] + (k - 1) * stride + extent / 2.0
        boundary = center_prev + stride / 2.0
        cuts.append(min(raster_len, max(0, round_half_up(boundary))))
    cuts.append(raster_len)
    for a, b in zip(cuts, cuts[1:]):
        if b < a:
            raise AlignmentError(f"reliable intervals collapsed: cuts {cuts}")
    return cuts


def reliable_region(tile: TileRef, scheme: TilingScheme) -> ReliableRegion:
    """Reliable region of one tile within its scheme, extended at raster edges."""
    width = round_half_up(scheme.raster_extent[0])
    height = round_half_up(scheme.raster_extent[1])
    ix, iy = tile.index
    cx, cy = tile.center_px
    interval_x = reliable_interval(cx, scheme.spec.stride[0])
    interval_y = reliable_interval(cy, scheme.spec.stride[1])
    cuts_x = _axis_cuts(scheme, 0, width)
    cuts_y = _axis_cuts(scheme, 1, height)
    return ReliableRegion(
        tile_id=tile.id,
        interval_x=interval_x,
        interval_y=interval_y,
        window=PixelWindow(cuts_x[ix], cuts_y[iy], cuts_x[ix + 1], cuts_y[iy + 1]),
    )


@dataclass(frozen=True)
class DonorSlot:
    """One aux tile and the output pixels it supplies for one base tile."""

    tile: TileRef
    dest: PixelWindow


@dataclass(frozen=True)
class BaseAssembly:
    base: TileRef
    donors: tuple[DonorSlot, ...]


@dataclass(frozen=True)
class FusionPlan:
    """Seam-free assignment of aux-tile predictions to base-tile pixels."""

    raster_size: tuple[int, int]
    stride_divisor: int
    entries: tuple[BaseAssembly, ...]

    @property
    def donor_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for entry in self.entries:
            for slot in entry.donors:
                seen.setdefault(slot.tile.id, None)
        return list(seen)


def _check_aligned(base: TilingScheme, aux: TilingScheme) -> int:
    """Validate the base/aux pairing and return the stride divisor."""
    if base.raster_extent != aux.raster_extent:
        raise AlignmentError(
            f"schemes tile different rasters: {base.raster_extent} vs {aux.raster_extent}"
        )
    if base.spec.origin != aux.spec.origin or not isinstance(base.spec.origin, Centered):
        raise AlignmentError("fusion requires symmetrically placed schemes on both sides")
    divisors = []
    for axis in range(2):
        bt = base.spec.tile_extent[axis]
        bs = base.spec.stride[axis]
        at = aux.spec.tile_extent[axis]
        as_ = aux.spec.stride[axis]
        if not math.isclose(bt, bs, rel_tol=_REL_TOL):
            raise AlignmentError(f"base scheme is not watertight: t={bt} s={bs}")
        if not math.isclose(bt, at, rel_tol=_REL_TOL):
            raise AlignmentError(f"tile extents differ: base {bt}, aux {at}")
        m = round(at / as_)
        if m < 1 or not math.isclose(at / as_, m, rel_tol=_REL_TOL):
            raise AlignmentError(f"aux stride {as_} does not divide tile extent {at}")
        divisors.append(m)
    if divisors[0] != divisors[1]:
        raise AlignmentError(f"stride divisors differ per axis: {divisors}")
    return divisors[0]


def plan_fusion(
    base: TilingScheme,
    aux: TilingScheme,
    index: SpatialIndex | None = None,
) -> FusionPlan:
    """Assign every base-scheme pixel to the aux tile owning it.

    Donor candidates come from the spatial index (built here when not
    passed in); each candidate keeps the part of the base window inside
    its reliable region, which partitions the base window exactly.
    """
    divisor = _check_aligned(base, aux)
    width = round_half_up(base.raster_extent[0])
    height = round_half_up(base.raster_extent[1])
    if index is None:
        index = build_index(
            [aux.tile(ix, iy) for iy in range(aux.counts[1]) for ix in range(aux.counts[0])]
        )
    cuts_x = _axis_cuts(aux, 0, width)
    cuts_y = _axis_cuts(aux, 1, height)
    raster_window = PixelWindow(0, 0, width, height)

    entries = []
    for by in range(base.counts[1]):
        for bx in range(base.counts[0]):
            base_tile = base.tile(bx, by)
            visible = base_tile.window.intersect(raster_window)
            donors: list[DonorSlot] = []
            if visible is not None:
                candidates = index.query(
                    Rect(visible.x0, visible.y0, visible.x1, visible.y1)
                )
                for aux_tile in candidates:
                    ax, ay = aux_tile.index
                    region = PixelWindow(
                        cuts_x[ax], cuts_y[ay], cuts_x[ax + 1], cuts_y[ay + 1]
                    )
                    dest = region.intersect(visible)
                    if dest is not None:
                        donors.append(DonorSlot(tile=aux_tile, dest=dest))
            donors.sort(key=lambda s: (s.tile.index[1], s.tile.index[0]))
            entries.append(BaseAssembly(base=base_tile, donors=tuple(donors)))
    plan = FusionPlan(
        raster_size=(width, height), stride_divisor=divisor, entries=tuple(entries)
    )
    _check_partition(plan)
    return plan


def _check_partition(plan: FusionPlan) -> None:
    """Every visible base pixel must be claimed exactly once.

    Donor windows come from disjoint cut cells clipped to the base window,
    so matching areas per base tile already proves the partition.
    """
    width, height = plan.raster_size
    raster_window = PixelWindow(0, 0, width, height)
    for entry in plan.entries:
        visible = entry.base.window.intersect(raster_window)
        want = 0 if visible is None else visible.width * visible.height
        got = sum(s.dest.width * s.dest.height for s in entry.donors)
        if got != want:
            raise AlignmentError(
                f"fusion plan misses pixels of base tile {entry.base.id}: "
                f"{got} claimed, {want} visible"
            )


def _map_axis(dest_lo: int, dest_hi: int, win_lo: int, win_len: int, pred_len: int):
    """Donor sample index for each output pixel along one axis."""
    centers = np.arange(dest_lo, dest_hi, dtype=np.float64) + 0.5 - win_lo
    idx = np.floor(centers * pred_len / win_len).astype(np.int64)
    return np.clip(idx, 0, pred_len - 1)


def fuse(
    plan: FusionPlan,
    predictions: Mapping[str, np.ndarray],
    model: ModelSpec | None = None,
    ignore: int = IGNORE_CLASS,
) -> LabelGrid:
    """Assemble the fused label raster from per-tile predictions.

    Predictions must match the tile window size, or the model input size
    when a model spec is given; they are sampled back to raster resolution
    with the same pixel-center convention used everywhere else.  Pixels
    outside the base coverage keep the ignore class.
    """
    width, height = plan.raster_size
    out = np.full((height, width), ignore, dtype=np.uint8)
    for entry in plan.entries:
        for slot in entry.donors:
            tile = slot.tile
            pred = predictions.get(tile.id)
            if pred is None:
                raise MissingTileError(tile.id)
            if pred.ndim != 2:
                raise InvalidArgumentError(
                    f"prediction {tile.id} must be single band, got shape {pred.shape}"
                )
            win = tile.window
            if model is not None:
                want = (model.input_px[1], model.input_px[0])
            else:
                want = win.shape
            if pred.shape != want:
                raise InvalidArgumentError(
                    f"prediction {tile.id} has shape {pred.shape}, want {want}"
                )
            dest = slot.dest
            xs = _map_axis(dest.x0, dest.x1, win.x0, win.width, pred.shape[1])
            ys = _map_axis(dest.y0, dest.y1, win.y0, win.height, pred.shape[0])
            out[dest.y0 : dest.y1, dest.x0 : dest.x1] = pred[np.ix_(ys, xs)]
    return LabelGrid(out)


def nearest_donor(
    plan_or_tiles, point: tuple[float, float]
) -> TileRef | None:
    """Aux tile whose center is nearest to a pixel-space point (ties: lower index)."""
    if isinstance(plan_or_tiles, FusionPlan):
        tiles: dict[str, TileRef] = {}
        for entry in plan_or_tiles.entries:
            for slot in entry.donors:
                tiles.setdefault(slot.tile.id, slot.tile)
        candidates = list(tiles.values())
    else:
        candidates = list(plan_or_tiles)
    best = None
    best_key = None
    for tile in candidates:
        cx, cy = tile.center_px
        key = (
            (point[0] - cx) ** 2 + (point[1] - cy) ** 2,
            tile.index[1],
            tile.index[0],
        )
        if best_key is None or key < best_key:
            best, best_key = tile, key
    return best


@dataclass(frozen=True)
class DistanceErrorRow:
    distance_px: float
    mean_error: float
    count: int


def error_vs_center_distance(
    tiles: Sequence[TileRef],
    predictions: Mapping[str, np.ndarray],
    truth: np.ndarray,
    model: ModelSpec | None = None,
    ignore: int = IGNORE_CLASS,
    bin_width: float = 2.0,
) -> list[DistanceErrorRow]:
    """Misclassification rate against distance from the predicting tile's center.

    Every evaluated pixel of every tile contributes to the bin holding its
    center distance; bins are bin_width wide and centered on multiples of
    bin_width.  Pixels outside the raster or labeled ignore are skipped.
    """
    if bin_width <= 0:
        raise InvalidArgumentError(f"bin width must be positive, got {bin_width}")
    height, width = truth.shape
    raster_window = PixelWindow(0, 0, width, height)
    sums: np.ndarray = np.zeros(0)
    counts: np.ndarray = np.zeros(0, dtype=np.int64)
    for tile in tiles:
        pred = predictions.get(tile.id)
        if pred is None:
            raise MissingTileError(tile.id)
        visible = tile.window.intersect(raster_window)
        if visible is None:
            continue
        win = tile.window
        if model is not None:
            want = (model.input_px[1], model.input_px[0])
        else:
            want = win.shape
        if pred.shape != want:
            raise InvalidArgumentError(
                f"prediction {tile.id} has shape {pred.shape}, want {want}"
            )
        xs = _map_axis(visible.x0, visible.x1, win.x0, win.width, pred.shape[1])
        ys = _map_axis(visible.y0, visible.y1, win.y0, win.height, pred.shape[0])
        pred_crop = pred[np.ix_(ys, xs)]
        truth_crop = truth[visible.y0 : visible.y1, visible.x0 : visible.x1]
        valid = truth_crop != ignore
        if not valid.any():
            continue
        cx, cy = tile.center_px
        dx = np.arange(visible.x0, visible.x1, dtype=np.float64) + 0.5 - cx
        dy = np.arange(visible.y0, visible.y1, dtype=np.float64) + 0.5 - cy
        dist = np.hypot(dx[np.newaxis, :], dy[:, np.newaxis])
        bins = np.floor(dist / bin_width + 0.5).astype(np.int64)
        errors = (pred_crop != truth_crop) & valid
        top = int(bins.max()) + 1
        if top > len(counts):
            counts = np.concatenate([counts, np.zeros(top - len(counts), dtype=np.int64)])
            sums = np.concatenate([sums, np.zeros(top - len(sums))])
        flat_bins = bins[valid]
        counts += np.bincount(flat_bins, minlength=len(counts))
        sums += np.bincount(flat_bins, weights=errors[valid].astype(np.float64),
                            minlength=len(sums))
    rows = []
    for k in range(len(counts)):
        if counts[k]:
            rows.append(
                DistanceErrorRow(
                    distance_px=k * bin_width,
                    mean_error=float(sums[k] / counts[k]),
                    count=int(counts[k]),
                )
            )
    return rows


def stats_to_csv(rows: Sequence[DistanceErrorRow]) -> str:
    lines = ["distance_px,mean_error,count"]
    for row in rows:
        lines.append(f"{row.distance_px:g},{row.mean_error:.6f},{row.count}")
    return "\n".join(lines) + "\n"
