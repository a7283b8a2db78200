"""Raster sources and file formats: sidecars, manifests, tile images.

JSON artifacts are written canonically (sorted keys, compact separators,
trailing newline) so reruns and independent clients produce byte-identical
files.  Python float repr round-trips exactly through JSON, which keeps
fractional origins and offsets stable across write/read cycles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidArgumentError, RasterFormatError
from .georef import GeoTransform, ModelSpec, RasterMeta, tile_georef
from .scheme import (
    Centered,
    CornerAnchored,
    PixelWindow,
    RoundingMode,
    SchemeSpec,
    TileRef,
    TilingScheme,
)
from .tiff import TiffRasterSource

SIDECAR_VERSION = 1
MANIFEST_VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


class RasterSource:
    """Pixel access plus metadata; base for array, image-file, and TIFF sources."""

    meta: RasterMeta

    @property
    def band_count(self) -> int:
        raise NotImplementedError

    def read_region(self, window: PixelWindow, pad_value: int = 0):
        raise NotImplementedError


class ArrayRasterSource(RasterSource):
    def __init__(self, data: np.ndarray, meta: RasterMeta):
        if data.ndim not in (2, 3):
            raise InvalidArgumentError(f"array must be 2D or 3D, got shape {data.shape}")
        if data.shape[0] != meta.height or data.shape[1] != meta.width:
            raise InvalidArgumentError(
                f"array shape {data.shape} does not match meta {meta.width}x{meta.height}"
            )
        self.data = data
        self.meta = meta

    @property
    def band_count(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    def read_region(self, window: PixelWindow, pad_value: int = 0):
        shape = (window.height, window.width) + self.data.shape[2:]
        out = np.full(shape, pad_value, dtype=self.data.dtype)
        inside = window.intersect(PixelWindow(0, 0, self.meta.width, self.meta.height))
        padded = inside is None or inside != window
        if inside is not None:
            out[
                inside.y0 - window.y0 : inside.y1 - window.y0,
                inside.x0 - window.x0 : inside.x1 - window.x0,
            ] = self.data[inside.y0 : inside.y1, inside.x0 : inside.x1]
        return out, padded


def meta_to_dict(meta: RasterMeta) -> dict:
    out = {
        "version": SIDECAR_VERSION,
        "width": meta.width,
        "height": meta.height,
        "gsd": [meta.gsd[0], meta.gsd[1]],
        "transform": list(meta.transform.coefficients()),
        "crs": meta.crs,
    }
    if meta.nodata is not None:
        out["nodata"] = meta.nodata
    return out


def meta_from_dict(obj: dict) -> RasterMeta:
    try:
        version = obj.get("version", 1)
        if version != SIDECAR_VERSION:
            raise RasterFormatError(f"unsupported sidecar version {version}")
        return RasterMeta(
            width=int(obj["width"]),
            height=int(obj["height"]),
            gsd=(float(obj["gsd"][0]), float(obj["gsd"][1])),
            transform=GeoTransform.from_coefficients(obj["transform"]),
            crs=str(obj.get("crs", "")),
            nodata=obj.get("nodata"),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise RasterFormatError(f"malformed sidecar: {exc}") from exc


def read_sidecar(data: bytes) -> RasterMeta:
    """Parse raster metadata from sidecar JSON bytes."""
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise RasterFormatError(f"sidecar is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise RasterFormatError("sidecar must be a JSON object")
    return meta_from_dict(obj)


def write_sidecar(meta: RasterMeta, path: str | Path) -> None:
    Path(path).write_text(canonical_json(meta_to_dict(meta)))


def sidecar_path(image_path: str | Path) -> Path:
    return Path(image_path).with_suffix(".json")


# ---------------------------------------------------------------------------
# tile images: PGM (pure) and PNG (via Pillow)


def pgm_bytes(arr: np.ndarray) -> bytes:
    """Binary PGM encoding; 16-bit samples go big-endian per the format."""
    if arr.ndim != 2:
        raise InvalidArgumentError(f"PGM is single band, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        maxval, payload = 255, arr.tobytes()
    elif arr.dtype == np.uint16:
        maxval, payload = 65535, arr.astype(">u2").tobytes()
    else:
        raise InvalidArgumentError(f"PGM supports uint8/uint16, got {arr.dtype}")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii")
    return header + payload


def write_pgm(arr: np.ndarray, path: str | Path) -> None:
    Path(path).write_bytes(pgm_bytes(arr))


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise RasterFormatError(f"{path}: not a binary PGM")
    fields: list[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        try:
            fields.append(int(data[start:pos]))
        except ValueError as exc:
            raise RasterFormatError(f"{path}: bad PGM header") from exc
    pos += 1
    width, height, maxval = fields
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    payload = data[pos : pos + expected]
    if len(payload) != expected:
        raise RasterFormatError(f"{path}: PGM payload truncated")
    return (
        np.frombuffer(payload, dtype=dtype)
        .reshape(height, width)
        .astype(dtype.newbyteorder("="))
    )


def write_tile_image(arr: np.ndarray, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".pgm":
        write_pgm(arr, path)
        return
    if arr.dtype == np.uint16:
        if arr.ndim != 2:
            raise InvalidArgumentError("16-bit images must be single band")
        Image.fromarray(arr, mode="I;16").save(path)
    else:
        Image.fromarray(arr).save(path)


def read_image(path: str | Path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".pgm":
        return read_pgm(path)
    with Image.open(path) as img:
        arr = np.asarray(img)
    if arr.dtype == np.int32:
        arr = arr.astype(np.uint16)
    return arr


def open_raster(path: str | Path) -> RasterSource:
    """TIFFs carry their own georeferencing; other images need a sidecar."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    if path.suffix.lower() in (".tif", ".tiff"):
        return TiffRasterSource(path.read_bytes())
    side = sidecar_path(path)
    if not side.exists():
        raise RasterFormatError(f"{path}: no sidecar {side.name} with georeferencing")
    meta = read_sidecar(side.read_bytes())
    data = read_image(path)
    return ArrayRasterSource(data, meta)


# ---------------------------------------------------------------------------
# tile extraction


def resample_nearest(arr: np.ndarray, out_wh: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbor resample keeping the pixel-center index convention."""
    out_w, out_h = out_wh
    in_h, in_w = arr.shape[:2]
    xs = np.minimum((np.arange(out_w) + 0.5) * in_w / out_w, in_w - 0.5).astype(np.int64)
    ys = np.minimum((np.arange(out_h) + 0.5) * in_h / out_h, in_h - 0.5).astype(np.int64)
    return arr[np.ix_(ys, xs)]


def resample_bilinear(arr: np.ndarray, out_wh: tuple[int, int]) -> np.ndarray:
    if arr.dtype == np.uint16:
        img = Image.fromarray(arr.astype(np.float32), mode="F")
        out = np.asarray(img.resize(out_wh, Image.Resampling.BILINEAR))
        return np.clip(np.rint(out), 0, 65535).astype(np.uint16)
    img = Image.fromarray(arr)
    return np.asarray(img.resize(out_wh, Image.Resampling.BILINEAR))


def read_tile(
    source: RasterSource,
    tile: TileRef,
    model: ModelSpec | None = None,
    method: str = "nearest",
    pad_value: int = 0,
) -> tuple[np.ndarray, bool]:
    """Tile pixels, resampled to the model input size when one is given."""
    arr, padded = source.read_region(tile.window, pad_value=pad_value)
    if model is not None and (arr.shape[1], arr.shape[0]) != model.input_px:
        if method == "nearest":
            arr = resample_nearest(arr, model.input_px)
        elif method == "bilinear":
            arr = resample_bilinear(arr, model.input_px)
        else:
            raise InvalidArgumentError(f"unknown resample method {method!r}")
    return arr, padded


def write_label_raster(arr: np.ndarray, meta: RasterMeta, path: str | Path) -> Path:
    """Write a label grid with a sidecar carrying the raster's georeferencing."""
    path = Path(path)
    if arr.shape[:2] != (meta.height, meta.width):
        raise InvalidArgumentError(
            f"label shape {arr.shape} does not match raster {meta.width}x{meta.height}"
        )
    write_tile_image(arr, path)
    write_sidecar(meta, sidecar_path(path))
    return path


# ---------------------------------------------------------------------------
# manifests


def _spec_to_dict(spec: SchemeSpec) -> dict:
    anchor = "center"
    anchor_offset = [0.0, 0.0]
    if isinstance(spec.origin, CornerAnchored):
        anchor = "corner"
        anchor_offset = [spec.origin.offset_x, spec.origin.offset_y]
    return {
        "tile_extent_px": [spec.tile_extent[0], spec.tile_extent[1]],
        "stride_px": [spec.stride[0], spec.stride[1]],
        "rounding": spec.rounding.value,
        "anchor": anchor,
        "anchor_offset": anchor_offset,
    }


def _spec_from_dict(obj: dict) -> SchemeSpec:
    origin = (
        CornerAnchored(float(obj["anchor_offset"][0]), float(obj["anchor_offset"][1]))
        if obj.get("anchor") == "corner"
        else Centered()
    )
    return SchemeSpec(
        tile_extent=(float(obj["tile_extent_px"][0]), float(obj["tile_extent_px"][1])),
        stride=(float(obj["stride_px"][0]), float(obj["stride_px"][1])),
        rounding=RoundingMode(obj["rounding"]),
        origin=origin,
        unit="px",
    )


@dataclass(frozen=True)
class TileManifest:
    """Everything needed to feed tiles to a model and fuse the results back."""

    raster_id: str
    raster: RasterMeta
    spec: SchemeSpec
    counts: tuple[int, int]
    offset: tuple[float, float]
    tiles: list[TileRef]
    stride_divisor: int = 1
    model_px: tuple[int, int] | None = None
    image_format: str = "pgm"

    def scheme(self) -> TilingScheme:
        return TilingScheme(
            spec=self.spec,
            raster_extent=self.raster.extent_px,
            counts=self.counts,
            offset=self.offset,
        )

    def base_spec(self) -> SchemeSpec:
        """The watertight scheme this manifest's tiling augments."""
        return replace(self.spec, stride=self.spec.tile_extent)

    def tile_image_name(self, tile_id: str) -> str:
        return f"{tile_id}.{self.image_format}"


def manifest_to_dict(manifest: TileManifest) -> dict:
    model = ModelSpec(manifest.model_px) if manifest.model_px else None
    tiles = []
    for tile in manifest.tiles:
        georef = tile_georef(manifest.raster.transform, tile, model)
        tiles.append(
            {
                "id": tile.id,
                "index": [tile.index[0], tile.index[1]],
                "origin_px": [tile.origin_px[0], tile.origin_px[1]],
                "extent_px": [tile.extent_px[0], tile.extent_px[1]],
                "window": [tile.window.x0, tile.window.y0, tile.window.x1, tile.window.y1],
                "georef": list(georef.coefficients()),
                "image": manifest.tile_image_name(tile.id),
            }
        )
    out = {
        "version": MANIFEST_VERSION,
        "raster_id": manifest.raster_id,
        "raster": meta_to_dict(manifest.raster),
        "scheme": _spec_to_dict(manifest.spec),
        "stride_divisor": manifest.stride_divisor,
        "counts": [manifest.counts[0], manifest.counts[1]],
        "offset_px": [manifest.offset[0], manifest.offset[1]],
        "image_format": manifest.image_format,
        "tiles": tiles,
    }
    if manifest.model_px is not None:
        out["model_px"] = [manifest.model_px[0], manifest.model_px[1]]
    return out


def manifest_from_dict(obj: dict) -> TileManifest:
    try:
        if obj.get("version") != MANIFEST_VERSION:
            raise RasterFormatError(f"unsupported manifest version {obj.get('version')}")
        tiles = [
            TileRef(
                index=(int(t["index"][0]), int(t["index"][1])),
                origin_px=(float(t["origin_px"][0]), float(t["origin_px"][1])),
                extent_px=(float(t["extent_px"][0]), float(t["extent_px"][1])),
                window=PixelWindow(*(int(v) for v in t["window"])),
                id=str(t["id"]),
            )
            for t in obj["tiles"]
        ]
        model_px = obj.get("model_px")
        return TileManifest(
            raster_id=str(obj["raster_id"]),
            raster=meta_from_dict(obj["raster"]),
            spec=_spec_from_dict(obj["scheme"]),
            counts=(int(obj["counts"][0]), int(obj["counts"][1])),
            offset=(float(obj["offset_px"][0]), float(obj["offset_px"][1])),
            tiles=tiles,
            stride_divisor=int(obj.get("stride_divisor", 1)),
            model_px=(int(model_px[0]), int(model_px[1])) if model_px else None,
            image_format=str(obj.get("image_format", "pgm")),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise RasterFormatError(f"malformed manifest: {exc}") from exc


def write_manifest(manifest: TileManifest, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(canonical_json(manifest_to_dict(manifest)))
    return path


def read_manifest(path: str | Path) -> TileManifest:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise RasterFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise RasterFormatError(f"{path}: manifest must be a JSON object")
    return manifest_from_dict(obj)
