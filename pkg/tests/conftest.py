"""Shared fixtures: synthetic rasters and an independent TIFF writer.

The TIFF writer here is deliberately separate from the package parser so
the reader is tested against bytes it never produced itself.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np
import pytest

from geotiling.georef import GeoTransform, RasterMeta
from geotiling.raster_io import write_sidecar


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)


def make_meta(
    width: int,
    height: int,
    gsd: tuple[float, float] = (0.1, 0.1),
    origin: tuple[float, float] = (1000.0, 2000.0),
    crs: str = "EPSG:32633",
) -> RasterMeta:
    transform = GeoTransform(scale=(gsd[0], -gsd[1]), origin=origin)
    return RasterMeta(width=width, height=height, gsd=gsd, transform=transform, crs=crs)


@pytest.fixture
def meta_factory():
    return make_meta


def gradient_array(width: int, height: int, bands: int = 1, dtype=np.uint8) -> np.ndarray:
    """Deterministic pixel values that differ by position, for exactness checks."""
    yy, xx = np.mgrid[0:height, 0:width]
    base = (xx * 7 + yy * 13).astype(np.int64)
    if bands == 1:
        return (base % np.iinfo(dtype).max).astype(dtype)
    out = np.stack([(base * (b + 1)) % np.iinfo(dtype).max for b in range(bands)], axis=2)
    return out.astype(dtype)


@pytest.fixture
def scene(tmp_path, meta_factory):
    """PNG raster with sidecar on disk, plus its array and metadata."""
    from geotiling.raster_io import sidecar_path, write_tile_image

    width, height = 97, 71
    arr = gradient_array(width, height)
    meta = meta_factory(width, height)
    path = tmp_path / "scene.png"
    write_tile_image(arr, path)
    write_sidecar(meta, sidecar_path(path))
    return path, arr, meta


# ---------------------------------------------------------------------------
# independent TIFF writer


def _pack_values(order: str, ftype: int, values) -> bytes:
    fmt = {1: "B", 3: "H", 4: "I", 12: "d"}[ftype]
    return struct.pack(order + fmt * len(values), *values)


def build_tiff(
    array: np.ndarray,
    *,
    byte_order: str = "<",
    tiled: bool = False,
    tile_size: tuple[int, int] = (16, 16),
    rows_per_strip: int | None = None,
    compression: int = 1,
    pixel_scale: tuple[float, float, float] | None = (0.1, 0.1, 0.0),
    tiepoint: tuple[float, ...] | None = (0.0, 0.0, 0.0, 1000.0, 2000.0, 0.0),
    transformation: tuple[float, ...] | None = None,
    epsg: int | None = 32633,
    geokey_name: int = 3072,
    nodata: int | None = None,
    extra_tags: list[tuple[int, int, list]] | None = None,
) -> bytes:
    """Write a classic TIFF covering the features the package reader supports."""
    if array.ndim == 2:
        array = array[:, :, np.newaxis]
    height, width, bands = array.shape
    dtype = np.dtype(byte_order + ("u1" if array.dtype.itemsize == 1 else "u2"))
    data = array.astype(dtype)

    blocks: list[bytes] = []
    if tiled:
        tw, th = tile_size
        for ty in range(0, height, th):
            for tx in range(0, width, tw):
                block = np.zeros((th, tw, bands), dtype=dtype)
                sub = data[ty : min(ty + th, height), tx : min(tx + tw, width)]
                block[: sub.shape[0], : sub.shape[1]] = sub
                blocks.append(block.tobytes())
    else:
        rps = rows_per_strip or height
        for y in range(0, height, rps):
            blocks.append(data[y : min(y + rps, height)].tobytes())
    if compression == 8:
        blocks = [zlib.compress(b) for b in blocks]

    entries: list[tuple[int, int, list]] = [
        (256, 4, [width]),
        (257, 4, [height]),
        (258, 3, [data.dtype.itemsize * 8] * bands),
        (259, 3, [compression]),
        (277, 3, [bands]),
        (339, 3, [1] * bands),
    ]
    if tiled:
        entries += [(322, 3, [tile_size[0]]), (323, 3, [tile_size[1]])]
        offset_tag, count_tag = 324, 325
    else:
        entries.append((278, 4, [rows_per_strip or height]))
        offset_tag, count_tag = 273, 279
    if pixel_scale is not None:
        entries.append((33550, 12, list(pixel_scale)))
    if tiepoint is not None:
        entries.append((33922, 12, list(tiepoint)))
    if transformation is not None:
        entries.append((34264, 12, list(transformation)))
    if epsg is not None:
        entries.append((34735, 3, [1, 1, 0, 1, geokey_name, 0, 1, epsg]))
    if nodata is not None:
        text = f"{nodata}".encode("ascii") + b"\x00"
        entries.append((42113, 2, list(text)))
    if extra_tags:
        entries.extend(extra_tags)

    # layout: header, IFD, out-of-line values, pixel blocks
    n_before_offsets = len(entries) + 2
    ifd_size = 2 + 12 * n_before_offsets + 4
    cursor = 8 + ifd_size
    packed: list[tuple[int, int, int, bytes]] = []
    overflow = b""

    def add_entry(tag: int, ftype: int, values: list) -> None:
        nonlocal cursor, overflow
        if ftype == 2:
            raw = bytes(values)
        else:
            raw = _pack_values(byte_order, ftype, values)
        count = len(values)
        if len(raw) <= 4:
            packed.append((tag, ftype, count, raw.ljust(4, b"\x00")))
        else:
            packed.append((tag, ftype, count, struct.pack(byte_order + "I", cursor)))
            overflow += raw
            cursor += len(raw)

    for tag, ftype, values in entries:
        add_entry(tag, ftype, values)

    block_bytes = b"".join(blocks)
    block_offsets = []
    # reserve room for the offset/count arrays themselves when out of line
    offsets_entry_inline = len(blocks) == 1
    data_start = cursor
    if not offsets_entry_inline:
        data_start += 8 * len(blocks)
    running = data_start
    for b in blocks:
        block_offsets.append(running)
        running += len(b)
    add_entry(offset_tag, 4, block_offsets)
    add_entry(count_tag, 4, [len(b) for b in blocks])

    packed.sort(key=lambda e: e[0])
    out = bytearray()
    out += (b"II" if byte_order == "<" else b"MM")
    out += struct.pack(byte_order + "H", 42)
    out += struct.pack(byte_order + "I", 8)
    out += struct.pack(byte_order + "H", len(packed))
    for tag, ftype, count, value in packed:
        out += struct.pack(byte_order + "HHI", tag, ftype, count) + value
    out += struct.pack(byte_order + "I", 0)
    out += overflow
    out += block_bytes
    return bytes(out)


@pytest.fixture
def tiff_builder():
    return build_tiff


def square_feature(x0: float, y0: float, size: float, class_id: int = 1) -> dict:
    return {
        "type": "Feature",
        "properties": {"class": class_id},
        "geometry": {
            "type": "Polygon",
            "coordinates": [[
                [x0, y0], [x0 + size, y0], [x0 + size, y0 + size], [x0, y0 + size], [x0, y0],
            ]],
        },
    }


def feature_collection(features: list[dict], crs: str | None = None) -> dict:
    out = {"type": "FeatureCollection", "features": features}
    if crs:
        out["crs"] = {"type": "name", "properties": {"name": crs}}
    return out
