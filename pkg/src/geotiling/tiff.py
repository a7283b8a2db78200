"""Minimal GeoTIFF reader: classic TIFF metadata plus pixel block access.

Only the features this package needs are supported: classic (non-Big)
TIFF, first IFD, chunky planar layout, 8- or 16-bit unsigned samples,
uncompressed or deflate blocks, striped or tiled organization, and the
GeoTIFF georeferencing tags.  Every read out of the byte stream is bounds
checked so arbitrary input fails with TiffParseError instead of crashing.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, MissingGeoreferenceError, TiffParseError
from .georef import GeoTransform, RasterMeta
from .scheme import PixelWindow

TAG_IMAGE_WIDTH = 256
TAG_IMAGE_LENGTH = 257
TAG_BITS_PER_SAMPLE = 258
TAG_COMPRESSION = 259
TAG_STRIP_OFFSETS = 273
TAG_SAMPLES_PER_PIXEL = 277
TAG_ROWS_PER_STRIP = 278
TAG_STRIP_BYTE_COUNTS = 279
TAG_PLANAR_CONFIG = 284
TAG_PREDICTOR = 317
TAG_TILE_WIDTH = 322
TAG_TILE_LENGTH = 323
TAG_TILE_OFFSETS = 324
TAG_TILE_BYTE_COUNTS = 325
TAG_SAMPLE_FORMAT = 339
TAG_MODEL_PIXEL_SCALE = 33550
TAG_MODEL_TIEPOINT = 33922
TAG_MODEL_TRANSFORMATION = 34264
TAG_GEO_KEY_DIRECTORY = 34735
TAG_GDAL_NODATA = 42113

COMPRESSION_NONE = 1
COMPRESSION_DEFLATE_ADOBE = 8
COMPRESSION_DEFLATE_OLD = 32946

GEOKEY_GEOGRAPHIC_CRS = 2048
GEOKEY_PROJECTED_CRS = 3072

# TIFF field type -> byte size
_TYPE_SIZES = {1: 1, 2: 1, 3: 2, 4: 4, 5: 8, 6: 1, 7: 1, 8: 2, 9: 4, 10: 8, 11: 4, 12: 8}
_TYPE_FORMATS = {1: "B", 3: "H", 4: "I", 6: "b", 8: "h", 9: "i", 11: "f", 12: "d"}

_MAX_DIMENSION = 1 << 20


def _need(data: bytes, offset: int, size: int) -> None:
    if offset < 0 or size < 0 or offset + size > len(data):
        raise TiffParseError(f"read of {size} bytes past end of stream", offset)


@dataclass
class TiffInfo:
    """Layout facts extracted from the first IFD."""

    byte_order: str
    width: int
    height: int
    bits_per_sample: int
    samples_per_pixel: int
    compression: int
    tiled: bool
    block_width: int
    block_height: int
    block_offsets: list[int]
    block_byte_counts: list[int]
    pixel_scale: tuple[float, ...] | None = None
    tiepoint: tuple[float, ...] | None = None
    transformation: tuple[float, ...] | None = None
    geo_keys: dict[int, int] = field(default_factory=dict)
    nodata: int | None = None


def _read_values(data: bytes, order: str, ftype: int, count: int, value_field: bytes):
    """Decode an IFD entry's values, following the offset when not inline."""
    size = _TYPE_SIZES.get(ftype)
    if size is None:
        return None
    total = size * count
    if total <= 4:
        raw = value_field[:total]
    else:
        (offset,) = struct.unpack(order + "I", value_field)
        _need(data, offset, total)
        raw = data[offset : offset + total]
    if ftype == 2:
        return raw.split(b"\x00", 1)[0].decode("ascii", errors="replace")
    if ftype in (5, 10):
        fmt = "I" if ftype == 5 else "i"
        pairs = struct.unpack(order + fmt * 2 * count, raw)
        return tuple(
            pairs[i] / pairs[i + 1] if pairs[i + 1] else 0.0
            for i in range(0, 2 * count, 2)
        )
    fmt = _TYPE_FORMATS.get(ftype)
    if fmt is None:
        return None
    return struct.unpack(order + fmt * count, raw)


def _first_int(values, default: int | None = None) -> int | None:
    if isinstance(values, tuple) and values:
        return int(values[0])
    return default


def parse_tiff_info(data: bytes) -> TiffInfo:
    """Parse the header and first IFD of a classic TIFF byte stream."""
    _need(data, 0, 8)
    if data[:2] == b"II":
        order = "<"
    elif data[:2] == b"MM":
        order = ">"
    else:
        raise TiffParseError("not a TIFF stream: bad byte-order mark", 0)
    (magic,) = struct.unpack(order + "H", data[2:4])
    if magic == 43:
        raise TiffParseError("BigTIFF is not supported", 2)
    if magic != 42:
        raise TiffParseError(f"bad TIFF magic {magic}", 2)
    (ifd_offset,) = struct.unpack(order + "I", data[4:8])

    _need(data, ifd_offset, 2)
    (n_entries,) = struct.unpack(order + "H", data[ifd_offset : ifd_offset + 2])
    _need(data, ifd_offset + 2, n_entries * 12)

    tags: dict[int, object] = {}
    for i in range(n_entries):
        base = ifd_offset + 2 + i * 12
        tag, ftype, count = struct.unpack(order + "HHI", data[base : base + 8])
        if count > len(data):
            raise TiffParseError(f"tag {tag} claims {count} values", base)
        values = _read_values(data, order, ftype, count, data[base + 8 : base + 12])
        if values is not None and tag not in tags:
            tags[tag] = values

    width = _first_int(tags.get(TAG_IMAGE_WIDTH))
    height = _first_int(tags.get(TAG_IMAGE_LENGTH))
    if not width or not height:
        raise TiffParseError("missing image dimensions")
    if width > _MAX_DIMENSION or height > _MAX_DIMENSION:
        raise TiffParseError(f"implausible image size {width}x{height}")

    samples = _first_int(tags.get(TAG_SAMPLES_PER_PIXEL), 1)
    if samples < 1 or samples > 16:
        raise TiffParseError(f"unsupported samples per pixel {samples}")
    bits_values = tags.get(TAG_BITS_PER_SAMPLE, (8,))
    if not isinstance(bits_values, tuple) or len(set(bits_values)) != 1:
        raise TiffParseError(f"mixed bits per sample {bits_values}")
    bits = int(bits_values[0])
    sample_format = _first_int(tags.get(TAG_SAMPLE_FORMAT), 1)
    if sample_format != 1:
        raise TiffParseError(f"only unsigned samples supported, got format {sample_format}")
    planar = _first_int(tags.get(TAG_PLANAR_CONFIG), 1)
    if planar != 1:
        raise TiffParseError(f"only chunky planar layout supported, got {planar}")
    predictor = _first_int(tags.get(TAG_PREDICTOR), 1)
    if predictor != 1:
        raise TiffParseError(f"predictor {predictor} not supported")
    compression = _first_int(tags.get(TAG_COMPRESSION), 1)

    tiled = TAG_TILE_OFFSETS in tags
    if tiled:
        block_w = _first_int(tags.get(TAG_TILE_WIDTH))
        block_h = _first_int(tags.get(TAG_TILE_LENGTH))
        offsets = tags.get(TAG_TILE_OFFSETS)
        counts = tags.get(TAG_TILE_BYTE_COUNTS)
        if not block_w or not block_h or block_w % 16 or block_h % 16:
            raise TiffParseError(f"bad tile size {block_w}x{block_h}")
    else:
        block_w = width
        block_h = _first_int(tags.get(TAG_ROWS_PER_STRIP), height)
        offsets = tags.get(TAG_STRIP_OFFSETS)
        counts = tags.get(TAG_STRIP_BYTE_COUNTS)
    if not isinstance(offsets, tuple) or not isinstance(counts, tuple):
        raise TiffParseError("missing block offsets or byte counts")
    if len(offsets) != len(counts):
        raise TiffParseError(
            f"{len(offsets)} block offsets but {len(counts)} byte counts"
        )
    if block_h < 1 or block_h > _MAX_DIMENSION:
        raise TiffParseError(f"bad block height {block_h}")

    geo_keys: dict[int, int] = {}
    directory = tags.get(TAG_GEO_KEY_DIRECTORY)
    if isinstance(directory, tuple) and len(directory) >= 4:
        n_keys = int(directory[3])
        for k in range(n_keys):
            entry = directory[4 + 4 * k : 8 + 4 * k]
            if len(entry) < 4:
                break
            key_id, location, count, value = (int(v) for v in entry)
            if location == 0:
                geo_keys[key_id] = value

    nodata = None
    nodata_text = tags.get(TAG_GDAL_NODATA)
    if isinstance(nodata_text, str):
        try:
            nodata = int(float(nodata_text.strip().strip("\x00")))
        except (ValueError, OverflowError):
            nodata = None

    def _floats(tag: int) -> tuple[float, ...] | None:
        values = tags.get(tag)
        if isinstance(values, tuple) and values:
            return tuple(float(v) for v in values)
        return None

    return TiffInfo(
        byte_order=order,
        width=width,
        height=height,
        bits_per_sample=bits,
        samples_per_pixel=samples,
        compression=compression,
        tiled=tiled,
        block_width=int(block_w),
        block_height=int(block_h),
        block_offsets=[int(v) for v in offsets],
        block_byte_counts=[int(v) for v in counts],
        pixel_scale=_floats(TAG_MODEL_PIXEL_SCALE),
        tiepoint=_floats(TAG_MODEL_TIEPOINT),
        transformation=_floats(TAG_MODEL_TRANSFORMATION),
        geo_keys=geo_keys,
        nodata=nodata,
    )


def _crs_from_geokeys(geo_keys: dict[int, int]) -> str:
    for key in (GEOKEY_PROJECTED_CRS, GEOKEY_GEOGRAPHIC_CRS):
        code = geo_keys.get(key)
        if code is None:
            continue
        if code == 32767:
            return "USER"
        return f"EPSG:{code}"
    return ""


def geotransform_from_info(info: TiffInfo) -> GeoTransform:
    """Build the affine from ModelTransformation or scale plus tiepoint.

    A full transformation matrix wins when both are present.
    """
    try:
        if info.transformation is not None:
            m = info.transformation
            if len(m) != 16:
                raise TiffParseError(f"model transformation has {len(m)} values, want 16")
            return GeoTransform.from_coefficients((m[0], m[1], m[3], m[4], m[5], m[7]))
        if info.pixel_scale is not None and info.tiepoint is not None:
            if len(info.pixel_scale) < 2 or len(info.tiepoint) < 6:
                raise TiffParseError("incomplete pixel scale or tiepoint")
            sx, sy = info.pixel_scale[0], info.pixel_scale[1]
            i, j, _, x, y, _ = info.tiepoint[:6]
            return GeoTransform(
                scale=(sx, -sy), origin=(x - i * sx, y + j * sy)
            )
    except InvalidArgumentError as exc:
        raise TiffParseError(f"unusable georeference: {exc}") from exc
    raise MissingGeoreferenceError("no ModelTransformation or scale/tiepoint tags")


def parse_geotiff_meta(data: bytes) -> RasterMeta:
    """RasterMeta from a GeoTIFF byte stream (raises if no georeferencing)."""
    info = parse_tiff_info(data)
    transform = geotransform_from_info(info)
    return RasterMeta.from_transform(
        width=info.width,
        height=info.height,
        transform=transform,
        crs=_crs_from_geokeys(info.geo_keys),
        nodata=info.nodata,
    )


class TiffRasterSource:
    """Random-access pixel reads over an in-memory GeoTIFF."""

    def __init__(self, data: bytes, require_georef: bool = True):
        self._data = data
        self.info = parse_tiff_info(data)
        if self.info.bits_per_sample not in (8, 16):
            raise TiffParseError(
                f"only 8- or 16-bit samples supported, got {self.info.bits_per_sample}"
            )
        if self.info.compression not in (
            COMPRESSION_NONE,
            COMPRESSION_DEFLATE_ADOBE,
            COMPRESSION_DEFLATE_OLD,
        ):
            raise TiffParseError(f"unsupported compression {self.info.compression}")
        try:
            transform = geotransform_from_info(self.info)
        except MissingGeoreferenceError:
            if require_georef:
                raise
            transform = GeoTransform(scale=(1.0, -1.0))
        self.meta = RasterMeta.from_transform(
            width=self.info.width,
            height=self.info.height,
            transform=transform,
            crs=_crs_from_geokeys(self.info.geo_keys),
            nodata=self.info.nodata,
        )
        self._dtype = np.dtype(
            ("<" if self.info.byte_order == "<" else ">")
            + ("u1" if self.info.bits_per_sample == 8 else "u2")
        )
        self._blocks_x = -(-self.info.width // self.info.block_width)
        self._blocks_y = -(-self.info.height // self.info.block_height)
        n_blocks = self._blocks_x * self._blocks_y
        if len(self.info.block_offsets) < n_blocks:
            raise TiffParseError(
                f"{len(self.info.block_offsets)} blocks listed, layout needs {n_blocks}"
            )

    @property
    def band_count(self) -> int:
        return self.info.samples_per_pixel

    def _decode_block(self, index: int, rows: int) -> np.ndarray:
        info = self.info
        offset = info.block_offsets[index]
        count = info.block_byte_counts[index]
        _need(self._data, offset, count)
        raw = self._data[offset : offset + count]
        expected = rows * info.block_width * info.samples_per_pixel * self._dtype.itemsize
        if info.compression != COMPRESSION_NONE:
            try:
                raw = zlib.decompressobj().decompress(raw, expected)
            except zlib.error as exc:
                raise TiffParseError(f"block {index} fails to inflate: {exc}", offset)
        if len(raw) < expected:
            raise TiffParseError(
                f"block {index} holds {len(raw)} bytes, layout needs {expected}", offset
            )
        arr = np.frombuffer(raw[:expected], dtype=self._dtype)
        return arr.reshape(rows, info.block_width, info.samples_per_pixel)

    def read_region(
        self, window: PixelWindow, pad_value: int = 0
    ) -> tuple[np.ndarray, bool]:
        """Pixels of `window`, padding parts outside the raster with pad_value.

        Returns (array, padded).  The array is (height, width) for single
        band data, (height, width, bands) otherwise, in native byte order.
        """
        info = self.info
        out = np.full(
            (window.height, window.width, info.samples_per_pixel),
            pad_value,
            dtype=self._dtype.newbyteorder("="),
        )
        inside = window.intersect(PixelWindow(0, 0, info.width, info.height))
        padded = inside is None or inside != window
        if inside is not None:
            bx0 = inside.x0 // info.block_width
            bx1 = (inside.x1 - 1) // info.block_width
            by0 = inside.y0 // info.block_height
            by1 = (inside.y1 - 1) // info.block_height
            for by in range(by0, by1 + 1):
                block_rows = (
                    info.block_height
                    if info.tiled
                    else min(info.block_height, info.height - by * info.block_height)
                )
                for bx in range(bx0, bx1 + 1):
                    block = self._decode_block(by * self._blocks_x + bx, block_rows)
                    ox = bx * info.block_width
                    oy = by * info.block_height
                    x0 = max(inside.x0, ox)
                    y0 = max(inside.y0, oy)
                    x1 = min(inside.x1, ox + info.block_width)
                    y1 = min(inside.y1, oy + block_rows)
                    if x1 <= x0 or y1 <= y0:
                        continue
                    out[
                        y0 - window.y0 : y1 - window.y0,
                        x0 - window.x0 : x1 - window.x0,
                    ] = block[y0 - oy : y1 - oy, x0 - ox : x1 - ox]
        if info.samples_per_pixel == 1:
            return out[:, :, 0], padded
        return out, padded
