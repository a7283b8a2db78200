"""TIFF reader against an independent writer, plus malformed-input behavior."""

from __future__ import annotations

import struct

import numpy as np
import pytest

from geotiling.errors import MissingGeoreferenceError, TiffParseError
from geotiling.scheme import PixelWindow
from geotiling.tiff import TiffRasterSource, parse_geotiff_meta, parse_tiff_info

from conftest import build_tiff, gradient_array


def full_window(arr: np.ndarray) -> PixelWindow:
    return PixelWindow(0, 0, arr.shape[1], arr.shape[0])


class TestPixelReads:
    @pytest.mark.parametrize("byte_order", ["<", ">"])
    @pytest.mark.parametrize("compression", [1, 8])
    def test_striped_full_read_bit_exact(self, byte_order, compression):
        arr = gradient_array(37, 23)
        data = build_tiff(arr, byte_order=byte_order, compression=compression,
                          rows_per_strip=5)
        src = TiffRasterSource(data)
        got, padded = src.read_region(full_window(arr))
        assert not padded
        assert np.array_equal(got, arr)

    @pytest.mark.parametrize("byte_order", ["<", ">"])
    @pytest.mark.parametrize("compression", [1, 8])
    def test_tiled_full_read_bit_exact(self, byte_order, compression):
        arr = gradient_array(37, 23)
        data = build_tiff(arr, byte_order=byte_order, compression=compression,
                          tiled=True, tile_size=(16, 16))
        src = TiffRasterSource(data)
        got, padded = src.read_region(full_window(arr))
        assert not padded
        assert np.array_equal(got, arr)

    def test_sixteen_bit_samples(self):
        arr = (gradient_array(21, 17).astype(np.uint16) * 257)
        for byte_order in ("<", ">"):
            data = build_tiff(arr, byte_order=byte_order, rows_per_strip=4)
            got, _ = TiffRasterSource(data).read_region(full_window(arr))
            assert got.dtype == np.uint16
            assert np.array_equal(got, arr)

    def test_multiband_chunky(self):
        arr = gradient_array(19, 11, bands=3)
        data = build_tiff(arr, rows_per_strip=3)
        src = TiffRasterSource(data)
        assert src.band_count == 3
        got, _ = src.read_region(PixelWindow(0, 0, 19, 11))
        assert got.shape == (11, 19, 3)
        assert np.array_equal(got, arr)

    def test_window_reads_match_slices(self, rng):
        arr = gradient_array(64, 48)
        sources = [
            TiffRasterSource(build_tiff(arr, rows_per_strip=7)),
            TiffRasterSource(build_tiff(arr, tiled=True, tile_size=(16, 16))),
        ]
        for _ in range(25):
            x0 = int(rng.integers(0, 60))
            y0 = int(rng.integers(0, 44))
            x1 = int(rng.integers(x0 + 1, 65))
            y1 = int(rng.integers(y0 + 1, 49))
            window = PixelWindow(x0, y0, x1, y1)
            for src in sources:
                got, padded = src.read_region(window)
                assert not padded
                assert np.array_equal(got, arr[y0:y1, x0:x1])

    def test_out_of_bounds_reads_pad(self):
        arr = gradient_array(32, 32)
        src = TiffRasterSource(build_tiff(arr, tiled=True, tile_size=(16, 16)))
        got, padded = src.read_region(PixelWindow(-8, 24, 8, 40), pad_value=9)
        assert padded
        assert got.shape == (16, 16)
        assert np.array_equal(got[:8, 8:], arr[24:32, 0:8])
        assert (got[:, :8] == 9).all()
        assert (got[8:, :] == 9).all()

    def test_window_fully_outside(self):
        arr = gradient_array(16, 16)
        src = TiffRasterSource(build_tiff(arr))
        got, padded = src.read_region(PixelWindow(100, 100, 110, 110), pad_value=3)
        assert padded
        assert (got == 3).all()


class TestGeoMetadata:
    def test_scale_and_tiepoint(self):
        arr = gradient_array(10, 10)
        data = build_tiff(arr, pixel_scale=(0.25, 0.5, 0.0),
                          tiepoint=(0.0, 0.0, 0.0, 100.0, 200.0, 0.0))
        meta = parse_geotiff_meta(data)
        assert meta.transform.scale == (0.25, -0.5)
        assert meta.transform.origin == (100.0, 200.0)
        assert meta.gsd == (0.25, 0.5)

    def test_offset_tiepoint(self):
        arr = gradient_array(10, 10)
        data = build_tiff(arr, pixel_scale=(0.1, 0.1, 0.0),
                          tiepoint=(4.0, 2.0, 0.0, 100.0, 200.0, 0.0))
        meta = parse_geotiff_meta(data)
        assert meta.transform.apply(4.0, 2.0) == (pytest.approx(100.0), pytest.approx(200.0))

    def test_transformation_matrix_wins(self):
        arr = gradient_array(10, 10)
        matrix = (0.2, 0.0, 0.0, 50.0,
                  0.0, -0.2, 0.0, 60.0,
                  0.0, 0.0, 0.0, 0.0,
                  0.0, 0.0, 0.0, 1.0)
        data = build_tiff(arr, transformation=matrix,
                          pixel_scale=(9.0, 9.0, 0.0),
                          tiepoint=(0.0, 0.0, 0.0, 1.0, 1.0, 0.0))
        meta = parse_geotiff_meta(data)
        assert meta.transform.scale == (0.2, -0.2)
        assert meta.transform.origin == (50.0, 60.0)

    def test_projected_crs_code(self):
        data = build_tiff(gradient_array(8, 8), epsg=32633)
        assert parse_geotiff_meta(data).crs == "EPSG:32633"

    def test_geographic_crs_code(self):
        data = build_tiff(gradient_array(8, 8), epsg=4326, geokey_name=2048)
        assert parse_geotiff_meta(data).crs == "EPSG:4326"

    def test_nodata(self):
        data = build_tiff(gradient_array(8, 8), nodata=255)
        assert parse_geotiff_meta(data).nodata == 255

    def test_missing_georeference_raises(self):
        data = build_tiff(gradient_array(8, 8), pixel_scale=None, tiepoint=None, epsg=None)
        with pytest.raises(MissingGeoreferenceError):
            parse_geotiff_meta(data)
        src = TiffRasterSource(data, require_georef=False)
        got, _ = src.read_region(PixelWindow(0, 0, 8, 8))
        assert got.shape == (8, 8)


class TestMalformedInput:
    def test_not_a_tiff(self):
        with pytest.raises(TiffParseError):
            parse_tiff_info(b"PNG rather than TIFF")

    def test_truncated_header(self):
        with pytest.raises(TiffParseError):
            parse_tiff_info(b"II*\x00")

    def test_bigtiff_rejected(self):
        data = b"II" + struct.pack("<H", 43) + b"\x00" * 12
        with pytest.raises(TiffParseError, match="BigTIFF"):
            parse_tiff_info(data)

    def test_ifd_offset_past_end(self):
        data = b"II" + struct.pack("<HI", 42, 10_000_000)
        with pytest.raises(TiffParseError):
            parse_tiff_info(data)

    def test_truncated_pixel_data(self):
        arr = gradient_array(16, 16)
        data = build_tiff(arr)[:-100]
        src = None
        with pytest.raises(TiffParseError):
            src = TiffRasterSource(data)
            src.read_region(PixelWindow(0, 0, 16, 16))

    def test_unsupported_compression(self):
        arr = gradient_array(8, 8)
        data = bytearray(build_tiff(arr))
        # patch the compression tag value to LZW (5)
        info = parse_tiff_info(bytes(data))
        assert info.compression == 1
        idx = data.find(struct.pack("<HH", 259, 3))
        data[idx + 8 : idx + 10] = struct.pack("<H", 5)
        with pytest.raises(TiffParseError, match="compression"):
            TiffRasterSource(bytes(data))

    def test_mutation_fuzz_never_crashes(self, rng):
        base = build_tiff(gradient_array(24, 18), tiled=True, tile_size=(16, 16),
                          compression=8, nodata=7)
        window = PixelWindow(0, 0, 24, 18)
        for _ in range(300):
            data = bytearray(base)
            for _ in range(int(rng.integers(1, 8))):
                data[int(rng.integers(0, len(data)))] = int(rng.integers(0, 256))
            try:
                src = TiffRasterSource(bytes(data), require_georef=False)
                src.read_region(window)
            except (TiffParseError, MissingGeoreferenceError):
                pass
