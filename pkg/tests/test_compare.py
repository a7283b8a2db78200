"""Cross-raster scheme metrics: the consistency story must hold."""

from __future__ import annotations

import pytest

from geotiling.compare import (
    AGGREGATE_ID,
    SCHEME_GROUND_EXTENT,
    SCHEME_MERCATOR,
    SCHEME_PIXEL,
    compare_rasters,
    reports_to_csv,
)
from geotiling.errors import InvalidArgumentError
from geotiling.georef import GeoTransform, RasterMeta


def mercator_meta(width: int, height: int, gsd: float, center_lat: float) -> RasterMeta:
    from geotiling.georef import lonlat_to_mercator_m

    x, y = lonlat_to_mercator_m(13.0, center_lat)
    transform = GeoTransform(
        scale=(gsd, -gsd),
        origin=(x - width * gsd / 2, y + height * gsd / 2),
    )
    return RasterMeta(width=width, height=height, gsd=(gsd, gsd),
                      transform=transform, crs="EPSG:3857")


@pytest.fixture
def mixed_rasters():
    return [
        ("north_fine", mercator_meta(2000, 1500, 0.05, 52.4)),
        ("north_coarse", mercator_meta(1200, 900, 0.2, 52.4)),
        ("equator", mercator_meta(1500, 1500, 0.1, 0.5)),
    ]


class TestCompareRasters:
    def test_ground_extent_is_constant_across_rasters(self, mixed_rasters):
        reports = compare_rasters(mixed_rasters, tile_px=512, tile_m=75.0, zoom=19)
        pooled = next(r for r in reports
                      if r.raster_id == AGGREGATE_ID and r.scheme == SCHEME_GROUND_EXTENT)
        mean_x, std_x, mean_y, std_y = pooled.extent_stats()
        assert mean_x == 75.0
        assert std_x == 0.0
        assert std_y == 0.0

    def test_pixel_grid_extent_varies_with_gsd(self, mixed_rasters):
        reports = compare_rasters(mixed_rasters, tile_px=512, tile_m=75.0, zoom=19)
        pooled = next(r for r in reports
                      if r.raster_id == AGGREGATE_ID and r.scheme == SCHEME_PIXEL)
        _, std_x, _, _ = pooled.extent_stats()
        assert std_x > 0.0

    def test_mercator_extent_varies_with_latitude(self, mixed_rasters):
        reports = compare_rasters(mixed_rasters, tile_px=512, tile_m=75.0, zoom=19)
        per_raster = {
            r.raster_id: r.extent_stats()[0]
            for r in reports
            if r.scheme == SCHEME_MERCATOR and r.raster_id != AGGREGATE_ID
        }
        assert per_raster["north_fine"] == pytest.approx(46.6, abs=1.0)
        assert per_raster["equator"] == pytest.approx(76.4, abs=1.0)
        assert per_raster["north_fine"] < per_raster["equator"]

    def test_coverage_fractions_sane(self, mixed_rasters):
        reports = compare_rasters(mixed_rasters)
        for r in reports:
            assert 0.0 <= r.covered_fraction <= 1.0 + 1e-9
            assert r.overhang_fraction >= -1e-9

    def test_empty_input_rejected(self):
        with pytest.raises(InvalidArgumentError):
            compare_rasters([])


class TestCsv:
    def test_header_and_shape(self, mixed_rasters):
        reports = compare_rasters(mixed_rasters)
        text = reports_to_csv(reports)
        lines = text.strip().split("\n")
        assert lines[0].startswith("raster_id,scheme,tile_count,extent_m_x_mean")
        # 3 rasters x 3 schemes + 3 pooled rows
        assert len(lines) == 1 + 12
        pooled_eot = next(
            line for line in lines
            if line.startswith(f"{AGGREGATE_ID},{SCHEME_GROUND_EXTENT}")
        )
        fields = pooled_eot.split(",")
        assert float(fields[4]) == 0.0
