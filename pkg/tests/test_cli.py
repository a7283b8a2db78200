"""Command line interface: argument handling, config merge, exit codes."""

from __future__ import annotations

import json

import numpy as np
import pytest

from geotiling.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, run
from geotiling.raster_io import (
    read_image,
    read_manifest,
    sidecar_path,
    write_sidecar,
    write_tile_image,
)

from conftest import feature_collection, gradient_array, make_meta, square_feature


@pytest.fixture
def scene_file(tmp_path):
    arr = gradient_array(100, 80)
    meta = make_meta(100, 80)
    raster = tmp_path / "scene.png"
    write_tile_image(arr, raster)
    write_sidecar(meta, sidecar_path(raster))
    return raster, arr, meta


def test_tile_command(scene_file, tmp_path):
    raster, arr, meta = scene_file
    out = tmp_path / "out"
    code = run(["tile", str(raster), "--out", str(out), "--tile-px", "40",
                "--stride-div", "2"])
    assert code == EXIT_OK
    manifest = read_manifest(out / "scene" / "manifest.json")
    assert len(manifest.tiles) == 12


def test_full_round_trip(scene_file, tmp_path):
    """tile -> copy tiles as predictions -> fuse -> stats."""
    raster, arr, meta = scene_file
    out = tmp_path / "out"
    assert run(["tile", str(raster), "--out", str(out), "--tile-px", "40",
                "--stride-div", "2"]) == EXIT_OK
    manifest_path = out / "scene" / "manifest.json"
    tiles_dir = out / "scene" / "tiles"

    fused_path = tmp_path / "fused.pgm"
    assert run(["fuse", "--manifest", str(manifest_path),
                "--predictions", str(tiles_dir),
                "--out", str(fused_path)]) == EXIT_OK
    fused = read_image(fused_path)
    assert fused.shape == (80, 100)
    # predictions were the tile crops themselves, so fused pixels inside
    # coverage equal the scene
    inside = fused != 255
    assert inside.any()
    assert np.array_equal(fused[inside], arr[inside])

    stats_path = tmp_path / "stats.csv"
    assert run(["stats", "--manifest", str(manifest_path),
                "--predictions", str(tiles_dir),
                "--ground-truth", str(raster),
                "--out", str(stats_path)]) == EXIT_OK
    lines = stats_path.read_text().strip().split("\n")
    assert lines[0] == "distance_px,mean_error,count"
    assert all(float(line.split(",")[1]) == 0.0 for line in lines[1:])


def test_rasterize_command(scene_file, tmp_path):
    raster, arr, meta = scene_file
    labels = tmp_path / "labels.json"
    labels.write_text(json.dumps(feature_collection(
        [square_feature(1001.0, 1997.0, 2.0, class_id=9)])))
    out_path = tmp_path / "burned.pgm"
    code = run(["rasterize", "--raster", str(raster), "--labels", str(labels),
                "--out", str(out_path)])
    assert code == EXIT_OK
    assert read_image(out_path)[15, 15] == 9


def test_compare_command(scene_file, tmp_path):
    raster, arr, meta = scene_file
    web = tmp_path / "web.png"
    write_tile_image(arr, web)
    write_sidecar(make_meta(100, 80, crs="EPSG:3857"), sidecar_path(web))
    out_path = tmp_path / "compare.csv"
    code = run(["compare", str(web), "--out", str(out_path), "--tile-m", "75",
                "--tile-px", "512"])
    assert code == EXIT_OK
    assert out_path.read_text().startswith("raster_id,scheme")


class TestConfigFile:
    def test_config_supplies_defaults(self, scene_file, tmp_path):
        raster, arr, meta = scene_file
        cfg = tmp_path / "job.json"
        cfg.write_text(json.dumps({"tile_px": 40, "stride_div": 2}))
        out = tmp_path / "out"
        code = run(["--config", str(cfg), "tile", str(raster), "--out", str(out)])
        assert code == EXIT_OK
        assert len(read_manifest(out / "scene" / "manifest.json").tiles) == 12

    def test_flags_override_config(self, scene_file, tmp_path):
        raster, arr, meta = scene_file
        cfg = tmp_path / "job.json"
        cfg.write_text(json.dumps({"tile_px": 40, "stride_div": 2}))
        out = tmp_path / "out"
        code = run(["--config", str(cfg), "tile", str(raster), "--out", str(out),
                    "--stride-div", "1"])
        assert code == EXIT_OK
        assert len(read_manifest(out / "scene" / "manifest.json").tiles) == 4

    def test_bad_config_key_is_usage_error(self, scene_file, tmp_path):
        raster, arr, meta = scene_file
        cfg = tmp_path / "job.json"
        cfg.write_text(json.dumps({"tile_ширина": 40}))
        code = run(["--config", str(cfg), "tile", str(raster),
                    "--out", str(tmp_path / "out")])
        assert code == EXIT_USAGE


class TestExitCodes:
    def test_missing_tile_size_is_usage(self, scene_file, tmp_path):
        raster, arr, meta = scene_file
        assert run(["tile", str(raster), "--out", str(tmp_path / "o")]) == EXIT_USAGE

    def test_both_tile_sizes_is_usage(self, scene_file, tmp_path):
        raster, arr, meta = scene_file
        assert run(["tile", str(raster), "--out", str(tmp_path / "o"),
                    "--tile-px", "40", "--tile-m", "4"]) == EXIT_USAGE

    def test_missing_raster_is_data_error(self, tmp_path):
        assert run(["tile", str(tmp_path / "absent.png"),
                    "--out", str(tmp_path / "o"), "--tile-px", "16"]) == EXIT_DATA

    def test_raster_without_sidecar_is_data_error(self, tmp_path):
        bare = tmp_path / "bare.png"
        write_tile_image(gradient_array(8, 8), bare)
        assert run(["tile", str(bare), "--out", str(tmp_path / "o"),
                    "--tile-px", "4"]) == EXIT_DATA

    def test_missing_predictions_is_data_error(self, scene_file, tmp_path):
        raster, arr, meta = scene_file
        out = tmp_path / "out"
        run(["tile", str(raster), "--out", str(out), "--tile-px", "40"])
        empty = tmp_path / "empty"
        empty.mkdir()
        assert run(["fuse", "--manifest", str(out / "scene" / "manifest.json"),
                    "--predictions", str(empty),
                    "--out", str(tmp_path / "f.pgm")]) == EXIT_DATA

    def test_unknown_subcommand_is_usage(self, capsys):
        assert run(["frobnicate"]) == EXIT_USAGE

    def test_help_exits_ok(self, capsys):
        assert run(["--help"]) == EXIT_OK
        assert "tile" in capsys.readouterr().out

    def test_partial_tile_failure_continues_and_reports(self, scene_file, tmp_path,
                                                        capsys):
        raster, arr, meta = scene_file
        bare = tmp_path / "bare.png"
        write_tile_image(gradient_array(50, 50), bare)  # no sidecar
        out = tmp_path / "out"
        code = run(["tile", str(bare), str(raster), "--out", str(out),
                    "--tile-px", "40"])
        assert code == EXIT_DATA
        captured = capsys.readouterr()
        assert "scene:" in captured.out  # good raster still tiled
        assert str(bare) in captured.err
        assert (out / "scene" / "manifest.json").exists()


def test_verbose_flag_accepted(scene_file, tmp_path):
    raster, arr, meta = scene_file
    assert run(["--verbose", "tile", str(raster), "--out", str(tmp_path / "o"),
                "--tile-px", "40"]) == EXIT_OK
