"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SchemeConfig(BaseModel):
    """Mirror of the CLI flags controlling tiling jobs."""

    tile_m: float | None = None
    tile_px: int | None = None
    stride_div: int = 1
    rounding: str | None = None
    anchor: str = "center"
    model_px: int | None = None
    zoom: int = 19
    include_partial: bool = True
    image_format: str = "pgm"
    resample: str = "nearest"
    class_property: str = "class"
    background: int = 0
    jobs: int = 4


class TileInfo(BaseModel):
    id: str
    index: tuple[int, int]
    origin_px: tuple[float, float]
    extent_px: tuple[float, float]
    window: tuple[int, int, int, int]
    georef: tuple[float, float, float, float, float, float]


class RasterInfo(BaseModel):
    width: int
    height: int
    gsd: tuple[float, float]
    transform: tuple[float, float, float, float, float, float]
    crs: str
    nodata: int | None = None


class OpenSessionRequest(BaseModel):
    raster_path: str
    config: SchemeConfig = Field(default_factory=SchemeConfig)


class SessionInfo(BaseModel):
    session_id: str
    raster_id: str
    raster: RasterInfo
    counts: tuple[int, int]
    offset_px: tuple[float, float]
    tile_count: int
    stride_divisor: int
    model_px: tuple[int, int] | None = None
    image_format: str


class TileListResponse(BaseModel):
    session_id: str
    tiles: list[TileInfo]


class TileJobRequest(BaseModel):
    raster_paths: list[str]
    out_dir: str
    config: SchemeConfig = Field(default_factory=SchemeConfig)


class TileJobResult(BaseModel):
    raster_id: str
    manifest_path: str
    tile_count: int


class TileJobFailure(BaseModel):
    raster: str
    error: str


class TileJobResponse(BaseModel):
    results: list[TileJobResult]
    failures: list[TileJobFailure] = []


class RasterizeRequest(BaseModel):
    raster_path: str
    labels_path: str
    out_path: str
    config: SchemeConfig = Field(default_factory=SchemeConfig)


class FuseRequest(BaseModel):
    manifest_path: str
    predictions_dir: str
    out_path: str


class StatsRequest(BaseModel):
    manifest_path: str
    predictions_dir: str
    ground_truth_path: str
    out_path: str


class CompareRequest(BaseModel):
    raster_paths: list[str]
    out_path: str
    config: SchemeConfig = Field(default_factory=SchemeConfig)


class PathResponse(BaseModel):
    out_path: str


class ErrorBody(BaseModel):
    detail: str
