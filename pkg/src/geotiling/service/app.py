"""HTTP service wrapping the tiling core.

Sessions hold an opened raster plus its tiling so clients can list tiles
and stream pixel blocks without re-parsing the raster per request.  The
job endpoints mirror the CLI one-to-one and write the same artifacts.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import JSONResponse

from ..errors import (
    AlignmentError,
    GeotilingError,
    InvalidArgumentError,
    MissingTileError,
    RasterFormatError,
    UnsupportedCrsError,
)
from ..georef import ModelSpec, tile_georef
from ..pipeline import (
    JobConfig,
    job_compare,
    job_fuse,
    job_rasterize,
    job_stats,
    job_tile,
    model_spec_for,
    raster_id_for,
    scheme_specs_for,
)
from ..raster_io import RasterSource, open_raster, pgm_bytes, read_tile
from ..scheme import TileRef, TilingScheme, build_scheme, enumerate_tiles
from .models import (
    CompareRequest,
    FuseRequest,
    OpenSessionRequest,
    PathResponse,
    RasterInfo,
    RasterizeRequest,
    SchemeConfig,
    SessionInfo,
    StatsRequest,
    TileInfo,
    TileJobFailure,
    TileJobRequest,
    TileJobResponse,
    TileJobResult,
    TileListResponse,
)


@dataclass
class _Session:
    session_id: str
    raster_id: str
    source: RasterSource
    scheme: TilingScheme
    tiles: dict[str, TileRef]
    order: list[str]
    cfg: JobConfig
    model: ModelSpec | None


def _job_config(config: SchemeConfig) -> JobConfig:
    return JobConfig.from_dict(config.model_dump())


def _tile_info(session: _Session, tile: TileRef) -> TileInfo:
    georef = tile_georef(session.source.meta.transform, tile, session.model)
    return TileInfo(
        id=tile.id,
        index=tile.index,
        origin_px=tile.origin_px,
        extent_px=tile.extent_px,
        window=(tile.window.x0, tile.window.y0, tile.window.x1, tile.window.y1),
        georef=georef.coefficients(),
    )


def _raster_info(source: RasterSource) -> RasterInfo:
    meta = source.meta
    return RasterInfo(
        width=meta.width,
        height=meta.height,
        gsd=meta.gsd,
        transform=meta.transform.coefficients(),
        crs=meta.crs,
        nodata=meta.nodata,
    )


def _session_info(session: _Session) -> SessionInfo:
    return SessionInfo(
        session_id=session.session_id,
        raster_id=session.raster_id,
        raster=_raster_info(session.source),
        counts=session.scheme.counts,
        offset_px=session.scheme.offset,
        tile_count=session.scheme.total,
        stride_divisor=session.cfg.stride_div,
        model_px=session.model.input_px if session.model else None,
        image_format=session.cfg.image_format,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="geotiling", version="0.1.0")
    sessions: dict[str, _Session] = {}
    lock = threading.Lock()
    counter = {"next": 1}

    @app.exception_handler(GeotilingError)
    def _geotiling_error(request, exc: GeotilingError):
        if isinstance(exc, InvalidArgumentError):
            status = 422
        elif isinstance(exc, MissingTileError):
            status = 404
        elif isinstance(exc, (RasterFormatError, AlignmentError, UnsupportedCrsError)):
            status = 400
        else:
            status = 500
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    def _missing_file(request, exc: FileNotFoundError):
        return JSONResponse(status_code=404, content={"detail": f"not found: {exc}"})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "service": "geotiling", "version": app.version}

    @app.post("/sessions", response_model=SessionInfo)
    def open_session(request: OpenSessionRequest) -> SessionInfo:
        cfg = _job_config(request.config)
        cfg.require_tile_size()
        source = open_raster(request.raster_path)
        _, spec = scheme_specs_for(source.meta, cfg)
        scheme = build_scheme(source.meta.extent_px, spec)
        tiles = enumerate_tiles(scheme)
        with lock:
            session_id = f"s{counter['next']:04d}"
            counter["next"] += 1
            sessions[session_id] = _Session(
                session_id=session_id,
                raster_id=raster_id_for(request.raster_path),
                source=source,
                scheme=scheme,
                tiles={t.id: t for t in tiles},
                order=[t.id for t in tiles],
                cfg=cfg,
                model=model_spec_for(cfg),
            )
        return _session_info(sessions[session_id])

    def _get_session(session_id: str) -> _Session:
        with lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.get("/sessions/{session_id}", response_model=SessionInfo)
    def session_info(session_id: str) -> SessionInfo:
        return _session_info(_get_session(session_id))

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str) -> dict:
        with lock:
            found = sessions.pop(session_id, None)
        return {"closed": found is not None}

    @app.get("/sessions/{session_id}/tiles", response_model=TileListResponse)
    def list_tiles(session_id: str) -> TileListResponse:
        session = _get_session(session_id)
        return TileListResponse(
            session_id=session_id,
            tiles=[_tile_info(session, session.tiles[i]) for i in session.order],
        )

    @app.get("/sessions/{session_id}/tiles/{tile_id}/data")
    def tile_data(session_id: str, tile_id: str) -> Response:
        """Tile pixels as a binary PGM, exactly as the tile job writes them."""
        session = _get_session(session_id)
        tile = session.tiles.get(tile_id)
        if tile is None:
            raise HTTPException(status_code=404, detail=f"unknown tile {tile_id!r}")
        arr, padded = read_tile(
            session.source, tile, model=session.model, method=session.cfg.resample
        )
        if arr.ndim != 2:
            raise InvalidArgumentError(
                "binary tile streaming is single band; use the tile job for imagery"
            )
        return Response(
            content=pgm_bytes(arr),
            media_type="image/x-portable-graymap",
            headers={
                "X-Tile-Id": tile.id,
                "X-Tile-Window": f"{tile.window.x0},{tile.window.y0},{tile.window.x1},{tile.window.y1}",
                "X-Tile-Padded": "1" if padded else "0",
            },
        )

    @app.post("/jobs/tile", response_model=TileJobResponse)
    def tile_job(request: TileJobRequest) -> TileJobResponse:
        cfg = _job_config(request.config)
        results, failures = job_tile(list(request.raster_paths), request.out_dir, cfg)
        return TileJobResponse(
            results=[
                TileJobResult(
                    raster_id=r.raster_id,
                    manifest_path=str(r.manifest_path),
                    tile_count=r.tile_count,
                )
                for r in results
            ],
            failures=[
                TileJobFailure(raster=f.raster, error=f.error) for f in failures
            ],
        )

    @app.post("/jobs/rasterize", response_model=PathResponse)
    def rasterize_job(request: RasterizeRequest) -> PathResponse:
        cfg = _job_config(request.config)
        out = job_rasterize(request.raster_path, request.labels_path, request.out_path, cfg)
        return PathResponse(out_path=str(out))

    @app.post("/jobs/fuse", response_model=PathResponse)
    def fuse_job(request: FuseRequest) -> PathResponse:
        out = job_fuse(request.manifest_path, request.predictions_dir, request.out_path)
        return PathResponse(out_path=str(out))

    @app.post("/jobs/stats", response_model=PathResponse)
    def stats_job(request: StatsRequest) -> PathResponse:
        out = job_stats(
            request.manifest_path,
            request.predictions_dir,
            request.ground_truth_path,
            request.out_path,
        )
        return PathResponse(out_path=str(out))

    @app.post("/jobs/compare", response_model=PathResponse)
    def compare_job(request: CompareRequest) -> PathResponse:
        cfg = _job_config(request.config)
        out = job_compare(list(request.raster_paths), request.out_path, cfg)
        return PathResponse(out_path=str(out))

    return app
