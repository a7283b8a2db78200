"""Tiling schemes, georeferencing, and prediction fusion for EO rasters."""

from .errors import (
    AlignmentError,
    GeotilingError,
    InvalidArgumentError,
    MissingGeoreferenceError,
    MissingTileError,
    RasterFormatError,
    TiffParseError,
    UnsupportedCrsError,
)
from .fusion import (
    FusionPlan,
    ReliableRegion,
    SpatialIndex,
    build_index,
    error_vs_center_distance,
    fuse,
    plan_fusion,
    reliable_interval,
    reliable_region,
    substitution_neighbor_count,
    substitution_neighbor_count_2d,
)
from .georef import (
    GeoTransform,
    MercatorTile,
    ModelSpec,
    RasterMeta,
    lonlat_to_mercator_m,
    mercator_m_to_lonlat,
    mercator_tile_extent_m,
    mercator_tiles_for_bounds,
    meters_to_pixels,
    pixel_grid_tiles,
    pixels_to_meters,
    tile_georef,
)
from .raster_io import (
    ArrayRasterSource,
    RasterSource,
    TileManifest,
    open_raster,
    read_manifest,
    read_sidecar,
    read_tile,
    write_label_raster,
    write_manifest,
    write_sidecar,
)
from .rasterize import (
    IGNORE_CLASS,
    LabelGrid,
    VectorFeature,
    VectorLabelSet,
    parse_geojson,
    rasterize,
)
from .rtree import Rect, RTree
from .scheme import (
    Centered,
    CornerAnchored,
    PixelWindow,
    RoundingMode,
    SchemeSpec,
    TileRef,
    TilingScheme,
    augmented_count,
    build_scheme,
    coverage_1d,
    enumerate_tiles,
    offset_1d,
    tile_count_1d,
)
from .tiff import TiffRasterSource, parse_geotiff_meta

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "ArrayRasterSource",
    "Centered",
    "CornerAnchored",
    "FusionPlan",
    "GeotilingError",
    "GeoTransform",
    "IGNORE_CLASS",
    "InvalidArgumentError",
    "LabelGrid",
    "MercatorTile",
    "MissingGeoreferenceError",
    "MissingTileError",
    "ModelSpec",
    "PixelWindow",
    "RasterFormatError",
    "RasterMeta",
    "RasterSource",
    "Rect",
    "ReliableRegion",
    "RoundingMode",
    "RTree",
    "SchemeSpec",
    "SpatialIndex",
    "TiffParseError",
    "TiffRasterSource",
    "TileManifest",
    "TileRef",
    "TilingScheme",
    "UnsupportedCrsError",
    "VectorFeature",
    "VectorLabelSet",
    "augmented_count",
    "build_index",
    "build_scheme",
    "coverage_1d",
    "enumerate_tiles",
    "error_vs_center_distance",
    "fuse",
    "lonlat_to_mercator_m",
    "mercator_m_to_lonlat",
    "mercator_tile_extent_m",
    "mercator_tiles_for_bounds",
    "meters_to_pixels",
    "offset_1d",
    "open_raster",
    "parse_geojson",
    "parse_geotiff_meta",
    "pixel_grid_tiles",
    "pixels_to_meters",
    "plan_fusion",
    "rasterize",
    "read_manifest",
    "read_sidecar",
    "read_tile",
    "reliable_interval",
    "reliable_region",
    "substitution_neighbor_count",
    "substitution_neighbor_count_2d",
    "tile_count_1d",
    "tile_georef",
    "write_label_raster",
    "write_manifest",
    "write_sidecar",
]
