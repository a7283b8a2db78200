"""Exception types shared across the package."""


class GeotilingError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(GeotilingError, ValueError):
    """An argument violates a documented precondition."""


class AlignmentError(GeotilingError):
    """Two schemes cannot be fused because their grids do not line up."""


class MissingTileError(GeotilingError, KeyError):
    """A prediction required by a fusion plan was not supplied."""

    def __init__(self, tile_id: str):
        super().__init__(tile_id)
        self.tile_id = tile_id

    def __str__(self) -> str:
        return f"no prediction for tile {self.tile_id!r}"


class RasterFormatError(GeotilingError):
    """A raster file or its metadata could not be parsed."""


class TiffParseError(RasterFormatError):
    """A TIFF byte stream is malformed or uses an unsupported feature."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class MissingGeoreferenceError(RasterFormatError):
    """A raster carries no usable georeferencing information."""


class UnsupportedCrsError(GeotilingError):
    """An operation requires a CRS this package does not handle."""
