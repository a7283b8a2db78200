"""HTTP service wrapping the tiling core."""

from .app import create_app

__all__ = ["create_app"]
