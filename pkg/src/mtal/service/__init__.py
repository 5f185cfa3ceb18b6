"""FastAPI service wrapping the training library."""

from .app import create_app

__all__ = ["create_app"]
