"""CLI interface for the GC simulator."""

from .app import create_app

__all__ = ["create_app"]
