"""HTTP API and operator CLI."""

from .app import ModelBundle, create_app, load_bundle

__all__ = ["ModelBundle", "create_app", "load_bundle"]
