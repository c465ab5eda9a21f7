"""Reference HTTP server for the caption/generate/embed wire protocol."""

from .app import ServerConfig, create_app

__all__ = ["ServerConfig", "create_app"]
