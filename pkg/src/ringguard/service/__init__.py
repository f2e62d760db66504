"""HTTP/WebSocket service around the simulator core."""

from .app import create_app, serve_realtime

__all__ = ["create_app", "serve_realtime"]
