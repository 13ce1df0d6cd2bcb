"""HTTP service wrapping the core accounting library."""

from truncdp.service.app import create_app

__all__ = ["create_app"]
