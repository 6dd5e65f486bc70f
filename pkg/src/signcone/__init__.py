"""Reconstruction of band-limited graph signals from vertex sign samples."""

__version__ = "0.1.0"
