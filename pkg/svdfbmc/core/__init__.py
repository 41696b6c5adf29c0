"""Core functionality for the svdfbmc package."""

from svdfbmc.core.errors import ConfigurationError, ShapeError
from svdfbmc.core.utils import Utils

__all__ = ["ConfigurationError", "ShapeError", "Utils"]
