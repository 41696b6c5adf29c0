"""
Exception types for the svdfbmc package.
"""


class ConfigurationError(ValueError):
    """Raised for invalid parameters, unsupported designs or scheme combinations."""


class ShapeError(ValueError):
    """Raised when an array has a length or shape the operation cannot accept."""
