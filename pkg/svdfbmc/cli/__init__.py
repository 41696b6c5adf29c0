"""Command-line interface for svdfbmc."""
