"""Command-line entry points."""

from .srp_cli import cli, main

__all__ = ["cli", "main"]
