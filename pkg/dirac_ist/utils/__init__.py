"""Utilities package: interpolation and file formats."""
