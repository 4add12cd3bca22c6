"""Inverse scattering toolkit for the nonstationary Dirac-type system."""

__version__ = "1.0.0"
__app_name__ = "dirac-ist"
