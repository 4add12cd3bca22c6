"""Services package for the numerical stages."""
