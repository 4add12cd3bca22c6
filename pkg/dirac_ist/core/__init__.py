"""Core package for configuration, logging, errors, and instrumentation."""
