"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: ``ConfigError`` -> 2, ``DataError`` -> 3.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class DataError(ValueError):
    """Missing, empty or malformed input data."""
