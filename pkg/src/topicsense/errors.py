"""Exception types shared across the package."""


class TopicsenseError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TopicsenseError):
    """Invalid parameter or configuration value (CLI exit code 2)."""


class DataFormatError(TopicsenseError):
    """Malformed or inconsistent input/model file (CLI exit code 1)."""
