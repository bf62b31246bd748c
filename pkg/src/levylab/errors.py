"""Shared exception types."""


class ParameterError(ValueError):
    """A parameter lies outside its admissible domain."""


class DegenerateInputError(ValueError):
    """Input data carries no usable information (e.g. all zeros)."""


class ShapeError(ValueError):
    """Array arguments have inconsistent shapes."""


class ConfigError(ValueError):
    """An experiment configuration is malformed."""
