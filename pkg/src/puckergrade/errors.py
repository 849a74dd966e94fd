"""Shared exception bases; concrete errors live next to the code that raises them."""


class PuckerError(Exception):
    """Base class for all puckergrade errors."""


class DataError(PuckerError):
    """Input data is missing, malformed or degenerate."""


class ConfigMismatchError(PuckerError):
    """Pipeline parameters are incompatible with a stored model."""
