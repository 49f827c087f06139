"""Exception types shared across the package.

The CLI maps these onto process exit codes, so every failure mode that a
command can hit should be raised as one of the classes below.
"""


class HomenetclfError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HomenetclfError):
    """Invalid configuration value (bad k, empty corpus, bad split fractions...)."""


class DataFormatError(HomenetclfError):
    """Corrupt or inconsistent on-disk data (vocab files, checkpoints, datasets)."""


class GenerationError(HomenetclfError):
    """Scenario state handed to the renderer is inconsistent with the class."""


class NumericalDivergenceError(HomenetclfError):
    """Non-finite values encountered during training or inference."""
