"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, file problems -> 3
(plain OSError/IOError), DivergenceError -> 4.
"""


class DimensionError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class ConfigError(ValueError):
    """A configuration value violates a documented invariant."""


class DivergenceError(RuntimeError):
    """Training loss became non-finite or exceeded the abort threshold."""
