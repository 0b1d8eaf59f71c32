"""Exception types shared across the package."""


class ConfigError(Exception):
    """Raised when a configuration is structurally invalid or exceeds a budget.

    CLI maps this (and ValueError) to exit code 2.
    """
