"""Exception types shared across the package.

The CLI maps these onto stable exit codes: ConfigError -> 1, DataError -> 2.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad flag values, inconsistent window spec, broken preset."""


class DataError(ValueError):
    """Invalid input data: malformed rows, empty record sets, inconsistent categories."""


class ZeroVarianceError(ValueError):
    """Pearson correlation requested for a constant series; callers drop the node."""


class DegenerateNetworkError(ValueError):
    """Spanning tree requested for a network with fewer than 2 nodes."""
