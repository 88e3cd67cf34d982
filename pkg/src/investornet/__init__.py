"""Temporal investor-network analytics.

Builds per-investor daily net-volume series from transaction records,
estimates rolling-window Pearson correlation networks per investor
category, extracts minimum/maximum spanning trees, and tracks snapshot
metrics across windows.  A seeded synthetic market generator produces
transaction streams with configurable herding and polarization regimes
for validation.
"""

__version__ = "0.1.0"

from investornet.errors import ConfigError, DataError

__all__ = ["ConfigError", "DataError", "__version__"]
