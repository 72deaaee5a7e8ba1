"""Exact and numeric verification engine for mock theta function q-series identities."""

from .gaussian import GaussianRational, I
from .series import INF, CesaroValue, TruncatedSeries, cesaro_sum

__all__ = ["GaussianRational", "I", "INF", "CesaroValue", "TruncatedSeries", "cesaro_sum"]

__version__ = "0.1.0"
