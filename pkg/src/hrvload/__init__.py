"""Heart-rate-variability features and training-load classification toolkit."""

__version__ = "0.1.0"
