"""Branch-and-price for the robust single-source capacitated facility location problem."""

__version__ = "0.1.0"
