"""Mode-stability toolkit for the self-similar co-rotational wave map."""

__version__ = "0.3.0"
