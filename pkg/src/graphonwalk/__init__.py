"""Random walks on dense weighted graphs and their graphon continuum limits."""

__version__ = "0.1.0"
