"""Simulator of radiation-pressure correlations between two beams in a moving-mirror cavity."""

__version__ = "0.1.0"
