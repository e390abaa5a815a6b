"""Workbench for a higher-order logic of opaque predicates over quasi-sets."""

__version__ = "0.1.0"
