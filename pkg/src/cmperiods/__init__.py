"""Exact function-field CM arithmetic: Carlitz periods, CM dual t-motives,
quasi-periods, and bounded-height relation certificates."""

__version__ = "0.1.0"
