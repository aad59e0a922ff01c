"""Exact p-adic q-expansion calculus over real quadratic fields."""

__version__ = "0.1.0"
