"""Exact experiments on divisors of an integer lying in a short interval."""

__version__ = "0.1.0"
