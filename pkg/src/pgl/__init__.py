"""Numerical laboratory for weighted prime sums and primes in short intervals."""

__version__ = "0.1.0"
