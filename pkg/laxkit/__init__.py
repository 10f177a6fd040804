"""Exact multipoint Lax operator algebras on the Riemann sphere."""

__version__ = "0.1.0"
