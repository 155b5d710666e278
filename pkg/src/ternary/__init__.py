"""Exact arithmetic for definite ternary lattices over F_q[t]."""

__version__ = "1.0.0"
