"""Top-level package for ternary-mass."""
