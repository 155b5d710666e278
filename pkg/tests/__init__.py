# Tests for ternary-mass
