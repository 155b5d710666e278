"""
Unit tests for Hilbert symbols, Hasse invariants and genus symbols.
"""

import itertools
import unittest

from src.ternary._linalg import as_matrix, det3
from src.ternary.errors import PreconditionError
from src.ternary.ffpoly import Poly, enumerate_all, irreducibles, is_square
from src.ternary.localsym import (
    Place,
    brute_force_isotropic,
    classify_primes,
    determinant_class,
    diagonalize,
    hasse_invariant,
    hilbert_symbol,
    is_definite,
    is_isotropic_at,
    product_formula_holds,
    representability_conditions,
    square_class_at_infinity,
)


def P(text, q=3):
    return Poly.parse(text, q)


def diagonal(*entries, q=3):
    zero = Poly.zero(q)
    polys = [P(e, q) for e in entries]
    return as_matrix([[polys[i] if i == j else zero for j in range(3)] for i in range(3)])


class TestHilbertSymbol(unittest.TestCase):
    """Test the tame Hilbert symbol."""

    def setUp(self):
        """Nonzero polynomials of degree <= 2 over F_3."""
        self.polys = [f for k in range(3) for f in enumerate_all(3, k)]

    def test_symmetric(self):
        """(a, b)_v = (b, a)_v."""
        places = [Place.infinity()] + [Place(p) for p in irreducibles(3, 1)]
        for a, b in itertools.combinations(self.polys[::3], 2):
            for v in places:
                self.assertEqual(hilbert_symbol(a, b, v), hilbert_symbol(b, a, v))

    def test_product_formula(self):
        """The product over all places is 1."""
        for a, b in itertools.product(self.polys[::2], repeat=2):
            self.assertTrue(product_formula_holds(a, b), f"a={a} b={b}")

    def test_values(self):
        """(-1, t)_t is the Legendre symbol of -1 mod 3; (1, b) is trivial."""
        self.assertEqual(hilbert_symbol(P("2"), P("t"), Place(P("t"))), -1)
        self.assertEqual(hilbert_symbol(P("1"), P("t^2+1"), Place.infinity()), 1)

    def test_fractions(self):
        """A pair (num, den) has the square class of num*den."""
        v = Place(P("t+1"))
        frac = (P("t"), P("t+1"))
        self.assertEqual(hilbert_symbol(frac, P("2"), v), hilbert_symbol(P("t^2+t"), P("2"), v))

    def test_zero_rejected(self):
        """The symbol is only defined on K^x."""
        with self.assertRaises(PreconditionError):
            hilbert_symbol(Poly.zero(3), P("t"), Place.infinity())

    def test_square_class_at_infinity(self):
        """Degree parity and the Legendre symbol of the leading coefficient."""
        self.assertEqual(square_class_at_infinity(P("t^2+t+2")), (0, 1))
        self.assertEqual(square_class_at_infinity(P("2*t^2")), (0, -1))
        self.assertEqual(square_class_at_infinity(P("2*t^3+1")), (1, -1))


class TestDefiniteness(unittest.TestCase):
    """Test isotropy at infinity and at finite primes."""

    def test_seed_form_is_definite(self):
        """<1, -eps, -eps t> = <1, 1, t> is anisotropic at infinity over F_3."""
        gram = diagonal("1", "1", "t")
        self.assertTrue(is_definite(gram))
        self.assertFalse(brute_force_isotropic(gram, 1))

    def test_hyperbolic_plane(self):
        """<1, -1, t> is isotropic at every place."""
        gram = diagonal("1", "2", "t")
        self.assertFalse(is_definite(gram))
        for p in irreducibles(3, 1):
            self.assertTrue(is_isotropic_at(gram, Place(p)))
        self.assertTrue(brute_force_isotropic(gram, 0))

    def test_diagonalize(self):
        """The diagonal entries multiply to det up to a square."""
        gram = as_matrix([[P("0"), P("1"), P("0")], [P("1"), P("0"), P("0")], [P("0"), P("0"), P("t")]])
        diag = diagonalize(gram)
        prod = diag[0] * diag[1] * diag[2]
        self.assertTrue(is_square(prod * det3(gram)))

    def test_hasse_invariant(self):
        """<1, 2, t> has Hasse invariant (2, t)_t = -1 at t, <1, 1, t> has 1."""
        v = Place(P("t"))
        self.assertEqual(hasse_invariant([P("1"), P("2"), P("t")], v), -1)
        self.assertEqual(hasse_invariant([P("1"), P("1"), P("t")], v), 1)
        with self.assertRaises(PreconditionError):
            hasse_invariant([P("1"), P("t")], v)


class TestGenusSymbol(unittest.TestCase):
    """Test the split D = D0 * D1 and determinant classes."""

    def test_determinant_class(self):
        """Square units are dropped, nonsquare ones become epsilon."""
        self.assertEqual(determinant_class(P("t")), P("t"))
        self.assertEqual(determinant_class(P("2*t")), P("2*t"))
        self.assertEqual(determinant_class(P("4*t", 5)), P("t", 5))

    def test_seed_form_is_anisotropic_at_t(self):
        """x^2 + y^2 is anisotropic mod t, so t lands in D1."""
        symbol = classify_primes(diagonal("1", "1", "t"), P("t"))
        self.assertEqual(symbol.D0, P("1"))
        self.assertEqual(symbol.D1, P("t"))
        self.assertEqual(symbol.r, 1)
        self.assertEqual(symbol.delta, 1)
        self.assertEqual(symbol.to_json()["D1"], "t")

    def test_split_with_quadratic_prime(self):
        """-1 is a square mod t^2+1, so only t is anisotropic for <1, 1, t^3+t>."""
        D = P("t^3+t")
        gram = diagonal("1", "1", "t^3+t")
        self.assertTrue(is_definite(gram))
        symbol = classify_primes(gram, D)
        self.assertEqual(symbol.D0, P("t^2+1"))
        self.assertEqual(symbol.D1, P("t"))
        self.assertEqual(symbol.r, 2)

    def test_determinant_mismatch(self):
        """D must match det up to a square unit."""
        with self.assertRaises(PreconditionError):
            classify_primes(diagonal("1", "1", "t"), P("t+1"))

    def test_squarefree_required(self):
        """D must be squarefree."""
        with self.assertRaises(PreconditionError):
            classify_primes(diagonal("1", "1", "t^2"), P("t^2"))


class TestRepresentability(unittest.TestCase):
    """Test the condition at infinity for primitive representations."""

    def test_values_for_t(self):
        """At q=3, D=t: 1, 2 and t+1 are representable, 2t+2 is not."""
        D = P("t")
        for text in ("1", "2", "t+1", "t+2"):
            self.assertTrue(representability_conditions(None, D, P(text)).representable, text)
        result = representability_conditions(None, D, P("2*t+2"))
        self.assertFalse(result.representable)
        self.assertIn("square", result.reason)

    def test_coprime_required(self):
        """a must be prime to D."""
        with self.assertRaises(PreconditionError):
            representability_conditions(None, P("t"), P("t^2"))


if __name__ == '__main__':
    unittest.main()
