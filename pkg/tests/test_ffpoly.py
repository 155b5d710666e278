"""
Unit tests for polynomial arithmetic over F_q.
"""

import itertools
import unittest

import sympy

from src.ternary.errors import ModulusMismatchError, PolynomialFormatError, PreconditionError
from src.ternary.ffpoly import (
    FieldElement,
    Poly,
    crt,
    divisors,
    enumerate_all,
    enumerate_below,
    enumerate_monic,
    factor,
    gcd,
    inverse_mod,
    irreducibles,
    is_irreducible,
    is_square,
    is_squarefree,
    jacobi,
    jacobi_euler,
    mobius,
    smallest_nonsquare,
    squarefree_decomposition,
    xgcd,
)

T = sympy.symbols("t")


def P(text, q=3):
    return Poly.parse(text, q)


def sympy_poly(f):
    return sympy.Poly(list(reversed(f.coeffs)), T, modulus=f.q)


class TestFieldElement(unittest.TestCase):
    """Test arithmetic in F_q."""

    def test_inverse(self):
        """Every nonzero residue has an inverse."""
        for q in (3, 5, 7):
            for v in range(1, q):
                a = FieldElement(v, q)
                self.assertEqual(int(a * a.inverse()), 1)

    def test_legendre(self):
        """Squares and nonsquares modulo 5."""
        self.assertTrue(FieldElement(4, 5).is_square())
        self.assertFalse(FieldElement(2, 5).is_square())

    def test_smallest_nonsquare(self):
        """The epsilon used by the seed forms."""
        self.assertEqual(smallest_nonsquare(3), 2)
        self.assertEqual(smallest_nonsquare(5), 2)
        self.assertEqual(smallest_nonsquare(7), 3)


class TestPolyArithmetic(unittest.TestCase):
    """Test ring operations in F_q[t]."""

    def test_product(self):
        """(t+1)(t+2) = t^2+2 over F_3."""
        self.assertEqual(P("t+1") * P("t+2"), P("t^2+2"))

    def test_gcd(self):
        """t+1 divides t^2+2 over F_3."""
        self.assertEqual(gcd(P("t^2+2"), P("t+1")), P("t+1"))

    def test_divmod(self):
        """t^3 = t(t^2+1) - t over F_5."""
        quot, rem = divmod(P("t^3", 5), P("t^2+1", 5))
        self.assertEqual(quot, P("t", 5))
        self.assertEqual(rem, P("4*t", 5))

    def test_degree_of_product(self):
        """deg(fg) = deg f + deg g."""
        polys = [p for p in enumerate_below(3, 3) if not p.is_zero()]
        for f, g in itertools.product(polys[:12], polys[-6:]):
            self.assertEqual((f * g).degree, f.degree + g.degree)

    def test_bezout(self):
        """xgcd returns a monic d with d = s*f + u*g."""
        for f, g in [(P("t^3+t+1"), P("t^2+2")), (P("t^4+2*t", 5), P("t^2+3*t+1", 5))]:
            d, s, u = xgcd(f, g)
            self.assertEqual(s * f + u * g, d)
            self.assertEqual(d, gcd(f, g))

    def test_inverse_and_crt(self):
        """Inverses modulo a prime and the Chinese remainder map."""
        m = P("t^2+1")
        a = P("t+2")
        self.assertEqual((a * inverse_mod(a, m)) % m, Poly.one(3))
        x = crt([P("1"), P("t")], [P("t"), P("t^2+1")])
        self.assertEqual(x % P("t"), P("1"))
        self.assertEqual(x % P("t^2+1"), P("t"))

    def test_division_by_zero(self):
        """Dividing by the zero polynomial is a precondition error."""
        with self.assertRaises(PreconditionError):
            divmod(P("t"), Poly.zero(3))

    def test_modulus_mismatch(self):
        """Operands over different fields are rejected."""
        with self.assertRaises(ModulusMismatchError):
            P("t", 3) + P("t", 5)


class TestPolyText(unittest.TestCase):
    """Test the two text forms."""

    def test_canonical_form(self):
        """Monomial sums print with '+' and '*'."""
        self.assertEqual(str(P("t^3+2*t+1")), "t^3+2*t+1")
        self.assertEqual(str(P("2*t^2+t")), "2*t^2+t")
        self.assertEqual(str(Poly.zero(3)), "0")

    def test_coefficient_list(self):
        """'1,2,0,1' is t^3+2t+1, lowest degree first."""
        self.assertEqual(P("1,2,0,1"), P("t^3+2*t+1"))
        self.assertEqual(P("t^3+2*t+1").to_coefficient_list(), "1,2,0,1")

    def test_negative_and_reduced_coefficients(self):
        """Coefficients are reduced modulo q."""
        self.assertEqual(P("t^3-t-1"), P("t^3+2*t+2"))
        self.assertEqual(P("4*t", 3), P("t", 3))

    def test_malformed(self):
        """Malformed text raises PolynomialFormatError."""
        for bad in ("", "t^^2", "t+*2", "x+1", "1,a"):
            with self.subTest(text=bad), self.assertRaises(PolynomialFormatError):
                P(bad)

    def test_bad_modulus(self):
        """q must be an odd prime."""
        with self.assertRaises(PreconditionError):
            Poly.parse("t", 9)


class TestFactorization(unittest.TestCase):
    """Test factorization, irreducibility and Moebius."""

    def test_examples(self):
        """Small factorizations over F_3."""
        self.assertEqual(factor(P("t^2+2*t")), [(P("t"), 1), (P("t+2"), 1)])
        self.assertEqual(factor(P("t^2+1")), [(P("t^2+1"), 1)])
        self.assertEqual(factor(P("t^2+2*t+1")), [(P("t+1"), 2)])

    def test_round_trip(self):
        """The factors multiply back to the input."""
        for f in enumerate_all(3, 4):
            prod = Poly.constant(3, f.leading_coefficient)
            for p, e in factor(f):
                self.assertTrue(is_irreducible(p))
                prod = prod * p**e
            self.assertEqual(prod, f)

    def test_against_sympy(self):
        """Factor degrees and exponents agree with sympy over F_5."""
        for f in list(enumerate_monic(5, 4))[::7]:
            ours = sorted((p.degree, e) for p, e in factor(f))
            _, theirs = sympy_poly(f).factor_list()
            self.assertEqual(ours, sorted((g.degree(), e) for g, e in theirs))

    def test_irreducible_against_sympy(self):
        """Ben-Or agrees with sympy for every monic of degree <= 4 over F_3."""
        for k in range(1, 5):
            for f in enumerate_monic(3, k):
                self.assertEqual(is_irreducible(f), sympy_poly(f).is_irreducible, str(f))

    def test_irreducible_counts(self):
        """Counts of monic irreducibles over F_3: 3, 3, 8, 18."""
        self.assertEqual([len(irreducibles(3, k)) for k in range(1, 5)], [3, 3, 8, 18])

    def test_mobius(self):
        """mu(1) = 1, mu(t(t+1)) = 1, mu((t+1)^2) = 0, mu(t) = -1."""
        self.assertEqual(mobius(P("1")), 1)
        self.assertEqual(mobius(P("t^2+t")), 1)
        self.assertEqual(mobius(P("t^2+2*t+1")), 0)
        self.assertEqual(mobius(P("t")), -1)

    def test_squarefree_decomposition(self):
        """2 t^2 (t+1) = 2 * (t+1) * t^2."""
        c, m0, g = squarefree_decomposition(P("2*t^3+2*t^2"))
        self.assertEqual((c, m0, g), (2, P("t+1"), P("t")))
        self.assertFalse(is_squarefree(P("t^3")))
        self.assertTrue(is_square(P("t^2+2*t+1")))
        self.assertFalse(is_square(P("2*t^2")))

    def test_divisors(self):
        """Monic divisors sorted by degree."""
        self.assertEqual(divisors(P("t^2+t")), [P("1"), P("t"), P("t+1"), P("t^2+t")])


class TestEnumeration(unittest.TestCase):
    """Test deterministic enumeration."""

    def test_monic(self):
        """Degree 0 gives {1}; degree 1 gives t, t+1, t+2 in that order."""
        self.assertEqual(list(enumerate_monic(3, 0)), [P("1")])
        self.assertEqual(list(enumerate_monic(3, 1)), [P("t"), P("t+1"), P("t+2")])

    def test_all(self):
        """(q-1) q^k polynomials of exact degree k."""
        items = list(enumerate_all(3, 2))
        self.assertEqual(len(items), 18)
        self.assertEqual(len(set(items)), 18)
        self.assertTrue(all(f.degree == 2 for f in items))


class TestJacobi(unittest.TestCase):
    """Test the quadratic residue symbol."""

    def test_examples(self):
        """(t / t+1) = -1, (1 / a) = 1, (t+1 / t(t+1)) = 0 over F_3."""
        self.assertEqual(jacobi(P("t"), P("t+1")), -1)
        for a in enumerate_monic(3, 2):
            self.assertEqual(jacobi(P("1"), a), 1)
        self.assertEqual(jacobi(P("t+1"), P("t^2+t")), 0)

    def test_against_euler(self):
        """Reciprocity agrees with Euler's criterion on primes of degree <= 3."""
        for q, bdeg in ((3, 4), (5, 2)):
            primes = [p for k in range(1, 4) for p in irreducibles(q, k)]
            for b in enumerate_below(q, bdeg + 1):
                for p in primes:
                    self.assertEqual(jacobi(b, p), jacobi_euler(b, p), f"q={q} b={b} p={p}")

    def test_multiplicative(self):
        """Multiplicative in both arguments."""
        a, a2 = P("t^2+1"), P("t+2")
        b, b2 = P("t^3+t+2"), P("2*t+1")
        self.assertEqual(jacobi(b * b2, a), jacobi(b, a) * jacobi(b2, a))
        self.assertEqual(jacobi(b, a * a2), jacobi(b, a) * jacobi(b, a2))

    def test_lower_argument_must_be_monic(self):
        """The lower argument must be monic."""
        with self.assertRaises(PreconditionError):
            jacobi(P("t"), P("2*t+1"))


if __name__ == '__main__':
    unittest.main()
