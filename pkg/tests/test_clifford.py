"""
Unit tests for the even Clifford order.
"""

import unittest

import numpy as np

from src.ternary.clifford import (
    SqrtStatus,
    determinant_identity_holds,
    even_clifford,
    primitive_sqrt_search,
    trace_zero_basis,
    transported_norm_gram,
)
from src.ternary.errors import PreconditionError
from src.ternary.ffpoly import Poly
from src.ternary.lattice import TernaryLattice, random_unimodular, representation_count


def P(text, q=3):
    return Poly.parse(text, q)


def seed_t():
    return TernaryLattice.from_diagonal([P("1"), P("1"), P("t")])


def element(*texts):
    return tuple(P(x) for x in texts)


class TestEvenCliffordOrder(unittest.TestCase):
    """Test the algebra structure of C_0(L)."""

    def setUp(self):
        """C_0 of <1, 1, t> and of a non-diagonal lattice."""
        self.order = even_clifford(seed_t())
        skew = TernaryLattice.from_strings(3, [["1", "1", "0"], ["1", "t", "2"], ["0", "2", "t^2+1"]])
        self.skew_order = even_clifford(skew)

    def test_associative(self):
        """The structure constants define an associative algebra."""
        self.assertTrue(self.order.is_associative())
        self.assertTrue(self.skew_order.is_associative())

    def test_unit(self):
        """1 is the identity."""
        one = element("1", "0", "0", "0")
        x = element("t", "2", "1", "t+1")
        self.assertEqual(self.order.multiply(one, x), x)
        self.assertEqual(self.order.multiply(x, one), x)

    def test_orthogonal_products(self):
        """(e1e2)^2 = -Q(e1)Q(e2) for an orthogonal basis."""
        e12 = element("0", "1", "0", "0")
        self.assertEqual(self.order.multiply(e12, e12), element("2", "0", "0", "0"))
        e23 = element("0", "0", "0", "1")
        self.assertEqual(self.order.multiply(e23, e23), element("2*t", "0", "0", "0"))

    def test_norm_is_multiplicative(self):
        """N(xy) = N(x)N(y)."""
        for order in (self.order, self.skew_order):
            x = element("1", "t", "0", "2")
            y = element("t+1", "1", "2", "0")
            self.assertEqual(order.norm(order.multiply(x, y)), order.norm(x) * order.norm(y))

    def test_conjugate_and_trace(self):
        """x + conj(x) is the trace."""
        x = element("t", "1", "2", "t^2")
        total = [a + b for a, b in zip(x, self.skew_order.conjugate(x))]
        self.assertEqual(total[0], self.skew_order.trace(x))
        self.assertTrue(all(c.is_zero() for c in total[1:]))

    def test_trace_zero_basis(self):
        """The f_ij have trace zero."""
        for f in trace_zero_basis(self.skew_order):
            self.assertTrue(self.skew_order.trace(f).is_zero())

    def test_json(self):
        """The structure serializes as strings."""
        doc = self.order.to_json()
        self.assertEqual(doc["basis"], ["1", "e1e2", "e1e3", "e2e3"])
        self.assertEqual(len(doc["mult_table"]), 4)


class TestDeterminantIdentity(unittest.TestCase):
    """Test det C_0(L) = det(L)^2."""

    def test_diagonal(self):
        """<1, 1, t> gives det t^2."""
        self.assertEqual(even_clifford(seed_t()).determinant(), P("t^2"))

    def test_random_lattices(self):
        """The identity holds for random symmetric Gram matrices."""
        rng = np.random.default_rng(3)
        checked = 0
        while checked < 15:
            entries = [Poly(3, tuple(int(c) for c in rng.integers(0, 3, size=3))) for _ in range(6)]
            a, b, c, d, e, f = entries
            try:
                lattice = TernaryLattice(((a, d, e), (d, b, f), (e, f, c)))
            except PreconditionError:
                continue
            self.assertTrue(determinant_identity_holds(lattice), str(lattice))
            checked += 1

    def test_transport(self):
        """A change of basis of L transports the norm Gram matrix of C_0."""
        rng = np.random.default_rng(5)
        lattice = seed_t()
        order = even_clifford(lattice)
        for _ in range(3):
            t = random_unimodular(3, rng)
            self.assertEqual(transported_norm_gram(order, t), even_clifford(lattice.transform(t)).norm_gram)


class TestSquareRoots(unittest.TestCase):
    """Test the search for primitive trace-zero square roots."""

    def test_roots_match_representations(self):
        """A root of -aD exists exactly when L represents a primitively."""
        lattice = seed_t()
        order = even_clifford(lattice)
        D = lattice.det
        for text in ("1", "2", "t+1", "t+2", "2*t+2", "t^2+1"):
            a = P(text)
            result = primitive_sqrt_search(order, -(a * D))
            represented = representation_count(lattice, a) > 0
            self.assertIsNot(result.status, SqrtStatus.UNKNOWN)
            self.assertEqual(result.status is SqrtStatus.FOUND, represented, text)

    def test_root_squares_to_target(self):
        """A found root has trace zero and squares to the target."""
        order = even_clifford(seed_t())
        target = P("2*t")
        result = primitive_sqrt_search(order, target)
        self.assertIs(result.status, SqrtStatus.FOUND)
        root = result.element
        self.assertTrue(order.trace(root).is_zero())
        self.assertEqual(order.multiply(root, root), (target, P("0"), P("0"), P("0")))

    def test_bounded_search_reports_unknown(self):
        """A bounded miss is unknown, not absent."""
        order = even_clifford(seed_t())
        result = primitive_sqrt_search(order, P("t+1"), degree_bound=0)
        self.assertIs(result.status, SqrtStatus.UNKNOWN)

    def test_zero_target(self):
        """The target must be nonzero."""
        with self.assertRaises(PreconditionError):
            primitive_sqrt_search(even_clifford(seed_t()), Poly.zero(3))


if __name__ == '__main__':
    unittest.main()
