"""
Unit tests for class enumeration in a genus.
"""

import unittest
from fractions import Fraction
from unittest.mock import patch

import pytest

from src.ternary.errors import PreconditionError, SearchBoundExceeded
from src.ternary.ffpoly import Poly
from src.ternary.formulas import mass_formula_for
from src.ternary.genus import (
    classify_decomposable,
    decomposable_count_from_class_numbers,
    default_neighbor_primes,
    exhaustive_classes,
    fingerprint,
    genus_classes,
    genus_symbol,
    isotropic_lines,
    neighbor,
    neighbor_closure,
    normalize_det,
    seed_lattice,
    siegel_lhs,
    siegel_rhs,
)
from src.ternary.lattice import TernaryLattice, isometry, reduce


def P(text, q=3):
    return Poly.parse(text, q)


class TestSeedLattice(unittest.TestCase):
    """Test the starting lattice of a genus."""

    def test_odd_degree_seed(self):
        """<1, -eps, -eps D> has determinant exactly D."""
        lattice = seed_lattice(3, P("t"))
        self.assertEqual(lattice.det, P("t"))
        self.assertTrue(lattice.is_reduced())
        self.assertEqual(lattice.minima, (0, 0, 1))

    def test_q5_seed(self):
        """The same construction over F_5."""
        lattice = seed_lattice(5, P("t", 5))
        self.assertEqual(lattice.det, P("t", 5))
        self.assertTrue(lattice.is_definite)

    def test_even_degree_seed(self):
        """Even degree D uses the candidate scan."""
        D = P("t^2+t")
        lattice = seed_lattice(3, D)
        self.assertEqual(lattice.det, D)
        self.assertTrue(lattice.is_definite)

    def test_anisotropic_part_selects_genus(self):
        """Requesting D1 = t+1 yields a lattice whose anisotropic part is t+1."""
        D = P("t^2+t")
        lattice = seed_lattice(3, D, P("t+1"))
        self.assertEqual(genus_symbol(lattice, D).D1, P("t+1"))

    def test_bad_inputs(self):
        """D must be squarefree and D1 must divide D with an odd number of primes."""
        with self.assertRaises(PreconditionError):
            seed_lattice(3, P("t^2"))
        with self.assertRaises(PreconditionError):
            seed_lattice(3, P("t^2+t"), P("t^2+t"))
        with self.assertRaises(PreconditionError):
            seed_lattice(3, P("t"), P("t+1"))

    def test_normalize_det(self):
        """A unit square multiple of D is rescaled back to D."""
        # <1, -2, -2t> over F_5 has det 4t
        lattice = TernaryLattice.from_diagonal([P("1", 5), P("3", 5), P("3*t", 5)])
        self.assertEqual(lattice.det, P("4*t", 5))
        normalized = normalize_det(lattice, P("t", 5))
        self.assertEqual(normalized.det, P("t", 5))


class TestClassLists(unittest.TestCase):
    """Test exhaustive and neighbor enumeration of classes."""

    def test_single_class(self):
        """D = t over F_3: one class with |SO| = 8 and mass 1/8."""
        classes = exhaustive_classes(3, P("t"))
        self.assertEqual(classes.class_number, 1)
        self.assertEqual(classes.so_orders, (8,))
        self.assertEqual(classes.mass, Fraction(1, 8))

    def test_routes_agree_composite(self):
        """Exhaustive and neighbor searches agree for D = t(t+1), mass 1/4."""
        D = P("t^2+t")
        exhaustive = exhaustive_classes(3, D)
        closure = neighbor_closure(seed_lattice(3, D, exhaustive.genus_symbol.D1))
        self.assertEqual(exhaustive.mass, Fraction(1, 4))
        self.assertEqual(closure.mass, Fraction(1, 4))
        self.assertEqual(exhaustive.class_number, closure.class_number)
        self.assertEqual(sorted(exhaustive.so_orders), sorted(closure.so_orders))

    def test_irreducible_cubic(self):
        """D = t^3+2t+2: mass 13/8 and h = 4."""
        classes = genus_classes(3, P("t^3+2*t+2"))
        self.assertEqual(classes.mass, Fraction(13, 8))
        self.assertEqual(classes.class_number, 4)

    @pytest.mark.slow
    def test_irreducible_cubic_exhaustive(self):
        """The exhaustive list for t^3+2t+2 has the same classes."""
        D = P("t^3+2*t+2")
        exhaustive = exhaustive_classes(3, D)
        closure = genus_classes(3, D)
        self.assertEqual(exhaustive.class_number, closure.class_number)
        for lattice in closure.representatives:
            self.assertTrue(any(isometry(lattice, other) is not None for other in exhaustive.representatives))

    @pytest.mark.slow
    def test_several_isotropic_primes(self):
        """D = t(t+1)(t+2) with D1 = t: both routes reach the local-product mass 1/2."""
        D, D1 = P("t^3+2*t"), P("t")
        formula = mass_formula_for(genus_symbol(seed_lattice(3, D, D1), D))
        self.assertFalse(formula.forms_agree)
        self.assertEqual(formula.value, Fraction(1, 2))
        exhaustive = exhaustive_classes(3, D, D1)
        self.assertEqual(exhaustive.genus_symbol.D1, D1)
        self.assertEqual(exhaustive.mass, formula.value)
        closure = genus_classes(3, D, anisotropic=D1)
        self.assertEqual(closure.class_number, exhaustive.class_number)
        self.assertEqual(closure.mass, formula.value)

    def test_q5(self):
        """D = t over F_5 has mass 1/12."""
        self.assertEqual(genus_classes(5, P("t", 5)).mass, Fraction(1, 12))

    def test_representatives_are_distinct(self):
        """No two representatives are isometric."""
        reps = genus_classes(3, P("t^3+2*t+2")).representatives
        for i, first in enumerate(reps):
            for second in reps[i + 1:]:
                self.assertIsNone(isometry(first, second))

    def test_unknown_method(self):
        """Only 'neighbor' and 'exhaustive' are methods."""
        with self.assertRaises(PreconditionError):
            genus_classes(3, P("t"), "guess")

    def test_class_cap(self):
        """The neighbor walk stops at the configured class cap."""
        with patch("src.ternary.genus.NEIGHBOR_MAX_CLASSES", 1):
            with self.assertRaises(SearchBoundExceeded):
                genus_classes(3, P("t^3+2*t+2"))

    def test_json(self):
        """The class list serializes h and mass as strings."""
        doc = genus_classes(3, P("t")).to_json()
        self.assertEqual(doc["h"], 1)
        self.assertEqual(doc["mass"], "1/8")
        self.assertEqual(doc["classes"][0]["so_order"], 8)


class TestNeighbors(unittest.TestCase):
    """Test p-neighbors."""

    def test_neighbors_stay_in_genus(self):
        """Every t+1-neighbor of the seed has det D and the same D1."""
        D = P("t^3+2*t+2")
        lattice = seed_lattice(3, D)
        p = P("t+1")
        lines = isotropic_lines(lattice, p)
        self.assertEqual(len(lines), 4)
        for x in lines:
            nb = neighbor(lattice, p, x)
            self.assertEqual(nb.det, D)
            self.assertEqual(genus_symbol(nb, D).D1, genus_symbol(lattice, D).D1)

    def test_prime_must_not_divide_d(self):
        """p | D is not allowed."""
        lattice = seed_lattice(3, P("t"))
        with self.assertRaises(PreconditionError):
            neighbor(lattice, P("t"), (P("1"), P("0"), P("0")))

    def test_vector_must_be_isotropic(self):
        """Q(x) must vanish modulo p."""
        lattice = seed_lattice(3, P("t"))
        with self.assertRaises(PreconditionError):
            neighbor(lattice, P("t+1"), (P("1"), P("0"), P("0")))

    def test_default_primes(self):
        """Two linear primes and one quadratic prime, none dividing D."""
        primes = default_neighbor_primes(P("t"))
        self.assertEqual(primes, [P("t+1"), P("t+2"), P("t^2+1")])

    def test_fingerprint_invariant(self):
        """Isometric bases share a fingerprint."""
        lattice = seed_lattice(3, P("t"))
        skewed = TernaryLattice.from_strings(3, [["1", "0", "t"], ["0", "1", "0"], ["t", "0", "t^2+t"]])
        self.assertEqual(fingerprint(lattice), fingerprint(reduce(skewed)[0]))


class TestSiegelAndDecomposability(unittest.TestCase):
    """Test weighted representation sums and the decomposable count."""

    def test_siegel_seed(self):
        """D = t: both sides are 1/2 at a = 1 and 1 at a = t+1."""
        classes = genus_classes(3, P("t"))
        for text, expected in (("1", Fraction(1, 2)), ("t+1", Fraction(1))):
            a = P(text)
            self.assertEqual(siegel_lhs(classes, a), expected)
            self.assertEqual(siegel_rhs(classes, a), expected)

    def test_siegel_not_representable(self):
        """a = 2t+2 is not represented; the class-number side is None."""
        classes = genus_classes(3, P("t"))
        a = P("2*t+2")
        self.assertEqual(siegel_lhs(classes, a), 0)
        self.assertIsNone(siegel_rhs(classes, a))

    def test_siegel_cubic(self):
        """The identity for D = t^3+2t+2 at a few values of a."""
        classes = genus_classes(3, P("t^3+2*t+2"))
        for text in ("1", "t", "t+1"):
            a = P(text)
            rhs = siegel_rhs(classes, a)
            self.assertEqual(siegel_lhs(classes, a), rhs if rhs is not None else 0)

    def test_siegel_coprime(self):
        """a must be prime to D."""
        classes = genus_classes(3, P("t"))
        with self.assertRaises(PreconditionError):
            siegel_lhs(classes, P("t"))

    def test_decomposable_split(self):
        """t^3+2t+2: four decomposable classes, none indecomposable."""
        classes = genus_classes(3, P("t^3+2*t+2"))
        self.assertEqual(classify_decomposable(classes), (4, 0))
        self.assertEqual(decomposable_count_from_class_numbers(3, P("t^3+2*t+2")), 4)

    def test_decomposable_needs_irreducible(self):
        """The split is only defined for irreducible D of odd degree."""
        classes = exhaustive_classes(3, P("t^2+t"))
        with self.assertRaises(PreconditionError):
            classify_decomposable(classes)


if __name__ == '__main__':
    unittest.main()
