"""Class representatives of a genus of definite ternary lattices of squarefree determinant.

Two independent routes: ``exhaustive_classes`` lists every reduced Gram
matrix of the genus (small delta only), ``neighbor_closure`` walks Kneser
p-neighbors until the accumulated mass reaches the closed-form mass.
All lattices here have determinant exactly D, so isometries have det +-1.
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Deque, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.ternary import _enumerate
from src.ternary._linalg import as_matrix, mat_mul, row_hermite, transpose
from src.ternary._parallel import ordered_map
from src.ternary.errors import InvariantViolation, PreconditionError, SearchBoundExceeded
from src.ternary.ffpoly import (
    Poly,
    enumerate_below,
    gcd,
    inverse_mod,
    irreducibles,
    is_irreducible,
    is_squarefree,
    legendre_q,
    prime_factors,
    smallest_nonsquare,
)
from src.ternary.formulas import mass_formula_for
from src.ternary.lattice import (
    TernaryLattice,
    automorphisms,
    box_dims,
    decompose,
    isometry,
    reduce,
    representation_count,
)
from src.ternary.localsym import GenusSymbol, classify_primes, representability_conditions
from src.ternary.settings import EXHAUSTIVE_MAX_CANDIDATES, NEIGHBOR_MAX_CLASSES
from src.ternary.zeta_l import class_number

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassList:
    """Pairwise non-isometric representatives L_1..L_h with n_i = |SO(L_i)|."""

    representatives: Tuple[TernaryLattice, ...]
    so_orders: Tuple[int, ...]
    genus_symbol: GenusSymbol
    method: str = "exhaustive"

    @property
    def class_number(self) -> int:
        return len(self.representatives)

    @property
    def mass(self) -> Fraction:
        return sum((Fraction(1, n) for n in self.so_orders), Fraction(0))

    def to_json(self) -> Dict[str, object]:
        return {
            "genus": self.genus_symbol.to_json(),
            "method": self.method,
            "classes": [
                {"gram": lat.to_json()["gram"], "so_order": n}
                for lat, n in zip(self.representatives, self.so_orders)
            ],
            "h": self.class_number,
            "mass": str(self.mass),
        }


def genus_symbol(lattice: TernaryLattice, D: Poly) -> GenusSymbol:
    return classify_primes(lattice.gram, D)


def _require_squarefree(D: Poly) -> None:
    if D.is_zero() or (D.degree or 0) < 1 or not is_squarefree(D):
        raise PreconditionError(f"D must be a squarefree nonconstant polynomial, got {D}")


def _check_anisotropic(D: Poly, D1: Optional[Poly]) -> Optional[Poly]:
    if D1 is None:
        return None
    D1 = D1.monic()
    if not D1.divides(D):
        raise PreconditionError(f"anisotropic part {D1} does not divide D={D}")
    if len(prime_factors(D1)) % 2 == 0:
        raise PreconditionError(
            f"anisotropic part {D1} must have an odd number of prime factors"
        )
    return D1


def normalize_det(lattice: TernaryLattice, D: Poly) -> TernaryLattice:
    """Rescale e_3 by a unit so that det is exactly D, then re-reduce."""
    q = D.q
    ratio, rem = divmod(lattice.det, D)
    if not rem.is_zero() or ratio.degree != 0:
        raise PreconditionError(f"det {lattice.det} is not a unit multiple of D={D}")
    c = ratio.leading_coefficient
    root = next((r for r in range(1, q) if (r * r * c) % q == 1), None)
    if root is None:
        raise PreconditionError(f"det {lattice.det} and D={D} differ by a nonsquare unit")
    if root == 1:
        return reduce(lattice)[0] if not lattice.is_reduced() else lattice
    one, zero = Poly.one(q), Poly.zero(q)
    scale = as_matrix(
        [[one, zero, zero], [zero, one, zero], [zero, zero, Poly.constant(q, root)]]
    )
    return reduce(lattice.transform(scale))[0]


# --- exhaustive enumeration -------------------------------------------------------


def _minima_partitions(delta: int) -> Iterator[Tuple[int, int, int]]:
    for m1 in range(delta // 3 + 1):
        for m2 in range(m1, (delta - m1) // 2 + 1):
            yield m1, m2, delta - m1 - m2


def _diagonal_choices(q: int, degree: int) -> List[Poly]:
    eps = smallest_nonsquare(q)
    out = []
    for lead in (1, eps):
        for low in enumerate_below(q, degree):
            out.append(low + Poly.monomial(q, degree, lead))
    return out


def _candidate_count(q: int, delta: int) -> int:
    total = 0
    for m1, m2, m3 in _minima_partitions(delta):
        total += 4 * q ** (m1 + m2) * q ** (2 * m1) * q ** ((m2 + m3) // 2 + 1)
    return total


def reduced_candidates(D: Poly) -> Iterator[TernaryLattice]:
    """Every reduced Gram matrix of determinant exactly D, up to the size reductions.

    Q_1, Q_2 run over degrees mu_1, mu_2 with leading coefficient 1 or epsilon,
    B_12 and B_13 are reduced modulo Q_1, and Q_3 is solved from the determinant.
    """
    q = D.q
    delta = D.degree or 0
    count = _candidate_count(q, delta)
    if count > EXHAUSTIVE_MAX_CANDIDATES:
        raise SearchBoundExceeded(
            f"{count} candidate Gram matrices exceed EXHAUSTIVE_MAX_CANDIDATES="
            f"{EXHAUSTIVE_MAX_CANDIDATES}"
        )
    logger.debug("scanning %d candidate Gram matrices for D=%s", count, D)
    for m1, m2, m3 in _minima_partitions(delta):
        small = list(enumerate_below(q, m1))
        b23s = list(enumerate_below(q, (m2 + m3) // 2 + 1))
        for q1, q2 in itertools.product(_diagonal_choices(q, m1), _diagonal_choices(q, m2)):
            for b12 in small:
                denom = q1 * q2 - b12 * b12
                if denom.is_zero():
                    continue
                for b13, b23 in itertools.product(small, b23s):
                    num = D - 2 * b12 * b13 * b23 + q1 * b23 * b23 + q2 * b13 * b13
                    q3, rem = divmod(num, denom)
                    if not rem.is_zero() or q3.degree != m3:
                        continue
                    gram = as_matrix([[q1, b12, b13], [b12, q2, b23], [b13, b23, q3]])
                    lattice = TernaryLattice(gram)
                    if lattice.is_reduced():
                        yield lattice


def seed_lattice(q: int, D: Poly, anisotropic: Optional[Poly] = None) -> TernaryLattice:
    """One reduced definite lattice of determinant D in the requested genus.

    For odd delta the diagonal form <1, -eps, -eps D> is used when it lies in
    the genus; otherwise the reduced candidates are scanned.
    """
    _require_squarefree(D)
    if D.q != q:
        raise PreconditionError(f"D is over F_{D.q}, expected F_{q}")
    D1 = _check_anisotropic(D, anisotropic)
    eps = smallest_nonsquare(q)
    if (D.degree or 0) % 2:
        template = TernaryLattice.from_diagonal(
            [Poly.one(q), Poly.constant(q, -eps), D * (-eps)]
        )
        if D1 is None or classify_primes(template.gram, template.det).D1 == D1:
            return normalize_det(template, D)
    for lattice in reduced_candidates(D):
        if D1 is None or genus_symbol(lattice, D).D1 == D1:
            return lattice
    raise SearchBoundExceeded(f"no definite lattice of determinant {D} found among reduced candidates")


def fingerprint(lattice: TernaryLattice) -> Tuple[object, ...]:
    """Isometry invariant: minima and short-vector counts by (deg Q, square class of lc Q)."""
    q = lattice.q
    k = max(lattice.delta, lattice.minima[2])
    evaluator = _enumerate.BoxEvaluator(lattice.gram, box_dims(lattice.minima, k), k + 1)
    nonsquare = np.array([0] + [0 if legendre_q(c, q) == 1 else 1 for c in range(1, q)])
    counts = np.zeros((k + 1, 2), dtype=np.int64)
    for chunk in evaluator.chunks():
        deg = _enumerate.degrees(chunk.values)
        rows = np.nonzero(deg >= 0)[0]
        lead = chunk.values[rows, deg[rows]]
        np.add.at(counts, (deg[rows], nonsquare[lead]), 1)
    return (lattice.minima, tuple(tuple(int(c) for c in row) for row in counts))


class _ClassIndex:
    """Representatives found so far, deduplicated by fingerprint then isometry."""

    def __init__(self) -> None:
        self.representatives: List[TernaryLattice] = []
        self.so_orders: List[int] = []
        self._buckets: Dict[Tuple[object, ...], List[int]] = {}

    def add(self, lattice: TernaryLattice) -> bool:
        key = fingerprint(lattice)
        bucket = self._buckets.setdefault(key, [])
        for i in bucket:
            if isometry(self.representatives[i], lattice) is not None:
                return False
        bucket.append(len(self.representatives))
        self.representatives.append(lattice)
        self.so_orders.append(automorphisms(lattice).order)
        return True

    @property
    def mass(self) -> Fraction:
        return sum((Fraction(1, n) for n in self.so_orders), Fraction(0))

    def freeze(self, symbol: GenusSymbol, method: str) -> ClassList:
        order = sorted(
            range(len(self.representatives)),
            key=lambda i: (self.representatives[i].minima, str(self.representatives[i])),
        )
        return ClassList(
            tuple(self.representatives[i] for i in order),
            tuple(self.so_orders[i] for i in order),
            symbol,
            method,
        )


def exhaustive_classes(q: int, D: Poly, anisotropic: Optional[Poly] = None) -> ClassList:
    """All classes of the genus, by partitioning every reduced candidate up to isometry."""
    seed = seed_lattice(q, D, anisotropic)
    symbol = genus_symbol(seed, D)
    index = _ClassIndex()
    scanned = 0
    for lattice in reduced_candidates(D):
        scanned += 1
        if genus_symbol(lattice, D).D1 != symbol.D1:
            continue
        index.add(lattice)
    logger.info("D=%s: %d reduced candidates, %d classes", D, scanned, len(index.representatives))
    return index.freeze(symbol, "exhaustive")


# --- Kneser neighbors ------------------------------------------------------------


def _coords_mod(x: Sequence[Poly], p: Poly) -> Tuple[Poly, ...]:
    return tuple(c % p for c in x)


def neighbor(lattice: TernaryLattice, p: Poly, x: Sequence[Poly]) -> TernaryLattice:
    """The p-neighbor L' = L_x + A x/p, where L_x = {v : B(v, x) = 0 mod p}.

    x is first corrected modulo p so that Q(x) = 0 mod p^2.
    """
    D = lattice.det
    if not is_irreducible(p) or not p.is_monic():
        raise PreconditionError(f"{p} is not a monic irreducible polynomial")
    if p.divides(D):
        raise PreconditionError(f"{p} divides D={D}")
    if all(c.is_zero() for c in _coords_mod(x, p)):
        raise PreconditionError("x must not lie in pL")
    value = lattice.q_value(x)
    if not p.divides(value):
        raise PreconditionError(f"Q(x) = {value} is not divisible by {p}")
    q = lattice.q
    g = lattice.gram
    b = [lattice.inner(x, e) % p for e in _unit_vectors(q)]
    i = next(k for k in range(3) if not b[k].is_zero())
    # x + p*c*e_i has Q = Q(x) + 2p c B(x, e_i) + p^2 c^2 Q(e_i)
    c = (-(value.exact_div(p)) * inverse_mod(b[i] * 2, p)) % p
    x = tuple(x[k] + (p * c if k == i else Poly.zero(q)) for k in range(3))
    if not (p * p).divides(lattice.q_value(x)):
        raise InvariantViolation(f"lift of x is not isotropic modulo {p}^2")
    b_i_inv = inverse_mod(b[i], p)
    generators = []
    for j in range(3):
        row = [Poly.zero(q)] * 3
        if j == i:
            row[i] = p * p
        else:
            row[j] = p
            row[i] = -p * ((b[j] * b_i_inv) % p)
        generators.append(tuple(row))
    generators.append(tuple(x))
    basis = row_hermite(generators)
    if len(basis) != 3:
        raise InvariantViolation("neighbor generators do not span a full lattice")
    scaled = mat_mul(mat_mul(as_matrix(basis), g), transpose(as_matrix(basis)))
    p2 = p * p
    try:
        gram = as_matrix([[entry.exact_div(p2) for entry in row] for row in scaled])
    except PreconditionError as e:
        raise InvariantViolation(f"neighbor at {p} is not integral: {e}") from e
    result = TernaryLattice(gram)
    if result.det != D:
        raise InvariantViolation(f"neighbor changed det from {D} to {result.det}")
    result = reduce(result)[0]
    if genus_symbol(result, D).D1 != genus_symbol(lattice, D).D1:
        raise InvariantViolation(f"neighbor at {p} left the genus")
    return result


def _unit_vectors(q: int) -> List[Tuple[Poly, Poly, Poly]]:
    one, zero = Poly.one(q), Poly.zero(q)
    return [(one, zero, zero), (zero, one, zero), (zero, zero, one)]


def isotropic_lines(lattice: TernaryLattice, p: Poly) -> List[Tuple[Poly, ...]]:
    """One representative per line of (A/p)^3 on which Q vanishes mod p."""
    n = p.degree or 0
    top = max(x.degree or 0 for row in lattice.gram for x in row)
    evaluator = _enumerate.BoxEvaluator(lattice.gram, [n] * 3, 2 * (n - 1) + top + 1)
    lines = []
    seen = set()
    for chunk in evaluator.chunks():
        zero = ~_enumerate.reduce_mod(chunk.values, p).any(axis=-1)
        for h in np.nonzero(zero)[0]:
            x = evaluator.vector(chunk.i1, int(chunk.i2[h]), int(chunk.i3[h]))
            if all(c.is_zero() for c in x):
                continue
            lead = next(c for c in x if not c.is_zero())
            inv = inverse_mod(lead, p)
            key = tuple((c * inv) % p for c in x)
            if key not in seen:
                seen.add(key)
                lines.append(key)
    return lines


def default_neighbor_primes(D: Poly, count: int = 3) -> List[Poly]:
    """A few degree-1 primes and one degree-2 prime not dividing D."""
    q = D.q
    small = [p for p in irreducibles(q, 1) if not p.divides(D)][: count - 1]
    quadratic = [p for p in irreducibles(q, 2) if not p.divides(D)][:1]
    return small + quadratic


def neighbor_closure(
    seed: TernaryLattice,
    primes: Optional[Sequence[Poly]] = None,
    threads: int = 1,
) -> ClassList:
    """Breadth-first search over p-neighbors until the mass certificate is met."""
    D = seed.det
    _require_squarefree(D)
    seed = reduce(seed)[0] if not seed.is_reduced() else seed
    symbol = genus_symbol(seed, D)
    target = mass_formula_for(symbol).value
    primes = list(primes) if primes else default_neighbor_primes(D)
    index = _ClassIndex()
    index.add(seed)
    frontier: Deque[TernaryLattice] = deque([seed])
    while frontier and index.mass < target:
        lattice = frontier.popleft()
        for p in primes:
            lines = isotropic_lines(lattice, p)
            found = ordered_map(lambda x: neighbor(lattice, p, x), lines, threads)
            for candidate in found:
                if index.add(candidate):
                    frontier.append(candidate)
                    logger.debug(
                        "class %d via %s, mass %s of %s",
                        len(index.representatives), p, index.mass, target,
                    )
                if index.mass >= target:
                    break
                if len(index.representatives) > NEIGHBOR_MAX_CLASSES:
                    raise SearchBoundExceeded(
                        f"more than NEIGHBOR_MAX_CLASSES={NEIGHBOR_MAX_CLASSES} classes"
                    )
            if index.mass >= target:
                break
        logger.info("frontier %d, classes %d, mass %s", len(frontier), len(index.representatives), index.mass)
    if index.mass != target:
        raise InvariantViolation(
            f"neighbor closure for D={D} reached mass {index.mass}, expected {target}"
        )
    return index.freeze(symbol, "neighbor")


def genus_classes(
    q: int, D: Poly, method: str = "neighbor", anisotropic: Optional[Poly] = None, threads: int = 1
) -> ClassList:
    if method == "exhaustive":
        return exhaustive_classes(q, D, anisotropic)
    if method != "neighbor":
        raise PreconditionError(f"unknown genus method {method!r}")
    return neighbor_closure(seed_lattice(q, D, anisotropic), threads=threads)


# --- Siegel sums and decomposability ----------------------------------------------


def siegel_lhs(classes: ClassList, a: Poly, threads: int = 1) -> Fraction:
    """Sum of R(L_i, a)/|SO(L_i)| over the classes."""
    D = classes.representatives[0].det
    if a.is_zero() or gcd(a, D).degree != 0:
        raise PreconditionError(f"a must be nonzero and prime to D={D}, got {a}")
    total = Fraction(0)
    for lattice, n in zip(classes.representatives, classes.so_orders):
        total += Fraction(representation_count(lattice, a, threads=threads), n)
    return total


def siegel_rhs(classes: ClassList, a: Poly) -> Optional[Fraction]:
    """2^-r h(-aD), or None when the genus cannot represent a."""
    D = classes.representatives[0].det
    if not representability_conditions(None, D, a).representable:
        return None
    return Fraction(class_number(-(a * D)), 2 ** classes.genus_symbol.r)


def classify_decomposable(classes: ClassList) -> Tuple[int, int]:
    """(h_dec, h_ind); only for irreducible D of odd degree."""
    D = classes.representatives[0].det
    if not is_irreducible(D.monic()) or (D.degree or 0) % 2 == 0:
        raise PreconditionError(f"decomposability split needs irreducible D of odd degree, got {D}")
    h_dec = sum(1 for lattice in classes.representatives if decompose(lattice) is not None)
    return h_dec, classes.class_number - h_dec


def decomposable_count_from_class_numbers(q: int, D: Poly) -> int:
    """1 + (h(-D) - 1)/2 + (h(-eps D) - 1)/2."""
    eps = smallest_nonsquare(q)
    total = Fraction(1) + Fraction(class_number(-D) - 1, 2) + Fraction(class_number(-D * eps) - 1, 2)
    if total.denominator != 1:
        raise InvariantViolation(f"decomposable count for D={D} came out as {total}")
    return int(total)

