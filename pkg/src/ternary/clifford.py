"""The even Clifford order C_0(L) of a ternary lattice.

Elements are coordinate 4-tuples in the basis 1, e1e2, e1e3, e2e3. Products
are computed in the full Clifford algebra, where words in e1, e2, e3 are put
in normal form with e_i e_i = Q(e_i) and e_j e_i = 2B(e_i, e_j) - e_i e_j.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from src.ternary._linalg import Matrix, as_matrix, congruence, det3, det_n, transpose
from src.ternary.errors import InvariantViolation, PreconditionError, SearchBoundExceeded
from src.ternary.ffpoly import Poly, enumerate_below, gcd
from src.ternary.lattice import TernaryLattice, reduce, representations
from src.ternary.settings import SQRT_SEARCH_MAX_BOX

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
Element = Tuple[Poly, Poly, Poly, Poly]
CliffordSum = Dict[Word, Poly]

BASIS: Tuple[Word, ...] = ((), (0, 1), (0, 2), (1, 2))
BASIS_NAMES = ("1", "e1e2", "e1e3", "e2e3")


def _add_into(acc: CliffordSum, other: CliffordSum, scale: Poly) -> None:
    for word, c in other.items():
        acc[word] = acc.get(word, Poly.zero(scale.q)) + c * scale


@lru_cache(maxsize=8192)
def _normal_form(word: Word, gram: Matrix) -> Tuple[Tuple[Word, Poly], ...]:
    q = gram[0][0].q
    for k in range(len(word) - 1):
        a, b = word[k], word[k + 1]
        if a == b:
            rest = dict(_normal_form(word[:k] + word[k + 2 :], gram))
            return tuple((w, c * gram[a][a]) for w, c in rest.items())
        if a > b:
            out: CliffordSum = {}
            swapped = _normal_form(word[:k] + (b, a) + word[k + 2 :], gram)
            _add_into(out, dict(swapped), Poly.constant(q, -1))
            _add_into(out, dict(_normal_form(word[:k] + word[k + 2 :], gram)), gram[a][b] * 2)
            return tuple((w, c) for w, c in out.items() if not c.is_zero())
    return ((word, Poly.one(q)),)


def clifford_product(x: CliffordSum, y: CliffordSum, gram: Matrix) -> CliffordSum:
    """Product in the full Clifford algebra of the Gram matrix."""
    q = gram[0][0].q
    out: CliffordSum = {}
    for wx, cx in x.items():
        for wy, cy in y.items():
            _add_into(out, dict(_normal_form(wx + wy, gram)), cx * cy)
    return {w: c for w, c in out.items() if not c.is_zero()} or {(): Poly.zero(q)}


def _from_sum(s: CliffordSum, q: int) -> Element:
    extra = [w for w, c in s.items() if w not in BASIS and not c.is_zero()]
    if extra:
        raise PreconditionError(f"element leaves the even part: {extra}")
    return tuple(s.get(w, Poly.zero(q)) for w in BASIS)  # type: ignore[return-value]


@dataclass(frozen=True)
class EvenCliffordOrder:
    """C_0(L) with its structure constants and the Gram matrix of <x, y> = Tr(x y-bar)/2."""

    lattice: TernaryLattice
    mult_table: Tuple[Tuple[Element, ...], ...]
    norm_gram: Matrix

    @property
    def q(self) -> int:
        return self.lattice.q

    def multiply(self, x: Sequence[Poly], y: Sequence[Poly]) -> Element:
        q = self.q
        out = [Poly.zero(q)] * 4
        for i, a in enumerate(x):
            if a.is_zero():
                continue
            for j, b in enumerate(y):
                if b.is_zero():
                    continue
                for k, c in enumerate(self.mult_table[i][j]):
                    out[k] = out[k] + a * b * c
        return tuple(out)  # type: ignore[return-value]

    def conjugate(self, x: Sequence[Poly]) -> Element:
        """Canonical involution: e_i e_j maps to e_j e_i = 2B_ij - e_i e_j."""
        g = self.lattice.gram
        scalar = x[0]
        for k, (i, j) in enumerate(BASIS[1:], start=1):
            scalar = scalar + x[k] * g[i][j] * 2
        return (scalar, -x[1], -x[2], -x[3])

    def trace(self, x: Sequence[Poly]) -> Poly:
        g = self.lattice.gram
        out = x[0] * 2
        for k, (i, j) in enumerate(BASIS[1:], start=1):
            out = out + x[k] * g[i][j] * 2
        return out

    def norm(self, x: Sequence[Poly]) -> Poly:
        """x * x-bar, a scalar."""
        prod = self.multiply(x, self.conjugate(x))
        if any(not c.is_zero() for c in prod[1:]):
            raise PreconditionError("x * conj(x) is not scalar")
        return prod[0]

    def inner(self, x: Sequence[Poly], y: Sequence[Poly]) -> Poly:
        return sum(
            (x[i] * self.norm_gram[i][j] * y[j] for i in range(4) for j in range(4)),
            Poly.zero(self.q),
        )

    def is_associative(self) -> bool:
        q = self.q
        units = [tuple(Poly.one(q) if k == i else Poly.zero(q) for k in range(4)) for i in range(4)]
        for a in units:
            for b in units:
                ab = self.multiply(a, b)
                for c in units:
                    if self.multiply(ab, c) != self.multiply(a, self.multiply(b, c)):
                        return False
        return True

    def determinant(self) -> Poly:
        return det_n(self.norm_gram)

    def to_json(self) -> Dict[str, object]:
        return {
            "q": self.q,
            "basis": list(BASIS_NAMES),
            "mult_table": [[[str(c) for c in cell] for cell in row] for row in self.mult_table],
            "norm_gram": [[str(x) for x in row] for row in self.norm_gram],
        }


def _half_trace(x: Sequence[Poly], gram: Matrix) -> Poly:
    out = x[0]
    for k, (i, j) in enumerate(BASIS[1:], start=1):
        out = out + x[k] * gram[i][j]
    return out


def even_clifford(lattice: TernaryLattice) -> EvenCliffordOrder:
    g = lattice.gram
    q = lattice.q
    table = tuple(
        tuple(_from_sum(clifford_product({u: Poly.one(q)}, {v: Poly.one(q)}, g), q) for v in BASIS)
        for u in BASIS
    )
    partial = EvenCliffordOrder(lattice, table, as_matrix([[Poly.zero(q)] * 4] * 4))
    units = [tuple(Poly.one(q) if k == i else Poly.zero(q) for k in range(4)) for i in range(4)]
    norm_gram = as_matrix(
        [[_half_trace(partial.multiply(a, partial.conjugate(b)), g) for b in units] for a in units]
    )
    return EvenCliffordOrder(lattice, table, norm_gram)


def trace_zero_basis(order: EvenCliffordOrder) -> List[Element]:
    """f_ij = e_i e_j - B(e_i, e_j), a basis of the trace-zero elements."""
    q = order.q
    g = order.lattice.gram
    out = []
    for k, (i, j) in enumerate(BASIS[1:], start=1):
        coords = [Poly.zero(q)] * 4
        coords[0] = -g[i][j]
        coords[k] = Poly.one(q)
        out.append(tuple(coords))
    return out  # type: ignore[return-value]


def trace_zero_gram(order: EvenCliffordOrder) -> Matrix:
    basis = trace_zero_basis(order)
    return as_matrix([[order.inner(x, y) for y in basis] for x in basis])


def induced_transform(order: EvenCliffordOrder, t: Matrix) -> Matrix:
    """Coordinates (columns) of the C_0 basis built from the basis T e_1, T e_2, T e_3."""
    q = order.q
    g = order.lattice.gram
    vectors = [{(i,): t[i][a] for i in range(3) if not t[i][a].is_zero()} for a in range(3)]
    cols = [tuple([Poly.one(q)] + [Poly.zero(q)] * 3)]
    for a, b in BASIS[1:]:
        cols.append(_from_sum(clifford_product(vectors[a], vectors[b], g), q))
    return transpose(as_matrix(cols))


class SqrtStatus(str, Enum):
    FOUND = "found"
    ABSENT = "absent"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SqrtSearchResult:
    status: SqrtStatus
    element: Optional[Element] = None


def primitive_sqrt_search(
    order: EvenCliffordOrder, target: Poly, degree_bound: Optional[int] = None
) -> SqrtSearchResult:
    """Look for a primitive trace-zero lambda with lambda^2 = target.

    For trace-zero lambda, lambda^2 = -N(lambda), so this is a primitive
    representation of -target by the norm form on the trace-zero lattice.
    Without ``degree_bound`` the search runs in a reduced basis of that
    lattice, where the coordinate box is complete, so a miss means absent.
    With a bound only coordinates of degree <= bound are tried and a miss is
    reported as unknown.
    """
    if target.is_zero():
        raise PreconditionError("target must be nonzero")
    tz = TernaryLattice(trace_zero_gram(order))
    basis = trace_zero_basis(order)
    wanted = -target
    if degree_bound is not None:
        return _bounded_sqrt_search(order, tz, basis, wanted, target, degree_bound)
    try:
        reduced_tz, t = reduce(tz)
        found = representations(reduced_tz, wanted)
    except SearchBoundExceeded as e:
        logger.info("square-root search gave up: %s", e)
        return SqrtSearchResult(SqrtStatus.UNKNOWN)
    if not found:
        return SqrtSearchResult(SqrtStatus.ABSENT)
    y = found[0]
    coords = [sum((t[i][k] * y[k] for k in range(3)), Poly.zero(order.q)) for i in range(3)]
    return SqrtSearchResult(SqrtStatus.FOUND, _check_root(order, basis, coords, target))


def _bounded_sqrt_search(
    order: EvenCliffordOrder,
    tz: TernaryLattice,
    basis: List[Element],
    wanted: Poly,
    target: Poly,
    degree_bound: int,
) -> SqrtSearchResult:
    q = order.q
    size = q ** (3 * (degree_bound + 1))
    if size > SQRT_SEARCH_MAX_BOX:
        return SqrtSearchResult(SqrtStatus.UNKNOWN)
    box = list(enumerate_below(q, degree_bound + 1))
    for a in box:
        for b in box:
            for c in box:
                coords = (a, b, c)
                if gcd(gcd(a, b), c).degree != 0:
                    continue
                if tz.q_value(coords) == wanted:
                    return SqrtSearchResult(SqrtStatus.FOUND, _check_root(order, basis, coords, target))
    return SqrtSearchResult(SqrtStatus.UNKNOWN)


def _check_root(
    order: EvenCliffordOrder, basis: List[Element], coords: Sequence[Poly], target: Poly
) -> Element:
    q = order.q
    lam = [Poly.zero(q)] * 4
    for c, f in zip(coords, basis):
        lam = [x + c * y for x, y in zip(lam, f)]
    element: Element = tuple(lam)  # type: ignore[assignment]
    square = order.multiply(element, element)
    if not order.trace(element).is_zero() or square != (target, Poly.zero(q), Poly.zero(q), Poly.zero(q)):
        raise InvariantViolation(f"candidate root {element} does not square to {target}")
    return element


def determinant_identity_holds(lattice: TernaryLattice) -> bool:
    """det(C_0(L)) = det(L)^2."""
    d = det3(lattice.gram)
    return even_clifford(lattice).determinant() == d * d


def transported_norm_gram(order: EvenCliffordOrder, t: Matrix) -> Matrix:
    """S^t N S for the induced transform S; equals the norm Gram of C_0(L.transform(T))."""
    return congruence(order.norm_gram, induced_transform(order, t))
