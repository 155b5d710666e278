"""Local invariants of ternary forms over K = F_q(t).

Hilbert symbols are the tame symbols at the finite primes and at infinity
(uniformizer 1/t, residue field F_q). The Hasse invariant of a diagonal form
<a1, a2, a3> is (a1,a2)(a1,a3)(a2,a3).
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from src.ternary._linalg import Matrix, bilinear, congruence, det3, identity, principal_minor
from src.ternary.errors import PreconditionError
from src.ternary.ffpoly import (
    Poly,
    enumerate_below,
    gcd,
    is_squarefree,
    jacobi,
    legendre_q,
    prime_factors,
    smallest_nonsquare,
)

KElement = Union[Poly, Tuple[Poly, Poly]]


@dataclass(frozen=True)
class Place:
    """A finite prime (monic irreducible) or the infinite place (``prime is None``)."""

    prime: Optional[Poly] = None

    @classmethod
    def infinity(cls) -> "Place":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.prime is None

    def __str__(self) -> str:
        return "inf" if self.prime is None else str(self.prime)


def _as_poly(a: KElement) -> Poly:
    # num/den and num*den have the same square class
    if isinstance(a, tuple):
        num, den = a
        a = num * den
    if a.is_zero():
        raise PreconditionError("Hilbert symbol arguments must be nonzero")
    return a


def _split_valuation(a: Poly, p: Poly) -> Tuple[int, Poly]:
    v = 0
    while True:
        quot, rem = divmod(a, p)
        if not rem.is_zero():
            return v, a
        a, v = quot, v + 1


def hilbert_symbol(a: KElement, b: KElement, v: Place) -> int:
    """The Hilbert symbol (a, b)_v in {+1, -1}."""
    a, b = _as_poly(a), _as_poly(b)
    q = a.q
    if v.is_infinite:
        alpha, beta = a.degree or 0, b.degree or 0
        x = pow(a.leading_coefficient, beta, q) * pow(b.leading_coefficient, alpha, q)
        if (alpha * beta) % 2:
            x = -x
        return legendre_q(x, q)
    p = v.prime
    assert p is not None
    alpha, ua = _split_valuation(a, p)
    beta, ub = _split_valuation(b, p)
    x = (ua ** beta) * (ub ** alpha)
    if (alpha * beta) % 2:
        x = -x
    return jacobi(x % p, p)


def hasse_invariant(diag: Sequence[KElement], v: Place) -> int:
    if len(diag) != 3:
        raise PreconditionError(f"expected three diagonal entries, got {len(diag)}")
    out = 1
    for i, j in itertools.combinations(range(3), 2):
        out *= hilbert_symbol(diag[i], diag[j], v)
    return out


def _unimodular_transforms(q: int) -> Iterable[Matrix]:
    one, zero = Poly.one(q), Poly.zero(q)
    yield identity(q)
    for perm in itertools.permutations(range(3)):
        yield tuple(tuple(one if perm[j] == i else zero for j in range(3)) for i in range(3))
    for i, j in itertools.permutations(range(3), 2):
        m = [list(r) for r in identity(q)]
        m[j][i] = one
        yield tuple(tuple(r) for r in m)
    for i, j, k in itertools.permutations(range(3)):
        m = [list(r) for r in identity(q)]
        m[j][i] = one
        m[k][j] = one
        yield tuple(tuple(r) for r in m)


def diagonalize(gram: Matrix) -> List[Poly]:
    """Square classes <d1, d1*d2, d2*d3> of a diagonalization over K.

    d1, d2, d3 are the leading principal minors, after a unimodular change of
    basis if one of them vanishes.
    """
    if det3(gram).is_zero():
        raise PreconditionError("singular Gram matrix")
    q = gram[0][0].q
    for t in _unimodular_transforms(q):
        g = congruence(gram, t)
        d1, d2, d3 = g[0][0], principal_minor(g, 0, 1), det3(g)
        if not d1.is_zero() and not d2.is_zero():
            return [d1, d1 * d2, d2 * d3]
    raise PreconditionError("could not find a basis with nonzero leading minors")


def square_class_at_infinity(a: Poly) -> Tuple[int, int]:
    """(deg a mod 2, Legendre symbol of the leading coefficient)."""
    a = _as_poly(a)
    return (a.degree or 0) % 2, legendre_q(a.leading_coefficient, a.q)


def is_isotropic_at(gram: Matrix, v: Place) -> bool:
    """S_v = (-1, -det)_v for a nondegenerate ternary form."""
    diag = diagonalize(gram)
    d = det3(gram)
    q = d.q
    return hasse_invariant(diag, v) == hilbert_symbol(Poly.constant(q, -1), -d, v)


def is_definite(gram: Matrix) -> bool:
    """Anisotropic over K_inf."""
    return not is_isotropic_at(gram, Place.infinity())


def product_formula_holds(a: KElement, b: KElement) -> bool:
    a, b = _as_poly(a), _as_poly(b)
    places = [Place(p) for p in prime_factors(a * b)] + [Place.infinity()]
    out = 1
    for v in places:
        out *= hilbert_symbol(a, b, v)
    return out == 1


def brute_force_isotropic(gram: Matrix, degree_bound: int) -> bool:
    """Look for a nonzero x with Q(x) = 0 and coordinates of degree <= degree_bound."""
    q = gram[0][0].q
    box = list(enumerate_below(q, degree_bound + 1))
    for x in itertools.product(box, repeat=3):
        if all(c.is_zero() for c in x):
            continue
        if gcd(gcd(x[0], x[1]), x[2]).degree != 0:
            continue
        if bilinear(gram, x, x).is_zero():
            return True
    return False


# --- genus symbol ------------------------------------------------------------------


def determinant_class(d: Poly) -> Poly:
    """Representative of d modulo (F_q^x)^2: monic times 1 or epsilon."""
    if d.is_zero():
        raise PreconditionError("determinant must be nonzero")
    q = d.q
    if legendre_q(d.leading_coefficient, q) == 1:
        return d.monic()
    return d.monic() * smallest_nonsquare(q)


@dataclass(frozen=True)
class GenusSymbol:
    determinant_class: Poly
    delta: int
    r: int
    D0: Poly
    D1: Poly
    hasse: Tuple[Tuple[str, int], ...] = field(default=())
    hasse_inf: int = 1

    @property
    def hasse_at(self) -> Dict[str, int]:
        return dict(self.hasse)

    def to_json(self) -> Dict[str, object]:
        return {
            "det": str(self.determinant_class),
            "delta": self.delta,
            "r": self.r,
            "D0": str(self.D0),
            "D1": str(self.D1),
            "hasse": {p: s for p, s in self.hasse},
            "hasse_inf": self.hasse_inf,
        }


def _residue_isotropic(gram: Matrix, p: Poly) -> bool:
    # the rank-2 reduction mod p is hyperbolic iff -(its discriminant) is a square
    for i, j in ((0, 1), (0, 2), (1, 2)):
        m = principal_minor(gram, i, j) % p
        if not m.is_zero():
            return jacobi(-m, p) == 1
    raise PreconditionError(f"Gram matrix has rank < 2 modulo {p}")


def classify_primes(gram: Matrix, D: Poly) -> GenusSymbol:
    """Split D = D0*D1 into isotropic and anisotropic primes and collect Hasse invariants."""
    if D.is_zero() or not is_squarefree(D):
        raise PreconditionError(f"D must be squarefree, got {D}")
    d = det3(gram)
    if determinant_class(d) != determinant_class(D):
        raise PreconditionError(f"determinant {d} does not match D={D} up to a square unit")
    q = D.q
    D0, D1 = Poly.one(q), Poly.one(q)
    diag = diagonalize(gram)
    hasse = []
    for p in prime_factors(D):
        if _residue_isotropic(gram, p):
            D0 = D0 * p
        else:
            D1 = D1 * p
        hasse.append((str(p), hasse_invariant(diag, Place(p))))
    return GenusSymbol(
        determinant_class=determinant_class(d),
        delta=D.degree or 0,
        r=len(hasse),
        D0=D0,
        D1=D1,
        hasse=tuple(hasse),
        hasse_inf=hasse_invariant(diag, Place.infinity()),
    )


@dataclass(frozen=True)
class Representability:
    representable: bool
    reason: str


def representability_conditions(gram: Optional[Matrix], D: Poly, a: Poly) -> Representability:
    """Whether a is primitively represented by some lattice in the genus.

    Equivalent to -aD not being a square in K_inf.
    """
    if a.is_zero():
        raise PreconditionError("a must be nonzero")
    if gcd(a, D).degree != 0:
        raise PreconditionError(f"gcd({a}, {D}) must be 1")
    target = -(a * D)
    parity, lc_class = square_class_at_infinity(target)
    if parity:
        return Representability(True, "deg(aD) is odd")
    if lc_class == -1:
        return Representability(True, "leading coefficient of -aD is a nonsquare")
    return Representability(False, "-aD is a square in K_inf")
