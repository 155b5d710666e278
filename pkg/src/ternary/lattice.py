"""Definite ternary lattices over A = F_q[t].

A lattice is the Gram matrix B(e_i, e_j) of a basis, with Q(x) = B(x, x).
A basis is reduced when its minima mu_i = deg Q(e_i) are sorted and the
leading forms of Q on the even-mu and on the odd-mu basis vectors are
anisotropic over F_q. Then deg Q(sum x_i e_i) = max(2 deg x_i + mu_i), so the
vectors with deg Q <= k are exactly the coordinate box deg x_i <= (k - mu_i)/2.
Everything below that enumerates works on that box.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.ternary import _enumerate
from src.ternary._linalg import (
    Matrix,
    apply,
    as_matrix,
    bilinear,
    congruence,
    det3,
    format_matrix,
    from_columns,
    identity,
    is_symmetric,
    mat_mul,
)
from src.ternary._parallel import chunked, ordered_map
from src.ternary.errors import InvariantViolation, PreconditionError, SearchBoundExceeded
from src.ternary.ffpoly import Poly, check_same_field, enumerate_below, gcd, prime_factors
from src.ternary.localsym import classify_primes, is_definite
from src.ternary.settings import SHORT_VECTOR_MAX_BOX
from src.ternary.zeta_l import UPolynomial, m_d_upoly

logger = logging.getLogger(__name__)

Vector = Tuple[Poly, Poly, Poly]
Mask = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TernaryLattice:
    """An integral ternary lattice given by its Gram matrix."""

    gram: Matrix

    def __post_init__(self) -> None:
        if len(self.gram) != 3 or any(len(row) != 3 for row in self.gram):
            raise PreconditionError("Gram matrix must be 3x3")
        object.__setattr__(self, "gram", as_matrix(self.gram))
        check_same_field(*(x for row in self.gram for x in row))
        if not is_symmetric(self.gram):
            raise PreconditionError("Gram matrix must be symmetric")
        if det3(self.gram).is_zero():
            raise PreconditionError("Gram matrix is singular")

    @classmethod
    def from_diagonal(cls, entries: Sequence[Poly]) -> "TernaryLattice":
        q = entries[0].q
        zero = Poly.zero(q)
        return cls(tuple(tuple(entries[i] if i == j else zero for j in range(3)) for i in range(3)))

    @classmethod
    def from_strings(cls, q: int, rows: Sequence[Sequence[str]]) -> "TernaryLattice":
        return cls(tuple(tuple(Poly.parse(x, q) for x in row) for row in rows))

    @classmethod
    def from_json(cls, data: Dict[str, object]) -> "TernaryLattice":
        try:
            q = int(data["q"])  # type: ignore[arg-type]
            rows = data["gram"]
        except (KeyError, TypeError, ValueError) as e:
            raise PreconditionError(f"lattice JSON needs 'q' and 'gram': {e}") from e
        return cls.from_strings(q, rows)  # type: ignore[arg-type]

    def to_json(self) -> Dict[str, object]:
        return {"q": self.q, "gram": format_matrix(self.gram)}

    @property
    def q(self) -> int:
        return self.gram[0][0].q

    @cached_property
    def det(self) -> Poly:
        return det3(self.gram)

    @property
    def delta(self) -> int:
        return self.det.degree or 0

    @property
    def minima(self) -> Tuple[int, int, int]:
        """deg Q(e_i); the successive minima once the basis is reduced."""
        return tuple(-1 if g.is_zero() else g.degree for g in self.diagonal)  # type: ignore[return-value]

    @property
    def diagonal(self) -> Tuple[Poly, Poly, Poly]:
        return tuple(self.gram[i][i] for i in range(3))  # type: ignore[return-value]

    @cached_property
    def is_definite(self) -> bool:
        return is_definite(self.gram)

    def is_reduced(self) -> bool:
        mu = self.minima
        if min(mu) < 0 or list(mu) != sorted(mu):
            return False
        return _reduction_step(self.gram) is None

    def q_value(self, x: Sequence[Poly]) -> Poly:
        return bilinear(self.gram, x, x)

    def inner(self, x: Sequence[Poly], y: Sequence[Poly]) -> Poly:
        return bilinear(self.gram, x, y)

    def transform(self, t: Matrix) -> "TernaryLattice":
        """The same lattice in the basis given by the columns of ``t``."""
        return TernaryLattice(congruence(self.gram, t))

    def __str__(self) -> str:
        return "[" + "; ".join(", ".join(str(x) for x in row) for row in self.gram) + "]"


def content(x: Sequence[Poly]) -> Poly:
    """Monic gcd of the coordinates (zero for the zero vector)."""
    out = Poly.zero(x[0].q)
    for c in x:
        out = gcd(out, c)
    return out


def is_primitive(x: Sequence[Poly]) -> bool:
    return content(x).degree == 0


# --- reduction ---------------------------------------------------------------------


def _leading_form(gram: Matrix, idx: Sequence[int], mu: Sequence[int]) -> List[List[int]]:
    return [[gram[i][j].coefficient((mu[i] + mu[j]) // 2) for j in idx] for i in idx]


def _isotropic_vector(form: List[List[int]], q: int) -> Optional[Tuple[int, ...]]:
    n = len(form)
    for a in itertools.product(range(q), repeat=n):
        if not any(a):
            continue
        value = sum(a[i] * a[j] * form[i][j] for i in range(n) for j in range(n))
        if value % q == 0:
            return a
    return None


def _reduction_step(gram: Matrix) -> Optional[Tuple[int, List[Poly]]]:
    """An index T and a vector with coefficient 1 at T whose Q has degree < mu_T, if any."""
    q = gram[0][0].q
    mu = [g.degree or 0 for g in (gram[i][i] for i in range(3))]
    for parity in (0, 1):
        idx = [i for i in range(3) if mu[i] % 2 == parity]
        if not idx:
            continue
        a = _isotropic_vector(_leading_form(gram, idx, mu), q)
        if a is None:
            continue
        support = [i for i, c in zip(idx, a) if c]
        target = max(support, key=lambda i: (mu[i], i))
        inv = pow(a[idx.index(target)], q - 2, q)
        coeffs = [Poly.zero(q)] * 3
        for i, c in zip(idx, a):
            if c:
                coeffs[i] = Poly.monomial(q, (mu[target] - mu[i]) // 2, c * inv)
        return target, coeffs
    return None


def _replace_column(q: int, target: int, coeffs: Sequence[Poly]) -> Matrix:
    rows = [list(r) for r in identity(q)]
    for i in range(3):
        rows[i][target] = coeffs[i]
    return as_matrix(rows)


def _permutation(q: int, order: Sequence[int]) -> Matrix:
    one, zero = Poly.one(q), Poly.zero(q)
    return tuple(tuple(one if i == order[k] else zero for k in range(3)) for i in range(3))


def reduce(lattice: TernaryLattice) -> Tuple[TernaryLattice, Matrix]:
    """Reduced basis of a definite lattice and the unimodular change of basis T.

    Each step replaces the basis vector with the largest minimum in an
    isotropic vector of a leading form by a combination of strictly smaller Q
    degree, so the sum of the minima drops until the leading forms are
    anisotropic. The result satisfies ``lattice.transform(T) == reduced``.
    """
    if not lattice.is_definite:
        raise PreconditionError(f"lattice {lattice} is not definite")
    q = lattice.q
    gram = lattice.gram
    t = identity(q)
    steps = 0
    while True:
        step = _reduction_step(gram)
        if step is None:
            break
        target, coeffs = step
        s = _replace_column(q, target, coeffs)
        gram = congruence(gram, s)
        t = mat_mul(t, s)
        steps += 1
        if gram[target][target].is_zero():
            raise InvariantViolation(f"reduction produced an isotropic vector for {lattice}")
    mu = [gram[i][i].degree or 0 for i in range(3)]
    order = sorted(range(3), key=lambda i: (mu[i], gram[i][i].sort_key(), i))
    p = _permutation(q, order)
    gram = congruence(gram, p)
    t = mat_mul(t, p)
    reduced = TernaryLattice(gram)
    if sum(reduced.minima) != reduced.delta:
        raise InvariantViolation(
            f"minima {reduced.minima} of {reduced} do not sum to deg det = {reduced.delta}"
        )
    logger.debug("reduced in %d steps, minima %s", steps, reduced.minima)
    return reduced, t


def reduced(lattice: TernaryLattice) -> TernaryLattice:
    if lattice.is_reduced():
        return lattice
    return reduce(lattice)[0]


def _require_reduced(lattice: TernaryLattice) -> None:
    if not lattice.is_reduced():
        raise PreconditionError("lattice basis must be reduced; call reduce() first")


# --- short vectors ---------------------------------------------------------------


def box_dims(minima: Sequence[int], k: int) -> List[int]:
    """Number of free coefficients of each coordinate in L_k."""
    return [(k - m) // 2 + 1 if k >= m else 0 for m in minima]


def lk_size(lattice: TernaryLattice, k: int) -> int:
    """|L_k|, zero vector included (1 for k < mu_1)."""
    _require_reduced(lattice)
    return lattice.q ** sum(box_dims(lattice.minima, k))


def _check_box(size: int) -> None:
    if size > SHORT_VECTOR_MAX_BOX:
        raise SearchBoundExceeded(
            f"box of {size} vectors exceeds SHORT_VECTOR_MAX_BOX={SHORT_VECTOR_MAX_BOX}"
        )


def short_vectors(lattice: TernaryLattice, k: int) -> Iterator[Vector]:
    """All x with deg Q(x) <= k (the zero vector first)."""
    _require_reduced(lattice)
    dims = box_dims(lattice.minima, k)
    _check_box(lattice.q ** sum(dims))
    q = lattice.q
    boxes = [list(enumerate_below(q, d)) for d in dims]
    for x in itertools.product(*boxes):
        yield x  # type: ignore[misc]


def _degree_histogram(
    lattice: TernaryLattice, kmax: int, mask: Optional[Mask] = None, threads: int = 1
) -> List[int]:
    """Nonzero x in L_kmax counted by deg Q(x), optionally only where ``mask`` holds."""
    if kmax < 0:
        return []
    evaluator = _enumerate.BoxEvaluator(lattice.gram, box_dims(lattice.minima, kmax), kmax + 1)
    _check_box(evaluator.size)

    def work(rows: Sequence[int]) -> np.ndarray:
        counts = np.zeros(kmax + 1, dtype=np.int64)
        for chunk in evaluator.chunks(rows):
            deg = _enumerate.degrees(chunk.values)
            keep = deg >= 0
            if mask is not None:
                keep &= mask(chunk.values)
            counts += np.bincount(deg[keep], minlength=kmax + 1)[: kmax + 1]
        return counts

    n1 = evaluator.tables[0].shape[0]
    parts = ordered_map(work, chunked(range(n1), threads), threads)
    total = np.zeros(kmax + 1, dtype=np.int64)
    for part in parts:
        total += part
    return [int(c) for c in total]


def _divisible_mask(d: Poly) -> Mask:
    return lambda values: ~_enumerate.reduce_mod(values, d).any(axis=-1)


def _coprime_mask(primes: Sequence[Poly]) -> Mask:
    def mask(values: np.ndarray) -> np.ndarray:
        keep = np.ones(values.shape[:-1], dtype=bool)
        for p in primes:
            keep &= _enumerate.reduce_mod(values, p).any(axis=-1)
        return keep

    return mask


# --- Epstein coefficients -----------------------------------------------------------


def alpha_coefficients(lattice: TernaryLattice, kmax: int, threads: int = 1) -> List[int]:
    """[alpha_0, ..., alpha_kmax] by enumerating L_kmax once."""
    _require_reduced(lattice)
    return _degree_histogram(lattice, kmax, threads=threads)


def epstein_alpha(lattice: TernaryLattice, k: int, method: str = "enumerate") -> int:
    """Number of x with deg Q(x) = k."""
    _require_reduced(lattice)
    if k < 0:
        raise PreconditionError(f"k must be >= 0, got {k}")
    if method == "box":
        return lk_size(lattice, k) - lk_size(lattice, k - 1)
    if method != "enumerate":
        raise PreconditionError(f"unknown alpha method {method!r}")
    return _degree_histogram(lattice, k)[k]


def local_zero_counts(lattice: TernaryLattice) -> Dict[Poly, int]:
    """N_p = #{v in (A/p)^3 : Q(v) = 0 mod p} for each p | det, from the residue forms."""
    symbol = classify_primes(lattice.gram, lattice.det)
    out = {}
    for p in prime_factors(lattice.det):
        n = p.norm()
        out[p] = n * (2 * n - 1) if p.divides(symbol.D0) else n
    return out


def local_count(lattice: TernaryLattice, d: Poly) -> int:
    """#{v in (A/d)^3 : Q(v) = 0 mod d}, by enumerating residues."""
    if d.degree is None or d.degree < 1:
        raise PreconditionError(f"modulus must be nonconstant, got {d}")
    d = d.monic()
    n = d.degree or 0
    top = max(x.degree or 0 for row in lattice.gram for x in row)
    evaluator = _enumerate.BoxEvaluator(lattice.gram, [n] * 3, 2 * (n - 1) + top + 1)
    _check_box(evaluator.size)
    zero = _divisible_mask(d)
    return int(sum(int(zero(chunk.values).sum()) for chunk in evaluator.chunks()))


def _coprime_box_count(q: int, dim_sum: int, local: Dict[Poly, int]) -> int:
    """#{x in a box covering (A/D)^3 : gcd(Q(x), D) = 1} by inclusion-exclusion."""
    primes = list(local)
    total = 0
    for size in range(len(primes) + 1):
        for subset in itertools.combinations(primes, size):
            deg = sum(p.degree or 0 for p in subset)
            zeros = 1
            for p in subset:
                zeros *= local[p]
            total += (-1) ** size * q ** (dim_sum - 3 * deg) * zeros
    return total


def _psi_coefficients_sieved(lattice: TernaryLattice, kmax: int, threads: int) -> List[int]:
    """#{x : deg Q(x) = j, gcd(Q(x), D) = 1} for j <= kmax.

    Boxes whose every coordinate has at least delta free coefficients map
    uniformly onto (A/D)^3, and those counts come from the local zero counts;
    smaller boxes are enumerated.
    """
    q, mu, delta = lattice.q, lattice.minima, lattice.delta
    local = local_zero_counts(lattice)
    first_covered = mu[2] + 2 * delta - 2
    enumerated_top = min(kmax, first_covered - 1)
    gamma = _degree_histogram(lattice, enumerated_top, _coprime_mask(list(local)), threads)
    previous = sum(gamma)
    for j in range(enumerated_top + 1, kmax + 1):
        current = _coprime_box_count(q, sum(box_dims(mu, j)), local)
        gamma.append(current - previous)
        previous = current
    return gamma


def _beta_enumerate(lattice: TernaryLattice, kmax: int) -> List[int]:
    D = lattice.det
    out = [0] * (kmax + 1)
    for x in short_vectors(lattice, kmax):
        if all(c.is_zero() for c in x) or not is_primitive(x):
            continue
        value = lattice.q_value(x)
        if gcd(value, D).degree == 0:
            out[value.degree or 0] += 1
    return out


def primitive_weights(D: Poly, n: int) -> List[int]:
    """Coefficients of (1 - q u^2) / M*_D(u^2): the Moebius sum over contents prime to D."""
    q = D.q
    series = m_d_upoly(D).substitute_power(2).series_inverse(n + 1)
    w = (UPolynomial((1, 0, -q)) * series).truncate(n + 1).int_coeffs()
    return w + [0] * (n + 1 - len(w))


def beta_coefficients(
    lattice: TernaryLattice, kmax: int, method: str = "sieve", threads: int = 1
) -> List[int]:
    """[beta_0, ..., beta_kmax]: primitive x with gcd(Q(x), D) = 1 counted by deg Q(x)."""
    _require_reduced(lattice)
    if kmax < 0:
        raise PreconditionError(f"k must be >= 0, got {kmax}")
    if method == "enumerate":
        return _beta_enumerate(lattice, kmax)
    if method != "sieve":
        raise PreconditionError(f"unknown beta method {method!r}")
    gamma = _psi_coefficients_sieved(lattice, kmax, threads)
    w = primitive_weights(lattice.det, kmax)
    return [sum(w[i] * gamma[k - i] for i in range(k + 1)) for k in range(kmax + 1)]


def epstein_beta(lattice: TernaryLattice, k: int, method: str = "sieve") -> int:
    return beta_coefficients(lattice, k, method)[k]


class Twist(str, Enum):
    NONE = "none"
    CHI = "chi"
    PSI = "psi"
    PHI_PSI = "phi_psi"


def twisted_zeta_coefficients(
    lattice: TernaryLattice,
    kmax: int,
    twist: Twist = Twist.NONE,
    d: Optional[Poly] = None,
    threads: int = 1,
) -> List[int]:
    """Coefficients of Z*_L(u, twist) up to u^kmax, each by direct enumeration.

    ``chi`` counts x with d | Q(x), ``psi`` those with gcd(Q(x), D) = 1 and
    ``phi_psi`` additionally asks x to be primitive.
    """
    _require_reduced(lattice)
    twist = Twist(twist)
    if twist is Twist.NONE:
        return _degree_histogram(lattice, kmax, threads=threads)
    if twist is Twist.CHI:
        if d is None or d.is_zero():
            raise PreconditionError("the chi twist needs a divisor d of D")
        d = d.monic()
        if not d.divides(lattice.det):
            raise PreconditionError(f"{d} does not divide D={lattice.det}")
        return _degree_histogram(lattice, kmax, _divisible_mask(d), threads)
    if twist is Twist.PSI:
        return _degree_histogram(lattice, kmax, _coprime_mask(prime_factors(lattice.det)), threads)
    return _beta_enumerate(lattice, kmax)


def twist_tail_start(lattice: TernaryLattice, d: Poly) -> int:
    """First k at which L_(k-1) covers (A/d)^3, after which d-twisted counts are proportional."""
    return lattice.minima[2] + 2 * (d.degree or 0) - 1


# --- representations --------------------------------------------------------------


def representations(
    lattice: TernaryLattice, a: Poly, primitive_only: bool = True, threads: int = 1
) -> List[Vector]:
    """All x with Q(x) = a, in enumeration order."""
    _require_reduced(lattice)
    check_same_field(a, lattice.gram[0][0])
    if a.is_zero():
        raise PreconditionError("a must be nonzero")
    k = a.degree or 0
    evaluator = _enumerate.BoxEvaluator(lattice.gram, box_dims(lattice.minima, k), k + 1)
    _check_box(evaluator.size)
    target = _enumerate.poly_row(a, k + 1)

    def work(rows: Sequence[int]) -> List[Vector]:
        found = []
        for chunk in evaluator.chunks(rows):
            for h in np.nonzero((chunk.values == target).all(axis=-1))[0]:
                x = evaluator.vector(chunk.i1, int(chunk.i2[h]), int(chunk.i3[h]))
                if primitive_only and not is_primitive(x):
                    continue
                found.append(x)
        return found

    n1 = evaluator.tables[0].shape[0]
    parts = ordered_map(work, chunked(range(n1), threads), threads)
    return [x for part in parts for x in part]


def representation_count(
    lattice: TernaryLattice, a: Poly, primitive_only: bool = True, threads: int = 1
) -> int:
    """R(L, a)."""
    return len(representations(lattice, a, primitive_only, threads))


# --- isometries and automorphisms ---------------------------------------------------


def _isometries(source: TernaryLattice, target: Matrix) -> Iterator[Matrix]:
    """Every T with T^t G_source T = target, by backtracking over basis images."""
    candidates = [representations(source, target[i][i], primitive_only=False) for i in range(3)]
    for v1 in candidates[0]:
        for v2 in candidates[1]:
            if source.inner(v1, v2) != target[0][1]:
                continue
            for v3 in candidates[2]:
                if source.inner(v1, v3) != target[0][2] or source.inner(v2, v3) != target[1][2]:
                    continue
                t = from_columns([v1, v2, v3])
                if det3(t).degree == 0:
                    yield t


def isometry(first: TernaryLattice, second: TernaryLattice) -> Optional[Matrix]:
    """T with T^t G_first T = G_second, or None when the lattices are not isometric."""
    _require_reduced(first)
    _require_reduced(second)
    if first.det != second.det or first.minima != second.minima:
        return None
    return next(_isometries(first, second.gram), None)


def _closure(generators: Sequence[Matrix], q: int) -> Set[Matrix]:
    seen = {identity(q)}
    frontier = [identity(q)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in generators:
                prod = mat_mul(m, g)
                if prod not in seen:
                    seen.add(prod)
                    nxt.append(prod)
        frontier = nxt
    return seen


@dataclass(frozen=True)
class AutomorphismGroup:
    """SO(L): determinant-one isometries of L onto itself, as matrices acting on coordinates."""

    elements: Tuple[Matrix, ...]
    generators: Tuple[Matrix, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def full_order(self) -> int:
        """|O(L)|; -1 is an isometry of determinant -1."""
        return 2 * len(self.elements)


def automorphisms(lattice: TernaryLattice) -> AutomorphismGroup:
    _require_reduced(lattice)
    q = lattice.q
    one = Poly.one(q)
    elements = tuple(t for t in _isometries(lattice, lattice.gram) if det3(t) == one)
    generators: List[Matrix] = []
    span = {identity(q)}
    for g in elements:
        if g not in span:
            generators.append(g)
            span = _closure(generators, q)
    if len(span) != len(elements):
        raise InvariantViolation(
            f"automorphisms of {lattice} do not form a group ({len(elements)} vs {len(span)})"
        )
    return AutomorphismGroup(elements, tuple(generators))


def orbit_sizes(lattice: TernaryLattice, a: Poly) -> List[int]:
    """Sizes of the SO(L)-orbits on primitive representations of a, sorted."""
    reps = representations(lattice, a)
    group = automorphisms(lattice)
    seen: Set[Tuple[Poly, ...]] = set()
    sizes = []
    for x in reps:
        if x in seen:
            continue
        orbit = {apply(t, x) for t in group.elements}
        seen |= orbit
        sizes.append(len(orbit))
    return sorted(sizes)


# --- decomposition ---------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """L = A*x (+) L' with Q(x) a unit; ``complement`` spans L' in the lattice basis."""

    vector: Vector
    value: Poly
    complement: Tuple[Vector, Vector]
    binary_gram: Tuple[Tuple[Poly, Poly], Tuple[Poly, Poly]]


def decompose(lattice: TernaryLattice) -> Optional[Decomposition]:
    """Split off a vector of unit length; None when L represents no unit (indecomposable)."""
    _require_reduced(lattice)
    if lattice.minima[0] != 0:
        return None
    q = lattice.q
    g = lattice.gram
    c = g[0][0]
    inv = pow(c.leading_coefficient, q - 2, q)
    zero, one = Poly.zero(q), Poly.one(q)
    basis = []
    for j in (1, 2):
        coord = [zero, zero, zero]
        coord[0] = -(g[j][0].scale(inv))
        coord[j] = one
        basis.append(tuple(coord))
    binary = tuple(tuple(lattice.inner(x, y) for y in basis) for x in basis)
    return Decomposition((one, zero, zero), c, tuple(basis), binary)  # type: ignore[arg-type]


# --- scrambling ------------------------------------------------------------------


def random_unimodular(
    q: int, rng: np.random.Generator, degree: int = 1, steps: int = 4
) -> Matrix:
    """A random product of elementary column operations, a permutation and sign flips."""
    cols = [list(c) for c in identity(q)]
    for _ in range(steps):
        i, j = rng.choice(3, size=2, replace=False)
        c = Poly(q, tuple(int(x) for x in rng.integers(0, q, size=degree + 1)))
        cols[j] = [a + c * b for a, b in zip(cols[j], cols[i])]
    order = [int(i) for i in rng.permutation(3)]
    signs = [1 if s else -1 for s in rng.integers(0, 2, size=3)]
    picked = [[x.scale(signs[k]) for x in cols[order[k]]] for k in range(3)]
    return from_columns(picked)


def scramble(lattice: TernaryLattice, rng: np.random.Generator, degree: int = 1) -> TernaryLattice:
    return lattice.transform(random_unimodular(lattice.q, rng, degree))
