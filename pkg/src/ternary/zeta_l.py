"""Zeta and L-function layer over A = F_q[t].

Power series and L-polynomials are written in u = q^(-s). Everything here is
exact: coefficients are ints or ``Fraction``.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from src.ternary import _ideals
from src.ternary._parallel import chunked, ordered_map
from src.ternary.errors import InvariantViolation, PreconditionError, SearchBoundExceeded
from src.ternary.ffpoly import (
    Poly,
    divisors,
    enumerate_all,
    enumerate_monic,
    gcd,
    is_square,
    is_squarefree,
    jacobi,
    legendre_q,
    mobius,
    prime_factors,
    squarefree_decomposition,
)
from src.ternary.settings import PICARD_MAX_DEGREE

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]


@dataclass(frozen=True)
class UPolynomial:
    """Finitely supported polynomial in u with exact rational coefficients."""

    coeffs: Tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        c = [Fraction(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def one(cls) -> "UPolynomial":
        return cls((1,))

    @property
    def degree(self) -> Optional[int]:
        return len(self.coeffs) - 1 if self.coeffs else None

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __add__(self, other: "UPolynomial") -> "UPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return UPolynomial(tuple(self.coefficient(k) + other.coefficient(k) for k in range(n)))

    def __neg__(self) -> "UPolynomial":
        return UPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "UPolynomial") -> "UPolynomial":
        return self + (-other)

    def __mul__(self, other: Union["UPolynomial", Number]) -> "UPolynomial":
        if not isinstance(other, UPolynomial):
            return UPolynomial(tuple(c * other for c in self.coeffs))
        if not self.coeffs or not other.coeffs:
            return UPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UPolynomial(tuple(out))

    __rmul__ = __mul__

    def evaluate(self, u: Number) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc

    def substitute_power(self, k: int) -> "UPolynomial":
        """u -> u^k."""
        out = [Fraction(0)] * (k * (len(self.coeffs) - 1) + 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            out[i * k] = c
        return UPolynomial(tuple(out))

    def truncate(self, n: int) -> "UPolynomial":
        """Keep the terms u^0 .. u^(n-1)."""
        return UPolynomial(self.coeffs[:n])

    def series_inverse(self, n: int) -> "UPolynomial":
        """First ``n`` terms of 1/self as a power series."""
        c0 = self.coefficient(0)
        if c0 == 0:
            raise PreconditionError("power series with zero constant term is not invertible")
        inv = [Fraction(0)] * n
        for k in range(n):
            acc = Fraction(1) if k == 0 else Fraction(0)
            for j in range(1, min(k, len(self.coeffs) - 1) + 1):
                acc -= self.coeffs[j] * inv[k - j]
            inv[k] = acc / c0
        return UPolynomial(tuple(inv))

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def int_coeffs(self) -> List[int]:
        if not self.is_integral():
            raise InvariantViolation(f"non-integral coefficients in {self}")
        return [int(c) for c in self.coeffs]

    def to_json(self) -> List[str]:
        return [str(c) for c in self.coeffs] if self.coeffs else ["0"]

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else ("u" if k == 1 else f"u^{k}")
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return "+".join(parts).replace("+-", "-")


# --- M_d and zeta_A -------------------------------------------------------------


def _require_nonzero(d: Poly) -> None:
    if d.is_zero():
        raise PreconditionError("argument must be a nonzero polynomial")


def m_d(d: Poly, s: int) -> Fraction:
    """M_d(s) = prod over primes p | d of (1 - |p|^-s)."""
    _require_nonzero(d)
    out = Fraction(1)
    for p in prime_factors(d):
        out *= 1 - Fraction(1, p.norm()) ** s
    return out


def m_d_sum(d: Poly, s: int) -> Fraction:
    """M_d(s) as the divisor sum of mu(e)|e|^-s."""
    _require_nonzero(d)
    return sum(
        (Fraction(mobius(e), e.norm() ** s) for e in divisors(d)), Fraction(0)
    )


def m_d_upoly(d: Poly) -> UPolynomial:
    """M*_d(u) = prod (1 - u^deg p)."""
    _require_nonzero(d)
    out = UPolynomial.one()
    for p in prime_factors(d):
        out = out * UPolynomial((1,) + (0,) * ((p.degree or 0) - 1) + (-1,))
    return out


def zeta_A(q: int, s: int) -> Fraction:
    """zeta_A(s) = 1/(1 - q^(1-s)), for s >= 2."""
    if s <= 1:
        raise PreconditionError(f"zeta_A(s) diverges for s <= 1, got s={s}")
    return 1 / (1 - Fraction(1, q ** (s - 1)))


def zeta_A_inverse_upoly(q: int) -> UPolynomial:
    return UPolynomial((1, -q))


def zeta_A_upoly(q: int, precision: int = 16) -> UPolynomial:
    """Truncation of zeta*_A(u) = 1/(1 - q*u) to ``precision`` terms."""
    return UPolynomial(tuple(q**k for k in range(precision)))


# --- quadratic orders -----------------------------------------------------------


class InfinityType(str, Enum):
    RAMIFIED = "ramified"
    INERT = "inert"
    SPLIT = "split"


@dataclass(frozen=True)
class QuadraticOrderDescriptor:
    m: Poly
    squarefree_part: Poly
    conductor_square_part: Poly
    infinity_type: InfinityType

    @property
    def is_imaginary(self) -> bool:
        return self.infinity_type is not InfinityType.SPLIT

    @property
    def is_maximal(self) -> bool:
        return self.conductor_square_part.degree == 0


def infinity_type(m: Poly) -> InfinityType:
    _require_nonzero(m)
    if (m.degree or 0) % 2:
        return InfinityType.RAMIFIED
    if legendre_q(m.leading_coefficient, m.q) == -1:
        return InfinityType.INERT
    return InfinityType.SPLIT


def describe_order(m: Poly) -> QuadraticOrderDescriptor:
    """Split ``m = (c*m0) * f^2`` and classify the place at infinity."""
    _require_nonzero(m)
    c, m0, f = squarefree_decomposition(m)
    return QuadraticOrderDescriptor(m, m0 * c, f, infinity_type(m))


def _require_nonsquare(b: Poly) -> Tuple[int, Poly, Poly]:
    _require_nonzero(b)
    c, m0, f = squarefree_decomposition(b)
    if m0.degree == 0:
        raise PreconditionError(
            f"{b} is a constant times a square; its L-series is not a polynomial"
        )
    return c, m0, f


# --- L-polynomials -----------------------------------------------------------------


def l_coefficient(b: Poly, k: int) -> int:
    """c_k(chi_b): the sum of (b/a) over monic a of degree k."""
    if k < 0:
        raise PreconditionError(f"k must be >= 0, got {k}")
    return sum(jacobi(b, a) for a in enumerate_monic(b.q, k))


_INFINITY_FACTOR = {
    InfinityType.RAMIFIED: UPolynomial((1,)),
    InfinityType.INERT: UPolynomial((1, 1)),
    InfinityType.SPLIT: UPolynomial((1, -1)),
}


def _genus(n: int, kind: InfinityType) -> int:
    return (n - 1) // 2 if kind is InfinityType.RAMIFIED else (n - 2) // 2


def hyperelliptic_l_polynomial(b: Poly) -> UPolynomial:
    """Numerator of the zeta function of y^2 = b (square part and infinity factor removed).

    Only c_0 .. c_g are summed; the rest follows from a_(2g-k) = q^(g-k) a_k.
    """
    c, m0, _ = _require_nonsquare(b)
    b0 = m0 * c
    q = b.q
    n = b0.degree or 0
    kind = infinity_type(b0)
    g = _genus(n, kind)
    head = UPolynomial(tuple(l_coefficient(b0, k) for k in range(g + 1)))
    head = (head * _INFINITY_FACTOR[kind].series_inverse(g + 1)).truncate(g + 1)
    a = [head.coefficient(k) for k in range(g + 1)] + [Fraction(0)] * g
    for k in range(g):
        a[2 * g - k] = q ** (g - k) * a[k]
    lc = UPolynomial(tuple(a))
    if not lc.is_integral():
        raise InvariantViolation(f"non-integral curve L-polynomial for {b}: {lc}")
    return lc


def _square_part_factor(b0: Poly, f: Poly) -> UPolynomial:
    out = UPolynomial.one()
    if f.degree == 0:
        return out
    for p in prime_factors(f):
        chi = jacobi(b0, p)
        if chi:
            out = out * UPolynomial((1,) + (0,) * ((p.degree or 0) - 1) + (-chi,))
    return out


def l_polynomial(b: Poly, method: str = "functional") -> UPolynomial:
    """L*(u, chi_b) for ``b`` not a constant times a square.

    ``method="sum"`` sums every coefficient directly; ``"functional"`` sums up to
    the genus and completes by the functional equation.
    """
    c, m0, f = _require_nonsquare(b)
    if method == "sum":
        return UPolynomial(tuple(l_coefficient(b, k) for k in range(b.degree or 0)))
    if method != "functional":
        raise PreconditionError(f"unknown L-polynomial method {method!r}")
    b0 = m0 * c
    full = _INFINITY_FACTOR[infinity_type(b0)] * hyperelliptic_l_polynomial(b0)
    return full * _square_part_factor(b0, f)


def rh_bound_holds(lpoly: UPolynomial, deg_b: int, q: int) -> bool:
    """|c_k| <= binom(deg b - 1, k) q^(k/2) for every coefficient."""
    return all(
        c * c <= math.comb(deg_b - 1, k) ** 2 * q**k for k, c in enumerate(lpoly.coeffs)
    )


# --- class numbers ----------------------------------------------------------------


def _require_imaginary(m: Poly) -> QuadraticOrderDescriptor:
    _require_nonzero(m)
    if (m.degree or 0) < 1:
        raise PreconditionError(f"m must have degree >= 1, got {m}")
    if is_square(m):
        raise PreconditionError(f"{m} is a square in A")
    desc = describe_order(m)
    if not desc.is_imaginary:
        raise PreconditionError(f"{m} is a square in K_inf (real quadratic case)")
    return desc


def class_number(m: Poly) -> int:
    """h(m) = |Pic(A[sqrt(m)])| for imaginary ``m``.

    Maximal orders: ramified h = L*(1/q) q^((n-1)/2), inert h = 2 q^(n/2) L*(1/q)/(q+1).
    Orders of conductor f pick up |f| prod (1 - chi(p)/|p|) over the unit index.
    """
    desc = _require_imaginary(m)
    q = m.q
    b0 = desc.squarefree_part
    n = b0.degree or 0
    if n == 0:
        h0 = Fraction(1)
        unit_index = q + 1
    else:
        value = l_polynomial(b0).evaluate(Fraction(1, q))
        if desc.infinity_type is InfinityType.RAMIFIED:
            h0 = value * q ** ((n - 1) // 2)
        else:
            h0 = 2 * q ** (n // 2) * value / (q + 1)
        unit_index = 1
    f = desc.conductor_square_part
    h = h0
    if f.degree:
        h *= f.norm()
        for p in prime_factors(f):
            h *= 1 - Fraction(jacobi(b0, p), p.norm())
        h /= unit_index
    if h.denominator != 1 or h <= 0:
        raise InvariantViolation(f"class number of {m} came out as {h}")
    return int(h)


def picard_oracle(m: Poly) -> int:
    """|Pic(A[sqrt(m)])| by counting reduced ideal classes directly."""
    _require_imaginary(m)
    if (m.degree or 0) > PICARD_MAX_DEGREE:
        raise SearchBoundExceeded(
            f"Picard oracle is limited to deg m <= {PICARD_MAX_DEGREE}, got {m.degree}"
        )
    return _ideals.count_classes(m)


# --- Psi_D(k, l) ------------------------------------------------------------------


def _require_squarefree(D: Poly) -> None:
    _require_nonzero(D)
    if not is_squarefree(D):
        raise PreconditionError(f"D must be squarefree, got {D}")


def psi_count_enumerate(D: Poly, k: int, l: int) -> int:
    q = D.q
    ys = [y for y in enumerate_monic(q, l) if gcd(y, D).degree == 0]
    total = 0
    for x in enumerate_monic(q, k):
        if gcd(x, D).degree != 0:
            continue
        total += sum(1 for y in ys if gcd(x, y).degree == 0)
    return total


def _bmul(a: List[List[int]], b: List[List[int]], n: int) -> List[List[int]]:
    out = [[0] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(n + 1):
            if a[i][j]:
                for k in range(n + 1 - i):
                    row = b[k]
                    for l in range(n + 1 - j):
                        if row[l]:
                            out[i + k][j + l] += a[i][j] * row[l]
    return out


def psi_series(D: Poly, n: int) -> List[List[int]]:
    """Psi_D(k, l) for k, l <= n from the bivariate generating function.

    M*(u) M*(v) (1 - q u v) / (M*(uv) (1 - q u) (1 - q v)).
    """
    _require_squarefree(D)
    q = D.q
    md = m_d_upoly(D)
    md_inv = md.series_inverse(n + 1).int_coeffs()
    md_c = md.int_coeffs()

    def grid() -> List[List[int]]:
        return [[0] * (n + 1) for _ in range(n + 1)]

    mu, mv, cross, inv_uv, geo_u, geo_v = grid(), grid(), grid(), grid(), grid(), grid()
    for k, c in enumerate(md_c[: n + 1]):
        mu[k][0] = c
        mv[0][k] = c
    cross[0][0] = 1
    if n >= 1:
        cross[1][1] = -q
    for k, c in enumerate(md_inv[: n + 1] + [0] * (n + 1 - len(md_inv))):
        inv_uv[k][k] = c
    for k in range(n + 1):
        geo_u[k][0] = q**k
        geo_v[0][k] = q**k
    out = mu
    for factor in (mv, cross, inv_uv, geo_u, geo_v):
        out = _bmul(out, factor, n)
    return out


def psi_count(D: Poly, k: int, l: int, method: str = "series") -> int:
    """Psi_D(k, l): coprime pairs of monic (x, y), deg x = k, deg y = l, both prime to D."""
    _require_squarefree(D)
    if k < 0 or l < 0:
        raise PreconditionError("k and l must be >= 0")
    if method == "enumerate":
        return psi_count_enumerate(D, k, l)
    if method != "series":
        raise PreconditionError(f"unknown psi method {method!r}")
    return psi_series(D, max(k, l))[k][l]


# --- sums of L-values -------------------------------------------------------------


@dataclass
class LSumResult:
    D: Poly
    l: int
    count: int
    coefficient_sums: List[int]
    total: Fraction
    low_part: Fraction
    psi_part: Fraction
    tail_part: Fraction
    rh_checked: int = 0
    rh_violations: int = 0
    elapsed: float = field(default=0.0, compare=False)

    @property
    def identity_holds(self) -> bool:
        return self.low_part == self.psi_part and self.total == self.psi_part + self.tail_part

    @property
    def normalized_average(self) -> Fraction:
        """Sum divided by the number of m, (q-1) q^l M_D(1)."""
        return self.total / self.count


def _coefficient_sums(args: Tuple[Poly, Sequence[Poly], int]) -> Tuple[List[int], int, int]:
    D, ms, width = args
    sums = [0] * width
    checked = violations = 0
    for m in ms:
        b = D * m
        lp = l_polynomial(b).int_coeffs()
        for k, c in enumerate(lp):
            sums[k] += c
        if is_squarefree(b):
            checked += 1
            if not rh_bound_holds(UPolynomial(tuple(lp)), b.degree or 0, b.q):
                violations += 1
    return sums, checked, violations


def sum_l_values(D: Poly, l: int, threads: int = 1) -> LSumResult:
    """Sum of L(1, chi_{Dm}) over all m of degree l prime to D, split into Psi and tail parts.

    For k <= l - delta the m-sum of c_k(chi_{Dm}) equals (q-1) Psi_D(k/2, l)
    (zero for odd k); the remaining coefficients form the tail.
    """
    _require_squarefree(D)
    delta = D.degree or 0
    if delta < 1:
        raise PreconditionError("D must be nonconstant")
    if l < 1:
        raise PreconditionError(f"l must be >= 1, got {l}")
    q = D.q
    started = time.perf_counter()
    ms = [m for m in enumerate_all(q, l) if gcd(m, D).degree == 0]
    width = l + delta
    parts = ordered_map(
        _coefficient_sums, [(D, chunk, width) for chunk in chunked(ms, threads * 4)], threads
    )
    sums = [0] * width
    checked = violations = 0
    for part_sums, part_checked, part_violations in parts:
        sums = [a + b for a, b in zip(sums, part_sums)]
        checked += part_checked
        violations += part_violations

    u = Fraction(1, q)
    total = sum((s * u**k for k, s in enumerate(sums)), Fraction(0))
    cut = l - delta
    low = sum((sums[k] * u**k for k in range(max(cut + 1, 0))), Fraction(0))
    tail = sum((sums[k] * u**k for k in range(max(cut + 1, 0), width)), Fraction(0))
    psi_part = Fraction(0)
    if cut >= 0:
        table = psi_series(D, l)
        psi_part = sum(
            ((q - 1) * table[k][l] * u ** (2 * k) for k in range(cut // 2 + 1)), Fraction(0)
        )
    elapsed = time.perf_counter() - started
    logger.info("sum over %d m of degree %d prime to %s in %.2fs", len(ms), l, D, elapsed)
    return LSumResult(D, l, len(ms), sums, total, low, psi_part, tail, checked, violations, elapsed)


def classno_average(D: Poly, l: int, threads: int = 1) -> Fraction:
    """q^(-3l) times the sum of h(mD) over m of degree delta+2l+1 prime to D."""
    _require_squarefree(D)
    q = D.q
    deg_m = (D.degree or 0) + 2 * l + 1
    ms = [m for m in enumerate_all(q, deg_m) if gcd(m, D).degree == 0]

    def work(chunk: Sequence[Poly]) -> int:
        return sum(class_number(m * D) for m in chunk)

    total = sum(ordered_map(work, chunked(ms, threads * 4), threads))
    return Fraction(total, q ** (3 * l))
