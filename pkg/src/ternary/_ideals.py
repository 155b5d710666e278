"""Ideal arithmetic in the quadratic order A[sqrt(m)] for the Picard-group oracle.

Elements x + y*w (w^2 = m) are pairs ``(x, y)``. A primitive ideal is
``A*a + A*(b + w)`` with ``a`` monic, ``deg b < deg a`` and ``a | b^2 - m``.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from src.ternary.errors import InvariantViolation
from src.ternary.ffpoly import Poly, enumerate_below, enumerate_monic, gcd

logger = logging.getLogger(__name__)

Element = Tuple[Poly, Poly]


@dataclass(frozen=True)
class OrderIdeal:
    a: Poly
    b: Poly

    def generators(self) -> List[Element]:
        q = self.a.q
        return [(self.a, Poly.zero(q)), (self.b, Poly.one(q))]

    def conjugate(self) -> "OrderIdeal":
        return OrderIdeal(self.a, (-self.b) % self.a)


def _mul(m: Poly, u: Element, v: Element) -> Element:
    (x1, y1), (x2, y2) = u, v
    return x1 * x2 + m * y1 * y2, x1 * y2 + x2 * y1


def _deg(f: Poly) -> int:
    return -1 if f.is_zero() else len(f.coeffs) - 1


def hermite_basis(rows: Sequence[Element]) -> Tuple[Poly, Poly, Poly]:
    """Basis ``(alpha, 0), (beta, gamma)`` of the A-module spanned by ``rows``.

    ``alpha`` and ``gamma`` are monic and ``deg beta < deg alpha``.
    """
    work = [(x, y) for x, y in rows if not (x.is_zero() and y.is_zero())]
    while sum(1 for _, y in work if not y.is_zero()) > 1:
        with_y = [r for r in work if not r[1].is_zero()]
        pivot = min(with_y, key=lambda r: _deg(r[1]))
        reduced = [pivot]
        for r in work:
            if r is pivot:
                continue
            if r[1].is_zero():
                reduced.append(r)
                continue
            k = r[1] // pivot[1]
            reduced.append((r[0] - k * pivot[0], r[1] - k * pivot[1]))
        work = [r for r in reduced if not (r[0].is_zero() and r[1].is_zero())]
    pivot = next(r for r in work if not r[1].is_zero())
    q = pivot[1].q
    alpha = Poly.zero(q)
    for x, y in work:
        if y.is_zero():
            alpha = gcd(alpha, x)
    if alpha.is_zero():
        raise InvariantViolation("module is not of full rank")
    inv = pow(pivot[1].leading_coefficient, q - 2, q)
    return alpha, (pivot[0] * inv) % alpha, pivot[1] * inv


def product(m: Poly, left: OrderIdeal, right: OrderIdeal) -> Tuple[Poly, Poly, Poly]:
    rows = [_mul(m, u, v) for u in left.generators() for v in right.generators()]
    return hermite_basis(rows)


def is_principal(m: Poly, alpha: Poly, beta: Poly, gamma: Poly) -> bool:
    """Search for a generator of norm degree ``deg(alpha*gamma)``.

    In an imaginary order deg N(x + y*w) = max(2 deg x, deg m + 2 deg y), so a
    generator lies in a finite box.
    """
    q = m.q
    n = _deg(alpha) + _deg(gamma)
    dm = _deg(m)
    x_cap = n // 2
    s_len = (n - dm) // 2 - _deg(gamma) + 1 if n >= dm else 0
    r_len = x_cap - _deg(alpha) + 1
    s_values: Iterator[Poly] = enumerate_below(q, s_len) if s_len > 0 else iter([Poly.zero(q)])
    for s in s_values:
        base = (s * beta) % alpha
        r_values = enumerate_below(q, r_len) if r_len > 0 else iter([Poly.zero(q)])
        for r in r_values:
            if s.is_zero() and r.is_zero():
                continue
            x = base + alpha * r
            if 2 * _deg(x) <= n:
                return True
    return False


def equivalent(m: Poly, left: OrderIdeal, right: OrderIdeal) -> bool:
    return is_principal(m, *product(m, left, right.conjugate()))


def primitive_invertible_ideals(m: Poly) -> List[OrderIdeal]:
    """Primitive invertible ideals of norm degree at most deg(m)/2."""
    q = m.q
    out = []
    for k in range(_deg(m) // 2 + 1):
        for a in enumerate_monic(q, k):
            for b in enumerate_below(q, k):
                c, rem = divmod(b * b - m, a)
                if rem.is_zero() and gcd(gcd(a, b), c).degree == 0:
                    out.append(OrderIdeal(a, b))
    return out


def count_classes(m: Poly) -> int:
    ideals = primitive_invertible_ideals(m)
    reps: List[OrderIdeal] = []
    for ideal in ideals:
        if not any(equivalent(m, ideal, rep) for rep in reps):
            reps.append(ideal)
    logger.debug("m=%s: %d reduced ideals, %d classes", m, len(ideals), len(reps))
    return len(reps)
