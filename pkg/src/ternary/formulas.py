"""Closed-form right-hand sides: masses, exact class numbers, Epstein and L-average limits.

All values are exact ``Fraction`` objects; nothing here enumerates lattices.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List

from src.ternary.errors import InvariantViolation, PreconditionError
from src.ternary.ffpoly import Poly, is_irreducible, is_squarefree, prime_factors, smallest_nonsquare
from src.ternary.localsym import GenusSymbol
from src.ternary.zeta_l import (
    UPolynomial,
    hyperelliptic_l_polynomial,
    m_d,
    sum_l_values,
    zeta_A,
)

logger = logging.getLogger(__name__)


def _require_squarefree(D: Poly) -> None:
    if D.is_zero() or (D.degree or 0) < 1 or not is_squarefree(D):
        raise PreconditionError(f"D must be a squarefree nonconstant polynomial, got {D}")


def _require_split(D: Poly, D0: Poly, D1: Poly) -> None:
    _require_squarefree(D)
    if (D0 * D1).monic() != D.monic():
        raise PreconditionError(f"D0*D1 = {D0 * D1} is not D = {D} up to a unit")


# --- mass ------------------------------------------------------------------------


@dataclass(frozen=True)
class MassFormula:
    """Three evaluations of the genus mass.

    ``statement`` and ``derivation`` are the two algebraic shapes of the
    closed form with the correction factor 2M_D0(1) - M_D0(2); they always
    agree. ``local_product`` uses the local density M_D0(1)^2 M_D1(2) of
    vectors with Q(x) prime to D, and is the value used as the completeness
    certificate. It equals the other two whenever D0 has at most one prime.
    """

    statement: Fraction
    derivation: Fraction
    local_product: Fraction

    @property
    def value(self) -> Fraction:
        return self.local_product

    @property
    def forms_agree(self) -> bool:
        return self.statement == self.local_product

    def to_json(self) -> Dict[str, str]:
        return {
            "value": str(self.value),
            "statement": str(self.statement),
            "derivation": str(self.derivation),
            "local_product": str(self.local_product),
        }


def mass_formula(q: int, D: Poly, D0: Poly, D1: Poly, r: int, delta: int) -> MassFormula:
    _require_split(D, D0, D1)
    if r != len(prime_factors(D)) or delta != D.degree:
        raise PreconditionError(f"r={r}, delta={delta} do not match D={D}")
    base = Fraction(q**delta, 2**r * (q * q - 1)) * m_d(D, 1)
    statement = base * m_d(D0, 2) / (2 * m_d(D0, 1) - m_d(D0, 2))
    derivation = base * m_d(D, 2) / (2 * m_d(D0, 1) * m_d(D1, 2) - m_d(D, 2))
    if statement != derivation:
        raise InvariantViolation(f"mass forms disagree for D={D}: {statement} vs {derivation}")
    local_product = base * m_d(D0, 2) / m_d(D0, 1) ** 2
    if len(prime_factors(D0)) <= 1 and local_product != statement:
        raise InvariantViolation(f"mass forms disagree for D={D}: {statement} vs {local_product}")
    return MassFormula(statement, derivation, local_product)


def mass_formula_for(symbol: GenusSymbol) -> MassFormula:
    D = symbol.D0 * symbol.D1
    return mass_formula(D.q, D, symbol.D0, symbol.D1, symbol.r, symbol.delta)


def irreducible_mass(q: int, delta: int) -> Fraction:
    """(q^delta - 1) / (2(q^2 - 1)), the mass for irreducible D."""
    return Fraction(q**delta - 1, 2 * (q * q - 1))


# --- exact class numbers -----------------------------------------------------------


@dataclass(frozen=True)
class ExactClassNumbers:
    h: int
    h_dec: int
    h_ind: int
    l_plus: Fraction
    l_minus: Fraction


def _require_irreducible_odd(D: Poly) -> None:
    if D.is_zero() or not is_irreducible(D.monic()) or (D.degree or 0) % 2 == 0:
        raise PreconditionError(f"D must be irreducible of odd degree, got {D}")


def exact_class_numbers(q: int, D: Poly) -> ExactClassNumbers:
    """h, h_dec and h_ind for irreducible D of odd degree.

    With X = (L(1) + L(-1))/2 for the curve polynomial L of y^2 = -D,
    h = (1 + q(q^(delta-1) - 1)/(q^2 - 1) + X)/2, h_ind is the same with -X,
    and h_dec = X.
    """
    _require_irreducible_odd(D)
    delta = D.degree or 0
    lpoly = hyperelliptic_l_polynomial(-D)
    twisted = hyperelliptic_l_polynomial(-D * smallest_nonsquare(q))
    if twisted != _negate_variable(lpoly):
        raise InvariantViolation(f"L_(-eps D)(u) != L_(-D)(-u) for D={D}")
    l_plus, l_minus = lpoly.evaluate(1), lpoly.evaluate(-1)
    x = (l_plus + l_minus) / 2
    base = 1 + Fraction(q * (q ** (delta - 1) - 1), q * q - 1)
    h, h_ind = (base + x) / 2, (base - x) / 2
    for name, value in (("h", h), ("h_ind", h_ind), ("h_dec", x)):
        if value.denominator != 1 or value < 0:
            raise InvariantViolation(f"{name} came out as {value} for D={D}")
    return ExactClassNumbers(int(h), int(x), int(h_ind), l_plus, l_minus)


def _negate_variable(p: UPolynomial) -> UPolynomial:
    """p(-u)."""
    return UPolynomial(tuple(c if k % 2 == 0 else -c for k, c in enumerate(p.coeffs)))


# --- Epstein coefficients ----------------------------------------------------------


def lk_closed_form(q: int, delta: int, k: int) -> int:
    """|L_k| for k >= delta."""
    if k < delta:
        raise PreconditionError(f"closed form needs k >= delta, got k={k}, delta={delta}")
    if (k - delta) % 2 == 0:
        return q ** ((3 * k - delta + 4) // 2)
    return q ** ((3 * k - delta + 5) // 2)


def alpha_closed_form(q: int, delta: int, k: int) -> int:
    """alpha_k(L) for k > delta; it depends on L only through q and delta."""
    if k <= delta:
        raise PreconditionError(f"closed form needs k > delta, got k={k}, delta={delta}")
    if (k - delta) % 2 == 0:
        return (q - 1) * q ** ((3 * k - delta + 2) // 2)
    return (q * q - 1) * q ** ((3 * k - delta + 1) // 2)


def chi_density_statement(d0: Poly, d1: Poly) -> Fraction:
    """2|d0|^-1 |d1|^-2 - |d|^-2."""
    d = d0 * d1
    return Fraction(2, d0.norm() * d1.norm() ** 2) - Fraction(1, d.norm() ** 2)


def chi_density(d0: Poly, d1: Poly) -> Fraction:
    """Proportion of (A/d)^3 with d | Q(v), from the zero counts of the residue forms."""
    out = Fraction(1)
    for p in prime_factors(d0):
        n = p.norm()
        out *= Fraction(2 * n - 1, n * n)
    for p in prime_factors(d1):
        out *= Fraction(1, p.norm() ** 2)
    return out


def psi_density_statement(D0: Poly, D1: Poly) -> Fraction:
    """2 M_D0(1) M_D1(2) - M_D(2)."""
    return 2 * m_d(D0, 1) * m_d(D1, 2) - m_d(D0 * D1, 2)


def psi_density(D0: Poly, D1: Poly) -> Fraction:
    """Proportion of (A/D)^3 with Q(v) prime to D: M_D0(1)^2 M_D1(2)."""
    return m_d(D0, 1) ** 2 * m_d(D1, 2)


def beta_limit(q: int, D: Poly, D0: Poly, D1: Poly, parity: int) -> Fraction:
    """Limit of beta_(delta+2m+parity) / q^(3m) as m grows."""
    _require_split(D, D0, D1)
    if parity not in (0, 1):
        raise PreconditionError(f"parity must be 0 or 1, got {parity}")
    delta = D.degree or 0
    scale = psi_density(D0, D1) / (m_d(D, 3) * zeta_A(q, 3))
    if parity == 0:
        return scale * (1 - Fraction(1, q)) * q ** (delta + 2)
    return scale * (1 - Fraction(1, q * q)) * q ** (delta + 4)


# --- averages of L-values ------------------------------------------------------------


def l_average_limit(q: int, D: Poly) -> Fraction:
    """Limit of q^-l times the sum of L(1, chi_Dm) over deg m = l."""
    _require_squarefree(D)
    return m_d(D, 1) * m_d(D, 2) / m_d(D, 3) * q * (1 - Fraction(1, q * q))


def normalized_l_average_limit(q: int, D: Poly) -> Fraction:
    """M_D(2) zeta(2) / (M_D(3) zeta(3)), the limit of the average over admissible m."""
    _require_squarefree(D)
    return m_d(D, 2) * zeta_A(q, 2) / (m_d(D, 3) * zeta_A(q, 3))


def classno_average_limit(q: int, D: Poly) -> Fraction:
    """Limit of q^(-3l) times the sum of h(mD) over deg m = delta + 2l + 1.

    Equal to q^(2 delta + 1) times ``l_average_limit``.
    """
    _require_squarefree(D)
    delta = D.degree or 0
    return q ** (2 * delta) * (q * q - 1) * m_d(D, 1) * m_d(D, 2) / m_d(D, 3)


@dataclass(frozen=True)
class LAverageRow:
    l: int
    count: int
    average: Fraction
    limit: Fraction
    identity_holds: bool
    rh_violations: int

    @property
    def deviation(self) -> float:
        """Relative distance to the limit (human-readable only)."""
        return float(abs(self.average - self.limit) / self.limit)


def l_average_table(D: Poly, lmax: int, lmin: int = 1, threads: int = 1) -> List[LAverageRow]:
    """Normalized averages of L(1, chi_Dm) for l = lmin..lmax next to their limit."""
    _require_squarefree(D)
    limit = normalized_l_average_limit(D.q, D)
    rows = []
    for l in range(lmin, lmax + 1):
        result = sum_l_values(D, l, threads)
        rows.append(
            LAverageRow(
                l,
                result.count,
                result.normalized_average,
                limit,
                result.identity_holds,
                result.rh_violations,
            )
        )
        logger.info("l=%d: average %s (limit %s)", l, result.normalized_average, limit)
    return rows


def siegel_rhs(r: int, class_number_value: int) -> Fraction:
    """2^-r |Pic(A[sqrt(-aD)])|."""
    return Fraction(class_number_value, 2**r)
