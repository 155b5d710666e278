"""Acceptance checks: each identity computed from both sides and compared exactly.

Every check runs in two scopes. The ``fast`` suite uses the smallest cases
and finishes in seconds; ``all`` runs the full ranges.
"""

import logging
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.ternary._linalg import as_matrix
from src.ternary._parallel import ordered_map
from src.ternary.clifford import (
    SqrtStatus,
    determinant_identity_holds,
    even_clifford,
    primitive_sqrt_search,
)
from src.ternary.errors import PreconditionError, TernaryError
from src.ternary.ffpoly import (
    Poly,
    divisors,
    enumerate_all,
    gcd,
    irreducibles,
    is_squarefree,
)
from src.ternary.formulas import (
    alpha_closed_form,
    beta_limit,
    chi_density,
    exact_class_numbers,
    irreducible_mass,
    mass_formula_for,
    normalized_l_average_limit,
    psi_density,
)
from src.ternary.genus import (
    ClassList,
    classify_decomposable,
    decomposable_count_from_class_numbers,
    exhaustive_classes,
    genus_classes,
    genus_symbol,
    neighbor_closure,
    seed_lattice,
    siegel_lhs,
    siegel_rhs,
)
from src.ternary.lattice import (
    TernaryLattice,
    Twist,
    alpha_coefficients,
    beta_coefficients,
    local_count,
    lk_size,
    orbit_sizes,
    representation_count,
    twist_tail_start,
    twisted_zeta_coefficients,
)
from src.ternary.settings import SHORT_VECTOR_MAX_BOX
from src.ternary.zeta_l import (
    class_number,
    l_polynomial,
    m_d_upoly,
    picard_oracle,
    psi_count_enumerate,
    psi_series,
    sum_l_values,
    zeta_A_upoly,
)

logger = logging.getLogger(__name__)

SUITES = ("fast", "all")
FAST_BOX = 1_000_000


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: Status
    detail: str
    elapsed: float

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def to_json(self) -> Dict[str, str]:
        # timings vary between runs and stay out of the machine formats
        return {"name": self.name, "status": self.status.value, "detail": self.detail}


@dataclass(frozen=True)
class VerifyContext:
    full: bool
    seed: int = 0
    threads: int = 1


Outcome = Tuple[bool, str]
CheckFn = Callable[[VerifyContext], Outcome]


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    run: CheckFn


CHECKS: List[Check] = []


def check(name: str, description: str) -> Callable[[CheckFn], CheckFn]:
    """Register a check; CHECKS keeps definition order."""

    def register(fn: CheckFn) -> CheckFn:
        CHECKS.append(Check(name, description, fn))
        return fn

    return register


def _p(text: str, q: int) -> Poly:
    return Poly.parse(text, q)


def _split(lattice: TernaryLattice, D: Poly) -> Tuple[Poly, Poly]:
    symbol = genus_symbol(lattice, D)
    return symbol.D0, symbol.D1


def _decreasing(values: Sequence[Fraction]) -> bool:
    return all(b < a or b == 0 for a, b in zip(values, values[1:]))


# --- masses ------------------------------------------------------------------------


@check("mass-irreducible", "enumerated mass equals (q^delta - 1)/(2(q^2 - 1)) for irreducible D")
def check_mass_irreducible(ctx: VerifyContext) -> Outcome:
    cases = [(3, "t", Fraction(1, 8), None)]
    if ctx.full:
        cases += [(5, "t", Fraction(1, 12), None), (3, "t^3+2*t+2", Fraction(13, 8), 4)]
    notes = []
    ok = True
    for q, text, expected, h in cases:
        D = _p(text, q)
        classes = exhaustive_classes(q, D)
        formula = mass_formula_for(classes.genus_symbol)
        good = classes.mass == expected == irreducible_mass(q, D.degree or 0) == formula.value
        if h is not None:
            good = good and classes.class_number == h
        ok = ok and good
        notes.append(f"q={q} D={D}: h={classes.class_number} mass={classes.mass}")
    return ok, "; ".join(notes)


@check("mass-composite", "neighbor closure, exhaustive list and both mass forms agree for D=t(t+1)")
def check_mass_composite(ctx: VerifyContext) -> Outcome:
    q = 3
    D = _p("t^2+t", q)
    by_neighbors = neighbor_closure(seed_lattice(q, D), threads=ctx.threads)
    formula = mass_formula_for(by_neighbors.genus_symbol)
    exhaustive = exhaustive_classes(q, D, by_neighbors.genus_symbol.D1)
    ok = (
        by_neighbors.mass == formula.value == formula.statement == formula.derivation
        and exhaustive.mass == formula.value
        and exhaustive.class_number == by_neighbors.class_number
    )
    return ok, (
        f"neighbor h={by_neighbors.class_number} mass={by_neighbors.mass}, "
        f"exhaustive mass={exhaustive.mass}, formula={formula.value}"
    )


# --- Siegel's formula -----------------------------------------------------------------


@check("siegel", "sum of R(L_i, a)/|SO(L_i)| equals 2^-r h(-aD), by formula and by oracle")
def check_siegel(ctx: VerifyContext) -> Outcome:
    q = 3
    D = _p("t", q)
    values = ["1", "t+1"]
    if ctx.full:
        values += ["t+2", "t^2+1", "t^3+2*t+1"]
    classes = genus_classes(q, D, threads=ctx.threads)
    ok = True
    notes = []
    for text in values:
        a = _p(text, q)
        lhs = siegel_lhs(classes, a, ctx.threads)
        rhs = siegel_rhs(classes, a)
        if rhs is None:
            # not representable: the weighted sum must vanish
            ok = ok and lhs == 0
        else:
            oracle = Fraction(picard_oracle(-(a * D)), 2 ** classes.genus_symbol.r)
            ok = ok and lhs == rhs == oracle
        notes.append(f"a={a}: {lhs} vs {rhs}")
    return ok, "; ".join(notes)


# --- exact class numbers ----------------------------------------------------------------


@check("exact-class-numbers", "h, h_dec and h_ind from L-values equal the enumerated genus split")
def check_exact_class_numbers(ctx: VerifyContext) -> Outcome:
    cases = [(3, _p("t", 3))]
    if ctx.full:
        cases += [
            (3, _p("t^3+2*t+2", 3)),
            (5, _p("t", 5)),
            (5, _p("t^3+t+1", 5)),
            (3, irreducibles(3, 5)[0]),
        ]
    ok = True
    notes = []
    for q, D in cases:
        expected = exact_class_numbers(q, D)
        method = "exhaustive" if (D.degree or 0) <= 3 else "neighbor"
        classes = genus_classes(q, D, method, threads=ctx.threads)
        h_dec, h_ind = classify_decomposable(classes)
        good = (
            expected.h == classes.class_number
            and (expected.h_dec, expected.h_ind) == (h_dec, h_ind)
            and decomposable_count_from_class_numbers(q, D) == h_dec
        )
        ok = ok and good
        notes.append(f"q={q} D={D}: h={classes.class_number} dec={h_dec} ind={h_ind}")
    return ok, "; ".join(notes)


# --- Epstein coefficients ---------------------------------------------------------------


def _corpus(full: bool) -> List[TernaryLattice]:
    lattices = list(genus_classes(3, _p("t", 3)).representatives)
    if full:
        lattices += genus_classes(5, _p("t", 5)).representatives
        lattices += genus_classes(3, _p("t^3+2*t+2", 3), "exhaustive").representatives
    return lattices


def _top_k(lattice: TernaryLattice, extra: int, budget: int) -> int:
    k = lattice.delta + extra
    while k > lattice.delta + 1 and lk_size(lattice, k) > budget:
        k -= 1
    return k


@check("epstein-alpha", "enumerated alpha_k equals the closed form for delta < k <= delta + 6")
def check_epstein_alpha(ctx: VerifyContext) -> Outcome:
    budget = SHORT_VECTOR_MAX_BOX if ctx.full else FAST_BOX
    ok = True
    notes = []
    for lattice in _corpus(ctx.full):
        kmax = _top_k(lattice, 6, budget)
        alpha = alpha_coefficients(lattice, kmax, ctx.threads)
        q, delta = lattice.q, lattice.delta
        good = all(alpha[k] == alpha_closed_form(q, delta, k) for k in range(delta + 1, kmax + 1))
        ok = ok and good
        notes.append(f"q={q} {lattice}: k<={kmax}")
    return ok, "; ".join(notes)


@check("twisted-zeta", "Z(u, psi) = M_D(u^2) zeta(u^2) Z(u, phi psi) and the divisor-twist tails")
def check_twisted_zeta(ctx: VerifyContext) -> Outcome:
    q = 3
    D = _p("t^2+t", q)
    lattice = seed_lattice(q, D)
    kmax = lattice.delta + (5 if ctx.full else 4)
    psi = twisted_zeta_coefficients(lattice, kmax, Twist.PSI, threads=ctx.threads)
    primitive = twisted_zeta_coefficients(lattice, kmax, Twist.PHI_PSI)
    weights = (
        m_d_upoly(D).substitute_power(2) * zeta_A_upoly(q, kmax + 1).substitute_power(2)
    ).truncate(kmax + 1).int_coeffs()
    weights += [0] * (kmax + 1 - len(weights))
    product = [sum(weights[i] * primitive[k - i] for i in range(k + 1)) for k in range(kmax + 1)]
    ok = product == psi
    notes = [f"psi identity up to u^{kmax}: {'ok' if ok else 'mismatch'}"]

    symbol = _split(lattice, D)
    alpha = alpha_coefficients(lattice, kmax, ctx.threads)
    for d in divisors(D)[1:]:
        chi = twisted_zeta_coefficients(lattice, kmax, Twist.CHI, d, ctx.threads)
        zeros = local_count(lattice, d)
        density = chi_density(gcd(d, symbol[0]), gcd(d, symbol[1]))
        start = twist_tail_start(lattice, d)
        tail = all(chi[k] * d.norm() ** 3 == zeros * alpha[k] for k in range(start, kmax + 1))
        ok = ok and tail and Fraction(zeros, d.norm() ** 3) == density
        notes.append(f"d={d}: N_d={zeros}, tail from k={start}")
    start = lattice.minima[2] + 2 * lattice.delta - 1
    psi_tail = all(psi[k] == psi_density(*symbol) * alpha[k] for k in range(start, kmax + 1))
    ok = ok and psi_tail
    return ok, "; ".join(notes)


@check("beta-limit", "beta_(delta+2m+1)/q^(3m) approaches the closed-form constant")
def check_beta_limit(ctx: VerifyContext) -> Outcome:
    q = 3
    D = _p("t", q)
    lattice = seed_lattice(q, D)
    symbol = _split(lattice, D)
    steps = 5 if ctx.full else 3
    delta = lattice.delta
    beta = beta_coefficients(lattice, delta + 2 * steps - 1, threads=ctx.threads)
    limit = beta_limit(q, D, symbol[0], symbol[1], 1)
    ratios = [Fraction(beta[delta + 2 * m + 1], q ** (3 * m)) for m in range(steps)]
    deviations = [abs(r - limit) / limit for r in ratios]
    ok = _decreasing(deviations) and deviations[-1] < Fraction(5, 100)
    return ok, f"limit {limit}, last ratio {ratios[-1]} ({float(deviations[-1]):.2e} off)"


# --- Psi_D and L-value sums ------------------------------------------------------------


@check("psi-series", "the generating function of Psi_D(k, l) matches direct enumeration")
def check_psi_series(ctx: VerifyContext) -> Outcome:
    cases = [(3, "t", 6)]
    if ctx.full:
        cases = [(q, text, 8) for q in (3, 5) for text in ("t", "t^2+t")]
    ok = True
    notes = []
    for q, text, n in cases:
        D = _p(text, q)
        table = psi_series(D, n)
        pairs = [(k, l) for k in range(n + 1) for l in range(n + 1 - k)]
        counted = ordered_map(lambda kl: psi_count_enumerate(D, *kl), pairs, ctx.threads)
        good = all(table[k][l] == c for (k, l), c in zip(pairs, counted))
        ok = ok and good
        notes.append(f"q={q} D={D}: {len(pairs)} coefficients")
    return ok, "; ".join(notes)


@check("l-sum-identity", "the sum of L(1, chi_Dm) over deg m = l splits into Psi and tail parts")
def check_l_sum_identity(ctx: VerifyContext) -> Outcome:
    D = _p("t", 3)
    ls = (2, 3, 4) if ctx.full else (2, 3)
    results = [sum_l_values(D, l, ctx.threads) for l in ls]
    ok = all(r.identity_holds for r in results)
    return ok, "; ".join(f"l={r.l}: {r.total}" for r in results)


@check("l-average", "normalized L-value averages approach M_D(2)zeta(2)/(M_D(3)zeta(3))")
def check_l_average(ctx: VerifyContext) -> Outcome:
    q = 3
    D = _p("t", q)
    ls = (2, 4, 6, 8) if ctx.full else (2, 4)
    limit = normalized_l_average_limit(q, D)
    results = [sum_l_values(D, l, ctx.threads) for l in ls]
    deviations = [abs(r.normalized_average - limit) / limit for r in results]
    ok = _decreasing(deviations) and all(r.rh_violations == 0 for r in results)
    if ctx.full:
        ok = ok and deviations[-1] < Fraction(10, 100)
    checked = sum(r.rh_checked for r in results)
    return ok, f"limit {limit}, last deviation {float(deviations[-1]):.2e}, RH bound on {checked} m"


@check("class-number-relation", "h(b) = L(1, chi_b) |b|^(1/2) / q^(1/2) and the Picard oracle agree")
def check_class_number_relation(ctx: VerifyContext) -> Outcome:
    q = 3
    corpus = [b for b in enumerate_all(q, 1)]
    cubic = [b for b in enumerate_all(q, 3) if is_squarefree(b)]
    corpus += cubic if ctx.full else cubic[:12]
    if ctx.full:
        corpus += [b for b in enumerate_all(q, 5) if is_squarefree(b)][:20]

    def one(b: Poly) -> bool:
        h = class_number(b)
        n = b.degree or 0
        via_l = l_polynomial(b).evaluate(Fraction(1, q)) * q ** ((n - 1) // 2)
        return via_l == h == picard_oracle(b)

    results = ordered_map(one, corpus, ctx.threads)
    return all(results), f"{sum(results)}/{len(results)} polynomials agree"


# --- Clifford orders and stabilizers ------------------------------------------------------


def _random_lattice(q: int, rng: np.random.Generator) -> TernaryLattice:
    while True:
        entries = [Poly(q, tuple(int(c) for c in rng.integers(0, q, size=3))) for _ in range(6)]
        a, b, c, d, e, f = entries
        try:
            return TernaryLattice(as_matrix([[a, d, e], [d, b, f], [e, f, c]]))
        except PreconditionError:
            continue


@check("clifford", "det C_0(L) = det(L)^2 and square roots of -aD exist exactly when R(L, a) > 0")
def check_clifford(ctx: VerifyContext) -> Outcome:
    rng = np.random.default_rng(ctx.seed)
    count = 100 if ctx.full else 20
    det_ok = sum(determinant_identity_holds(_random_lattice(3, rng)) for _ in range(count))
    ok = det_ok == count

    cases: List[Tuple[ClassList, Poly]] = []
    classes = genus_classes(3, _p("t", 3))
    values = ["1", "2", "t+1", "t+2", "t^2+1"]
    if ctx.full:
        classes_cubic = genus_classes(3, _p("t^3+2*t+2", 3), "exhaustive")
        cases = [(c, _p(v, 3)) for c in (classes, classes_cubic) for v in values[:3]]
        cases += [(classes_cubic, _p(v, 3)) for v in values[3:]]
    else:
        cases = [(classes, _p(v, 3)) for v in values]
    agree = 0
    pairs = 0
    for class_list, a in cases:
        D = class_list.representatives[0].det
        for lattice in class_list.representatives:
            pairs += 1
            found = primitive_sqrt_search(even_clifford(lattice), -(a * D))
            represented = representation_count(lattice, a, threads=ctx.threads) > 0
            if found.status is not SqrtStatus.UNKNOWN and represented == (found.status is SqrtStatus.FOUND):
                agree += 1
    ok = ok and agree == pairs
    return ok, f"det identity {det_ok}/{count}, square roots {agree}/{pairs}"


@check("stabilizers", "SO(L)-orbits on primitive representations have size |SO| (|SO|/2 for units)")
def check_stabilizers(ctx: VerifyContext) -> Outcome:
    class_lists = [genus_classes(3, _p("t", 3))]
    if ctx.full:
        class_lists.append(genus_classes(3, _p("t^3+2*t+2", 3), "exhaustive"))
    ok = True
    orbits = 0
    for classes in class_lists:
        for lattice, n in zip(classes.representatives, classes.so_orders):
            for text in ("1", "t+1", "t^2+1"):
                a = _p(text, 3)
                expected = n // 2 if a.degree == 0 else n
                sizes = orbit_sizes(lattice, a)
                orbits += len(sizes)
                ok = ok and all(s == expected for s in sizes)
    return ok, f"{orbits} orbits checked"


# --- running -----------------------------------------------------------------------------


def run_check(item: Check, ctx: VerifyContext) -> CheckResult:
    started = time.perf_counter()
    try:
        ok, detail = item.run(ctx)
    except TernaryError as e:
        ok, detail = False, f"error[{e.code}]: {e}"
    elapsed = time.perf_counter() - started
    status = Status.PASS if ok else Status.FAIL
    logger.info("%s %s in %.2fs", item.name, status.value, elapsed)
    return CheckResult(item.name, status, detail, elapsed)


def run_suite(
    suite: str = "fast",
    seed: int = 0,
    threads: int = 1,
    progress: Optional[Callable[[CheckResult], None]] = None,
) -> List[CheckResult]:
    if suite not in SUITES:
        raise PreconditionError(f"suite must be one of {', '.join(SUITES)}, got {suite!r}")
    ctx = VerifyContext(suite == "all", seed, threads)
    results = []
    for item in CHECKS:
        result = run_check(item, ctx)
        if progress is not None:
            progress(result)
        results.append(result)
    return results
