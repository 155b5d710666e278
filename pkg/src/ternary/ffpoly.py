"""Exact arithmetic in F_q and in A = F_q[t] for an odd prime q.

Polynomials are immutable and stored as tuples of residues, lowest degree
first. The zero polynomial has ``degree`` ``None``.
"""

import itertools
import re
import threading
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from src.ternary.errors import (
    InvariantViolation,
    ModulusMismatchError,
    PolynomialFormatError,
    PreconditionError,
)
from src.ternary.settings import validate_modulus

IntLike = Union[int, "FieldElement"]


# --- raw coefficient-list helpers -------------------------------------------


def _strip(c: List[int]) -> List[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _add(a: Sequence[int], b: Sequence[int], q: int) -> List[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] = (out[i] + x) % q
    return _strip(out)


def _sub(a: Sequence[int], b: Sequence[int], q: int) -> List[int]:
    n = max(len(a), len(b))
    out = [0] * n
    for i, x in enumerate(a):
        out[i] = x
    for i, x in enumerate(b):
        out[i] = (out[i] - x) % q
    return _strip(out)


def _mul(a: Sequence[int], b: Sequence[int], q: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _strip([c % q for c in out])


def _divmod(a: Sequence[int], b: Sequence[int], q: int) -> Tuple[List[int], List[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    db = len(b) - 1
    if len(rem) - 1 < db:
        return [], _strip(rem)
    inv = pow(b[-1], q - 2, q)
    quot = [0] * (len(rem) - db)
    for i in range(len(rem) - 1, db - 1, -1):
        c = rem[i] * inv % q
        if c:
            quot[i - db] = c
            for j in range(db + 1):
                rem[i - db + j] = (rem[i - db + j] - c * b[j]) % q
    return _strip(quot), _strip(rem[:db])


def _mod(a: Sequence[int], b: Sequence[int], q: int) -> List[int]:
    return _divmod(a, b, q)[1]


def _monic(a: Sequence[int], q: int) -> List[int]:
    if not a or a[-1] == 1:
        return list(a)
    inv = pow(a[-1], q - 2, q)
    return [x * inv % q for x in a]


def _gcd(a: Sequence[int], b: Sequence[int], q: int) -> List[int]:
    a, b = list(a), list(b)
    while b:
        a, b = b, _mod(a, b, q)
    return _monic(a, q)


def _powmod(a: Sequence[int], n: int, m: Sequence[int], q: int) -> List[int]:
    result = [1] if len(m) > 1 else []
    base = _mod(a, m, q)
    while n:
        if n & 1:
            result = _mod(_mul(result, base, q), m, q)
        n >>= 1
        if n:
            base = _mod(_mul(base, base, q), m, q)
    return result


# --- F_q ----------------------------------------------------------------------


def legendre_q(c: int, q: int) -> int:
    """Legendre symbol of the residue ``c`` modulo the prime ``q``."""
    c %= q
    if c == 0:
        return 0
    return 1 if pow(c, (q - 1) // 2, q) == 1 else -1


def smallest_nonsquare(q: int) -> int:
    """The least nonsquare residue modulo ``q`` (the epsilon of the seed forms)."""
    for c in range(2, q):
        if legendre_q(c, q) == -1:
            return c
    raise PreconditionError(f"no nonsquare modulo {q}")


@dataclass(frozen=True)
class FieldElement:
    value: int
    q: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", self.value % self.q)

    def _coerce(self, other: IntLike) -> int:
        if isinstance(other, FieldElement):
            if other.q != self.q:
                raise ModulusMismatchError(f"cannot combine F_{self.q} and F_{other.q}")
            return other.value
        return int(other)

    def __add__(self, other: IntLike) -> "FieldElement":
        return FieldElement(self.value + self._coerce(other), self.q)

    __radd__ = __add__

    def __sub__(self, other: IntLike) -> "FieldElement":
        return FieldElement(self.value - self._coerce(other), self.q)

    def __rsub__(self, other: IntLike) -> "FieldElement":
        return FieldElement(self._coerce(other) - self.value, self.q)

    def __mul__(self, other: IntLike) -> "FieldElement":
        return FieldElement(self.value * self._coerce(other), self.q)

    __rmul__ = __mul__

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.value, self.q)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        return FieldElement(pow(self.value, self.q - 2, self.q), self.q)

    def __truediv__(self, other: IntLike) -> "FieldElement":
        return self * FieldElement(self._coerce(other), self.q).inverse()

    def __pow__(self, n: int) -> "FieldElement":
        if n < 0:
            return self.inverse() ** (-n)
        return FieldElement(pow(self.value, n, self.q), self.q)

    def legendre(self) -> int:
        return legendre_q(self.value, self.q)

    def is_square(self) -> bool:
        return self.legendre() >= 0

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return str(self.value)


# --- F_q[t] -------------------------------------------------------------------

PolyLike = Union["Poly", int]

_TERM_RE = re.compile(r"^(?:(\d+)\*?)?t(?:\^(\d+))?$|^(\d+)$")


@dataclass(frozen=True)
class Poly:
    """A polynomial over F_q, coefficients lowest degree first."""

    q: int
    coeffs: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        q = self.q
        object.__setattr__(self, "coeffs", tuple(_strip([int(c) % q for c in self.coeffs])))

    # construction

    @classmethod
    def _raw(cls, q: int, coeffs: Sequence[int]) -> "Poly":
        p = object.__new__(cls)
        object.__setattr__(p, "q", q)
        object.__setattr__(p, "coeffs", tuple(coeffs))
        return p

    @classmethod
    def zero(cls, q: int) -> "Poly":
        return cls._raw(q, ())

    @classmethod
    def constant(cls, q: int, c: int) -> "Poly":
        return cls(q, (c,))

    @classmethod
    def one(cls, q: int) -> "Poly":
        return cls._raw(q, (1,))

    @classmethod
    def monomial(cls, q: int, k: int, c: int = 1) -> "Poly":
        return cls(q, (0,) * k + (c,))

    @classmethod
    def t(cls, q: int) -> "Poly":
        return cls._raw(q, (0, 1))

    @classmethod
    def parse(cls, text: str, q: int) -> "Poly":
        """Parse ``"t^3+2*t+1"`` or the coefficient list ``"1,2,0,1"``."""
        validate_modulus(q)
        s = "".join(str(text).split())
        if not s:
            raise PolynomialFormatError("empty polynomial")
        if "," in s:
            try:
                return cls(q, tuple(int(c) for c in s.split(",")))
            except ValueError as e:
                raise PolynomialFormatError(f"ill-formed coefficient list {text!r}") from e
        terms = re.findall(r"([+-]?)([^+-]+)", s)
        if "".join(sign + term for sign, term in terms) != s:
            raise PolynomialFormatError(f"ill-formed polynomial {text!r}")
        coeffs: Dict[int, int] = {}
        for sign, term in terms:
            m = _TERM_RE.match(term)
            if m is None:
                raise PolynomialFormatError(f"ill-formed term {term!r} in {text!r}")
            if m.group(3) is not None:
                c, k = int(m.group(3)), 0
            else:
                c = int(m.group(1)) if m.group(1) else 1
                k = int(m.group(2)) if m.group(2) else 1
            coeffs[k] = coeffs.get(k, 0) + (-c if sign == "-" else c)
        top = max(coeffs)
        return cls(q, tuple(coeffs.get(k, 0) for k in range(top + 1)))

    # basic properties

    @property
    def degree(self) -> Optional[int]:
        return len(self.coeffs) - 1 if self.coeffs else None

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def leading_coefficient(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_monic(self) -> bool:
        return self.leading_coefficient == 1

    def norm(self) -> int:
        """|f| = q^deg f."""
        if not self.coeffs:
            raise PreconditionError("|0| is undefined")
        return self.q ** (len(self.coeffs) - 1)

    def coefficient(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    # arithmetic

    def _other(self, other: PolyLike) -> Tuple[int, ...]:
        if isinstance(other, Poly):
            if other.q != self.q:
                raise ModulusMismatchError(f"cannot combine polynomials over F_{self.q} and F_{other.q}")
            return other.coeffs
        if isinstance(other, FieldElement):
            other = other.value
        c = int(other) % self.q
        return (c,) if c else ()

    def __add__(self, other: PolyLike) -> "Poly":
        return Poly._raw(self.q, _add(self.coeffs, self._other(other), self.q))

    __radd__ = __add__

    def __sub__(self, other: PolyLike) -> "Poly":
        return Poly._raw(self.q, _sub(self.coeffs, self._other(other), self.q))

    def __rsub__(self, other: PolyLike) -> "Poly":
        return Poly._raw(self.q, _sub(self._other(other), self.coeffs, self.q))

    def __neg__(self) -> "Poly":
        return Poly._raw(self.q, [(-c) % self.q for c in self.coeffs])

    def __mul__(self, other: PolyLike) -> "Poly":
        return Poly._raw(self.q, _mul(self.coeffs, self._other(other), self.q))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise PreconditionError("negative powers are not polynomials")
        result = Poly.one(self.q)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __divmod__(self, other: PolyLike) -> Tuple["Poly", "Poly"]:
        b = self._other(other)
        if not b:
            raise PreconditionError("polynomial division by zero")
        quot, rem = _divmod(self.coeffs, b, self.q)
        return Poly._raw(self.q, quot), Poly._raw(self.q, rem)

    def __floordiv__(self, other: PolyLike) -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: PolyLike) -> "Poly":
        return divmod(self, other)[1]

    def exact_div(self, other: PolyLike) -> "Poly":
        """Divide, insisting the remainder is zero."""
        quot, rem = divmod(self, other)
        if not rem.is_zero():
            raise PreconditionError(f"{other} does not divide {self}")
        return quot

    def divides(self, other: "Poly") -> bool:
        return (other % self).is_zero()

    def monic(self) -> "Poly":
        return Poly._raw(self.q, _monic(self.coeffs, self.q))

    def scale(self, c: int) -> "Poly":
        return self * c

    def shift(self, k: int) -> "Poly":
        """Multiply by t^k."""
        if not self.coeffs:
            return self
        return Poly._raw(self.q, (0,) * k + self.coeffs)

    def derivative(self) -> "Poly":
        return Poly(self.q, tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def evaluate(self, x: IntLike) -> FieldElement:
        x = int(x)
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.q
        return FieldElement(acc, self.q)

    __call__ = evaluate

    def powmod(self, n: int, modulus: "Poly") -> "Poly":
        if modulus.is_zero():
            raise PreconditionError("modulus must be nonzero")
        return Poly._raw(self.q, _powmod(self.coeffs, n, self._other(modulus), self.q))

    # text forms

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            if k == 0:
                parts.append(str(c))
            else:
                mono = "t" if k == 1 else f"t^{k}"
                parts.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(parts)

    def __repr__(self) -> str:
        return f"Poly(q={self.q}, {self})"

    def to_coefficient_list(self) -> str:
        return ",".join(str(c) for c in self.coeffs) if self.coeffs else "0"

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Degree first, then coefficients from the top down."""
        return (len(self.coeffs), tuple(reversed(self.coeffs)))


def check_same_field(*polys: Poly) -> int:
    qs = {p.q for p in polys}
    if len(qs) > 1:
        raise ModulusMismatchError(f"polynomials over different fields: {sorted(qs)}")
    return qs.pop()


def gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd (zero only when both inputs are zero)."""
    q = check_same_field(f, g)
    return Poly._raw(q, _gcd(f.coeffs, g.coeffs, q))


def xgcd(f: Poly, g: Poly) -> Tuple[Poly, Poly, Poly]:
    """Return ``(d, s, u)`` with ``d = s*f + u*g`` and ``d`` monic."""
    q = check_same_field(f, g)
    r0, r1 = f, g
    s0, s1 = Poly.one(q), Poly.zero(q)
    u0, u1 = Poly.zero(q), Poly.one(q)
    while not r1.is_zero():
        quot, rem = divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, s0 - quot * s1
        u0, u1 = u1, u0 - quot * u1
    if r0.is_zero():
        return r0, s0, u0
    inv = pow(r0.leading_coefficient, q - 2, q)
    return r0 * inv, s0 * inv, u0 * inv


def inverse_mod(a: Poly, m: Poly) -> Poly:
    d, s, _ = xgcd(a % m, m)
    if d.degree != 0:
        raise PreconditionError(f"{a} is not invertible modulo {m}")
    return s % m


def crt(residues: Sequence[Poly], moduli: Sequence[Poly]) -> Poly:
    """Chinese remainder for pairwise coprime moduli."""
    q = check_same_field(*moduli)
    x, m = Poly.zero(q), Poly.one(q)
    for r, n in zip(residues, moduli):
        k = ((r - x) * inverse_mod(m, n)) % n
        x, m = x + m * k, m * n
    return x % m


# --- enumeration ----------------------------------------------------------------


def _digits(n: int, q: int, k: int) -> List[int]:
    out = []
    for _ in range(k):
        n, d = divmod(n, q)
        out.append(d)
    return out


def enumerate_below(q: int, k: int) -> Iterator[Poly]:
    """All q^k polynomials of degree < k, zero first, constant coefficient fastest."""
    for n in range(q**k):
        yield Poly._raw(q, _strip(_digits(n, q, k)))


def enumerate_monic(q: int, k: int) -> Iterator[Poly]:
    """The q^k monic polynomials of degree exactly ``k``, constant coefficient fastest."""
    if k < 0:
        raise PreconditionError(f"degree must be >= 0, got {k}")
    for n in range(q**k):
        yield Poly._raw(q, _digits(n, q, k) + [1])


def enumerate_all(q: int, k: int) -> Iterator[Poly]:
    """The (q-1)q^k polynomials of degree exactly ``k``; leading coefficient varies slowest."""
    if k < 0:
        raise PreconditionError(f"degree must be >= 0, got {k}")
    for lead in range(1, q):
        for n in range(q**k):
            yield Poly._raw(q, _digits(n, q, k) + [lead])


# --- irreducibility and factorization ---------------------------------------------

_irreducible_cache: Dict[Tuple[int, int], Tuple[Poly, ...]] = {}
_irreducible_lock = threading.Lock()


def irreducibles(q: int, k: int) -> Tuple[Poly, ...]:
    """Monic irreducibles of degree ``k``, in enumeration order (cached)."""
    table = _irreducible_cache.get((q, k))
    if table is not None:
        return table
    with _irreducible_lock:
        return _build_irreducibles(q, k)


def _build_irreducibles(q: int, k: int) -> Tuple[Poly, ...]:
    # sieve: a degree-k monic is irreducible iff no prime of degree <= k/2 divides it
    table = _irreducible_cache.get((q, k))
    if table is None:
        smaller = [p.coeffs for j in range(1, k // 2 + 1) for p in _build_irreducibles(q, j)]
        table = tuple(
            f for f in enumerate_monic(q, k)
            if k >= 1 and all(_mod(f.coeffs, p, q) for p in smaller)
        )
        _irreducible_cache[(q, k)] = table
    return table


def is_irreducible(f: Poly) -> bool:
    """Ben-Or test: gcd(t^(q^i) - t, f) = 1 for every i <= deg f / 2."""
    if f.is_zero():
        raise PreconditionError("is_irreducible(0) is undefined")
    n = f.degree or 0
    if n <= 0:
        return False
    q = f.q
    m = _monic(f.coeffs, q)
    x = [0, 1]
    power = x
    for _ in range(n // 2):
        power = _powmod(power, q, m, q)
        if _gcd(_sub(power, x, q), m, q) != [1]:
            return False
    return True


def factor(f: Poly) -> List[Tuple[Poly, int]]:
    """Monic irreducible factors with exponents, sorted by (degree, coefficients).

    The product of the factors times ``f.leading_coefficient`` is ``f``.
    """
    if f.is_zero():
        raise PreconditionError("cannot factor the zero polynomial")
    q = f.q
    rest = _monic(f.coeffs, q)
    out: List[Tuple[Poly, int]] = []
    k = 1
    while len(rest) - 1 >= 2 * k:
        for p in irreducibles(q, k):
            e = 0
            while True:
                quot, rem = _divmod(rest, p.coeffs, q)
                if rem:
                    break
                rest, e = quot, e + 1
            if e:
                out.append((p, e))
        k += 1
    if len(rest) > 1:
        out.append((Poly._raw(q, rest), 1))
    merged: Dict[Tuple[int, ...], List] = {}
    for p, e in out:
        if p.coeffs in merged:
            merged[p.coeffs][1] += e
        else:
            merged[p.coeffs] = [p, e]
    return sorted(((p, e) for p, e in merged.values()), key=lambda pe: pe[0].sort_key())


def prime_factors(f: Poly) -> List[Poly]:
    return [p for p, _ in factor(f)]


def is_squarefree(f: Poly) -> bool:
    if f.is_zero():
        raise PreconditionError("is_squarefree(0) is undefined")
    return all(e == 1 for _, e in factor(f))


def mobius(f: Poly) -> int:
    if f.is_zero() or not f.is_monic():
        raise PreconditionError(f"mobius needs a nonzero monic polynomial, got {f}")
    fac = factor(f)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def divisors(f: Poly) -> List[Poly]:
    """All monic divisors of ``f``, sorted by (degree, coefficients)."""
    q = f.q
    fac = factor(f)
    out = []
    for exps in itertools.product(*(range(e + 1) for _, e in fac)):
        d = Poly.one(q)
        for (p, _), k in zip(fac, exps):
            d = d * p**k
        out.append(d)
    return sorted(out, key=Poly.sort_key)


def squarefree_decomposition(f: Poly) -> Tuple[int, Poly, Poly]:
    """Write ``f = c * m0 * g^2`` with ``m0`` squarefree monic and ``g`` monic."""
    if f.is_zero():
        raise PreconditionError("squarefree decomposition of 0 is undefined")
    q = f.q
    m0, g = Poly.one(q), Poly.one(q)
    for p, e in factor(f):
        g = g * p ** (e // 2)
        if e % 2:
            m0 = m0 * p
    return f.leading_coefficient, m0, g


def is_square(f: Poly) -> bool:
    """Whether ``f`` is a square in A."""
    if f.is_zero():
        return True
    c, m0, _ = squarefree_decomposition(f)
    return m0.degree == 0 and legendre_q(c, f.q) == 1


# --- quadratic residue symbol -----------------------------------------------------


def _require_monic(a: Poly) -> None:
    if a.is_zero() or not a.is_monic():
        raise PreconditionError(f"the lower argument must be monic and nonzero, got {a}")


def jacobi(b: Poly, a: Poly) -> int:
    """The quadratic residue symbol (b/a) for monic ``a``, by reciprocity.

    For coprime monic a, b: (b/a) = (-1)^((q-1)/2 * deg a * deg b) (a/b), and a
    constant c contributes legendre(c)^deg a.
    """
    _require_monic(a)
    q = check_same_field(a, b)
    half = (q - 1) // 2
    result = 1
    x, y = list(a.coeffs), _mod(b.coeffs, a.coeffs, q)
    while True:
        if len(x) == 1:
            return result
        if not y:
            return 0
        c = y[-1]
        if c != 1:
            if legendre_q(c, q) == -1 and (len(x) - 1) % 2:
                result = -result
            y = _monic(y, q)
        if (half * (len(x) - 1) * (len(y) - 1)) % 2:
            result = -result
        x, y = y, _mod(x, y, q)


def jacobi_euler(b: Poly, a: Poly) -> int:
    """(b/a) from Euler's criterion on each prime factor of ``a``."""
    _require_monic(a)
    q = check_same_field(a, b)
    result = 1
    for p, e in factor(a):
        r = b.powmod((p.norm() - 1) // 2, p)
        if r.is_zero():
            return 0
        if r.degree != 0 or r.coeffs[0] not in (1, q - 1):
            raise InvariantViolation(f"Euler criterion produced {r} modulo {p}")
        if r.coeffs[0] == q - 1 and e % 2:
            result = -result
    return result
