"""Exact p-adic arithmetic with explicit precision tracking.

The numbers here are finite approximations: a nonzero element is stored as

    x = p^v * u   with  u a unit known modulo p^(M - v),

so ``M`` is the *absolute* precision cap: digits of p^i are known exactly for
v <= i < M and are never reported beyond that.  A second state, "zero at
precision M", represents any element congruent to 0 modulo p^M.

Precision propagates pessimistically through arithmetic:

    M(a + b) = min(M_a, M_b)
    M(a * b) = min(M_a + v_b, M_b + v_a)
    M(1 / a) = M_a - 2 v_a          (relative precision is preserved)

Quadratic extensions are handled by :class:`QuadExtElement`: pairs (x, y)
representing x + y*beta where beta^2 = s*beta - t.  The two cases needed in
practice are unramified extensions (residue degree 2, e.g. beta = sqrt(2)
over the 3-adics) and ramified ones (beta^2 = -p, valuation 1/2).

:class:`FrobeniusPair` packages the roots of x^2 - a_p x + p, ordered so that
v(beta) <= v(beta_bar); the ordinary case Hensel-lifts the unit root inside
the base field, the supersingular case works in the quadratic extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpq, mpz

__all__ = [
    "PadicNumber",
    "Extension",
    "QuadExtElement",
    "FrobeniusPair",
    "teichmuller",
    "ramification_constant",
]


class PrecisionError(ValueError):
    """Raised when an operation would need digits beyond the known precision."""


def _valuation(n: mpz, p: int) -> int:
    """Exact p-adic valuation of a nonzero integer."""
    _, e = gmpy2.remove(mpz(n), p)
    return int(e)


class PadicNumber:
    """An element of Q_p known to finite absolute precision.

    Immutable.  ``unit`` is None exactly when the element is
    indistinguishable from zero modulo p^precision.
    """

    __slots__ = ("p", "valuation", "unit", "precision")

    def __init__(self, p: int, valuation: int | None, unit, precision: int):
        if p < 2 or not gmpy2.is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        self.p = p
        self.precision = int(precision)
        if unit is None:
            self.valuation = None
            self.unit = None
            return
        unit = mpz(unit)
        valuation = int(valuation)
        if precision <= valuation:
            # Not a single digit is known: this is zero-at-precision.
            self.valuation = None
            self.unit = None
            return
        unit %= mpz(p) ** (precision - valuation)
        if unit == 0:
            self.valuation = None
            self.unit = None
            return
        shift = _valuation(unit, p)
        if shift:
            valuation += shift
            unit //= mpz(p) ** shift
            unit %= mpz(p) ** (self.precision - valuation)
        self.valuation = valuation
        self.unit = unit

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, p: int, precision: int) -> "PadicNumber":
        return cls(p, None, None, precision)

    @classmethod
    def from_rational(cls, x, p: int, precision: int) -> "PadicNumber":
        """Embed an exact rational (int / Fraction / mpq) to precision p^M."""
        if hasattr(x, "numerator"):
            # mpq() rejects Fraction objects whose parts are mpz, so
            # normalize through the numerator/denominator protocol.
            x = mpq(int(x.numerator), int(x.denominator))
        else:
            x = mpq(x)
        if x == 0:
            return cls.zero(p, precision)
        num, den = mpz(x.numerator), mpz(x.denominator)
        v = _valuation(num, p) - _valuation(den, p)
        num //= mpz(p) ** max(_valuation(num, p), 0)
        den //= mpz(p) ** max(_valuation(den, p), 0)
        if precision <= v:
            return cls.zero(p, precision)
        modulus = mpz(p) ** (precision - v)
        unit = num * gmpy2.invert(den, modulus) % modulus
        return cls(p, v, unit, precision)

    # -- basic queries ----------------------------------------------------

    def is_zero(self) -> bool:
        """True when the element is 0 modulo p^precision."""
        return self.unit is None

    def valuation_lower_bound(self) -> int:
        """v(x) for nonzero x, else the precision cap (all that is known)."""
        return self.precision if self.unit is None else self.valuation

    def digit(self, i: int) -> int:
        """Digit of p^i.  Defined for i < precision only."""
        if i >= self.precision:
            raise PrecisionError(
                f"digit p^{i} requested but precision cap is p^{self.precision}"
            )
        if self.unit is None or i < self.valuation:
            return 0
        return int((self.unit // mpz(self.p) ** (i - self.valuation)) % self.p)

    def digit_string(self) -> str:
        """Render as '...d_k...d_1d_0.d_-1...' with ascending powers rightward."""
        if self.unit is None:
            return f"O({self.p}^{self.precision})"
        lo = min(self.valuation, 0)
        digits = [str(self.digit(i)) for i in range(lo, self.precision)]
        digits.reverse()  # highest power first
        if self.valuation < 0:
            head, frac = digits[: self.precision], digits[self.precision :]
            return "..." + "".join(head) + "." + "".join(frac)
        return "..." + "".join(digits)

    def lift(self) -> mpq:
        """The canonical rational representative p^v * unit (0 for zero)."""
        if self.unit is None:
            return mpq(0)
        return mpq(self.unit) * mpq(self.p) ** self.valuation

    def congruent(self, other: "PadicNumber") -> bool:
        """Do the two elements agree modulo p^min(precisions)?"""
        if self.p != other.p:
            return False
        diff = self - other
        return diff.is_zero()

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return other
        # Exact scalars enter with enough headroom never to limit precision.
        if hasattr(other, "numerator"):
            # mpq() rejects Fraction objects whose parts are mpz; normalize
            # through the numerator/denominator protocol.
            x = mpq(int(other.numerator), int(other.denominator))
        else:
            x = mpq(other)
        if x == 0:
            return PadicNumber.zero(self.p, self.precision + 1)
        v = _valuation(mpz(x.numerator), self.p) - _valuation(
            mpz(x.denominator), self.p
        )
        return PadicNumber.from_rational(
            x, self.p, self.precision + max(-v, 0) + abs(v) + 1
        )

    def __add__(self, other) -> "PadicNumber":
        other = self._coerce(other)
        prec = min(self.precision, other.precision)
        if self.unit is None and other.unit is None:
            return PadicNumber.zero(self.p, prec)
        if self.unit is None:
            return PadicNumber(self.p, other.valuation, other.unit, prec)
        if other.unit is None:
            return PadicNumber(self.p, self.valuation, self.unit, prec)
        v = min(self.valuation, other.valuation)
        if prec <= v:
            return PadicNumber.zero(self.p, prec)
        modulus = mpz(self.p) ** (prec - v)
        total = (
            self.unit * mpz(self.p) ** (self.valuation - v)
            + other.unit * mpz(self.p) ** (other.valuation - v)
        ) % modulus
        return PadicNumber(self.p, v, total, prec)

    __radd__ = __add__

    def __neg__(self) -> "PadicNumber":
        if self.unit is None:
            return self
        modulus = mpz(self.p) ** (self.precision - self.valuation)
        return PadicNumber(self.p, self.valuation, modulus - self.unit, self.precision)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "PadicNumber":
        other = self._coerce(other)
        va = self.valuation_lower_bound()
        vb = other.valuation_lower_bound()
        if self.unit is None or other.unit is None:
            # Product is zero to the best provable precision.
            return PadicNumber.zero(self.p, va + vb)
        prec = min(self.precision + vb, other.precision + va)
        v = va + vb
        if prec <= v:
            return PadicNumber.zero(self.p, prec)
        modulus = mpz(self.p) ** (prec - v)
        return PadicNumber(self.p, v, self.unit * other.unit % modulus, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.unit is None:
            raise ZeroDivisionError("inverse of zero-at-precision")
        prec = self.precision - 2 * self.valuation
        modulus = mpz(self.p) ** (self.precision - self.valuation)
        return PadicNumber(self.p, -self.valuation, gmpy2.invert(self.unit, modulus), prec)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "PadicNumber":
        if n < 0:
            return self.inverse() ** (-n)
        result = PadicNumber.from_rational(1, self.p, self.precision + abs(self.valuation_lower_bound()) * n + 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- dunder plumbing --------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, PadicNumber):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
            return self.congruent(other)
        return (
            self.p == other.p
            and self.precision == other.precision
            and self.valuation == other.valuation
            and self.unit == other.unit
        )

    def __hash__(self):
        return hash((self.p, self.precision, self.valuation, self.unit))

    def __str__(self) -> str:
        return f"{self.digit_string()}_{self.p}"

    def __repr__(self) -> str:
        return f"PadicNumber({self.p}, {self.digit_string()!r}, prec={self.precision})"


@dataclass(frozen=True)
class Extension:
    """A quadratic extension Q_p(beta) presented by beta^2 = s*beta - t."""

    p: int
    s: int
    t: int

    @property
    def disc(self) -> int:
        return self.s * self.s - 4 * self.t

    @property
    def ramification_degree(self) -> int:
        v = _valuation(mpz(self.disc), self.p) if self.disc else 0
        return 2 if v % 2 == 1 else 1

    @property
    def residue_degree(self) -> int:
        return 1 if self.ramification_degree == 2 else 2

    @property
    def beta_valuation(self) -> Fraction:
        """v(beta): 0 in the unramified case, 1/2 when beta uniformizes."""
        return Fraction(1, 2) if self.ramification_degree == 2 else Fraction(0)


class QuadExtElement:
    """x + y*beta with x, y in Q_p and beta^2 = s*beta - t."""

    __slots__ = ("ext", "x", "y")

    def __init__(self, ext: Extension, x: PadicNumber, y: PadicNumber):
        if x.p != ext.p or y.p != ext.p:
            raise ValueError("component prime differs from extension prime")
        self.ext = ext
        self.x = x
        self.y = y

    @classmethod
    def from_pair(cls, ext: Extension, x, y, precision: int) -> "QuadExtElement":
        return cls(
            ext,
            PadicNumber.from_rational(x, ext.p, precision),
            PadicNumber.from_rational(y, ext.p, precision),
        )

    @property
    def precision(self) -> int:
        return min(self.x.precision, self.y.precision)

    def is_zero(self) -> bool:
        return self.x.is_zero() and self.y.is_zero()

    def valuation(self) -> Fraction:
        """min over the basis {1, beta}; Fraction to allow half-integers."""
        vx = Fraction(self.x.valuation_lower_bound())
        vy = Fraction(self.y.valuation_lower_bound()) + self.ext.beta_valuation
        return min(vx, vy)

    def conjugate(self) -> "QuadExtElement":
        """The nontrivial automorphism beta |-> s - beta."""
        return QuadExtElement(self.ext, self.x + self.ext.s * self.y, -self.y)

    def _coerce(self, other) -> "QuadExtElement":
        if isinstance(other, QuadExtElement):
            if other.ext != self.ext:
                raise ValueError("mixed extensions")
            return other
        if isinstance(other, PadicNumber):
            return QuadExtElement(self.ext, other, PadicNumber.zero(self.ext.p, other.precision))
        return QuadExtElement.from_pair(self.ext, other, 0, self.precision + 2)

    def __add__(self, other) -> "QuadExtElement":
        other = self._coerce(other)
        return QuadExtElement(self.ext, self.x + other.x, self.y + other.y)

    __radd__ = __add__

    def __neg__(self) -> "QuadExtElement":
        return QuadExtElement(self.ext, -self.x, -self.y)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "QuadExtElement":
        other = self._coerce(other)
        s, t = self.ext.s, self.ext.t
        x1, y1, x2, y2 = self.x, self.y, other.x, other.y
        return QuadExtElement(
            self.ext,
            x1 * x2 - t * (y1 * y2),
            x1 * y2 + x2 * y1 + s * (y1 * y2),
        )

    __rmul__ = __mul__

    def norm(self) -> PadicNumber:
        """x*conj(x); the beta-coordinate of the product vanishes identically."""
        prod = self * self.conjugate()
        if not prod.y.is_zero():
            raise AssertionError("norm acquired a beta-component")
        return prod.x

    def inverse(self) -> "QuadExtElement":
        n = self.norm().inverse()
        conj = self.conjugate()
        return QuadExtElement(self.ext, conj.x * n, conj.y * n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __pow__(self, n: int) -> "QuadExtElement":
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadExtElement.from_pair(self.ext, 1, 0, self.precision + 2)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuadExtElement):
            return NotImplemented
        return self.ext == other.ext and self.x == other.x and self.y == other.y

    def __repr__(self) -> str:
        return f"({self.x.digit_string()}) + ({self.y.digit_string()})*beta  [beta^2={self.ext.s}*beta-{self.ext.t}, p={self.ext.p}]"


class FrobeniusPair:
    """The roots beta, beta_bar of x^2 - a_p x + p, ordered v(beta) <= v(beta_bar).

    Enforces the Weil bound |a_p| <= 2 sqrt(p).  When v_p(a_p) = 0 the
    polynomial splits over Q_p and beta is the Hensel lift of a_p mod p (a
    plain :class:`PadicNumber`); otherwise both roots have valuation 1/2 and
    live in the ramified extension with beta^2 = a_p beta - p, returned as
    :class:`QuadExtElement` values.
    """

    def __init__(self, a_p: int, p: int, precision: int):
        if a_p * a_p > 4 * p:
            raise ValueError(f"|a_p|={abs(a_p)} violates the Weil bound for p={p}")
        self.a_p = int(a_p)
        self.p = int(p)
        self.precision = int(precision)
        self.split = a_p % p != 0
        if self.split:
            self.extension = None
            self.beta = self._hensel_unit_root(precision)
            self.beta_bar = PadicNumber.from_rational(p, p, precision + 1) / self.beta
            self.beta_valuation = Fraction(0)
            self.beta_bar_valuation = Fraction(1)
        else:
            self.extension = Extension(p, a_p, p)
            x0 = PadicNumber.zero(p, precision)
            y1 = PadicNumber.from_rational(1, p, precision)
            self.beta = QuadExtElement(self.extension, x0, y1)
            self.beta_bar = self.beta.conjugate()
            self.beta_valuation = Fraction(1, 2)
            self.beta_bar_valuation = Fraction(1, 2)

    def _hensel_unit_root(self, precision: int) -> PadicNumber:
        p, a = mpz(self.p), mpz(self.a_p)
        x = a % p
        known = 1
        while known < precision:
            known = min(2 * known, precision)
            modulus = p**known
            fx = (x * x - a * x + p) % modulus
            dfx = (2 * x - a) % modulus
            x = (x - fx * gmpy2.invert(dfx, modulus)) % modulus
        root = PadicNumber(self.p, 0, x, precision)
        assert (root * root - self.a_p * root + self.p).is_zero()
        return root


def teichmuller(x, p: int | None = None, precision: int | None = None):
    """The Teichmuller representative: the limit of x^(q^n) with q = p^d.

    Accepts a unit :class:`PadicNumber` (d = 1), a unit
    :class:`QuadExtElement` of an unramified extension (d = 2), or a plain
    integer together with ``p`` and ``precision``.  The result w satisfies
    w^q = w and w = x mod p.
    """
    if isinstance(x, int):
        if p is None or precision is None:
            raise TypeError("integer input needs p and precision")
        x = PadicNumber.from_rational(x, p, precision)
    if isinstance(x, PadicNumber):
        if x.is_zero():
            return x
        if x.valuation != 0:
            raise ValueError("teichmuller needs a unit")
        q = x.p
        cap = x.precision
    elif isinstance(x, QuadExtElement):
        if x.valuation() != 0:
            raise ValueError("teichmuller needs a unit")
        if x.ext.ramification_degree != 1:
            raise ValueError("teichmuller in extensions needs the unramified case")
        q = x.ext.p ** x.ext.residue_degree
        cap = x.precision
    else:
        raise TypeError(f"unsupported type {type(x).__name__}")
    current = x
    for _ in range(cap + 2):
        nxt = current**q
        if nxt == current:
            return current
        current = nxt
    raise AssertionError("teichmuller iteration failed to stabilize")


def ramification_constant(e: int, p: int) -> Fraction:
    """Precision-loss constant c_e for ramification degree e over the p-adics.

    c_e = 1/e for small e (e <= log p), otherwise the analytic bound
    (1 - log e + log log p)/log p, rounded down at 10^-6 granularity so the
    returned rational is always a safe (weakly smaller) bound.  e = 1 gives 1.
    """
    if e < 1:
        raise ValueError("ramification degree must be positive")
    if e == 1:
        return Fraction(1)
    if e <= math.log(p):
        return Fraction(1, e)
    value = (-math.log(e) + 1 + math.log(math.log(p))) / math.log(p)
    return Fraction(math.floor(value * 10**6), 10**6)
