"""Exact truncated q-expansions on fractional exponent lattices.

A :class:`QSeries` models a Laurent-type expansion

    f = sum a(x) q^x,   x in (1/den)*Z,  lead/den <= x < trunc/den,

with exact rational coefficients.  Coefficients below ``lead/den`` are
exactly zero, coefficients at or above ``trunc/den`` are unknown, and
asking for one raises :class:`PrecisionError`.  Every operation tracks
the knowledge window:

* products satisfy ``T(f*g) = min(T_f + lead_g, T_g + lead_f)``,
* ``U(m)`` divides the window by ``m`` and ``V(m)`` multiplies it,
* inverting a series with leading exponent ``L`` costs ``2L``,

mirroring the precision rules of :mod:`padicmaass.exactnum`.

Multiplication clears denominators, packs the two integer coefficient
arrays into single large integers (Kronecker substitution), performs one
GMP multiply, and recovers the signed digits by adding an offset that
recenters every limb into ``[0, 2^b)``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

import gmpy2
from gmpy2 import mpq, mpz

from .exactnum import PrecisionError

__all__ = [
    "QSeries",
    "divisor_sigma_list",
    "eisenstein4",
    "eisenstein6",
    "eisenstein2_difference",
    "euler_factor",
    "eta_quotient",
    "delta_series",
    "jfunction",
    "theta0",
]


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _as_mpq(x) -> mpq:
    if isinstance(x, (int, mpz)):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, type(mpq())):
        return x
    if isinstance(x, str):
        return mpq(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


# ---------------------------------------------------------------------------
# window-limited convolution
# ---------------------------------------------------------------------------

_SPARSE_LIMIT = 20_000


def _window_product(a: dict, b: dict, T: int) -> dict:
    """Convolution of two coefficient dicts, keeping keys below T."""
    if not a or not b:
        return {}
    if len(a) * len(b) <= _SPARSE_LIMIT:
        out: dict = {}
        for ka, va in a.items():
            for kb, vb in b.items():
                k = ka + kb
                if k < T:
                    out[k] = out.get(k, 0) + va * vb
        return out
    return _kronecker_product(a, b, T)


def _kronecker_product(a: dict, b: dict, T: int) -> dict:
    la, lb = min(a), min(b)
    W = T - la - lb
    if W <= 0:
        return {}
    wa = min(max(a) - la + 1, W)
    wb = min(max(b) - lb + 1, W)

    da = gmpy2.mpz(1)
    for v in a.values():
        da = gmpy2.lcm(da, v.denominator)
    db = gmpy2.mpz(1)
    for v in b.values():
        db = gmpy2.lcm(db, v.denominator)

    ints_a = [0] * wa
    for k, v in a.items():
        i = k - la
        if i < wa:
            ints_a[i] = int(v.numerator * (da // v.denominator))
    ints_b = [0] * wb
    for k, v in b.items():
        i = k - lb
        if i < wb:
            ints_b[i] = int(v.numerator * (db // v.denominator))

    bits_a = max(abs(x).bit_length() for x in ints_a)
    bits_b = max(abs(x).bit_length() for x in ints_b)
    overlap = min(len(a), len(b))
    bits = bits_a + bits_b + overlap.bit_length() + 2

    packed_a = gmpy2.pack([max(x, 0) for x in ints_a], bits) - gmpy2.pack(
        [max(-x, 0) for x in ints_a], bits
    )
    packed_b = gmpy2.pack([max(x, 0) for x in ints_b], bits) - gmpy2.pack(
        [max(-x, 0) for x in ints_b], bits
    )
    product = packed_a * packed_b

    n_out = wa + wb - 1
    ones = ((mpz(1) << (bits * n_out)) - 1) // ((mpz(1) << bits) - 1)
    recentered = product + (ones << (bits - 1))
    digits = gmpy2.unpack(recentered, bits)
    half = mpz(1) << (bits - 1)

    denom = da * db
    out: dict = {}
    for k in range(min(n_out, W)):
        c = (digits[k] if k < len(digits) else half) - half
        if c:
            out[la + lb + k] = mpq(c, denom)
    return out


# ---------------------------------------------------------------------------
# QSeries
# ---------------------------------------------------------------------------


class QSeries:
    """Truncated q-expansion with exact rational coefficients."""

    __slots__ = ("den", "lead", "trunc", "coeffs")

    def __init__(self, coeffs: dict, trunc, den: int = 1):
        den = int(den)
        trunc = int(trunc)
        if den < 1:
            raise ValueError("lattice denominator must be positive")
        clean: dict = {}
        for k, v in coeffs.items():
            q = _as_mpq(v)
            if not q:
                continue
            k = int(k)
            if k >= trunc:
                raise ValueError(f"coefficient at scaled exponent {k} lies beyond the window {trunc}")
            clean[k] = q
        if clean:
            g = den
            for k in clean:
                g = gcd(g, k)
                if g == 1:
                    break
        else:
            g = den
        if g > 1:
            clean = {k // g: v for k, v in clean.items()}
            trunc = _ceil_div(trunc, g)
            den //= g
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "lead", min(clean) if clean else trunc)

    def __setattr__(self, name, value):
        raise AttributeError("QSeries is immutable")

    # -- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        """True when every known coefficient vanishes."""
        return not self.coeffs

    def order(self) -> Fraction | None:
        """Leading exponent, or None when zero to the working window."""
        if not self.coeffs:
            return None
        return Fraction(self.lead, self.den)

    def window_bound(self) -> Fraction:
        """Exponent bound below which all coefficients are known."""
        return Fraction(self.trunc, self.den)

    def coefficient(self, x) -> mpq:
        """Coefficient of q^x; raises PrecisionError beyond the window."""
        fx = Fraction(x)
        scaled = fx * self.den
        if scaled >= self.trunc:
            raise PrecisionError(f"coefficient of q^{fx} is beyond the window q^{self.window_bound()}")
        if scaled.denominator != 1:
            return mpq(0)
        return self.coeffs.get(int(scaled), mpq(0))

    def exponents(self) -> list[Fraction]:
        """Sorted exponents with nonzero coefficient."""
        return [Fraction(k, self.den) for k in sorted(self.coeffs)]

    def principal_part(self) -> dict[Fraction, mpq]:
        """Coefficients at negative exponents."""
        return {Fraction(k, self.den): v for k, v in sorted(self.coeffs.items()) if k < 0}

    def constant_term(self) -> mpq:
        return self.coefficient(0)

    def items(self):
        """Sorted (exponent, coefficient) pairs, exponents as Fractions."""
        for k in sorted(self.coeffs):
            yield Fraction(k, self.den), self.coeffs[k]

    # -- ring operations ----------------------------------------------------

    def _aligned(self, other: "QSeries"):
        den = lcm(self.den, other.den)
        sa, sb = den // self.den, den // other.den
        return den, sa, sb

    def __add__(self, other):
        if not isinstance(other, QSeries):
            scalar = _as_mpq(other)
            if not scalar:
                return self
            if self.trunc <= 0:
                raise PrecisionError("window does not reach the constant term")
            merged = dict(self.coeffs)
            merged[0] = merged.get(0, mpq(0)) + scalar
            if not merged[0]:
                del merged[0]
            return QSeries(merged, self.trunc, self.den)
        den, sa, sb = self._aligned(other)
        trunc = min(self.trunc * sa, other.trunc * sb)
        merged = {}
        for k, v in self.coeffs.items():
            if k * sa < trunc:
                merged[k * sa] = v
        for k, v in other.coeffs.items():
            ks = k * sb
            if ks < trunc:
                merged[ks] = merged.get(ks, mpq(0)) + v
        return QSeries(merged, trunc, den)

    __radd__ = __add__

    def __neg__(self):
        return QSeries({k: -v for k, v in self.coeffs.items()}, self.trunc, self.den)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QSeries) else -_as_mpq(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            scalar = _as_mpq(other)
            if not scalar:
                return QSeries({}, self.trunc, self.den)
            return QSeries({k: v * scalar for k, v in self.coeffs.items()}, self.trunc, self.den)
        den, sa, sb = self._aligned(other)
        a = {k * sa: v for k, v in self.coeffs.items()}
        b = {k * sb: v for k, v in other.coeffs.items()}
        la, lb = self.lead * sa, other.lead * sb
        ta, tb = self.trunc * sa, other.trunc * sb
        trunc = min(ta + lb, tb + la)
        return QSeries(_window_product(a, b, trunc), trunc, den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.inverse()
        return self * (1 / _as_mpq(other))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("series powers must be integers")
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return QSeries({0: 1}, max(self.trunc - self.lead, 1), 1)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> "QSeries":
        """Multiplicative inverse; costs 2*lead of the window."""
        if not self.coeffs:
            raise ZeroDivisionError("inverse of a series that vanishes to its window")
        L = self.lead
        c = self.coeffs[L]
        target = self.trunc - L
        if self.trunc - 2 * L <= -L:
            raise PrecisionError("window too small to invert")
        # u = q^-L f / c is a unit series with constant term 1; Newton's
        # iteration g <- g(2 - u g) doubles the correct window each step.
        u = {k - L: v / c for k, v in self.coeffs.items()}
        g = {0: mpq(1)}
        w = 1
        while w < target:
            w2 = min(2 * w, target)
            uw = {k: v for k, v in u.items() if k < w2}
            ug = _window_product(uw, g, w2)
            r = {k: -v for k, v in ug.items() if k}
            r[0] = 2 - ug.get(0, mpq(0))
            g = _window_product(g, r, w2)
            w = w2
        return QSeries({k - L: v / c for k, v in g.items()}, self.trunc - 2 * L, self.den)

    # -- reindexing operators -------------------------------------------------

    def U(self, m: int) -> "QSeries":
        """Pick every m-th exponent: a(x) <- a(m x).  Window T/m.

        This is the root-of-unity average over the branches q^(1/m), so
        exponents whose image x/m leaves the stored lattice are
        annihilated; on lattices with gcd(den, m) = 1 it is the familiar
        operator sending sum a(x) q^x to sum a(m x) q^x.
        """
        m = int(m)
        if m < 1:
            raise ValueError("U index must be positive")
        if m == 1:
            return self
        picked = {k // m: v for k, v in self.coeffs.items() if k % m == 0}
        return QSeries(picked, _ceil_div(self.trunc, m), self.den)

    def V(self, m: int) -> "QSeries":
        """Dilate exponents: a(m x) <- a(x).  Window m*T."""
        m = int(m)
        if m < 1:
            raise ValueError("V index must be positive")
        if m == 1:
            return self
        return QSeries({k * m: v for k, v in self.coeffs.items()}, self.trunc * m, self.den)

    def derivative(self) -> "QSeries":
        """Apply q d/dq: a(x) <- x a(x)."""
        return QSeries(
            {k: v * mpq(k, self.den) for k, v in self.coeffs.items()},
            self.trunc,
            self.den,
        )

    def antiderivative(self) -> "QSeries":
        """Invert q d/dq termwise, a(x) <- a(x)/x, with zero constant.

        Raises ValueError when the constant term is nonzero, since no
        q-expansion maps onto it.
        """
        if self.coeffs.get(0):
            raise ValueError("series with nonzero constant term has no q-expansion antiderivative")
        return QSeries(
            {k: v * mpq(self.den, k) for k, v in self.coeffs.items() if k},
            self.trunc,
            self.den,
        )

    def shifted(self, x) -> "QSeries":
        """Multiply by q^x."""
        fx = Fraction(x)
        den = lcm(self.den, fx.denominator)
        s = den // self.den
        offset = int(fx * den)
        return QSeries(
            {k * s + offset: v for k, v in self.coeffs.items()},
            self.trunc * s + offset,
            den,
        )

    def truncate(self, x) -> "QSeries":
        """Narrow the window to exponents below x."""
        fx = Fraction(x)
        scaled = _ceil_div(fx.numerator * self.den, fx.denominator)
        if scaled >= self.trunc:
            return self
        return QSeries(
            {k: v for k, v in self.coeffs.items() if k < scaled}, scaled, self.den
        )

    def scale_coefficients(self, fn) -> "QSeries":
        """Map coefficients through fn(exponent, value) -> value."""
        return QSeries(
            {k: fn(Fraction(k, self.den), v) for k, v in self.coeffs.items()},
            self.trunc,
            self.den,
        )

    # -- comparison and serialization ----------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return (
            self.den == other.den
            and self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.den, self.trunc, tuple(sorted(self.coeffs.items()))))

    def agrees_with(self, other: "QSeries") -> bool:
        """Equality of all coefficients on the common window."""
        den, sa, sb = self._aligned(other)
        trunc = min(self.trunc * sa, other.trunc * sb)
        a = {k * sa: v for k, v in self.coeffs.items() if k * sa < trunc}
        b = {k * sb: v for k, v in other.coeffs.items() if k * sb < trunc}
        return a == b

    def to_json(self) -> dict:
        return {
            "den": self.den,
            "lead": self.lead,
            "T": self.trunc,
            "coeffs": [[k, str(v)] for k, v in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QSeries":
        series = cls({int(k): mpq(v) for k, v in obj["coeffs"]}, obj["T"], obj["den"])
        if series.den != obj["den"] or series.lead != obj["lead"]:
            raise ValueError("serialized series is not in normal form")
        return series

    def qexp_string(self, max_terms: int | None = 12) -> str:
        """Readable expansion like '-q^-1 + 2*q + 3*q^2 + O(q^7)'."""
        pieces = []
        for k in sorted(self.coeffs):
            exp = Fraction(k, self.den)
            v = self.coeffs[k]
            if exp == 0:
                body = str(v)
            else:
                qpow = "q" if exp == 1 else (f"q^{exp}" if exp.denominator == 1 else f"q^({exp})")
                if v == 1:
                    body = qpow
                elif v == -1:
                    body = f"-{qpow}"
                else:
                    body = f"{v}*{qpow}"
            pieces.append(body)
        if max_terms is not None and len(pieces) > max_terms:
            pieces = pieces[:max_terms] + ["..."]
        bound = self.window_bound()
        tail = f"O(q^{bound})" if bound.denominator == 1 else f"O(q^({bound}))"
        pieces.append(tail)
        out = pieces[0]
        for piece in pieces[1:]:
            if piece.startswith("-"):
                out += " - " + piece[1:]
            else:
                out += " + " + piece
        return out

    def __repr__(self) -> str:
        return f"QSeries({self.qexp_string(8)})"


# ---------------------------------------------------------------------------
# classical generators
# ---------------------------------------------------------------------------


def divisor_sigma_list(power: int, terms: int) -> list:
    """[sigma_power(n) for n < terms], with entry 0 for n = 0."""
    out = [mpz(0)] * max(terms, 0)
    for d in range(1, terms):
        step = mpz(d) ** power
        for n in range(d, terms, d):
            out[n] += step
    return out


def eisenstein4(terms: int) -> QSeries:
    """E4 = 1 + 240 sum sigma_3(n) q^n."""
    sig = divisor_sigma_list(3, terms)
    coeffs = {0: mpq(1)}
    coeffs.update({n: 240 * sig[n] for n in range(1, terms)})
    return QSeries(coeffs, terms)


def eisenstein6(terms: int) -> QSeries:
    """E6 = 1 - 504 sum sigma_5(n) q^n."""
    sig = divisor_sigma_list(5, terms)
    coeffs = {0: mpq(1)}
    coeffs.update({n: -504 * sig[n] for n in range(1, terms)})
    return QSeries(coeffs, terms)


def eisenstein2_difference(N: int, terms: int) -> QSeries:
    """The holomorphic weight-2 combination E2(q) - N E2(q^N).

    E2 = 1 - 24 sum sigma_1(n) q^n is only quasimodular, but this
    difference is a modular form of weight 2 and level N with constant
    term 1 - N.
    """
    sig = divisor_sigma_list(1, terms)
    coeffs = {0: mpq(1 - N)}
    for n in range(1, terms):
        c = -24 * sig[n]
        if n % N == 0:
            c += 24 * N * sig[n // N]
        if c:
            coeffs[n] = c
    return QSeries(coeffs, terms)


def euler_factor(scale: int, terms: int) -> QSeries:
    """prod_{n>=1} (1 - q^(scale*n)) via the pentagonal number theorem."""
    coeffs = {0: mpq(1)}
    k = 1
    while True:
        placed = False
        for g in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            e = scale * g
            if e < terms:
                coeffs[e] = coeffs.get(e, mpq(0)) + (-1) ** k
                placed = True
        if not placed:
            break
        k += 1
    return QSeries(coeffs, terms)


def eta_quotient(exponents: dict[int, int], terms: int) -> QSeries:
    """prod_delta eta(q^delta)^(r_delta) as an exact expansion.

    eta(q^d) = q^(d/24) prod (1 - q^(dn)), so the result lives on the
    (1/24)-lattice in general; the constructor reduces it when the total
    eta-power is a multiple of 24.
    """
    prefactor = Fraction(sum(d * r for d, r in exponents.items()), 24)
    series = None
    for d, r in sorted(exponents.items()):
        if r == 0:
            continue
        block = euler_factor(d, terms) ** r
        series = block if series is None else series * block
    if series is None:
        series = QSeries({0: 1}, terms)
    return series.shifted(prefactor).truncate(terms)


def delta_series(terms: int) -> QSeries:
    """The discriminant cusp form: q prod (1-q^n)^24."""
    return eta_quotient({1: 24}, terms)


def jfunction(terms: int) -> QSeries:
    """j = E4^3 / Delta = q^-1 + 744 + 196884 q + ..."""
    e4 = eisenstein4(terms + 2)
    return ((e4**3) / delta_series(terms + 2)).truncate(terms)


def theta0(terms: int) -> QSeries:
    """sum_{n in Z} q^(n^2) = 1 + 2q + 2q^4 + 2q^9 + ..."""
    coeffs = {0: mpq(1)}
    n = 1
    while n * n < terms:
        coeffs[n * n] = mpq(2)
        n += 1
    return QSeries(coeffs, terms)
