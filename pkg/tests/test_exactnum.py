"""Tests for exact p-adic scalar arithmetic.

Expected values marked FROZEN were computed by the stated oracle (kept in
this file) and then pinned; the oracle is re-run so any drift is caught.
"""

from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicmaass.exactnum import (
    Extension,
    FrobeniusPair,
    PadicNumber,
    PrecisionError,
    QuadExtElement,
    ramification_constant,
    teichmuller,
)

# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def teichmuller_oracle(x: int, p: int, precision: int) -> int:
    """Iterate x <- x^p mod p^precision until it stabilizes (plain ints)."""
    modulus = p**precision
    current = x % modulus
    for _ in range(precision + 2):
        nxt = pow(current, p, modulus)
        if nxt == current:
            return current
        current = nxt
    raise AssertionError("did not stabilize")


# FROZEN: teichmuller_oracle(2, 5, 4) == 182  (182 = ...1212 in base 5)
TEICH_2_5_4 = 182


def test_teichmuller_oracle_frozen() -> None:
    assert teichmuller_oracle(2, 5, 4) == TEICH_2_5_4


# ---------------------------------------------------------------------------
# PadicNumber construction and rendering
# ---------------------------------------------------------------------------


def test_from_rational_basic() -> None:
    x = PadicNumber.from_rational(Fraction(7, 9), 3, 5)
    assert x.valuation == -2
    assert x.lift() is not None
    # 7/9 = 3^-2 * 7, and 7 is a 3-adic unit.
    assert x.unit % 3 != 0


def test_minus_one_base_3_digits() -> None:
    x = PadicNumber.from_rational(-1, 3, 5)
    assert x.digit_string() == "...22222"


def test_digit_string_fractional_part() -> None:
    # 1/3 = 3^-1: one digit right of the point, zero digits above it
    # known out to 3^3.
    x = PadicNumber.from_rational(Fraction(1, 3), 3, 3)
    assert x.digit_string() == "...000.1"
    y = x + 1
    assert y.digit_string() == "...001.1"


def test_digit_beyond_precision_raises() -> None:
    x = PadicNumber.from_rational(5, 3, 4)
    x.digit(3)
    with pytest.raises(PrecisionError):
        x.digit(4)


def test_zero_at_precision_rendering() -> None:
    z = PadicNumber.zero(3, 6)
    assert z.is_zero()
    assert "3^6" in z.digit_string()


def test_denominator_must_be_coprime_to_p() -> None:
    x = PadicNumber.from_rational(Fraction(1, 6), 3, 4)
    # 1/6 = 3^-1 * (1/2): valuation -1, unit = inverse of 2.
    assert x.valuation == -1
    assert (x * 6 - 1).is_zero()


def test_leading_digit_nonzero_invariant() -> None:
    # 18 = 2 * 3^2: valuation must absorb all powers of p.
    x = PadicNumber.from_rational(18, 3, 6)
    assert x.valuation == 2
    assert x.unit % 3 == 2


# ---------------------------------------------------------------------------
# PadicNumber arithmetic and precision propagation
# ---------------------------------------------------------------------------


def test_addition_cancellation_renormalizes() -> None:
    a = PadicNumber.from_rational(1, 3, 5)
    b = PadicNumber.from_rational(8, 3, 5)
    s = a + b  # 9 = 3^2: valuation jumps, precision stays absolute
    assert s.valuation == 2
    assert s.precision == 5


def test_addition_total_cancellation_gives_zero_at_precision() -> None:
    a = PadicNumber.from_rational(1, 3, 4)
    s = a + PadicNumber.from_rational(-1, 3, 4)
    assert s.is_zero()
    assert s.precision == 4


def test_multiplication_precision_rule() -> None:
    # M(a*b) = min(M_a + v_b, M_b + v_a)
    a = PadicNumber(3, valuation=-2, unit=5, precision=4)
    b = PadicNumber(3, valuation=1, unit=2, precision=7)
    prod = a * b
    assert prod.valuation == -1
    assert prod.precision == min(4 + 1, 7 - 2)


def test_inverse_precision_rule() -> None:
    # M(1/a) = M - 2v
    a = PadicNumber(3, valuation=2, unit=2, precision=7)
    inv = a.inverse()
    assert inv.valuation == -2
    assert inv.precision == 7 - 4
    assert (a * inv - 1).is_zero()


def test_division_by_zero_at_precision_raises() -> None:
    z = PadicNumber.zero(3, 5)
    with pytest.raises(ZeroDivisionError):
        z.inverse()


rationals = st.fractions(
    min_value=-(10**6), max_value=10**6, max_denominator=10**4
).filter(lambda q: q.denominator % 3 != 0)


@given(x=rationals, y=rationals)
@settings(max_examples=200)
def test_ring_arithmetic_matches_exact(x: Fraction, y: Fraction) -> None:
    prec = 12
    xa = PadicNumber.from_rational(x, 3, prec)
    ya = PadicNumber.from_rational(y, 3, prec)
    assert ((xa + ya) - PadicNumber.from_rational(x + y, 3, prec)).is_zero()
    assert ((xa * ya) - PadicNumber.from_rational(x * y, 3, prec)).is_zero()
    assert ((xa - ya) - PadicNumber.from_rational(x - y, 3, prec)).is_zero()


@given(x=rationals.filter(lambda q: q != 0))
@settings(max_examples=200)
def test_inverse_roundtrip(x: Fraction) -> None:
    xa = PadicNumber.from_rational(x, 3, 12)
    assert (xa * xa.inverse() - 1).is_zero()


@given(x=rationals, y=rationals)
@settings(max_examples=200)
def test_add_precision_is_min(x: Fraction, y: Fraction) -> None:
    xa = PadicNumber.from_rational(x, 3, 9)
    ya = PadicNumber.from_rational(y, 3, 14)
    s = xa + ya
    assert s.precision <= 9 or s.is_zero()
    # The sum is still provably congruent to the exact value mod 3^9.
    exact = PadicNumber.from_rational(x + y, 3, 9)
    assert (s - exact).is_zero() or (exact - s).is_zero()


@given(e=st.integers(min_value=0, max_value=10))
@settings(max_examples=50)
def test_digit_string_roundtrip(e: int) -> None:
    x = PadicNumber.from_rational(Fraction(2**e, 1), 3, 8)
    s = x.digit_string()
    # Recompute the integer from the printed digits.
    body = s.removeprefix("...")
    if "." in body:
        intpart, fracpart = body.split(".")
    else:
        intpart, fracpart = body, ""
    digits = [int(c) for c in (intpart + fracpart)]
    value = sum(d * Fraction(3) ** (len(digits) - 1 - i) for i, d in enumerate(digits))
    value /= Fraction(3) ** len(fracpart)
    assert (x - PadicNumber.from_rational(value, 3, x.precision)).is_zero()


# ---------------------------------------------------------------------------
# Teichmuller lifts
# ---------------------------------------------------------------------------


def test_teichmuller_2_mod_3_is_minus_one() -> None:
    w = teichmuller(2, 3, 5)
    assert w.digit_string() == "...22222"
    assert (w + 1).is_zero()


def test_teichmuller_2_mod_5_matches_oracle() -> None:
    w = teichmuller(2, 5, 4)
    assert w.lift() == TEICH_2_5_4
    assert w.digit_string() == "...1212"


@given(x=st.integers(min_value=1, max_value=100).filter(lambda n: n % 3 != 0))
@settings(max_examples=60)
def test_teichmuller_fixed_point_and_residue(x: int) -> None:
    w = teichmuller(x, 3, 8)
    assert (w**3 - w).is_zero()
    assert w.digit(0) == x % 3


def test_teichmuller_rejects_non_unit() -> None:
    with pytest.raises(ValueError):
        teichmuller(6, 3, 5)


def test_teichmuller_unramified_quadratic() -> None:
    # Z_9 = Z_3[beta], beta^2 = 2: units satisfy w^9 = w.
    ext = Extension(3, 0, -2)
    one = PadicNumber.from_rational(1, 3, 6)
    x = QuadExtElement(ext, one, one)  # 1 + beta, a unit
    w = teichmuller(x)
    assert (w**9 - w).is_zero()
    assert (w - x).valuation() >= 1


def test_teichmuller_rejects_ramified_extension() -> None:
    ext = Extension(3, 0, 3)  # beta^2 = -3, ramified
    one = PadicNumber.from_rational(1, 3, 6)
    with pytest.raises(ValueError):
        teichmuller(QuadExtElement(ext, one, one))


# ---------------------------------------------------------------------------
# Quadratic extensions
# ---------------------------------------------------------------------------


def test_quadext_multiplication_table() -> None:
    # beta^2 = s*beta - t with s=1, t=3: (beta)^2 = beta - 3.
    ext = Extension(11, 1, 3)
    zero = PadicNumber.zero(11, 8)
    one = PadicNumber.from_rational(1, 11, 8)
    beta = QuadExtElement(ext, zero, one)
    sq = beta * beta
    assert (sq.x + 3).is_zero()
    assert (sq.y - 1).is_zero()


def test_quadext_conjugation_and_norm() -> None:
    ext = Extension(3, 0, -2)
    x = QuadExtElement(
        ext,
        PadicNumber.from_rational(4, 3, 8),
        PadicNumber.from_rational(7, 3, 8),
    )
    n = x.norm()
    # N(4 + 7*beta) = 16 - 2*49 = -82 with beta^2 = 2.
    assert (n - PadicNumber.from_rational(-82, 3, 8)).is_zero()
    c = x.conjugate()
    assert (c.y + 7).is_zero()


def test_quadext_inverse() -> None:
    ext = Extension(3, 0, -2)
    x = QuadExtElement(
        ext,
        PadicNumber.from_rational(4, 3, 8),
        PadicNumber.from_rational(7, 3, 8),
    )
    prod = x * x.inverse()
    assert (prod.x - 1).is_zero()
    assert prod.y.is_zero()


def test_quadext_ramified_valuation_is_half_integral() -> None:
    ext = Extension(5, 0, 5)  # beta^2 = -5
    assert ext.ramification_degree == 2
    zero = PadicNumber.zero(5, 6)
    one = PadicNumber.from_rational(1, 5, 6)
    beta = QuadExtElement(ext, zero, one)
    assert beta.valuation() == Fraction(1, 2)
    assert (beta * beta).valuation() == 1


def test_quadext_unramified_valuation() -> None:
    ext = Extension(3, 0, -2)
    assert ext.ramification_degree == 1
    assert ext.residue_degree == 2
    three = PadicNumber.from_rational(3, 3, 6)
    one = PadicNumber.from_rational(1, 3, 6)
    elt = QuadExtElement(ext, three, one)
    assert elt.valuation() == 0


# ---------------------------------------------------------------------------
# Frobenius root pairs
# ---------------------------------------------------------------------------


def test_frobenius_ordinary_split_43_example() -> None:
    # x^2 + 2x + 3: ordinary at 3, beta is the unit root, beta = 4 mod 9.
    fp = FrobeniusPair(-2, 3, 6)
    assert fp.split
    assert fp.beta_valuation == 0
    assert fp.beta_bar_valuation == 1
    assert fp.beta.digit(0) == 1 and fp.beta.digit(1) == 1  # 4 = 1 + 1*3
    assert (fp.beta + fp.beta_bar + 2).is_zero()
    assert (fp.beta * fp.beta_bar - 3).is_zero()


def test_frobenius_ordinary_split_11_example() -> None:
    fp = FrobeniusPair(1, 11, 5)
    assert fp.split
    assert fp.beta.digit(0) == 1
    assert (fp.beta * fp.beta - fp.beta + 11).is_zero()


def test_frobenius_supersingular() -> None:
    # a_p = 0 at p = 5: beta = sqrt(-5), ramified, both valuations 1/2.
    fp = FrobeniusPair(0, 5, 6)
    assert not fp.split
    assert fp.beta_valuation == Fraction(1, 2)
    assert fp.beta_bar_valuation == Fraction(1, 2)
    sq = fp.beta * fp.beta
    assert (sq.x + 5).is_zero()
    assert sq.y.is_zero()
    assert (fp.beta + fp.beta_bar).is_zero()


def test_frobenius_weil_bound_enforced() -> None:
    with pytest.raises(ValueError):
        FrobeniusPair(4, 3, 5)


@st.composite
def frobenius_inputs(draw):
    p = draw(st.sampled_from([3, 5, 7, 11, 13]))
    bound = int(gmpy2.isqrt(4 * p))
    a = draw(st.integers(min_value=-bound, max_value=bound))
    return a, p


@given(ap=frobenius_inputs())
@settings(max_examples=80)
def test_frobenius_root_identities(ap) -> None:
    a, p = ap
    fp = FrobeniusPair(a, p, 8)
    assert fp.beta_valuation + fp.beta_bar_valuation == 1
    assert fp.beta_valuation <= fp.beta_bar_valuation
    # Both roots satisfy x^2 - a x + p = 0 to working precision.
    for root in (fp.beta, fp.beta_bar):
        residual = root * root - a * root + p
        if isinstance(residual, PadicNumber):
            assert residual.is_zero()
        else:
            assert residual.x.is_zero() and residual.y.is_zero()


# ---------------------------------------------------------------------------
# Ramification constants
# ---------------------------------------------------------------------------


def test_ramification_constant_unramified() -> None:
    assert ramification_constant(1, 3) == 1


def test_ramification_constant_small_index() -> None:
    # e = 2 <= log(11): exact 1/e.
    assert ramification_constant(2, 11) == Fraction(1, 2)


def test_ramification_constant_large_index() -> None:
    # FROZEN: (-log 10 + 1 + log log 3)/log 3 = -1.1000580... floored at 1e-6.
    assert ramification_constant(10, 3) == Fraction(-1100059, 10**6)


def test_ramification_constant_rejects_bad_index() -> None:
    with pytest.raises(ValueError):
        ramification_constant(0, 3)
