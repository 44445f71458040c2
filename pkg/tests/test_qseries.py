"""Tests for exact truncated q-expansions.

Expected values marked FROZEN were computed by the independent oracle
kept alongside them (brute-force divisor sums, naive polynomial
products) and then pinned.
"""

from fractions import Fraction
from math import gcd

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from padicmaass.exactnum import PrecisionError
from padicmaass.qseries import (
    QSeries,
    _kronecker_product,
    delta_series,
    divisor_sigma_list,
    eisenstein2_difference,
    eisenstein4,
    eisenstein6,
    eta_quotient,
    euler_factor,
    jfunction,
    theta0,
)

# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def sigma_oracle(n: int, k: int) -> int:
    """Brute-force divisor power sum (independent of the sieve)."""
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def naive_product(a: dict, b: dict, T: int) -> dict:
    """Schoolbook convolution oracle for the Kronecker multiplier."""
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            if ka + kb < T:
                out[ka + kb] = out.get(ka + kb, mpq(0)) + va * vb
    return {k: v for k, v in out.items() if v}


def naive_euler_power(power: int, T: int) -> dict:
    """prod_{n<T} (1-q^n)^power mod q^T by repeated naive multiplication."""
    out = {0: mpq(1)}
    for n in range(1, T):
        factor = {0: mpq(1), n: mpq(-1)}
        for _ in range(power):
            out = naive_product(out, factor, T)
    return out


# FROZEN: sigma_oracle(n, 9) for n = 1..6
SIGMA9 = [1, 513, 19684, 262657, 1953126, 10097892]


def test_sigma_oracle_frozen() -> None:
    assert [sigma_oracle(n, 9) for n in range(1, 7)] == SIGMA9
    assert divisor_sigma_list(9, 7)[1:] == SIGMA9


# ---------------------------------------------------------------------------
# construction, access, window bookkeeping
# ---------------------------------------------------------------------------


def test_basic_window_and_access() -> None:
    f = QSeries({-1: 1, 2: mpq(3, 2)}, 5)
    assert f.order() == -1
    assert f.window_bound() == 5
    assert f.coefficient(2) == mpq(3, 2)
    assert f.coefficient(0) == 0
    with pytest.raises(PrecisionError):
        f.coefficient(5)


def test_off_lattice_coefficient_is_zero() -> None:
    f = QSeries({1: 7}, 10)
    assert f.coefficient(Fraction(1, 2)) == 0


def test_lattice_normalization() -> None:
    f = QSeries({4: 1, 8: 2}, 13, den=2)
    assert f.den == 1
    assert f.exponents() == [2, 4]
    assert f.trunc == 7  # ceil(13/2)


def test_rejects_coefficients_beyond_window() -> None:
    with pytest.raises(ValueError):
        QSeries({5: 1}, 3)


def test_product_window_rule() -> None:
    f = QSeries({-2: 1, 0: 5}, 10)  # lead -2, T 10
    g = QSeries({1: 1}, 4)  # lead 1, T 4
    h = f * g
    assert h.trunc == min(10 + 1, 4 - 2)
    assert h.coefficient(-1) == 1


def test_sum_window_is_min() -> None:
    f = QSeries({0: 1}, 10)
    g = QSeries({1: 1}, 4)
    assert (f + g).trunc == 4


def test_u_v_window_rules() -> None:
    f = QSeries({0: 1, 3: 2, 5: 4}, 10)
    uf = f.U(3)
    assert uf.trunc == 4  # ceil(10/3)
    assert uf.coefficient(1) == 2
    assert uf.coefficient(0) == 1
    vf = f.V(3)
    assert vf.trunc == 30
    assert vf.coefficient(9) == 2


def test_truncate_and_shift() -> None:
    f = QSeries({0: 1, 4: 2}, 9)
    t = f.truncate(3)
    assert t.trunc == 3 and t.coefficient(0) == 1
    s = f.shifted(Fraction(1, 2))
    assert s.coefficient(Fraction(1, 2)) == 1
    assert s.window_bound() == Fraction(19, 2)


def test_derivative_and_antiderivative() -> None:
    f = QSeries({-3: 2, 2: 5}, 7)
    df = f.derivative()
    assert df.coefficient(-3) == -6
    assert df.coefficient(2) == 10
    assert df.antiderivative().agrees_with(f)
    with pytest.raises(ValueError):
        QSeries({0: 1, 1: 1}, 5).antiderivative()


def test_scalar_arithmetic() -> None:
    f = QSeries({1: 2}, 6)
    g = 3 * f - 1
    assert g.coefficient(0) == -1
    assert g.coefficient(1) == 6
    h = 1 - g
    assert h.coefficient(0) == 2
    assert (f / 2).coefficient(1) == 1


def test_geometric_inverse() -> None:
    f = QSeries({0: 1, 1: -1}, 12)
    g = f.inverse()
    assert all(g.coefficient(n) == 1 for n in range(12))
    assert g.trunc == 12


def test_inverse_window_cost() -> None:
    d = delta_series(20)
    inv = d.inverse()
    assert inv.order() == -1
    assert inv.trunc == 20 - 2
    assert (d * inv).coefficient(0) == 1


def test_power_zero_and_negative() -> None:
    f = QSeries({0: 1, 1: -1}, 9)
    assert (f**0).coefficient(0) == 1
    assert (f**-2).coefficient(1) == 2  # 1/(1-q)^2 = sum (n+1) q^n


# ---------------------------------------------------------------------------
# multiplication against the schoolbook oracle
# ---------------------------------------------------------------------------

coeff_values = st.fractions(min_value=-(10**18), max_value=10**18, max_denominator=10**6)


@st.composite
def sparse_series_dict(draw, max_keys=9, lo=-12, hi=40):
    n = draw(st.integers(min_value=1, max_value=max_keys))
    keys = draw(st.lists(st.integers(lo, hi), min_size=n, max_size=n, unique=True))
    return {k: mpq(v.numerator, v.denominator) for k, v in zip(keys, [draw(coeff_values) for _ in keys]) if v}


@given(a=sparse_series_dict(), b=sparse_series_dict(), T=st.integers(min_value=-10, max_value=90))
@settings(max_examples=150)
def test_kronecker_matches_naive(a, b, T) -> None:
    if not a or not b:
        return
    assert _kronecker_product(a, b, T) == naive_product(a, b, T)


def test_kronecker_boundary_magnitudes() -> None:
    big = 2**64 - 1
    a = {0: mpq(big), 1: mpq(-big), 2: mpq(big)}
    b = {0: mpq(-big), 3: mpq(big)}
    assert _kronecker_product(a, b, 40) == naive_product(a, b, 40)


@st.composite
def qseries_strategy(draw, dens=(1, 1, 1, 2, 3)):
    den = draw(st.sampled_from(dens))
    coeffs = draw(sparse_series_dict(max_keys=6, lo=-8, hi=20))
    top = max(coeffs) if coeffs else 0
    trunc = draw(st.integers(min_value=top + 1, max_value=top + 25))
    return QSeries(coeffs, trunc, den)


@given(f=qseries_strategy(), g=qseries_strategy(), h=qseries_strategy())
@settings(max_examples=100)
def test_ring_laws(f, g, h) -> None:
    assert (f * g).agrees_with(g * f)
    assert ((f + g) * h).agrees_with(f * h + g * h)
    assert ((f * g) * h).agrees_with(f * (g * h))


@given(f=qseries_strategy(), m=st.integers(min_value=1, max_value=5))
@settings(max_examples=100)
def test_v_then_u_is_identity(f, m) -> None:
    # U_m averages over the branches of q^(1/m), so the inverse property
    # needs the exponent lattice to stay coprime to m (always true for
    # ordinary integer q-expansions).
    if gcd(f.den, m) != 1:
        return
    assert f.V(m).U(m) == f


@given(
    f=qseries_strategy(dens=(1,)),
    g=qseries_strategy(dens=(1,)),
    m=st.integers(min_value=1, max_value=5),
)
@settings(max_examples=100)
def test_projection_identity(f, g, m) -> None:
    # U_m(f * V_m g) = (U_m f) * g on a common integer lattice.
    lhs = (f * g.V(m)).U(m)
    rhs = f.U(m) * g
    assert lhs.agrees_with(rhs)


@given(f=qseries_strategy(), g=qseries_strategy())
@settings(max_examples=100)
def test_leibniz_rule(f, g) -> None:
    lhs = (f * g).derivative()
    rhs = f.derivative() * g + f * g.derivative()
    assert lhs.agrees_with(rhs)


@given(f=qseries_strategy())
@settings(max_examples=100)
def test_json_roundtrip_bit_exact(f) -> None:
    assert QSeries.from_json(f.to_json()) == f


# ---------------------------------------------------------------------------
# classical generators
# ---------------------------------------------------------------------------


def test_e4_e6_product_is_e10() -> None:
    # E4 * E6 is the weight-10 Eisenstein series 1 - 264 sum sigma_9(n) q^n,
    # checked against the brute-force divisor oracle.
    T = 60
    prod = eisenstein4(T) * eisenstein6(T)
    assert prod.coefficient(0) == 1
    for n in range(1, T):
        assert prod.coefficient(n) == -264 * sigma_oracle(n, 9)


def test_delta_tau_values() -> None:
    d = delta_series(8)
    expected = {1: 1, 2: -24, 3: 252, 4: -1472, 5: 4830, 6: -6048, 7: -16744}
    for n, tau in expected.items():
        assert d.coefficient(n) == tau
    assert d.coefficient(0) == 0


def test_delta_matches_eisenstein_combination() -> None:
    T = 40
    e4, e6 = eisenstein4(T), eisenstein6(T)
    combo = (e4**3 - e6**2) / 1728
    assert combo.agrees_with(delta_series(T))


def test_jfunction_values() -> None:
    j = jfunction(4)
    assert j.coefficient(-1) == 1
    assert j.coefficient(0) == 744
    assert j.coefficient(1) == 196884
    assert j.coefficient(2) == 21493760
    assert j.coefficient(3) == 864299970


def test_euler_factor_against_naive() -> None:
    # FROZEN oracle: naive_euler_power(4, 20).
    T = 20
    naive = naive_euler_power(4, T)
    fast = euler_factor(1, T) ** 4
    assert {k: v for k, v in fast.coeffs.items()} == naive
    assert fast.coefficient(1) == -4
    assert fast.coefficient(2) == 2
    assert fast.coefficient(3) == 8


def test_eta_quotient_pole_order() -> None:
    u = eta_quotient({1: 4, 43: -4}, 30)
    assert u.order() == -7
    assert u.coefficient(-7) == 1
    assert u.coefficient(-6) == -4
    # eta(q)^4/eta(q^43)^4 = q^-7 prod(1-q^n)^4 prod(1-q^43n)^-4.
    naive = naive_euler_power(4, 30)
    for n in range(-7, 10):
        assert u.coefficient(n) == naive.get(n + 7, 0)


def test_eta_quotient_fractional_lattice() -> None:
    # A single eta factor lives on the (1/24)-lattice.
    e = eta_quotient({1: 1}, 10)
    assert e.den == 24
    assert e.order() == Fraction(1, 24)
    assert e.coefficient(Fraction(25, 24)) == -1


def test_eisenstein2_difference_values() -> None:
    e = eisenstein2_difference(43, 50)
    assert e.coefficient(0) == -42
    assert e.coefficient(1) == -24
    assert e.coefficient(43) == -24 * sigma_oracle(43, 1) + 24 * 43
    e6level = eisenstein2_difference(6, 20)
    assert e6level.coefficient(0) == -5
    assert e6level.coefficient(6) == -24 * sigma_oracle(6, 1) + 24 * 6 * sigma_oracle(1, 1)


def test_theta0_values() -> None:
    t = theta0(17)
    assert t.coefficient(0) == 1
    assert t.coefficient(1) == 2
    assert t.coefficient(4) == 2
    assert t.coefficient(9) == 2
    assert t.coefficient(16) == 2
    assert t.coefficient(2) == 0
