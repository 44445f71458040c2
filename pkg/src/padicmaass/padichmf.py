"""p-adic harmonic Maass functions as regularized Hecke-operator limits.

A weight-0 harmonic seed with cuspidal shadow g is carried here by its
rational data: the weight-2 derivative image F_Q and the newform g.  The
holomorphic part is F+ = antiderivative(F_Q) + alpha * E(q) with E the
Eichler integral of g and alpha a formal transcendental.  Applying
a_g(p) - T_p annihilates the transcendental exactly, leaving a weakly
holomorphic p-integral form H, and the p-adic function is the
coefficient-wise limit of H|B_n over the geometric schedule

    B_n = sum_{j<n} beta^(-j-1) T_{p^j} + beta^(-n-1)/(1 - beta^(-1)) T_{p^n}

where beta is the smaller-valuation root of x^2 - a_g(p) x + p.  In
production the limit coefficients come from the closed formula

    b(m p^s) = sum_h c(m p^h) sum_{i=max(s-h,0)}^{s} beta^(-1-i) betabar^(h-s+i)

(p coprime to m) whose omitted tail has certified valuation growth; the
iterated schedule survives as a small-n test oracle.  When both roots
have valuation 1/2 the two conjugate formulas are averaged and the
result is checked to land back in Q_p.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from ._linalg import solve
from .exactnum import (
    Extension,
    FrobeniusPair,
    PadicNumber,
    PrecisionError,
    QuadExtElement,
)
from .modform import (
    ExpansionFamily,
    PairingPrecisionError,
    cusp_basis,
    divisors,
    index_in_sl2z,
    prime_factors,
)
from .qseries import QSeries


class NewformConsistencyError(ValueError):
    """The eigenform data cannot account for the seed's transcendental part."""


class NonConvergentError(ValueError):
    """The requested branch of the limit construction does not converge."""


class DecompositionError(ValueError):
    """No (lambda, mu) pair bounds the denominators at the requested range."""


def _is_prime(n: int) -> bool:
    return n > 1 and prime_factors(n) == [n] and all(n % (q * q) for q in (2, 3, 5, 7) if q < n)


def _vp(x, p: int) -> Fraction:
    """p-valuation of a nonzero rational."""
    x = Fraction(x)
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return Fraction(v)


def _split_index(t: int, p: int) -> tuple[int, int]:
    """t = m * p^s with p coprime to m; returns (m, s) keeping the sign on m."""
    s = 0
    while t % p == 0:
        t //= p
        s += 1
    return t, s


def _balanced_lift(x: PadicNumber) -> Fraction:
    """The representative of smallest absolute value, as an exact rational."""
    if x.is_zero():
        return Fraction(0)
    modulus = x.p ** (x.precision - x.valuation)
    unit = int(x.unit) % modulus
    if 2 * unit > modulus:
        unit -= modulus
    return Fraction(unit) * Fraction(x.p) ** x.valuation


def _cap(x: PadicNumber, precision: int) -> PadicNumber:
    """x truncated to a (smaller) certified absolute precision."""
    if x.precision <= precision:
        return x
    if x.is_zero() or x.valuation >= precision:
        return PadicNumber.zero(x.p, precision)
    modulus = x.p ** (precision - x.valuation)
    return PadicNumber(x.p, x.valuation, x.unit % modulus, precision)


def _cap_ext(x: QuadExtElement, precision: int) -> QuadExtElement:
    return QuadExtElement(x.ext, _cap(x.x, precision), _cap(x.y, precision))


_EXACT_ZERO_VALUATION = Fraction(10**9)


def _vlb(x, p: int | None = None) -> Fraction:
    """Certified valuation lower bound, uniform over Q_p and its extensions.

    Exact rationals (needing ``p``) are exact: zero gets a huge sentinel.
    """
    if isinstance(x, QuadExtElement):
        return x.valuation()
    if isinstance(x, PadicNumber):
        return Fraction(x.valuation_lower_bound())
    return _vp(x, p) if x else _EXACT_ZERO_VALUATION


# ---------------------------------------------------------------------------
# the formal transcendental
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalPlusAlpha:
    """An element r + a*alpha, alpha a formal transcendental of degree <= 1.

    Ring operations keep the degree: a product of two elements with
    nonzero alpha part would introduce alpha^2 and is rejected, since no
    coefficient computation ever produces one.
    """

    rational: Fraction
    alpha: Fraction = Fraction(0)

    def __add__(self, other) -> "RationalPlusAlpha":
        other = _rpa(other)
        return RationalPlusAlpha(self.rational + other.rational, self.alpha + other.alpha)

    __radd__ = __add__

    def __neg__(self) -> "RationalPlusAlpha":
        return RationalPlusAlpha(-self.rational, -self.alpha)

    def __sub__(self, other):
        return self + (-_rpa(other))

    def __rsub__(self, other):
        return _rpa(other) + (-self)

    def __mul__(self, other) -> "RationalPlusAlpha":
        other = _rpa(other)
        if self.alpha and other.alpha:
            raise ValueError("alpha^2 is not representable")
        return RationalPlusAlpha(
            self.rational * other.rational,
            self.rational * other.alpha + other.rational * self.alpha,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalPlusAlpha":
        other = _rpa(other)
        if other.alpha:
            raise ValueError("division by an alpha-bearing element")
        return RationalPlusAlpha(self.rational / other.rational, self.alpha / other.rational)


def _rpa(x) -> RationalPlusAlpha:
    return x if isinstance(x, RationalPlusAlpha) else RationalPlusAlpha(Fraction(x))


def holomorphic_part(
    f_q: ExpansionFamily, g_fam: ExpansionFamily, delta: int = 1
) -> dict[Fraction, RationalPlusAlpha]:
    """Coefficients of F+ = antiderivative(f_q) + alpha*E at the cusp delta.

    Exponents map to r + a*alpha elements; the rational parts come from
    f_q, the alpha parts from the Eichler integral of g (scaled by the
    Atkin-Lehner sign implicit in g's expansion at delta).
    """
    rational = f_q.antiderivative().component(delta)
    eichler = g_fam.antiderivative().component(delta)
    out: dict[Fraction, RationalPlusAlpha] = {}
    for e, c in rational.items():
        out[e] = RationalPlusAlpha(Fraction(c))
    for e, c in eichler.items():
        prev = out.get(e, RationalPlusAlpha(Fraction(0)))
        out[e] = RationalPlusAlpha(prev.rational, prev.alpha + Fraction(c))
    return out


# ---------------------------------------------------------------------------
# seeds: killing the transcendental
# ---------------------------------------------------------------------------


def _constants_family(level: int, values: dict[int, Fraction], terms: int) -> ExpansionFamily:
    comps = {
        d: QSeries({0: Fraction(values.get(d, 0))}, terms) for d in divisors(level)
    }
    return ExpansionFamily(level, 0, comps)


def _newform_ap(g_fam: ExpansionFamily, p: int) -> int:
    a = Fraction(g_fam.component(1).coefficient(p))
    if a.denominator != 1:
        raise ValueError("eigenvalue a(p) must be a rational integer")
    return int(a)


def _screen_seed_couplings(f_q: ExpansionFamily, g_fam: ExpansionFamily) -> None:
    """Reject seeds whose harmonic completion couples to another newform.

    The pairing of a cusp form h against the completed seed depends only
    on the (exact, rational) principal parts of antiderivative(f_q), so a
    nonzero value against any bundled newform other than g proves the
    single-transcendental model r + alpha*E_g wrong for this seed.
    """
    try:
        rows = cusp_basis(f_q.level)
    except ValueError:
        return
    g1 = g_fam.component(1)
    f_plus = f_q.antiderivative()
    for row in rows:
        if row.component(1).agrees_with(g1):
            continue
        total = Fraction(0)
        for d in divisors(f_q.level):
            series = row.component(d)
            for e, c in f_plus.principal_part(d).items():
                total += Fraction(c) * Fraction(series.coefficient(-e))
        if total:
            raise NewformConsistencyError(
                "the seed couples to a newform other than the supplied one; "
                "its limit is not a single-shadow construction"
            )


def h_from_seed(
    f_q: ExpansionFamily,
    g_fam: ExpansionFamily,
    p: int,
    constant_terms: dict[int, Fraction] | None = None,
) -> ExpansionFamily:
    """F+|(a_g(p) - T_p) computed over the rational + alpha*E splitting.

    The operator is applied separately to the rational part
    antiderivative(f_q) (plus the requested constants) and to the alpha
    part E; the alpha image must vanish identically because
    E|T_p = a_g(p) E, and a nonzero residual means the supplied g is not
    the eigenform attached to the seed.
    """
    if f_q.weight != 2:
        raise ValueError("the seed must be a weight-2 family")
    if g_fam.level != f_q.level:
        raise ValueError("seed and newform live at different levels")
    if not _is_prime(p) or f_q.level % p == 0:
        raise ValueError("p must be a prime not dividing the level")
    _screen_seed_couplings(f_q, g_fam)
    ag_p = Fraction(_newform_ap(g_fam, p))
    rational = f_q.antiderivative()
    if constant_terms:
        window = min(int(s.window_bound()) for s in rational.expansions.values())
        rational = rational + _constants_family(f_q.level, constant_terms, window)
    alpha_part = g_fam.antiderivative()
    residual = ag_p * alpha_part - alpha_part.hecke_that(p)
    for d, series in residual.expansions.items():
        if any(c for _e, c in series.items()):
            raise NewformConsistencyError(
                f"a_g(p) - T_p fails to annihilate the Eichler integral at cusp {d}"
            )
    return ag_p * rational - rational.hecke_that(p)


# ---------------------------------------------------------------------------
# operator schedules (iterated form: the test oracle)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorSchedule:
    """The geometric Hecke schedule B_n attached to (g, p), residue degree 1.

    ``weights()`` lists the T_{p^j} coefficients of B_n; ``a_weights()``
    those of A_n = (a_g(p) - T_p) B_n, whose telescoped form

        A_n = 1 + beta^(-n-1)/(1-beta^(-1)) *
              (-betabar (T_{p^(n-1)} - T_{p^n}) + (T_{p^n} - T_{p^(n+1)}))

    tends to the identity.  The conjugate flag swaps beta and betabar.
    """

    level: int
    p: int
    index: int
    frobenius: FrobeniusPair
    conjugate: bool = False

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("schedule index must be at least 1")

    def _roots(self):
        f = self.frobenius
        return (f.beta_bar, f.beta) if self.conjugate else (f.beta, f.beta_bar)

    def weights(self) -> dict[int, object]:
        beta, _ = self._roots()
        inv = beta.inverse()
        out = {j: inv ** (j + 1) for j in range(self.index)}
        out[self.index] = inv ** (self.index + 1) / (1 - inv)
        return out

    def a_weights(self) -> dict[int, object]:
        n = self.index
        beta, beta_bar = self._roots()
        inv = beta.inverse()
        c = inv ** (n + 1) / (1 - inv)
        out: dict[int, object] = {n - 1: -(beta_bar * c)}
        out[n] = beta_bar * c + c + out.pop(n, 0)
        out[n + 1] = -c
        out[0] = out.get(0, 0) + 1
        return out

    def apply(self, fam: ExpansionFamily, a_form: bool = False) -> dict[int, dict[Fraction, object]]:
        """The iterated image fam|B_n (or fam|A_n) as per-cusp coefficient maps.

        Exponents are restricted to the window that every T_{p^j} image
        covers; beyond it the sum would silently miss terms.
        """
        weights = self.a_weights() if a_form else self.weights()
        deepest = max(weights)
        shared = min(
            int(s.window_bound()) for s in fam.expansions.values()
        ) // self.p**deepest
        out: dict[int, dict[Fraction, object]] = {d: {} for d in fam.expansions}
        for j, w in weights.items():
            image = fam.hecke_that(self.p**j) if j else fam
            for d, series in image.expansions.items():
                for e, c in series.items():
                    if e >= shared:
                        continue
                    term = w * Fraction(c)
                    prev = out[d].get(e)
                    out[d][e] = term if prev is None else prev + term
        return out


# ---------------------------------------------------------------------------
# the closed limit formula
# ---------------------------------------------------------------------------


def required_truncation(indices, p: int, digits: int, ramified: bool = False) -> int:
    """Window of H needed to certify `digits` digits at the given indices.

    The closed formula at t = m p^s consumes c(m p^h) for h up to
    s + digits - 1 when beta is a unit; the omitted tail then has
    valuation at least digits.  In the ramified case each h step only
    gains half a digit, so h runs up to s + 2*digits.
    """
    reach = 2 * digits + 1 if ramified else digits
    need = 1
    for t in indices:
        m, s = _split_index(abs(int(t)), p)
        need = max(need, m * p ** (s + reach - 1) + 1)
    return need


def _limit_coefficient(series: QSeries, t: int, frob: FrobeniusPair, digits: int):
    """b(t) = sum_h c(m p^h) S(h, s) with certified tail, t = m p^s.

    For a pole index (t < 0) the sum is finite and exact at working
    precision.  For t > 0 the first omitted h certifies the precision:
    valuation at least h - s when beta is a unit, (h - s - 1)/2 in the
    ramified case, where the two conjugate formulas are averaged and the
    beta-coordinate of the result must cancel.
    """
    p = frob.p
    m, s = _split_index(abs(t), p)
    m *= 1 if t > 0 else -1
    window = int(series.window_bound())
    coefficients = []
    h = 0
    if t < 0:
        lead = int(series.order())
        while m * p**h >= lead:
            coefficients.append(Fraction(series.coefficient(m * p**h)))
            h += 1
        cert = None
    else:
        needed = required_truncation([t], p, digits, ramified=not frob.split)
        if needed > window:
            raise PrecisionError(
                f"certifying {digits} digits at index {t} needs "
                f"{needed} terms, have {window}"
            )
        while m * p**h < window:
            coefficients.append(Fraction(series.coefficient(m * p**h)))
            h += 1
        if frob.split:
            cert = h - s
        else:
            cert = (h - s - 1) // 2
    for c in coefficients:
        if c.denominator % p == 0:
            raise ValueError(f"input series is not {p}-integral near index {t}")
    work = (cert or 0) + s + digits + 8
    frob = FrobeniusPair(frob.a_p, p, work + s + 4)
    beta_inv = frob.beta.inverse()
    beta_bar = frob.beta_bar
    acc = None
    for h, c in enumerate(coefficients):
        if not c:
            continue
        inner = None
        for i in range(max(s - h, 0), s + 1):
            term = beta_inv ** (i + 1) * beta_bar ** (h - s + i)
            inner = term if inner is None else inner + term
        if not frob.split:
            # The half-slope limit averages the two conjugate schedules, so
            # the coefficient formula averages the conjugate inner sums.
            inner = (inner + inner.conjugate()) * Fraction(1, 2)
            if frob.a_p == 0 and (h - s) % 2 == 0 and not inner.is_zero():
                raise AssertionError("parity vanishing fails in the symmetrized sum")
        term = inner * c
        acc = term if acc is None else acc + term
    if acc is None:
        zero_prec = cert if cert is not None else work
        return PadicNumber.zero(p, max(zero_prec, 1))
    if isinstance(acc, QuadExtElement):
        if not acc.y.is_zero():
            raise AssertionError("symmetrized limit acquired a beta-coordinate")
        acc = acc.x
    if cert is not None:
        acc = _cap(acc, cert)
        if frob.a_p == 0 and t > 0 and s % 2 == 0 and acc.valuation_lower_bound() < 0:
            raise AssertionError("b(A p^(2n)) must be integral when beta = -betabar")
    return acc


# ---------------------------------------------------------------------------
# the p-adic object
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PadicHMF:
    """A p-adic harmonic Maass function by its certified q-expansion data.

    Principal parts (negative exponents and the exponent-0 constants) are
    exact rationals; positive-index coefficients are PadicNumbers whose
    individual precisions form the certification profile.
    """

    level: int
    p: int
    label: str
    weight: int
    principal_parts: dict[int, dict[int, Fraction]]
    coefficients: dict[int, dict[int, PadicNumber]]

    def coefficient(self, delta: int, n: int):
        if n <= 0:
            return self.principal_parts[delta].get(n, Fraction(0))
        try:
            return self.coefficients[delta][n]
        except KeyError:
            raise PairingPrecisionError(
                f"coefficient {n} at cusp {delta} is not certified"
            ) from None

    def certified_indices(self, delta: int) -> list[int]:
        return sorted(self.coefficients[delta])

    def precision_profile(self) -> dict[tuple[int, int], int]:
        return {
            (d, n): v.precision
            for d, values in self.coefficients.items()
            for n, v in sorted(values.items())
        }

    def derivative(self) -> "PadicHMF":
        """D = q d/dq: kills constants, multiplies index n coefficients by n."""
        pps = {
            d: {e: e * c for e, c in pp.items() if e}
            for d, pp in self.principal_parts.items()
        }
        coeffs = {
            d: {n: v * n for n, v in values.items()}
            for d, values in self.coefficients.items()
        }
        return PadicHMF(self.level, self.p, self.label, self.weight + 2, pps, coeffs)

    def scaled(self, c: Fraction) -> "PadicHMF":
        c = Fraction(c)
        pps = {
            d: {e: c * v for e, v in pp.items()} for d, pp in self.principal_parts.items()
        }
        coeffs = {
            d: {n: v * c for n, v in values.items()}
            for d, values in self.coefficients.items()
        }
        return PadicHMF(self.level, self.p, self.label, self.weight, pps, coeffs)


def build_fp(
    h: ExpansionFamily,
    g_fam: ExpansionFamily,
    p: int,
    digits: int,
    indices=None,
    expected_principal_parts: dict[int, dict[int, Fraction]] | None = None,
    label: str = "",
    conjugate: bool = False,
) -> PadicHMF:
    """The regularized limit of h|B_n, coefficient by coefficient.

    Positive-index coefficients come from the closed limit formula with
    the stated certification; principal parts are finite exact sums whose
    balanced lifts are rational (checked against
    ``expected_principal_parts`` when the caller knows them); constants
    are recovered exactly as const(h)/(a_g(p) - 1 - p), the fixed point
    of the constant-term action.
    """
    if h.weight != 0:
        raise ValueError("the input must be a weight-0 family")
    if not _is_prime(p) or h.level % p == 0:
        raise ValueError("p must be a prime not dividing the level")
    ag_p = _newform_ap(g_fam, p)
    frob = FrobeniusPair(ag_p, p, digits + 12)
    if conjugate and frob.split:
        raise NonConvergentError(
            "the conjugate-root schedule does not converge when v_p(beta) = 0"
        )
    if indices is None:
        indices = range(1, 8)
    indices = sorted({int(n) for n in indices})
    if any(n <= 0 for n in indices):
        raise ValueError("coefficient indices must be positive")
    pps: dict[int, dict[int, Fraction]] = {}
    coeffs: dict[int, dict[int, PadicNumber]] = {}
    const_scale = Fraction(1, ag_p - 1 - p)
    for d, series in h.expansions.items():
        values = {}
        floor = -frob.beta_valuation
        for n in indices:
            b = _limit_coefficient(series, n, frob, digits)
            _, s = _split_index(n, p)
            if Fraction(b.valuation_lower_bound()) < (1 + s) * floor:
                raise AssertionError(f"slope bound violated at index {n}, cusp {d}")
            values[n] = b
        coeffs[d] = values
        pp: dict[int, Fraction] = {}
        lead = int(series.order())
        for e in range(lead, 0):
            value = _limit_coefficient(series, e, frob, digits)
            rational = _balanced_lift(value)
            if rational:
                pp[e] = rational
        pp[0] = Fraction(series.coefficient(0)) * const_scale
        if expected_principal_parts is not None:
            want = {
                int(e): Fraction(c)
                for e, c in expected_principal_parts.get(d, {}).items()
                if c
            }
            got = {e: c for e, c in pp.items() if e and c}
            if want != got:
                raise NewformConsistencyError(
                    f"recovered principal part {got} differs from expected {want} at cusp {d}"
                )
        pps[d] = pp
    return PadicHMF(h.level, p, label, 0, pps, coeffs)


def extract_alpha(
    fp: PadicHMF, f_q: ExpansionFamily, g_fam: ExpansionFamily, count: int = 3
) -> PadicNumber:
    """alpha = (n b(n) - c_Q(n)) / a_g(n), cross-checked over several n.

    Each index with a nonzero shadow coefficient determines alpha; the
    values must agree within precision (anything else indicates a bug or
    a bad fixture) and the minimum certified precision is returned.
    """
    parts = holomorphic_part(f_q, g_fam)
    values = []
    for n in fp.certified_indices(1):
        part = parts.get(Fraction(n))
        if part is None or not part.alpha:
            continue
        values.append((fp.coefficient(1, n) - part.rational) / part.alpha)
        if len(values) == count:
            break
    if not values:
        raise ValueError("no certified index carries a nonzero shadow coefficient")
    for other in values[1:]:
        if not values[0].congruent(other):
            raise RuntimeError(
                "alpha extraction disagrees between indices; "
                "the inputs are inconsistent"
            )
    return _cap(values[0], min(v.precision for v in values))


# ---------------------------------------------------------------------------
# slopes
# ---------------------------------------------------------------------------


def _slope_values(source, delta: int, p: int, modulus: int, derivative: bool):
    """(valuation lower bound, exponent) pairs at indices divisible by modulus."""
    out = []
    if isinstance(source, PadicHMF):
        pool = list(source.principal_parts[delta].items()) + list(
            source.coefficients[delta].items()
        )
        for e, c in pool:
            if e % modulus:
                continue
            if isinstance(c, Fraction):
                if derivative:
                    c = e * c
                if c:
                    out.append((_vp(c, p), e))
            else:
                if derivative:
                    c = c * e
                out.append((Fraction(c.valuation_lower_bound()), e))
    else:
        series = source.component(delta)
        for e, c in series.items():
            e = int(e)
            if e % modulus:
                continue
            value = Fraction(c) * (e if derivative else 1)
            if value:
                out.append((_vp(value, p), e))
    return out


def slope_certificate(
    source, delta: int, p: int, depth: int, derivative: bool = False
) -> dict[int, tuple[Fraction, int]]:
    """Per-level rows of the finite-depth slope bound at the cusp delta.

    Row n holds (min valuation over the indices divisible by p^n that the
    source certifies, how many such indices were examined).  For p-adic
    sources the valuations are lower bounds, so the rows certify a lower
    bound for the slope.
    """
    rows = {}
    for n in range(1, depth + 1):
        pairs = _slope_values(source, delta, p, p**n, derivative)
        if not pairs:
            raise ValueError(
                f"no certified index divisible by {p}^{n} at cusp {delta}"
            )
        rows[n] = (min(v for v, _e in pairs), len(pairs))
    return rows


def slope(source, delta: int, p: int, depth: int, derivative: bool = False) -> Fraction:
    """min over 1 <= n <= depth of v_p(U_{p^n} part)/n: the finite-depth slope."""
    rows = slope_certificate(source, delta, p, depth, derivative)
    return min(v / n for n, (v, _count) in rows.items())


# ---------------------------------------------------------------------------
# Eichler-integral decomposition
# ---------------------------------------------------------------------------


def decompose_slope(
    f_alpha: QSeries, g_series: QSeries, p: int
) -> tuple[QSeries, PadicNumber, PadicNumber]:
    """Split off the unbounded-denominator directions E(q) and E(q^p).

    Solves for lambda, mu in Q_p with
    f_alpha - lambda E(q) - mu E(q^p) p-integral through the shared
    window, pinning them at the deepest p-power indices.  When g is
    p-ordinary the distinguished solution has mu = 0.  The returned
    series uses the balanced rational lifts, so its coefficients are
    p-integral up to the certified precision of (lambda, mu).
    """
    window = min(int(f_alpha.window_bound()), int(g_series.window_bound()))
    eichler = lambda n: Fraction(g_series.coefficient(n)) / n  # noqa: E731
    coef = lambda n: Fraction(f_alpha.coefficient(n))  # noqa: E731
    s_max = 0
    while p ** (s_max + 1) < window:
        s_max += 1
    if s_max < 2:
        raise DecompositionError(f"window {window} is too shallow to pin lambda and mu")
    if all(_vp(coef(n), p) >= 0 for n in range(1, window) if coef(n)):
        zero = PadicNumber.zero(p, s_max)
        return f_alpha, zero, zero
    ordinary = _vp(g_series.coefficient(p), p) == 0 if g_series.coefficient(p) else False
    if ordinary:
        lam = coef(p**s_max) / eichler(p**s_max)
        mu = Fraction(0)
        cert_lam, cert_mu = s_max, s_max
    else:
        rows, rhs = [], []
        for s in (s_max, s_max - 1):
            rows.append([eichler(p**s), eichler(p ** (s - 1)) if s else Fraction(0)])
            rhs.append(coef(p**s))
        try:
            lam, mu = solve(rows, rhs)
        except ValueError as exc:
            raise DecompositionError(f"singular pinning system: {exc}") from None
        cert_lam = min(
            s - int(_vp(eichler(p**s) * p**s, p))
            for s in (s_max, s_max - 1)
            if eichler(p**s)
        )
        cert_mu = min(
            s - int(_vp(eichler(p ** (s - 1)) * p**s, p))
            for s in (s_max, s_max - 1)
            if s and eichler(p ** (s - 1))
        )
    guard = max(int(_vp(lam, p) < 0) + 1, 1)
    residual_ok_through = min(cert_lam, cert_mu) - guard
    tilde_dict = {}
    for n in range(1, window):
        r = coef(n) - lam * eichler(n)
        if mu and n % p == 0:
            r -= mu * eichler(n // p)
        if r:
            tilde_dict[n] = r
        v_n = int(_vp(Fraction(n), p))
        if v_n <= residual_ok_through and r and _vp(r, p) < 0:
            raise DecompositionError(
                f"residual keeps a {p}-denominator at index {n}; "
                "no (lambda, mu) bounds the series at this range"
            )
    tilde = QSeries(tilde_dict, window)
    return (
        tilde,
        PadicNumber.from_rational(lam, p, max(cert_lam, 1)),
        PadicNumber.from_rational(mu, p, max(cert_mu, 1)),
    )


# ---------------------------------------------------------------------------
# cuspidal coupling
# ---------------------------------------------------------------------------


def cuspidal_coupling(
    h: ExpansionFamily, g_fam: ExpansionFamily, p: int, n_max: int
) -> dict[int, dict[int, PadicNumber]]:
    """The limit of (h|B_n - h|B_n-conjugate)/(beta - betabar).

    Each schedule weight difference divided by beta - betabar is a
    symmetric function of the roots, hence a plain p-adic number, so the
    limit lands in Q_p.  Coefficients are reported at the precision
    certified by the last two successive differences; the result must have
    vanishing principal parts and a derivative proportional to g, and
    both are asserted.  Requires v_p(beta) > 0 -- with a unit root the
    conjugate schedule diverges, so that branch is refused.
    """
    if n_max < 3:
        raise ValueError("need at least three schedule steps to certify a limit")
    ag_p = _newform_ap(g_fam, p)
    frob = FrobeniusPair(ag_p, p, 4 * (n_max + 6))
    if frob.beta_valuation == 0:
        raise NonConvergentError(
            "cuspidal coupling needs v_p(beta) > 0; the unit-root branch diverges"
        )
    images = {j: (h.hecke_that(p**j) if j else h) for j in range(n_max + 2)}
    root_gap = frob.beta - frob.beta_bar

    def combined(n: int) -> dict[int, dict[int, PadicNumber]]:
        sched = OperatorSchedule(h.level, p, n, frob)
        conj = OperatorSchedule(h.level, p, n, frob, conjugate=True)
        w, wc = sched.weights(), conj.weights()
        # Restrict to the window every T_{p^j} image covers; beyond it the
        # merged sum would silently miss the deepest terms.
        shared = min(
            int(s.window_bound()) for s in h.expansions.values()
        ) // p ** max(w)
        out: dict[int, dict[int, PadicNumber]] = {d: {} for d in h.expansions}
        for j in w:
            diff = (w[j] - wc[j]) / root_gap
            if not diff.y.is_zero():
                raise AssertionError("coupling weight left Q_p")
            scalar = diff.x
            for d, series in images[j].expansions.items():
                for e, c in series.items():
                    if e >= shared:
                        continue
                    term = scalar * Fraction(c)
                    prev = out[d].get(int(e))
                    out[d][int(e)] = term if prev is None else prev + term
        return out

    older = combined(n_max - 2)
    prev = combined(n_max - 1)
    last = combined(n_max)
    capped: dict[int, dict[int, PadicNumber]] = {}
    for d, values in last.items():
        capped[d] = {}
        for e, value in values.items():
            if e not in prev[d] or e not in older[d]:
                continue
            # Convergence here runs at roughly half a digit per step (the
            # roots have valuation 1/2), so one successive gap can land
            # accidentally small.  Certify by the worse of the last two.
            certified = min(
                int((value - prev[d][e]).valuation_lower_bound()),
                int((prev[d][e] - older[d][e]).valuation_lower_bound()),
            )
            if certified < 1:
                # No digit is certified at this exponent yet; reporting it
                # would fabricate precision.  A deeper n_max covers it.
                continue
            value = _cap(value, certified)
            if e < 0 and not value.is_zero():
                raise AssertionError(f"principal part fails to vanish at {d}, {e}")
            capped[d][e] = value
    ratios = []
    g1 = g_fam.component(1)
    for e, value in sorted(capped[1].items()):
        if e <= 0 or len(ratios) >= 5:
            continue
        ag_e = Fraction(g1.coefficient(e))
        if not ag_e:
            continue
        ratios.append(value * Fraction(e) / ag_e)
    for other in ratios[1:]:
        if not ratios[0].congruent(other):
            raise AssertionError("derivative of the coupling is not a multiple of g")
    return capped


# ---------------------------------------------------------------------------
# the p | N construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DividingLevelLimits:
    """The two branch sequences H1_n = F|(1-(pU_p)^n), H2_n conjugated by W_p.

    Branch 1 serves the cusps with (p, D) = 1, branch 2 the others; the
    ``assembled`` accessor applies that selection rule.
    """

    p: int
    branch_near: tuple[ExpansionFamily, ...]
    branch_far: tuple[ExpansionFamily, ...]

    def assembled(self, delta: int) -> QSeries:
        branch = self.branch_near if gcd(self.p, delta) == 1 else self.branch_far
        return branch[-1].component(delta)

    def convergence_valuations(self, p: int | None = None) -> dict[str, list[Fraction]]:
        p = p or self.p
        report = {}
        for name, branch in (("near", self.branch_near), ("far", self.branch_far)):
            mins = []
            for prev, cur in zip(branch, branch[1:]):
                diff = cur + (-1) * prev
                vals = [
                    _vp(c, p)
                    for series in diff.expansions.values()
                    for _e, c in series.items()
                    if c
                ]
                mins.append(min(vals) if vals else Fraction(10**6))
            report[name] = mins
        return report


def build_fp_dividing_level(
    f: ExpansionFamily, p: int, n_max: int
) -> DividingLevelLimits:
    """Piecewise limit data for a prime p exactly dividing the level."""
    if f.level % p or (f.level // p) % p == 0:
        raise ValueError("p must exactly divide the level")
    if f.weight != 0:
        raise ValueError("the construction acts on weight-0 families")

    def tower(base: ExpansionFamily) -> tuple[ExpansionFamily, ...]:
        out = []
        power = base
        for _n in range(1, n_max + 1):
            power = p * power.u_family(p)
            out.append(base + (-1) * power)
        return tuple(out)

    near = tower(f)
    w = f.atkin_lehner(p)
    far = tuple(g.atkin_lehner(p) for g in tower(w))
    return DividingLevelLimits(p, near, far)


# ---------------------------------------------------------------------------
# pairing and shadow
# ---------------------------------------------------------------------------


def _side_coefficient(side, delta: int, n: int):
    if isinstance(side, PadicHMF):
        return side.coefficient(delta, n)
    series = side.component(delta)
    if n >= int(series.window_bound()):
        raise PairingPrecisionError(
            f"expansion at cusp {delta} stops before index {n}"
        )
    return Fraction(series.coefficient(n))


def _side_principal(side, delta: int) -> dict[int, Fraction]:
    if isinstance(side, PadicHMF):
        return {e: c for e, c in side.principal_parts[delta].items() if c}
    series = side.component(delta)
    out = {int(e): Fraction(c) for e, c in series.principal_part().items()}
    c0 = Fraction(series.coefficient(0))
    if c0:
        out[0] = c0
    return out


def pairing_padic(g_like, fp) -> Fraction | PadicNumber:
    """{g, F} = I^-1 sum_D sum_n a_D(-n) b_D(n) from singular supports.

    Contributions arise where either side has nonpositive exponents, so
    a cusp form paired against a p-adic function with rational principal
    parts evaluates exactly; a weakly holomorphic weight-2 slot brings in
    certified p-adic coefficients of the other side.
    """
    level = fp.level
    total = Fraction(0)
    for d in divisors(level):
        for e, c in _side_principal(fp, d).items():
            total = total + c * _side_coefficient(g_like, d, -e)
        for e, c in _side_principal(g_like, d).items():
            if e < 0:
                total = total + c * _side_coefficient(fp, d, -e)
    return total / index_in_sl2z(level)


def shadow(fp: PadicHMF, basis: list[ExpansionFamily]) -> list[Fraction]:
    """Pairings {g_i, F} against a norm-one cusp basis: the shadow weights."""
    return [pairing_padic(g, fp) for g in basis]


# ---------------------------------------------------------------------------
# newform orbits and the multi-shadow duality table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NewformOrbit:
    """A Galois orbit of newforms: its eigenvalue data over Q or Q(sqrt(d)).

    ``trace_fam``/``surd_fam`` carry the two coordinate rows of the
    eigenvalue sequence (surd_fam is None for a rational orbit);
    ``al_sign`` is the Fricke eigenvalue at a prime level.
    """

    label: str
    trace_fam: ExpansionFamily
    surd_fam: ExpansionFamily | None
    d: int
    al_sign: int

    @property
    def rational(self) -> bool:
        return self.surd_fam is None

    def eigenvalue(self, n: int, p: int, precision: int):
        x = Fraction(self.trace_fam.component(1).coefficient(n))
        if self.rational:
            return PadicNumber.from_rational(x, p, precision)
        y = Fraction(self.surd_fam.component(1).coefficient(n))
        ext = Extension(p, 0, -self.d)
        return QuadExtElement.from_pair(ext, x, y, precision)

    def annihilator(self, p: int) -> list[Fraction]:
        """Coefficients of prod over the orbit's conjugates of (a(p) - x).

        Applied as a polynomial in T_p this kills every Eichler integral
        of the orbit; the coefficients are rational because the product
        runs over a full Galois orbit.
        """
        x = Fraction(self.trace_fam.component(1).coefficient(p))
        if self.rational:
            return [x, Fraction(-1)]
        y = Fraction(self.surd_fam.component(1).coefficient(p))
        norm = x * x - self.d * y * y
        return [norm, -2 * x, Fraction(1)]


def newform_orbits(level: int, terms: int | None = None) -> list[NewformOrbit]:
    """The bundled newform rows regrouped into Galois orbits."""
    rows = cusp_basis(level, terms)
    if level == 43:
        return [
            NewformOrbit("43a", rows[0], None, 1, 1),
            NewformOrbit("43b", rows[1], rows[2], 2, -1),
        ]
    raise ValueError(f"no orbit data bundled for level {level}")


def _apply_hecke_polynomial(
    fam: ExpansionFamily, coeffs: list[Fraction], p: int
) -> ExpansionFamily:
    """fam | (c0 + c1 T_p + c2 T_p^2 + ...)."""
    out = coeffs[0] * fam
    power = fam
    for c in coeffs[1:]:
        power = power.hecke_that(p)
        if c:
            out = out + c * power
    return out


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _linear_extend(poly: list, lam) -> list:
    """poly(x) * (lam - x), coefficients in any common scalar structure."""
    out = [lam * poly[0]]
    for k in range(1, len(poly)):
        out.append(lam * poly[k] - poly[k - 1])
    out.append(-poly[-1])
    return out


def _eval_poly(poly: list, x):
    value = poly[-1]
    for c in reversed(poly[:-1]):
        value = value * x + c
    return value


def _hensel_unit_root_ext(a, p: int, precision: int):
    """Unit root of x^2 - a x + p for a unit eigenvalue a in Q_p(sqrt d)."""
    x = a
    for _ in range(precision.bit_length() + 3):
        fx = x * x - a * x + p
        dfx = 2 * x - a
        x = x - fx / dfx
    check = x * x - a * x + p
    if not check.is_zero():
        raise ArithmeticError("Hensel iteration for the orbit root failed")
    return x


class _OrbitFrobenius:
    """Duck-typed stand-in for FrobeniusPair over a quadratic eigenvalue field."""

    def __init__(self, a, p: int, precision: int):
        self.p = p
        self.a_p = a
        self.split = True
        self.beta = _hensel_unit_root_ext(a, p, precision)
        self.beta_bar = self.beta.inverse() * p
        self.beta_valuation = Fraction(0)


def _orbit_limit_coefficient(series_c, t: int, frob, digits: int, window: int):
    """The closed limit formula with an arbitrary coefficient callable."""
    if t <= 0:
        raise ValueError("orbit limits are computed at positive indices")
    p = frob.p
    m, s = _split_index(t, p)
    if m * p ** (s + digits - 1) >= window:
        raise PrecisionError(
            f"index {t} needs {m * p ** (s + digits - 1) + 1} terms, have {window}"
        )
    beta_inv = frob.beta.inverse()
    beta_bar = frob.beta_bar
    acc = None
    h = 0
    while m * p**h < window:
        c = series_c(m * p**h)
        h += 1
        if c is None:
            continue
        inner = None
        for i in range(max(s - h + 1, 0), s + 1):
            term = beta_inv ** (i + 1) * beta_bar ** (h - 1 - s + i)
            inner = term if inner is None else inner + term
        term = inner * c
        acc = term if acc is None else acc + term
    cert = h - s
    if acc is None:
        return PadicNumber.zero(p, max(cert, 1))
    if isinstance(acc, QuadExtElement):
        return _cap_ext(acc, cert)
    return _cap(acc, cert)


def orbit_periods(
    f2_seed: ExpansionFamily, p: int, digits: int, orbits: list[NewformOrbit] | None = None
) -> dict[str, tuple[object, NewformOrbit]]:
    """The canonical p-adic period of each newform orbit on a weight-2 seed.

    The seed's completion is r + sum over all conjugate newforms f of
    alpha_f E_f.  Applying every orbit's Hecke annihilator yields a single
    weakly holomorphic p-integral H; the schedule limit of H built on the
    unit root for one chosen f inverts the factor a_f(p) - T_p, so it
    recovers r|(other factors) + alpha_f kappa_f E_f with kappa_f the
    product of (a_g(p) - a_f(p)) over the remaining conjugates g, and
    alpha_f falls out by comparing coefficients.  Periods of an
    irrational orbit are reported for the chosen embedding; the
    conjugate's period is its conjugate.
    """
    if f2_seed.weight != 2:
        raise ValueError("periods attach to weight-2 seeds")
    if orbits is None:
        orbits = newform_orbits(f2_seed.level)
    if sum(0 if o.rational else 1 for o in orbits) > 1:
        raise ValueError("at most one irrational orbit is supported")
    rational = f2_seed.antiderivative()
    full_poly = [Fraction(1)]
    for orbit in orbits:
        full_poly = _poly_mul(full_poly, orbit.annihilator(p))
    h_full = _apply_hecke_polynomial(rational, full_poly, p)
    window = min(int(s.window_bound()) for s in h_full.expansions.values())
    for series in h_full.expansions.values():
        for _e, c in series.items():
            if Fraction(c).denominator % p == 0:
                raise ValueError("annihilated seed is not p-integral")
    h_series = h_full.component(1)

    def series_c(idx):
        c = Fraction(h_series.coefficient(idx))
        return c if c else None

    work = digits + 16
    total_deg = len(full_poly) - 1
    towers = [rational.component(1)]
    tower_fam = rational
    for _ in range(total_deg - 1):
        tower_fam = tower_fam.hecke_that(p)
        towers.append(tower_fam.component(1))
    out: dict[str, tuple[object, NewformOrbit]] = {}
    for orbit in orbits:
        others = [o for o in orbits if o.label != orbit.label]
        trace1 = orbit.trace_fam.component(1)
        if orbit.rational:
            a_p_int = int(Fraction(trace1.coefficient(p)))
            if a_p_int % p == 0:
                raise NonConvergentError(f"orbit {orbit.label} is not ordinary at {p}")
            frob = FrobeniusPair(a_p_int, p, work)
            poly: list = [Fraction(1)]
            for other in others:
                poly = _poly_mul(poly, other.annihilator(p))
            kappa = _eval_poly(poly, Fraction(a_p_int))
            eigen = lambda n: Fraction(trace1.coefficient(n))  # noqa: E731
        else:
            a_p = orbit.eigenvalue(p, p, work)
            if _vlb(a_p) > 0:
                raise NonConvergentError(f"orbit {orbit.label} is not ordinary at {p}")
            frob = _OrbitFrobenius(a_p, p, work)
            poly = [1]
            for lam in [a_p.conjugate()] + [
                Fraction(o.trace_fam.component(1).coefficient(p)) for o in others
            ]:
                poly = _linear_extend(poly, lam)
            kappa = _eval_poly(poly, a_p)
            eigen = lambda n: orbit.eigenvalue(n, p, work)  # noqa: E731

        def r_value(n):
            total = None
            for k, c in enumerate(poly):
                term = c * Fraction(towers[k].coefficient(n))
                total = term if total is None else total + term
            return total

        alphas = []
        for n in (1, 2, 3):
            a_n = eigen(n)
            if a_n.is_zero() if hasattr(a_n, "is_zero") else not a_n:
                continue
            b_n = _orbit_limit_coefficient(series_c, n, frob, digits, window)
            alphas.append((b_n - r_value(n)) * Fraction(n) / (kappa * a_n))
            if len(alphas) == 2:
                break
        if not (alphas[0] - alphas[1]).is_zero():
            raise RuntimeError("orbit period extraction disagrees between indices")
        out[orbit.label] = (alphas[0], orbit)
    return out


def duality_table_exact(
    basis_f2: dict[tuple[int, int], ExpansionFamily], through: int
) -> dict[tuple[int, int, int, int], Fraction]:
    """A0(m, n; delta, D) when the level carries no weight-2 cusp forms.

    With no newform directions the weight-0 basis member is exactly the
    antiderivative of -m f_{delta,m}, so the table is rational and exact.
    """
    table: dict[tuple[int, int, int, int], Fraction] = {}
    level = next(iter(basis_f2.values())).level
    for (delta, m), fam in basis_f2.items():
        rational = (Fraction(-m) * fam).antiderivative()
        for cusp in divisors(level):
            series = rational.component(cusp)
            for n in range(1, through + 1):
                table[(m, n, delta, cusp)] = Fraction(series.coefficient(n))
    return table


def duality_table(
    basis_f2: dict[tuple[int, int], ExpansionFamily], p: int, digits: int, through: int
) -> dict[tuple[int, int, int, int], PadicNumber]:
    """A0(m, n; delta, D) for the pole-prescribed p-adic weight-0 basis.

    Assembles each basis member from its rational part plus the orbit
    periods: A0 = c(n)/n + sum over orbits of the trace of
    alpha_o lambda_(o,D) a_o(n)/n, a plain p-adic number.
    """
    table: dict[tuple[int, int, int, int], PadicNumber] = {}
    level = next(iter(basis_f2.values())).level
    orbits = newform_orbits(level)
    for (delta, m), fam in basis_f2.items():
        seed = Fraction(-m) * fam
        periods = orbit_periods(seed, p, digits, orbits)
        rational = seed.antiderivative()
        for cusp in divisors(level):
            r_series = rational.component(cusp)
            for n in range(1, through + 1):
                value = None
                for _label, (alpha, orbit) in periods.items():
                    sign = 1 if cusp == 1 else orbit.al_sign
                    a_n = orbit.eigenvalue(n, p, alpha.precision + 8)
                    term = alpha * a_n * Fraction(sign, n)
                    if isinstance(term, QuadExtElement):
                        term = term + term.conjugate()
                        if not term.y.is_zero():
                            raise AssertionError("orbit trace left Q_p")
                        term = term.x
                    value = term if value is None else value + term
                value = value + Fraction(r_series.coefficient(n))
                table[(m, n, delta, cusp)] = value
    return table


# ---------------------------------------------------------------------------
# regularization report
# ---------------------------------------------------------------------------


def regularization_report(
    h: ExpansionFamily, g_fam: ExpansionFamily, p: int, n_max: int
) -> list[dict]:
    """Convergence evidence for the schedule limits, per step n.

    Rows record the minimum valuation of the coefficient differences
    F_(n) - F_(n-1) at every cusp (coefficient-wise convergence), of
    their exponent-weighted versions (convergence of the derivatives
    under the first regularization), and of const(F_n) - C_rho
    (constant-term convergence).
    """
    ag_p = _newform_ap(g_fam, p)
    frob = FrobeniusPair(ag_p, p, 4 * (n_max + 8))
    const_scale = Fraction(1, ag_p - 1 - p)
    targets = {
        d: Fraction(series.coefficient(0)) * const_scale
        for d, series in h.expansions.items()
    }
    states = [OperatorSchedule(h.level, p, n, frob).apply(h) for n in range(1, n_max + 1)]
    rows = []
    for n in range(1, n_max):
        prev_state, cur = states[n - 1], states[n]
        coeff_vals, deriv_vals, const_vals = [], [], []
        for d in cur:
            for e in set(cur[d]) & set(prev_state[d]):
                if e == 0:
                    continue
                v = _vlb(cur[d][e] - prev_state[d][e])
                coeff_vals.append(v)
                deriv_vals.append(v + _vp(Fraction(e), p))
            const_gap = cur[d].get(Fraction(0), PadicNumber.zero(p, 40)) - targets[d]
            const_vals.append(_vlb(const_gap))
        if not coeff_vals:
            raise ValueError(f"series window exhausted at schedule step {n + 1}")
        rows.append(
            {
                "n": n + 1,
                "coefficients": min(coeff_vals),
                "derivative": min(deriv_vals),
                "constants": min(const_vals),
            }
        )
    return rows
