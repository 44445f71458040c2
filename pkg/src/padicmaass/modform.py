"""Cusp-indexed expansion families and Hecke operators on square-free levels.

A weakly holomorphic or harmonic form on Gamma_0(N) with N square-free is
stored as the collection of its q-expansions at the cusps, which are indexed
by the divisors of N: the component at delta is the expansion of F|W_delta at
infinity.  Atkin-Lehner involutions permute the components, the operators
U_ell and V_ell for ell coprime to N act on each component separately, and
the operators attached to primes dividing the level mix the two.  Everything
here is exact rational arithmetic on truncated series.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib.resources import files
from math import gcd, isqrt

import gmpy2

from ._linalg import solve
from .exactnum import PadicNumber
from .qseries import (
    QSeries,
    eisenstein2_difference,
    eta_quotient,
    jfunction,
)


class SynthesisError(ValueError):
    """A requested pole order is not reachable from the generated span."""


class PairingPrecisionError(ValueError):
    """Stored expansions are too short to evaluate a pairing or operator."""


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def al_product(a: int, b: int) -> int:
    """Product in the Atkin-Lehner group of divisors: a*b / gcd(a,b)^2."""
    g = gcd(a, b)
    return a * b // (g * g)


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_squarefree(n: int) -> bool:
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


class ExpansionFamily:
    """
    Expansions of a single form at every cusp of Gamma_0(N), N square-free.

    `expansions` maps each divisor delta of the level to the q-expansion of
    F|W_delta at infinity.  Families are immutable; all operations return new
    instances.
    """

    __slots__ = ("level", "weight", "expansions")

    def __init__(self, level: int, weight: int, expansions: dict[int, QSeries]):
        if level < 1 or not _is_squarefree(level):
            raise ValueError(f"level must be a square-free positive integer, got {level}")
        if weight % 2 != 0:
            raise ValueError(f"weight must be even, got {weight}")
        divs = divisors(level)
        if sorted(expansions) != divs:
            raise ValueError(
                f"component keys {sorted(expansions)} do not match divisors {divs} of level {level}"
            )
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "expansions", dict(expansions))

    def __setattr__(self, name, value):
        raise AttributeError("ExpansionFamily is immutable")

    def component(self, delta: int) -> QSeries:
        return self.expansions[delta]

    def __repr__(self):
        comps = ", ".join(f"{d}: {s!r}" for d, s in sorted(self.expansions.items()))
        return f"ExpansionFamily(level={self.level}, weight={self.weight}, {{{comps}}})"

    # ------------------------------------------------------------------
    # linear structure

    def map_components(self, fn, weight: int | None = None) -> "ExpansionFamily":
        w = self.weight if weight is None else weight
        return ExpansionFamily(self.level, w, {d: fn(d, s) for d, s in self.expansions.items()})

    def __add__(self, other: "ExpansionFamily") -> "ExpansionFamily":
        if not isinstance(other, ExpansionFamily):
            return NotImplemented
        if (self.level, self.weight) != (other.level, other.weight):
            raise ValueError("can only add families of the same level and weight")
        return self.map_components(lambda d, s: s + other.expansions[d])

    def __sub__(self, other: "ExpansionFamily") -> "ExpansionFamily":
        if not isinstance(other, ExpansionFamily):
            return NotImplemented
        return self + (-1) * other

    def __mul__(self, other):
        if isinstance(other, ExpansionFamily):
            if self.level != other.level:
                raise ValueError("can only multiply families of the same level")
            return ExpansionFamily(
                self.level,
                self.weight + other.weight,
                {d: s * other.expansions[d] for d, s in self.expansions.items()},
            )
        return self.map_components(lambda d, s: s * other)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1) * self

    def __eq__(self, other):
        return (
            isinstance(other, ExpansionFamily)
            and self.level == other.level
            and self.weight == other.weight
            and self.expansions == other.expansions
        )

    def __hash__(self):
        return hash((self.level, self.weight, tuple(sorted((d, s) for d, s in self.expansions.items()))))

    def agrees_with(self, other: "ExpansionFamily", through: int | None = None) -> bool:
        """Coefficient-wise agreement on the overlap (or through a stated bound)."""
        if (self.level, self.weight) != (other.level, other.weight):
            return False
        for d in self.expansions:
            a, b = self.expansions[d], other.expansions[d]
            if through is not None:
                a, b = a.truncate(through), b.truncate(through)
            if not a.agrees_with(b):
                return False
        return True

    # ------------------------------------------------------------------
    # differential structure

    def derivative(self) -> "ExpansionFamily":
        """Apply D = q d/dq to every component; raises the weight by 2."""
        return self.map_components(lambda d, s: s.derivative(), weight=self.weight + 2)

    def antiderivative(self) -> "ExpansionFamily":
        """Componentwise inverse of D; every constant term must vanish."""
        return self.map_components(lambda d, s: s.antiderivative(), weight=self.weight - 2)

    # ------------------------------------------------------------------
    # operators

    def atkin_lehner(self, delta: int) -> "ExpansionFamily":
        """W_delta: permute components by D -> D*delta / gcd(D,delta)^2."""
        if delta not in self.expansions:
            raise ValueError(f"{delta} does not divide the level {self.level}")
        return ExpansionFamily(
            self.level,
            self.weight,
            {d: self.expansions[al_product(d, delta)] for d in self.expansions},
        )

    def u_coprime(self, m: int) -> "ExpansionFamily":
        """U_m for m coprime to the level: componentwise coefficient extraction."""
        if gcd(m, self.level) != 1:
            raise ValueError(f"u_coprime requires gcd(m, level) = 1, got m={m}")
        return self.map_components(lambda d, s: s.U(m))

    def v_map(self, m: int) -> "ExpansionFamily":
        """Componentwise q -> q^m on every expansion (no level bookkeeping)."""
        return self.map_components(lambda d, s: s.V(m))

    def u_family(self, ell: int) -> "ExpansionFamily":
        """
        U_ell for a prime ell dividing the level.

        At cusps D with ell coprime to D this is the coefficient extraction
        on the stored component.  At the remaining cusps the expansion is
        not directly visible, and is supplied by the two-term recombination
        that expresses ell^(1-k/2) U_ell W_ell through U_ell V_ell and
        W_ell V_ell on q-expansions:

            (F|U_ell)|W_D = ell^(k/2) (F_{D/ell}|U V) + ell^(k-1) F_D|V
                            - ell^(k/2-1) F_{D/ell}        for ell | D.
        """
        N, k = self.level, self.weight
        if N % ell != 0 or not _is_prime(ell):
            raise ValueError(f"u_family requires a prime divisor of the level, got {ell}")
        half = k // 2
        out: dict[int, QSeries] = {}
        for D, s in self.expansions.items():
            if D % ell != 0:
                out[D] = s.U(ell)
            else:
                s_low = self.expansions[D // ell]
                term_uv = s_low.U(ell).V(ell) * Fraction(ell) ** half
                term_v = s.V(ell) * Fraction(ell) ** (k - 1)
                term_c = s_low * Fraction(ell) ** (half - 1)
                out[D] = term_uv + term_v - term_c
        return ExpansionFamily(N, k, out)

    def hecke_that(self, n: int) -> "ExpansionFamily":
        """
        The level-compatible Hecke operator indexed by n >= 1.

        The part of n coprime to the level acts on each component through
        sum_{d|n'} c(d) U_d V_{n'/d} with c(d) = d^(1-k) for k <= 0 and
        (n'/d)^(k-1) for k >= 2.  Each prime ell dividing both n and the
        level acts (for weights 0 and 2) through the three-term expansion

            ell * (F_{D o ell}|U_ell)|V_ell - F_{D o ell} + ell^(k/2) F_D|V_ell

        at every cusp D, applied once per factor of ell in n.
        """
        if n < 1:
            raise ValueError(f"operator index must be positive, got {n}")
        N, k = self.level, self.weight
        result = self
        n_level = 1
        n_cop = n
        for ell in prime_factors(gcd(n, N)):
            while n_cop % ell == 0:
                n_cop //= ell
                n_level *= ell
                result = result._hecke_level_prime(ell)
        if n_cop > 1:
            result = result._hecke_coprime(n_cop)
        return result

    def _hecke_coprime(self, n: int) -> "ExpansionFamily":
        k = self.weight
        def act(_d, s):
            total = None
            for d in divisors(n):
                if k <= 0:
                    c = Fraction(d) ** (1 - k)
                else:
                    c = Fraction(n // d) ** (k - 1)
                term = s.U(d).V(n // d) * c
                total = term if total is None else total + term
            return total
        return self.map_components(act)

    def _hecke_level_prime(self, ell: int) -> "ExpansionFamily":
        N, k = self.level, self.weight
        if k not in (0, 2):
            raise ValueError(f"level-prime Hecke operators require weight 0 or 2, got {k}")
        half = k // 2
        out: dict[int, QSeries] = {}
        for D in self.expansions:
            flip = self.expansions[al_product(D, ell)]
            term1 = flip.U(ell).V(ell) * ell
            term3 = self.expansions[D].V(ell) * ell**half
            out[D] = term1 - flip + term3
        return ExpansionFamily(N, k, out)

    def trace_down(self, ell: int, adjoint: bool = False) -> "ExpansionFamily":
        """
        Trace to level N/ell for a prime ell || N: 1 + ell^(1-k/2) W_ell U_ell.

        With adjoint=True computes the W_ell-twisted variant
        W_ell + ell^(1-k/2) U_ell instead.  The result lives at level N/ell.
        """
        N, k = self.level, self.weight
        if N % ell != 0 or not _is_prime(ell):
            raise ValueError(f"trace_down requires a prime divisor of the level, got {ell}")
        scale = Fraction(ell) ** (1 - k // 2)
        out: dict[int, QSeries] = {}
        for D in divisors(N // ell):
            if adjoint:
                out[D] = self.expansions[al_product(D, ell)] + self.expansions[D].U(ell) * scale
            else:
                out[D] = self.expansions[D] + self.expansions[al_product(D, ell)].U(ell) * scale
        return ExpansionFamily(N // ell, k, out)

    def viewed_at_level(self, ell: int) -> "ExpansionFamily":
        """
        The same form regarded on the subgroup of level N*ell, ell prime, ell
        coprime to N.  New components: the old expansion at divisors of N,
        and ell^(k/2) F_D|V_ell at divisors divisible by ell.
        """
        N, k = self.level, self.weight
        if not _is_prime(ell) or N % ell == 0:
            raise ValueError(f"viewed_at_level requires a new prime, got {ell} at level {N}")
        out: dict[int, QSeries] = {}
        for D, s in self.expansions.items():
            out[D] = s
            out[D * ell] = s.V(ell) * Fraction(ell) ** (k // 2)
        return ExpansionFamily(N * ell, k, out)

    # ------------------------------------------------------------------
    # inspection

    def constant_terms(self) -> dict[int, Fraction]:
        return {d: Fraction(s.coefficient(0)) for d, s in self.expansions.items()}

    def principal_part(self, delta: int) -> dict[Fraction, Fraction]:
        """Exponent -> coefficient for the strictly negative exponents at delta."""
        s = self.expansions[delta]
        return {e: Fraction(c) for e, c in s.items() if e < 0}

    def check_holomorphic(self) -> None:
        """Raise if any component has a term of exponent <= 0."""
        for d, s in self.expansions.items():
            for e, _c in s.items():
                if e <= 0:
                    raise ValueError(f"component {d} has a term of exponent {e}")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def constant_family(level: int, value, weight: int = 0, terms: int = 25) -> ExpansionFamily:
    """The constant form `value` at every cusp of the given level."""
    return ExpansionFamily(
        level,
        weight,
        {d: QSeries({0: value}, terms) for d in divisors(level)},
    )


def monomial_family(level: int, exponent: int, delta: int = 1, weight: int = 0,
                    terms: int = 25) -> ExpansionFamily:
    """q^exponent at the cusp delta and 0 at all others (a formal test family)."""
    comps = {
        d: QSeries({exponent: 1} if d == delta else {}, terms)
        for d in divisors(level)
    }
    return ExpansionFamily(level, weight, comps)


def eisenstein_family(ell: int, terms: int) -> ExpansionFamily:
    """
    The weight-2 Eisenstein form E2(tau) - ell*E2(ell*tau) at prime level ell,
    which is anti-invariant under W_ell.
    """
    if not _is_prime(ell):
        raise ValueError(f"eisenstein_family requires a prime level, got {ell}")
    phi = eisenstein2_difference(ell, terms)
    return ExpansionFamily(ell, 2, {1: phi, ell: -1 * phi})


def j_family(level: int, terms: int) -> ExpansionFamily:
    """The j-function as a weight-0 family at the given level: j|W_D = j(q^D)."""
    base = jfunction(terms)
    comps = {d: base.V(d).truncate(terms) for d in divisors(level)}
    return ExpansionFamily(level, 0, comps)


def eta_unit_43(terms: int) -> ExpansionFamily:
    """
    The weight-0 unit u = (eta(tau)/eta(43 tau))^4 at level 43: a pole of
    order 7 at infinity, a zero of order 7 at the other cusp, and
    u|W_43 = 43^2 / u.
    """
    u = eta_quotient({1: 4, 43: -4}, terms)
    u_inv = eta_quotient({1: -4, 43: 4}, terms)
    return ExpansionFamily(43, 0, {1: u, 43: u_inv * (43 * 43)})


# ----------------------------------------------------------------------
# pairing and evaluation


def index_in_sl2z(level: int) -> int:
    """[SL2(Z) : Gamma_0(N)] = N * prod_{ell | N} (1 + 1/ell)."""
    idx = Fraction(level)
    for ell in prime_factors(level):
        idx *= Fraction(ell + 1, ell)
    return int(idx)


def bf_pairing(g: ExpansionFamily, f: ExpansionFamily):
    """
    The cusp-form pairing {g, F}: the index-normalised sum over cusps of
    sum_n a^+_D(-n) b_D(n), where a are the coefficients of F and b those
    of g.  Requires g to be stored past every pole order of F.
    """
    if g.level != f.level:
        raise ValueError("pairing requires families at the same level")
    total = Fraction(0)
    for d in g.expansions:
        fs = f.expansions[d]
        gs = g.expansions[d]
        for e, c in fs.items():
            if e > 0:
                continue
            if -e >= gs.window_bound():
                raise PairingPrecisionError(
                    f"component {d} of the pairing partner is only stored through "
                    f"q^{gs.window_bound()} but a pole of order {-e} must be paired"
                )
            total += Fraction(c) * Fraction(gs.coefficient(-e))
    return total / index_in_sl2z(g.level)


def evaluate_at_tate(family: ExpansionFamily, delta: int, q_value,
                     omega=1, tail_valuation_floor: int = 0):
    """
    Evaluate the component at the cusp delta on a Tate parameter.

    For a p-adic q_value (positive valuation) the truncated sum is exact to
    the stated series window: the dropped tail sum_{n >= T} a(n) q^n has
    valuation at least T*v(q) + tail_valuation_floor, where the floor is a
    caller-supplied lower bound on the valuations of the dropped
    coefficients (0 for integral expansions), and the result's precision is
    capped accordingly.  A complex q_value with |q| < 1 is evaluated by the
    same Horner scheme without a certified bound.
    """
    series = family.expansions[delta]
    if series.den != 1:
        raise ValueError("evaluation requires integer exponents")
    terms = sorted((int(e), c) for e, c in series.items())
    if isinstance(q_value, PadicNumber):
        vq = q_value.valuation_lower_bound()
        if q_value.is_zero() or vq <= 0:
            raise ValueError("p-adic evaluation requires positive valuation of q")
        p = q_value.p
        work_prec = q_value.precision + 64
        acc = PadicNumber.zero(p, work_prec)
        prev_exp = None
        for e, c in reversed(terms):
            if prev_exp is not None:
                acc = acc * q_value ** (prev_exp - e)
            acc = acc + PadicNumber.from_rational(Fraction(c), p, work_prec)
            prev_exp = e
        if prev_exp is None:
            return PadicNumber.zero(p, series.trunc * vq + tail_valuation_floor)
        acc = acc * q_value ** prev_exp
        if omega != 1:
            w = omega
            if not isinstance(w, PadicNumber):
                w = PadicNumber.from_rational(Fraction(w), p, work_prec)
            acc = acc * w ** family.weight
        tail_prec = series.trunc * vq + tail_valuation_floor
        cap = min(acc.precision, tail_prec)
        return PadicNumber(p, acc.valuation, acc.unit, cap)
    # complex / float path: plain Horner, no certificate
    q = complex(q_value)
    if abs(q) >= 1:
        raise ValueError("complex evaluation requires |q| < 1")
    acc = complex(0)
    prev_exp = None
    for e, c in reversed(terms):
        if prev_exp is not None:
            acc *= q ** (prev_exp - e)
        acc += complex(Fraction(c))
        prev_exp = e
    if prev_exp is None:
        return complex(0)
    acc *= q ** prev_exp
    return acc * complex(omega) ** family.weight


# ----------------------------------------------------------------------
# basis synthesis


def _singular_support(fams: list[ExpansionFamily]) -> list[tuple[int, int]]:
    """Sorted list of (delta, exponent) pairs with exponent < 0 present anywhere."""
    support = set()
    for fam in fams:
        for d, s in fam.expansions.items():
            for e, _c in s.items():
                if e < 0:
                    support.add((d, int(e)))
    return sorted(support)


def _solve_singular_target(candidates: list[ExpansionFamily],
                           target: dict[tuple[int, int], Fraction]):
    """
    Exact combination of candidates whose full singular part equals `target`
    (a map (delta, exponent<0) -> coefficient).  Returns the family, or None.
    """
    support = _singular_support(candidates)
    for key in target:
        if key not in support:
            support = sorted(set(support) | {key})
    if not support:
        return None
    cols = {key: i for i, key in enumerate(support)}
    matrix = [[Fraction(0)] * len(candidates) for _ in support]
    for j, fam in enumerate(candidates):
        for d, s in fam.expansions.items():
            for e, c in s.items():
                if e < 0:
                    matrix[cols[(d, int(e))]][j] = Fraction(c)
    rhs = [target.get(key, Fraction(0)) for key in support]
    try:
        coeffs = solve(matrix, rhs)
    except ValueError:
        return None
    out = None
    for x, fam in zip(coeffs, candidates):
        if x == 0:
            continue
        out = x * fam if out is None else out + x * fam
    if out is None:
        out = 0 * candidates[0]
    return out


def cusp_basis(level: int, terms: int | None = None) -> list[ExpansionFamily]:
    """
    The bundled integral basis of weight-2 cusp forms at the given level,
    as expansion families.  Newforms over a real quadratic field are split
    into their two rational coordinate rows (trace part and surd part),
    which carry the same Atkin-Lehner signs, so every returned family has
    rational integer coefficients.
    """
    resource = files("padicmaass.data") / f"newforms_{level}.json"
    try:
        payload = json.loads(resource.read_text())
    except FileNotFoundError:
        raise ValueError(f"no bundled newform data for level {level}") from None
    out = []
    for record in payload["newforms"]:
        signs = {int(d): int(w) for d, w in record["atkin_lehner"].items()}
        start = record["an_start"]
        raw = record["an"]
        if terms is not None:
            raw = raw[: max(0, terms - start)]
        if record["field"] == "rational":
            rows = [[Fraction(v) for v in raw]]
        else:
            rows = [[Fraction(v[0]) for v in raw], [Fraction(v[1]) for v in raw]]
        trunc = start + len(raw)
        for row in rows:
            series = QSeries(
                {start + i: c for i, c in enumerate(row) if c}, trunc)
            comps = {}
            for delta in divisors(level):
                eig = 1
                for ell in prime_factors(delta):
                    eig *= signs[ell]
                comps[delta] = eig * series
            out.append(ExpansionFamily(level, 2, comps))
    return out


_POOL_43_IMAGES = ((1, 2), (1, 3), (2, 2), (2, 3))  # (eta power, Hecke index)


def _pool_43(holomorphic: list[ExpansionFamily], max_pole: int,
             window: int) -> list[ExpansionFamily]:
    """
    Weight-2 candidates at level 43 spanning every pole profile
    q^-m + O(1) at infinity, m <= max_pole, holomorphic at the other cusp.

    Rungs: the Eisenstein form and each cusp basis element, times powers of
    the eta unit (pole orders 7k at infinity, zeros of the same order at
    the other cusp), plus Hecke images of index 2 and 3 of the first two
    rungs of each tower.  The images are what make pole orders away from
    multiples of 7 reachable: their U-parts lead at orders ceil(7k/n) with
    full tails, while their V-parts stay supported on exponents divisible
    by n, so the two prime indices together fill all residues.  All four
    cusp towers are needed: the tail corrections below the leading pole
    span only when the multipliers cover the whole holomorphic space.
    """
    bases = [eisenstein_family(43, window)] + [
        b.map_components(lambda _d, s: s.truncate(window)) for b in holomorphic
    ]
    kmax = max(7, (max_pole + 7) // 7 + 1)
    upow = {1: eta_unit_43(window)}
    for k in range(2, kmax + 1):
        upow[k] = upow[k - 1] * upow[1]
    pool = []
    for b in bases:
        pool.append(b)
        for k in range(1, kmax + 1):
            pool.append(b * upow[k])
    for b in bases:
        for k, n in _POOL_43_IMAGES:
            pool.append((b * upow[k]).hecke_that(n))
    return pool


def _ladder_level_one(max_pole: int, terms: int) -> list[ExpansionFamily]:
    """Weight-2 candidates at level 1: -Dj times powers of j."""
    window = terms + max_pole + 1
    base = -1 * j_family(1, window).derivative()
    jf = j_family(1, window)
    candidates = [base]
    power = base
    for _a in range(1, max_pole):
        power = power * jf
        candidates.append(power)
    return candidates


def _ladder_generic(level: int, max_pole: int, holomorphic: list[ExpansionFamily],
                    terms: int) -> list[ExpansionFamily]:
    """Products of a holomorphic weight-2 basis with monomials in j and j(q^N)."""
    window = terms + (level + 1) * max_pole + 1
    jf = j_family(level, window)
    jn = jf.atkin_lehner(level)
    candidates = []
    for b in holomorphic:
        pow_a = b.map_components(lambda _d, s: s.truncate(window))
        for a in range(max_pole + 1):
            pow_c = pow_a
            for c in range(max_pole + 1):
                candidates.append(pow_c)
                pow_c = pow_c * jn
            pow_a = pow_a * jf
    return candidates


def synthesize_m2_basis(level: int, max_pole: int,
                        holomorphic: list[ExpansionFamily] | None = None,
                        terms: int = 60) -> dict[tuple[int, int], ExpansionFamily]:
    """
    Weight-2 families f_{delta,m} = q^-m + O(1) at the cusp delta and O(1)
    elsewhere, for every divisor delta of the level and 1 <= m <= max_pole,
    with all constant terms cleared.  Raises SynthesisError naming the first
    (delta, m) whose pole profile is not reachable from the generated span.
    """
    if max_pole < 0:
        raise ValueError("max_pole must be nonnegative")
    if max_pole == 0:
        return {}
    def finish(fam: ExpansionFamily, m: int) -> ExpansionFamily:
        fam = _clear_constants(fam)
        short = min(int(s.window_bound()) for s in fam.expansions.values())
        if short < terms:
            raise SynthesisError(
                f"synthesized form for pole {m} carries only {short} terms; "
                f"a deeper holomorphic basis is needed for {terms}"
            )
        return fam.map_components(lambda _d, s: s.truncate(terms))

    out: dict[tuple[int, int], ExpansionFamily] = {}
    if level == 43:
        if max_pole >= 43:
            raise SynthesisError("pole orders past 42 at level 43 need a longer ladder")
        if holomorphic is None:
            holomorphic = cusp_basis(43)
        # The pool members that pass through a U_3 keep a third of the
        # window, so the pool is built 3x oversized.
        candidates = _pool_43(holomorphic, max_pole, 3 * terms + 64)
    elif level == 1:
        candidates = _ladder_level_one(max_pole, terms)
    elif holomorphic:
        candidates = _ladder_generic(level, max_pole, holomorphic, terms)
    else:
        raise SynthesisError(
            f"synthesis at level {level} needs a holomorphic weight-2 basis"
        )
    for m in range(1, max_pole + 1):
        fam = _solve_singular_target(candidates, {(1, -m): Fraction(1)})
        if fam is None:
            raise SynthesisError(f"pole order {m} at cusp 1 is unreachable: missing (1, {m})")
        out[(1, m)] = finish(fam, m)
    for m in range(1, max_pole + 1):
        _check_synthesized(out[(1, m)], m)
        for delta in divisors(level)[1:]:
            out[(delta, m)] = out[(1, m)].atkin_lehner(delta)
    return out


def _check_synthesized(fam: ExpansionFamily, m: int) -> None:
    """Certify the contract of f_{1,m} by direct inspection of its terms."""
    pp = fam.principal_part(1)
    if pp != {Fraction(-m): Fraction(1)}:
        raise SynthesisError(f"synthesized form for pole {m} has principal part {pp}")
    for d in fam.expansions:
        if d != 1 and fam.principal_part(d):
            raise SynthesisError(
                f"synthesized form for pole {m} has a spurious pole at cusp {d}"
            )
    if any(c != 0 for c in fam.constant_terms().values()):
        raise SynthesisError(f"synthesized form for pole {m} has constants {fam.constant_terms()}")


def _clear_constants(fam: ExpansionFamily) -> ExpansionFamily:
    """
    Remove the constant terms of a weight-2 family, using the Eisenstein
    form at prime level when one constant adjustment is needed.  At level 1
    the constant vanishes automatically; elsewhere the residue theorem makes
    the constants sum to zero across cusps, so at prime level a single
    Eisenstein multiple clears both.
    """
    consts = fam.constant_terms()
    if all(c == 0 for c in consts.values()):
        return fam
    if fam.level == 1:
        raise ValueError("a level-one weight-2 form with a pole cannot have a constant term")
    if not _is_prime(fam.level):
        raise SynthesisError(
            f"constant clearing is only implemented at prime level, got {fam.level}"
        )
    window = int(min(s.window_bound() for s in fam.expansions.values()))
    e_fam = eisenstein_family(fam.level, window)
    scale = Fraction(consts[1]) / Fraction(e_fam.constant_terms()[1])
    out = fam - scale * e_fam
    if any(c != 0 for c in out.constant_terms().values()):
        raise SynthesisError(
            f"constants {out.constant_terms()} at level {fam.level} could not be cleared"
        )
    return out


def weight0_duality_form(level: int, delta: int, m: int, terms: int = 60,
                         basis: dict[tuple[int, int], ExpansionFamily] | None = None
                         ) -> ExpansionFamily:
    """
    The weight-0 form with principal part q^-m + O(q) at the cusp delta and
    O(q) at every other cusp, obtained by antidifferentiating the weight-2
    synthesis output: F = -m * D^(-1) f_{delta,m}.
    """
    if basis is None:
        basis = synthesize_m2_basis(level, m, terms=terms)
    fam = basis[(delta, m)]
    return (-m) * fam.antiderivative()


def fricke_seed(f11: ExpansionFamily, g_fam: ExpansionFamily,
                a1: Fraction = Fraction(2)) -> ExpansionFamily:
    """
    The Fricke-invariant weight-2 form with principal part -q^-1 at both
    cusps, zero constants, and prescribed coefficient a(1).

    Symmetrizing f_{1,1} under the Fricke involution puts the simple pole
    at both cusps; what remains undetermined is a multiple of the given
    Fricke-invariant rational newform, which the a(1) convention pins.
    """
    if f11.level == 1 or not _is_prime(f11.level):
        raise ValueError("the seed construction is for prime levels")
    sym = -1 * (f11 + f11.atkin_lehner(f11.level))
    shift = Fraction(a1) - Fraction(sym.component(1).coefficient(1))
    return sym + shift * g_fam
