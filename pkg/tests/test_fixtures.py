"""Validation of the shipped newform / basis / half-integral data files.

These tests pin the values the rest of the package treats as ground
truth: printed expansions, Atkin-Lehner signs, Hecke-field data, and
the lattice properties of the stored cusp-form bases.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

import pytest

from padicmaass.qseries import eta_quotient


def load(name: str) -> dict:
    return json.loads(resources.files("padicmaass.data").joinpath(name).read_text())


@pytest.fixture(scope="module")
def level43() -> dict:
    return load("newforms_43.json")


@pytest.fixture(scope="module")
def level26() -> dict:
    return load("newforms_26.json")


class TestLevel43:
    def test_rational_form_printed_expansion(self, level43):
        g = level43["newforms"][0]
        an = [int(x) for x in g["an"]]
        assert an[:9] == [1, -2, -2, 2, -4, 4, 0, 0, 1]
        assert an[42] == -1
        assert g["atkin_lehner"] == {"43": 1}
        assert len(an) >= 2199

    def test_quadratic_form_values(self, level43):
        h = level43["newforms"][1]
        assert h["d"] == 2 and h["disc"] == 8
        an = [tuple(int(v) for v in pair) for pair in h["an"]]
        assert an[0] == (1, 0)
        assert an[1] == (0, 1)
        assert an[2] == (0, -1)
        assert an[42] == (1, 0)
        assert h["atkin_lehner"] == {"43": -1}
        # multiplicativity spot checks: a6 = a2*a3 = -2, a4 = a2^2 - 2 = 0
        assert an[5] == (-2, 0)
        assert an[3] == (0, 0)

    def test_weil_bounds(self, level43):
        h = level43["newforms"][1]
        an = [tuple(int(v) for v in pair) for pair in h["an"]]
        for p in (2, 3, 5, 7, 11, 13, 101, 293):
            x, y = an[p - 1]
            # (x + y sqrt2)^2 <= 4p in both embeddings <=> x^2+2y^2+2|xy|sqrt2 <= 4p
            assert (x * x + 2 * y * y - 4 * p) ** 2 >= 8 * x * x * y * y or x * x + 2 * y * y <= 4 * p

    def test_basis_is_echelon_and_contains_eigenforms(self, level43):
        basis = [[int(x) for x in row] for row in level43["s2_basis"]["rows"]]
        pivots = level43["s2_basis"]["pivots"]
        assert pivots == [1, 2, 3]
        # Hermite shape: leading zeros before each pivot, and entries
        # above a pivot reduced into [0, pivot).
        for i, row in enumerate(basis):
            assert row[pivots[i] - 1] > 0
            assert not any(row[: pivots[i] - 1])
            for j in range(i):
                assert 0 <= basis[j][pivots[i] - 1] < row[pivots[i] - 1]
        # integral membership: each eigenform component series is an
        # integer combination of the basis rows (solve at the pivots).
        g = [int(x) for x in level43["newforms"][0]["an"]]
        h = [tuple(int(v) for v in pair) for pair in level43["newforms"][1]["an"]]
        terms = len(basis[0])
        for series in (g[:terms], [v[0] for v in h][:terms], [v[1] for v in h][:terms]):
            coords = []
            residual = list(series)
            for row, p in zip(basis, pivots):
                c = Fraction(residual[p - 1], row[p - 1])
                assert c.denominator == 1
                coords.append(int(c))
                residual = [a - int(c) * b for a, b in zip(residual, row)]
            assert not any(residual)

    def test_basis_row3_pivot_two_is_saturated(self, level43):
        """The diag-2 pivot is genuine: no integral form has a1=a2=0, a3 odd."""
        basis = [[int(x) for x in row] for row in level43["s2_basis"]["rows"]]
        # A dependency mod 2 among the rows would produce one; check rank mod 2.
        rows2 = [[v % 2 for v in row] for row in basis]
        r = 0
        for c in range(len(rows2[0])):
            piv = next((i for i in range(r, 3) if rows2[i][c]), None)
            if piv is None:
                continue
            rows2[r], rows2[piv] = rows2[piv], rows2[r]
            for i in range(3):
                if i != r and rows2[i][c]:
                    rows2[i] = [(a + b) % 2 for a, b in zip(rows2[i], rows2[r])]
            r += 1
        assert r == 3


class TestLevel26:
    def test_forms_and_signs(self, level26):
        a, b = level26["newforms"]
        an_a = [int(x) for x in a["an"]]
        an_b = [int(x) for x in b["an"]]
        assert an_a[0] == 1 and an_a[1] == -1
        assert an_b[0] == 1 and an_b[1] == 1
        assert a["atkin_lehner"] == {"2": 1, "13": -1}
        assert b["atkin_lehner"] == {"2": -1, "13": 1}
        # p | N: |a_p| = 1 at multiplicative primes
        assert abs(an_a[12]) == 1 and abs(an_b[12]) == 1

    def test_basis(self, level26):
        basis = [[int(x) for x in row] for row in level26["s2_basis"]["rows"]]
        assert level26["s2_basis"]["pivots"] == [1, 2]
        assert basis[0][0] == 1 and basis[0][1] == 0
        assert basis[1][0] == 0 and basis[1][1] == 1
        an_a = [int(x) for x in level26["newforms"][0]["an"]]
        # 26a = row1 - row2 (echelon coordinates are its first two coefficients)
        combo = [x - y for x, y in zip(basis[0], basis[1])]
        assert combo == an_a[: len(combo)]


def test_level_11_eta_product():
    data = load("newforms_11.json")
    form = data["newforms"][0]
    an = [int(x) for x in form["an"]]
    assert form["atkin_lehner"] == {"11": -1}
    eta = eta_quotient({1: 2, 11: 2}, 300)
    for n in range(1, 300):
        assert eta.coefficient(n) == an[n - 1]


def test_level_23_hecke_field():
    data = load("newforms_23.json")
    form = data["newforms"][0]
    assert form["d"] == 5 and form["disc"] == 5
    x, y = (Fraction(v) for v in form["ap"]["2"])
    # a_2 = x + y sqrt5 satisfies a^2 + a - 1 = 0
    assert x * x + 5 * y * y + x - 1 == 0
    assert 2 * x * y + y == 0
    assert form["atkin_lehner"]["23"] in (1, -1)


def test_half_integral_series():
    data = load("half_integral_43.json")
    assert data["level"] == 43
    assert (data["weight_numerator"], data["weight_denominator"]) == (3, 2)
    ghat = data["series"]["ghat"]
    gq = data["series"]["gq"]
    assert ghat["trunc"] == 30 and gq["trunc"] == 30
    # plus-space support: exponents are 0 or 3 mod 4
    for series in (ghat, gq):
        for k in series["coeffs"]:
            assert int(k) % 4 in (0, 3)
    assert ghat["coeffs"]["3"] == "1"
    assert min(int(k) for k in ghat["coeffs"]) == 3
    assert gq["coeffs"]["-1"] == "1" and gq["coeffs"]["0"] == "-1"
    shared = {"7", "8", "12", "19", "20", "27", "28"}
    assert shared <= set(gq["coeffs"]) and shared <= set(ghat["coeffs"])
