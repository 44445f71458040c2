"""Weight-2 modular symbols for Gamma0(N), used as the independent
oracle when generating the newform fixtures under src/padicmaass/data/.

Implements Manin symbols on P^1(Z/NZ) with the two- and three-term
relations, the boundary map to cusps, and Hecke operators via Merel's
matrices (Stein, "Modular Forms: A Computational Approach", ch. 8).
Everything is exact over Fraction; the spaces involved are tiny
(dim <= 10), so no attempt is made to be fast beyond avoiding symbolic
overhead.
"""

from __future__ import annotations

from bisect import bisect_left
from fractions import Fraction
from math import gcd

from padicmaass._linalg import inverse, nullspace, rref


def gcdex(a: int, b: int) -> tuple[int, int, int]:
    """Return (x, y, g) with a*x + b*y == g = gcd(a, b)."""
    if b == 0:
        return (-1, 0, -a) if a < 0 else (1, 0, a)
    q, r = divmod(a, b)
    x, y, g = gcdex(b, r)
    return y, x - y * q, g


def lift_unit(n: int, d: int, a: int) -> int:
    """Lift a unit a modulo d | n to a unit modulo n."""
    u, v = 1, n
    g = gcd(v, d)
    while g > 1:
        u *= g
        v //= g
        g = gcd(v, g)
    x, y, _ = gcdex(u, v)
    return (u * x + a * y * v) % n


class P1:
    """Representatives for the projective line P^1(Z/NZ)."""

    def __init__(self, N: int):
        self.N = N
        reps = set()
        for u in range(N):
            for v in range(N):
                try:
                    reps.add(self.reduce((u, v)))
                except ValueError:
                    continue
        self._list = sorted(reps)

    def __len__(self):
        return len(self._list)

    def __iter__(self):
        return iter(self._list)

    def __getitem__(self, i):
        return self._list[i]

    def reduce(self, p: tuple[int, int]) -> tuple[int, int]:
        N = self.N
        u, v = p[0] % N, p[1] % N
        if u == 0:
            if gcd(N, v) == 1:
                return 0, 1
            raise ValueError("not a projective point")
        _, s, g = gcdex(N, u)
        if gcd(g, v) > 1:
            raise ValueError("not a projective point")
        s = lift_unit(N, N // g, s)
        u, v = g, (s * v) % N
        if g == 1:
            return 1, v
        v = min((v * t) % N for t in range(1, N, N // g) if gcd(N, t) == 1)
        return g, v

    def index(self, p: tuple[int, int]) -> int:
        p0 = self.reduce(p)
        i = bisect_left(self._list, p0)
        if i != len(self._list) and self._list[i] == p0:
            return i
        raise ValueError("not a projective point")


def merel(n: int):
    """Merel's matrices of determinant n (Stein, Algorithm 8.x)."""
    for a in range(1, n + 1):
        for d in range((n + a - 1) // a, n + 2 - a):
            bc = a * d - n
            if bc == 0:
                for b in range(a):
                    yield a, b, 0, d
                for c in range(1, d):
                    yield a, 0, c, d
            else:
                for b in range((bc - 1) // (d - 1) + 1, a):
                    if bc % b == 0:
                        yield a, b, bc // b, d


class ModularSymbols2:
    """Weight-2 modular symbols for Gamma0(N) and the Hecke action."""

    def __init__(self, N: int):
        self.N = N
        self.p1 = P1(N)
        n = len(self.p1)

        # Relations x + xS = 0 and x + xT + xT^2 = 0 on Manin symbols.
        relations = []
        for c, d in self.p1:
            row = [Fraction(0)] * n
            row[self.p1.index((c, d))] += 1
            row[self.p1.index((d, -c))] += 1
            relations.append(row)
            row = [Fraction(0)] * n
            row[self.p1.index((c, d))] += 1
            row[self.p1.index((d, -c - d))] += 1
            row[self.p1.index((-c - d, c))] += 1
            relations.append(row)

        reduced, pivots = rref(relations)
        self.free = [j for j in range(n) if j not in pivots]

        # Column j of rel maps Manin symbol j to free-generator coordinates.
        self.rel = [[Fraction(0)] * n for _ in self.free]
        for e, col in enumerate(pivots):
            for row, j in enumerate(self.free):
                self.rel[row][col] = -reduced[e][j]
        for row, col in enumerate(self.free):
            self.rel[row][col] = Fraction(1)

    def dim(self) -> int:
        return len(self.free)

    def symbol_coords(self, c: int, d: int) -> list[Fraction]:
        j = self.p1.index((c, d))
        return [self.rel[i][j] for i in range(self.dim())]

    def cuspidal_basis(self) -> list[list[Fraction]]:
        """Basis (as columns over free generators) of the kernel of the
        boundary map to cusps."""
        cusps: list[tuple[int, int]] = []

        def cusp_index(u: int, v: int) -> int:
            for i, (u2, v2) in enumerate(cusps):
                s1 = gcdex(u, v)[0]
                s2 = gcdex(u2, v2)[0]
                if (s1 * v2 - s2 * v) % gcd(self.N, (v * v2) % self.N or self.N) == 0:
                    return i
            cusps.append((u, v))
            return len(cusps) - 1

        entries: dict[tuple[int, int], Fraction] = {}
        for col, e in enumerate(self.free):
            c, d = self.p1[e]
            a, b, g = gcdex(d, -c)
            assert g == 1
            entries[(cusp_index(a, c), col)] = entries.get((cusp_index(a, c), col), Fraction(0)) + 1
            entries[(cusp_index(b, d), col)] = entries.get((cusp_index(b, d), col), Fraction(0)) - 1

        boundary = [[Fraction(0)] * self.dim() for _ in range(len(cusps))]
        for (i, j), v in entries.items():
            boundary[i][j] = v
        return nullspace(boundary)


class CuspidalSpace:
    """Cuspidal weight-2 modular symbols with exact Hecke matrices."""

    def __init__(self, N: int):
        self.parent = ModularSymbols2(N)
        self.basis = self.parent.cuspidal_basis()  # rows: coordinate vectors
        self.dim = len(self.basis)
        # Pick pivot coordinates making the basis matrix invertible.
        cols = [list(col) for col in zip(*self.basis)]  # free_dim x dim
        _, piv = rref([list(row) for row in self.basis])
        self.pivot_rows = piv
        square = [[cols[r][j] for j in range(self.dim)] for r in piv]
        self.solver = inverse(square)
        self._cols = cols

    def apply_hecke(self, n: int, vec: list[Fraction]) -> list[Fraction]:
        """Apply T_n to a vector in cuspidal coordinates."""
        parent = self.parent
        N = parent.N
        free_dim = parent.dim()
        # Lift to free-generator coordinates.
        lifted = [Fraction(0)] * free_dim
        for j, x in enumerate(vec):
            if x:
                for i in range(free_dim):
                    lifted[i] += x * self._cols[i][j]
        out = [Fraction(0)] * free_dim
        for p, q, r, s in merel(n):
            for e_idx, e in enumerate(parent.free):
                x = lifted[e_idx]
                if not x:
                    continue
                c, d = parent.p1[e]
                c1 = (p * c + r * d) % N
                d1 = (q * c + s * d) % N
                if gcd(N, gcd(c1, d1)) > 1:
                    continue
                coords = parent.symbol_coords(c1, d1)
                for i in range(free_dim):
                    if coords[i]:
                        out[i] += x * coords[i]
        # Express back in cuspidal coordinates via the pivot solver.
        picked = [out[r] for r in self.pivot_rows]
        result = [
            sum(self.solver[i][k] * picked[k] for k in range(self.dim))
            for i in range(self.dim)
        ]
        # Consistency: the image must lie in the cuspidal subspace.
        for i in range(free_dim):
            recon = sum(self._cols[i][j] * result[j] for j in range(self.dim))
            assert recon == out[i], "Hecke image left the cuspidal subspace"
        return result

    def hecke_matrix(self, n: int) -> list[list[Fraction]]:
        cols = []
        for j in range(self.dim):
            e = [Fraction(0)] * self.dim
            e[j] = Fraction(1)
            cols.append(self.apply_hecke(n, e))
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]


def eigenvalue_on_line(space: CuspidalSpace, vec: list[Fraction], n: int) -> Fraction:
    """a with T_n vec = a vec, asserting vec really is an eigenvector."""
    image = space.apply_hecke(n, vec)
    k = next(i for i, x in enumerate(vec) if x)
    a = image[k] / vec[k]
    assert all(image[i] == a * vec[i] for i in range(space.dim)), "not an eigenvector"
    return a


def eigenvalue_on_plane(
    space: CuspidalSpace, vec: list[Fraction], tvec: list[Fraction], n: int
) -> tuple[Fraction, Fraction]:
    """(x, y) with T_n vec = x vec + y T vec on a 2-dimensional
    Hecke-stable plane where T acts with irreducible quadratic minimal
    polynomial (so the Hecke algebra there is Q[T])."""
    image = space.apply_hecke(n, vec)
    rows = [[vec[i], tvec[i]] for i in range(space.dim)]
    # Solve the overdetermined 2-unknown system exactly.
    idx = [i for i in range(space.dim) if vec[i] or tvec[i]]
    i0 = idx[0]
    i1 = next(i for i in idx if vec[i0] * tvec[i] != vec[i] * tvec[i0])
    det = vec[i0] * tvec[i1] - vec[i1] * tvec[i0]
    x = (image[i0] * tvec[i1] - image[i1] * tvec[i0]) / det
    y = (vec[i0] * image[i1] - vec[i1] * image[i0]) / det
    for i in range(space.dim):
        assert image[i] == x * rows[i][0] + y * rows[i][1], "plane is not Hecke-stable"
    return x, y
