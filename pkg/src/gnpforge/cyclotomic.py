"""Exact arithmetic in Z[zeta_p], pi-adic valuations and Newton polygons.

A :class:`CyclotomicInteger` stores coordinates in the power basis
``1, zeta, ..., zeta^{p-2}``.  Valuations are normalised so that ``v(zeta - 1) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, IntegralityError
from .ffield import require_prime


class _Infinity:
    """The valuation of zero.  Compares greater than every number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __truediv__(self, other):
        return self

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def v_p(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("v_p(0) is infinite")
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _reduce_cyclic(c: Sequence[int], p: int) -> tuple[int, ...]:
    """Map coefficients of 1..zeta^{p-1} to the power basis of length p-1."""
    top = c[p - 1]
    return tuple(int(c[i]) - top for i in range(p - 1))


@dataclass(frozen=True)
class CyclotomicInteger:
    p: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != max(self.p - 1, 1):
            raise InputError(f"need {self.p - 1} coordinates for p={self.p}")

    # constructors ---------------------------------------------------------
    @classmethod
    def from_int(cls, p: int, n: int) -> "CyclotomicInteger":
        return cls(p, (n,) + (0,) * (max(p - 1, 1) - 1))

    @classmethod
    def zeta(cls, p: int, k: int = 1) -> "CyclotomicInteger":
        counts = [0] * p
        counts[k % p] = 1
        return from_counts(p, counts)

    # ring -----------------------------------------------------------------
    def _cyclic(self) -> list[int]:
        if self.p == 2:
            return [self.coords[0], 0]
        return list(self.coords) + [0]

    def __add__(self, other):
        other = self._coerce(other)
        return CyclotomicInteger(self.p, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInteger(self.p, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        p = self.p
        if p == 2:
            return CyclotomicInteger(2, (self.coords[0] * other.coords[0],))
        out = [0] * p
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(other.coords):
                    out[(i + j) % p] += a * b
        return CyclotomicInteger(p, _reduce_cyclic(out, p))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = CyclotomicInteger.from_int(self.p, 1)
        for _ in range(e):
            result = result * self
        return result

    def exact_div(self, n: int) -> "CyclotomicInteger":
        """Divide by a nonzero integer; the power basis is a Z-basis, so every coordinate must divide."""
        if any(c % n for c in self.coords):
            raise IntegralityError(f"{self} is not divisible by {n} in Z[zeta_{self.p}]")
        return CyclotomicInteger(self.p, tuple(c // n for c in self.coords))

    def _coerce(self, other) -> "CyclotomicInteger":
        if isinstance(other, int):
            return CyclotomicInteger.from_int(self.p, other)
        if isinstance(other, CyclotomicInteger):
            if other.p != self.p:
                raise TypeError(f"mixing Z[zeta_{self.p}] and Z[zeta_{other.p}]")
            return other
        raise TypeError(f"cannot combine CyclotomicInteger with {type(other).__name__}")

    def is_zero(self) -> bool:
        return not any(self.coords)

    def galois(self, a: int) -> "CyclotomicInteger":
        """Image under zeta -> zeta^a, a prime to p."""
        p = self.p
        if a % p == 0:
            raise InputError("Galois exponent must be prime to p")
        if p == 2:
            return self
        out = [0] * p
        for i, c in enumerate(self.coords):
            out[(i * a) % p] += c
        return CyclotomicInteger(p, _reduce_cyclic(out, p))

    def conjugate(self) -> "CyclotomicInteger":
        return self.galois(-1)

    def norm(self) -> int:
        """Absolute norm N_{Q(zeta_p)/Q}, as the resultant Res(Phi_p, a)."""
        if self.p == 2:
            return self.coords[0]
        return resultant([1] * self.p, list(self.coords))

    def pi_basis(self) -> tuple[int, ...]:
        """Coordinates in the basis 1, (zeta-1), ..., (zeta-1)^{p-2}."""
        return tuple(pi_basis_matrix(self.p) @ np.array(self.coords, dtype=object))

    def __repr__(self) -> str:
        return f"Z[zeta_{self.p}]{list(self.coords)}"

    def to_json(self) -> list[int]:
        return list(self.coords)


def from_counts(p: int, counts: Sequence[int]) -> CyclotomicInteger:
    """``sum_t counts[t] * zeta^t`` in reduced form."""
    if len(counts) != p:
        raise InputError(f"from_counts needs {p} counts, got {len(counts)}")
    if p == 2:
        return CyclotomicInteger(2, (int(counts[0]) - int(counts[1]),))
    return CyclotomicInteger(p, _reduce_cyclic([int(c) for c in counts], p))


# --------------------------------------------------------------------------
# resultant and valuations
# --------------------------------------------------------------------------

def _bareiss_det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def resultant(f: Sequence[int], g: Sequence[int]) -> int:
    """Res(f, g) of integer polynomials (low -> high) via the Sylvester determinant."""
    f = list(f)
    g = list(g)
    while f and f[-1] == 0:
        f.pop()
    while g and g[-1] == 0:
        g.pop()
    if not f or not g:
        return 0
    m, n = len(f) - 1, len(g) - 1
    if m == 0 and n == 0:
        return 1
    size = m + n
    rows = []
    for i in range(n):
        row = [0] * size
        for j, c in enumerate(reversed(f)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [0] * size
        for j, c in enumerate(reversed(g)):
            row[i + j] = c
        rows.append(row)
    return _bareiss_det(rows)


def pi_valuation(a: CyclotomicInteger) -> int | _Infinity:
    """v_pi(a) = v_p(N(a)), normalised by v_pi(zeta - 1) = 1."""
    if a.is_zero():
        return INF
    return v_p(a.norm(), a.p)


def pi_valuation_fast(a: CyclotomicInteger) -> int | _Infinity:
    """Same value as :func:`pi_valuation`, read off the (zeta-1)-adic coordinates."""
    if a.is_zero():
        return INF
    p = a.p
    return min(k + (max(p - 1, 1)) * v_p(b, p) for k, b in enumerate(a.pi_basis()) if b)


def residue(a: CyclotomicInteger, v: int) -> int:
    """The class in F_p of a / (zeta-1)^v, assuming v_pi(a) >= v (0 if v_pi(a) > v).

    Uses p = -(zeta-1)^{p-1} * (unit congruent to 1 mod (zeta-1)).
    """
    p = a.p
    e, k = divmod(v, max(p - 1, 1))
    b = a.pi_basis()
    if p == 2:
        k, e = 0, v
    for i, c in enumerate(b):
        if c and i + max(p - 1, 1) * v_p(c, p) < v:
            raise InputError(f"v_pi(a) < {v}; residue undefined")
    c = b[k]
    if c % p ** e:
        return 0
    return (c // p ** e) * (-1) ** e % p


_PI_BASIS_CACHE: dict[int, np.ndarray] = {}


def pi_basis_matrix(p: int) -> np.ndarray:
    """Integer matrix T with (zeta-1)-coordinates = T @ power-basis coordinates."""
    if p not in _PI_BASIS_CACHE:
        n = max(p - 1, 1)
        t = np.zeros((n, n), dtype=object)
        for i in range(n):
            for k in range(i + 1):
                t[k, i] = comb(i, k)
        if p == 2:
            t[0, 0] = 1
        _PI_BASIS_CACHE[p] = t
    return _PI_BASIS_CACHE[p]


# --------------------------------------------------------------------------
# batched arithmetic (rows of power-basis coordinates, int64)
# --------------------------------------------------------------------------

_LIMIT = 1 << 62


def batch_mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Row-wise products in Z[zeta_p]; ``a``, ``b`` have shape (n, p-1)."""
    if p == 2:
        return a * b
    amax = int(np.abs(a).max(initial=0))
    bmax = int(np.abs(b).max(initial=0))
    if amax * bmax * (p - 1) >= _LIMIT:
        raise OverflowError("Z[zeta_p] batch product would overflow int64")
    n = a.shape[0]
    out = np.zeros((n, p), dtype=np.int64)
    for i in range(p - 1):
        ai = a[:, i : i + 1]
        for j in range(p - 1):
            out[:, (i + j) % p] += ai[:, 0] * b[:, j]
    return out[:, : p - 1] - out[:, p - 1 : p]


def batch_from_counts(counts: np.ndarray, p: int) -> np.ndarray:
    """counts of shape (n, p) -> power-basis coordinates (n, p-1)."""
    if p == 2:
        return counts[:, :1] - counts[:, 1:2]
    return counts[:, : p - 1] - counts[:, p - 1 : p]


def batch_pi_valuation(a: np.ndarray, p: int) -> np.ndarray:
    """Row-wise v_pi; rows equal to zero get -1 (caller maps to infinity)."""
    n = max(p - 1, 1)
    t = pi_basis_matrix(p).astype(np.int64)
    b = a @ t.T
    best = np.full(a.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
    for k in range(n):
        col = b[:, k].copy()
        nz = col != 0
        e = np.zeros_like(col)
        work = np.abs(col)
        while True:
            div = nz & (work % p == 0)
            if not div.any():
                break
            e[div] += 1
            work[div] //= p
        val = np.where(nz, k + n * e, np.iinfo(np.int64).max)
        best = np.minimum(best, val)
    return np.where(best == np.iinfo(np.int64).max, -1, best)


# --------------------------------------------------------------------------
# Newton polygons
# --------------------------------------------------------------------------

Value = Fraction | _Infinity


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class NewtonPolygon:
    points: tuple[tuple[int, Value], ...]
    vertices: tuple[tuple[int, Fraction], ...]

    def slopes(self) -> list[Fraction]:
        v = self.vertices
        return [(v[i + 1][1] - v[i][1]) / (v[i + 1][0] - v[i][0]) for i in range(len(v) - 1)]

    def first_vertex(self) -> tuple[int, Fraction]:
        return first_vertex(self)

    def first_slope(self) -> Fraction:
        x, y = self.first_vertex()
        return y / x

    def is_pure(self, slope: Fraction) -> bool:
        return all(s == slope for s in self.slopes())

    def to_json(self) -> dict:
        return {
            "points": [[i, render_value(v)] for i, v in self.points],
            "vertices": [[i, render_value(v)] for i, v in self.vertices],
        }


def lower_hull(points: Iterable[tuple[int, Value]]) -> NewtonPolygon:
    """Lower convex hull of the finite points, exact; infinite points are ignored."""
    pts = []
    seen = set()
    for i, v in points:
        if i in seen:
            raise InputError(f"duplicate abscissa {i}")
        seen.add(i)
        pts.append((int(i), v if v is INF else Fraction(v)))
    pts.sort(key=lambda t: t[0])
    if not pts or pts[0][0] != 0 or pts[0][1] != 0:
        raise InputError("Newton polygon needs the point (0, 0)")
    finite = [pt for pt in pts if pt[1] is not INF]
    hull: list[tuple[int, Fraction]] = []
    for pt in finite:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0:
            hull.pop()
        hull.append(pt)
    return NewtonPolygon(tuple(pts), tuple(hull))


def first_vertex(np_: NewtonPolygon) -> tuple[int, Fraction]:
    if len(np_.vertices) < 2:
        raise InputError("degenerate Newton polygon: no finite point besides the origin")
    return np_.vertices[1]


def render_value(v) -> str | int:
    if v is INF:
        return "inf"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def render_rational(v: Fraction | int) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"
