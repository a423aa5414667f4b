from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from gnpforge.cyclotomic import (INF, CyclotomicInteger, batch_from_counts, batch_mul, batch_pi_valuation,
                                 first_vertex, from_counts, lower_hull, pi_valuation, pi_valuation_fast,
                                 render_rational, residue)
from gnpforge.errors import InputError

PRIMES = [2, 3, 5, 7]


def cyc(p, lo=-40, hi=40):
    n = max(p - 1, 1)
    return st.lists(st.integers(lo, hi), min_size=n, max_size=n).map(lambda c: CyclotomicInteger(p, tuple(c)))


def sympy_norm(a: CyclotomicInteger) -> int:
    x = sympy.Symbol("x")
    if a.p == 2:
        return a.coords[0]
    f = sympy.Poly(list(reversed(a.coords)), x)
    return int(sympy.resultant(f, sympy.cyclotomic_poly(a.p, x, polys=True)))


def test_from_counts_examples():
    assert from_counts(3, (1, 1, 1)).is_zero()
    assert from_counts(2, (5, 2)) == CyclotomicInteger.from_int(2, 3)
    assert from_counts(3, (1, 2, 0)) == CyclotomicInteger(3, (1, 2))


def test_pi_valuation_examples():
    for p in PRIMES:
        assert pi_valuation(CyclotomicInteger.from_int(p, 0)) is INF
        assert pi_valuation(CyclotomicInteger.from_int(p, p)) == p - 1
    assert pi_valuation(CyclotomicInteger(3, (1, 2))) == 1


@pytest.mark.parametrize("p", PRIMES)
@given(data=st.data())
def test_norm_matches_sympy_resultant(p, data):
    a = data.draw(cyc(p))
    assert a.norm() == sympy_norm(a)


@pytest.mark.parametrize("p", PRIMES)
@given(data=st.data())
def test_valuation_axioms(p, data):
    a, b = data.draw(cyc(p)), data.draw(cyc(p))
    va, vb = pi_valuation(a), pi_valuation(b)
    assert pi_valuation_fast(a) == va
    vab = pi_valuation(a * b)
    assert vab == (INF if va is INF or vb is INF else va + vb)
    vs = pi_valuation(a + b)
    assert vs >= min(va, vb)
    if va != vb:
        assert vs == min(va, vb)


@pytest.mark.parametrize("p", PRIMES)
@given(data=st.data())
def test_valuation_is_galois_invariant(p, data):
    a = data.draw(cyc(p))
    for k in range(1, p):
        assert pi_valuation(a.galois(k)) == pi_valuation(a)


@pytest.mark.parametrize("p", PRIMES)
@given(data=st.data())
def test_ring_laws(p, data):
    a, b, c = (data.draw(cyc(p, -9, 9)) for _ in range(3))
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == CyclotomicInteger.from_int(p, 0)
    z = CyclotomicInteger.zeta(p)
    assert z ** p == CyclotomicInteger.from_int(p, 1)


@pytest.mark.parametrize("p", [3, 5, 7])
@given(data=st.data())
def test_residue_after_multiplying_by_pi_powers(p, data):
    """a = u * (zeta-1)^k with u a unit: residue(a, k) is u mod pi."""
    u0 = data.draw(st.integers(1, p - 1))
    k = data.draw(st.integers(0, 3 * (p - 1)))
    rest = data.draw(cyc(p, -5, 5))
    pi = CyclotomicInteger.zeta(p) - 1
    unit = CyclotomicInteger.from_int(p, u0) + pi * rest
    a = unit * pi ** k
    assert pi_valuation(a) == k
    assert residue(a, k) == u0
    assert residue(a * pi, k) == 0


def test_batch_routes_match_scalar():
    rng = np.random.default_rng(7)
    for p in PRIMES:
        n = max(p - 1, 1)
        a = rng.integers(-50, 50, size=(200, n))
        b = rng.integers(-50, 50, size=(200, n))
        prod = batch_mul(a, b, p)
        vals = batch_pi_valuation(prod, p)
        for i in range(200):
            x = CyclotomicInteger(p, tuple(int(t) for t in a[i])) * CyclotomicInteger(p, tuple(int(t) for t in b[i]))
            assert tuple(int(t) for t in prod[i]) == x.coords
            v = pi_valuation(x)
            assert vals[i] == (-1 if v is INF else v)
        counts = rng.integers(0, 9, size=(50, p))
        coords = batch_from_counts(counts, p)
        for i in range(50):
            assert tuple(int(t) for t in coords[i]) == from_counts(p, [int(t) for t in counts[i]]).coords


def test_lower_hull_examples():
    h = lower_hull([(0, 0), (1, INF), (2, 1)])
    assert h.vertices == ((0, 0), (2, 1))
    h = lower_hull([(0, 0), (1, 1), (2, 2)])
    assert h.vertices == ((0, 0), (2, 2)) and h.slopes() == [1]
    assert lower_hull([(0, 0), (1, 1), (2, 1)]).vertices == ((0, 0), (2, 1))
    assert lower_hull([(0, 0), (2, 1), (3, 2)]).first_vertex() == (2, 1)
    assert lower_hull([(0, 0), (6, 1)]).first_vertex() == (6, 1)


@given(st.lists(st.one_of(st.fractions(0, 10, max_denominator=6), st.just(INF)), min_size=1, max_size=9))
def test_hull_is_convex_and_below_points(ys):
    pts = [(0, 0)] + [(i + 1, y) for i, y in enumerate(ys)]
    if all(y is INF for y in ys):
        with pytest.raises(InputError):
            lower_hull(pts).first_vertex()
        return
    h = lower_hull(pts)
    s = h.slopes()
    assert all(s[i] < s[i + 1] for i in range(len(s) - 1))
    for x, y in pts:
        if y is INF or x > h.vertices[-1][0]:
            continue
        for (x0, y0), (x1, y1) in zip(h.vertices, h.vertices[1:]):
            if x0 <= x <= x1:
                assert y >= y0 + (y1 - y0) * Fraction(x - x0, x1 - x0)
    n, v = h.first_vertex()
    first = v / n
    assert all(y is INF or y >= first * x for x, y in pts)


def test_render_rational():
    assert render_rational(1) == "1/1"
    assert render_rational(Fraction(6, 4)) == "3/2"


def test_first_vertex_requires_finite_point():
    with pytest.raises(InputError):
        first_vertex(lower_hull([(0, 0)]))
    with pytest.raises(InputError):
        lower_hull([(1, 1)])
