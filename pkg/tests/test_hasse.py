from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from gnpforge.errors import InputError
from gnpforge.ffield import FieldSpec
from gnpforge.hasse import (STATUS_FAILS, STATUS_OK, HassePolynomial, evaluate, exact_covers, family_exponents,
                            family_predictor, hasse_polynomial, predict)
from gnpforge.modular import ExponentSet, orbit_catalog


def E(p, *exps):
    return ExponentSet.of(p, exps)


def sympy_power_coefficient(p, exps, c, degree):
    """{(sum a_d x^d)^c}_degree reduced mod p, as {monomial: coeff}."""
    x = sympy.Symbol("x")
    a = {d: sympy.Symbol(f"a{d}") for d in exps}
    f = sympy.expand(sum(a[d] * x ** d for d in exps) ** c)
    coeff = sympy.Poly(f, x).coeff_monomial(x ** degree)
    out = {}
    for mono, k in sympy.Poly(coeff, *a.values()).terms():
        if k % p:
            out[tuple(sorted((d, e) for d, e in zip(exps, mono) if e))] = int(k) % p
    return out


def as_dict(H: HassePolynomial):
    return {tuple(sorted(m.items())): c for m, c in H.monomials()}


def test_exact_cover_examples():
    assert [[U.coords() for U in c] for c in exact_covers(orbit_catalog(E(2, 1, 3)))] == [[{3: 1}]]
    assert [[U.coords() for U in c] for c in exact_covers(orbit_catalog(E(2, 1, 3, 5)))] == [[{5: 3}]]


def test_exact_cover_p3_small():
    covers = exact_covers(orbit_catalog(E(3, 1, 2, 4)))
    assert [[(U.n, U.coords()) for U in c] for c in covers] == [[(2, {4: 2}), (1, {4: 1})]]


def test_hasse_polynomial_examples():
    D = E(2, 1, 3)
    cat = orbit_catalog(D)
    assert hasse_polynomial(D, exact_covers(cat), cat.N).render() == "a3"
    D = E(7, 1, 2, 3)
    cat = orbit_catalog(D)
    H = hasse_polynomial(D, exact_covers(cat), cat.N)
    assert H.render() == "4*a3^2"
    ref = family_predictor("small_d0", 7, 3).hasse
    assert H.same_up_to_unit(ref) == 4
    assert as_dict(ref) == sympy_power_coefficient(7, (1, 2, 3), 2, 6)


@pytest.mark.parametrize("p,exps,vertex,hasse", [
    (2, (1, 3, 5, 7), (3, Fraction(1)), "a7"),
    (3, (1, 2, 4, 5, 7), (3, Fraction(1)), "a5*a7^3"),
    (3, (1, 2, 4), (3, Fraction(3, 2)), "a4^3"),
    (2, (1, 3, 5), (4, Fraction(2)), "a5^3"),
])
def test_predict(p, exps, vertex, hasse):
    r = predict(ExponentSet.of(p, exps))
    assert r.status == STATUS_OK
    assert r.vertex == vertex
    assert r.hasse.render() == hasse


def test_hypothesis_failure_is_reported():
    r = predict(E(2, 5, 9, 11))
    assert r.status == STATUS_FAILS and not r.holds_H
    assert r.vertex is None and r.hasse is None
    assert r.to_json()["vertex"] is None


def test_evaluate_examples():
    F2, F3, F7 = (FieldSpec.get(q, 1) for q in (2, 3, 7))
    a3 = HassePolynomial.from_monomials(2, (1, 3), [(1, {3: 1})])
    assert evaluate(a3, {3: F2.one()}) == F2.one()
    a2a4 = HassePolynomial.from_monomials(3, (1, 2, 4), [(1, {2: 1, 4: 1})])
    assert evaluate(a2a4, {1: F3.one(), 4: F3.one()}) == F3.zero()
    h = HassePolynomial.from_monomials(7, (1, 2, 3), [(4, {3: 2})])
    assert evaluate(h, {3: F7.one(), 1: F7.one()}) == F7.const(4)
    assert evaluate(h, {3: 1, 1: 1}) == 4


def test_evaluate_over_extension_matches_norm_criterion():
    # H(alpha) != 0 over F_q is the same as the product of its Frobenius conjugates being nonzero
    F9 = FieldSpec.get(3, 2)
    H = predict(E(3, 1, 2, 4, 5, 7)).hasse
    for x in F9.elements():
        for y in list(F9.elements())[1:]:
            v = evaluate(H, {5: x, 7: y})
            assert v.is_zero() == (x.is_zero())


def test_evaluate_rejects_missing_leading_coefficient():
    H = HassePolynomial.from_monomials(2, (1, 3), [(1, {3: 1})])
    with pytest.raises(InputError):
        evaluate(H, {1: 1})


@pytest.mark.parametrize("family,p,n,vertex,hasse", [
    ("T1", 3, 2, (2, Fraction(1, 2)), "2*a8"),
    ("T2", 5, 1, (2, Fraction(1, 2)), "a4*a8"),
    ("char2", 2, 3, (6, Fraction(2)), "a11*a13^4"),
    ("char2", 2, 2, (4, Fraction(2)), "a5^3"),
    ("char3", 3, 1, (3, Fraction(1)), "a5*a7^3"),
    ("small_d0", 7, 3, (1, Fraction(1, 3)), "a3^2"),
])
def test_family_predictor_examples(family, p, n, vertex, hasse):
    r = family_predictor(family, p, n)
    assert r.vertex == vertex
    assert r.hasse.render() == hasse


@pytest.mark.parametrize("family,p,n", [("T1", 2, 2), ("T1", 2, 3), ("T1", 3, 2), ("T1", 5, 1), ("T2", 3, 2),
                                        ("T2", 5, 1), ("T2", 7, 1), ("char2", 2, 2), ("char2", 2, 3),
                                        ("char3", 3, 1), ("small_d0", 7, 3), ("small_d0", 5, 2),
                                        ("small_d0", 7, 2), ("small_d0", 11, 3)])
def test_families_match_engine(family, p, n):
    closed = family_predictor(family, p, n)
    found = predict(closed.D)
    assert found.vertex == closed.vertex
    assert found.sigma == closed.sigma
    assert found.hasse.same_up_to_unit(closed.hasse) is not None


@pytest.mark.parametrize("p,d0", [(7, 5), (5, 3)])
def test_small_degree_family_can_have_longer_orbits(p, d0):
    closed = family_predictor("small_d0", p, d0)
    found = predict(closed.D)
    assert found.delta == closed.delta
    assert found.N == 2 and closed.N == 1


def test_T2_at_three_one_differs_from_closed_form():
    closed = family_predictor("T2", 3, 1)
    found = predict(closed.D)
    assert closed.vertex == (2, Fraction(1))
    assert found.vertex == (3, Fraction(3, 2))
    assert found.hasse.render() == "a4^3"


def test_family_inputs():
    with pytest.raises(InputError):
        family_predictor("T2", 2, 1)
    with pytest.raises(InputError):
        family_predictor("char2", 3, 2)
    with pytest.raises(InputError):
        family_predictor("nope", 2, 2)
    with pytest.raises(InputError):
        family_exponents("nope", 2, 2)
    with pytest.raises(InputError):
        family_predictor("small_d0", 5, 7)


@given(st.sampled_from([2, 3, 5, 7]), st.data())
def test_polynomial_algebra(p, data):
    exps = (1, 2, 3, 4) if p > 4 else ((1, 3) if p == 2 else (1, 2, 4))
    mono = st.dictionaries(st.sampled_from(exps), st.integers(1, 3), max_size=3)
    terms = data.draw(st.lists(st.tuples(st.integers(1, p - 1), mono), max_size=4))
    H = HassePolynomial.from_monomials(p, exps, terms)
    c = data.draw(st.integers(1, p - 1))
    assert H.scale(c).same_up_to_unit(H) == (c if not H.is_zero() else 1)
    assert H.restrict(exps + (max(exps) + 1,)).render() == H.render()
    vals = {d: data.draw(st.integers(0, p - 1)) for d in exps}
    vals[max(exps)] = data.draw(st.integers(1, p - 1))
    direct = 0
    for k, m in terms:
        t = k
        for d, e in m.items():
            t *= vals[d] ** e
        direct += t
    assert evaluate(H, vals) == direct % p


def test_prediction_json():
    j = predict(E(2, 1, 3, 5, 7)).to_json()
    assert j["vertex"] == [3, "1/1"] and j["hasse"] == "a7" and j["delta"] == "1/3"
