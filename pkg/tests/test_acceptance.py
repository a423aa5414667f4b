"""End-to-end acceptance checks, one test group per criterion.

Each criterion records a PASS/FAIL line that is printed in the terminal summary
(and directly when the file is run as a script).
"""
from __future__ import annotations

import itertools
import random
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from gnpforge.cyclotomic import INF, CyclotomicInteger, pi_valuation
from gnpforge.dwork import (cyclic_minor_check, decomposition_check, injections, minor_congruence_check,
                            small_subsets, verify_coeffssplit)
from gnpforge.ffield import FieldSpec
from gnpforge.hasse import STATUS_OK, HassePolynomial, evaluate, family_exponents, family_predictor, predict
from gnpforge.lfunction import (InputPolynomial, iter_polynomials, l_polynomial, newton_polygon,
                                supersingular_scan, verify_prediction)
from gnpforge.modular import (ExponentSet, brute_min_weight, density, enumerate_minimal, min_weight_bfs,
                              p_weight, shift)

RESULTS: dict[int, list[tuple[bool, str]]] = {}


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS.setdefault(k, []).append((ok, detail))


def summary_lines() -> list[str]:
    out = []
    for k in sorted(RESULTS):
        rows = RESULTS[k]
        ok = all(r[0] for r in rows)
        bad = [d for good, d in rows if not good]
        detail = "; ".join(bad) if bad else f"{len(rows)} checks"
        out.append(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
    return out


def fmt(v) -> str:
    if v is None:
        return "none"
    return f"({v[0]}, {v[1]})"


def mono(p, exps, coeff, powers):
    return HassePolynomial.from_monomials(p, exps, [(coeff, powers)])


# --------------------------------------------------------------------------
# 1. first family
# --------------------------------------------------------------------------
@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (2, 4), (3, 2), (5, 1), (5, 2)])
def test_criterion_1(p, n):
    D = family_exponents("T1", p, n)
    t0 = time.perf_counter()
    r = predict(D)
    took = time.perf_counter() - t0
    want_h = mono(p, D.exponents, (-1) ** (n - 1), {p ** n - 1: 1})
    ok = (r.status == STATUS_OK and r.delta == Fraction(1, n * (p - 1))
          and r.sigma == tuple(p ** i for i in range(n)) and r.vertex == (n, Fraction(1, p - 1))
          and r.hasse == want_h and took < 60)
    record(1, ok, f"(p,n)=({p},{n}) vertex {fmt(r.vertex)} H={r.hasse} in {took:.1f}s")
    assert ok


# --------------------------------------------------------------------------
# 2. second family
# --------------------------------------------------------------------------
def _criterion_2(p, n):
    D = family_exponents("T2", p, n)
    r = predict(D)
    want_h = mono(p, D.exponents, 1, {2 * p ** n - 2: 1, p ** n - 1: 1})
    want_sigma = tuple(sorted({p ** i for i in range(n)} | {2 * p ** i for i in range(n)}))
    want_v = (2 * n, Fraction(2, p - 1))
    ok = (r.status == STATUS_OK and r.vertex == want_v and r.hasse == want_h
          and r.sigma == want_sigma and r.N == 2 * n)
    record(2, ok, f"(p,n)=({p},{n}) vertex {fmt(r.vertex)} H={r.hasse} sigma={r.sigma}"
                  + ("" if ok else f", expected vertex {fmt(want_v)} H={want_h} sigma={want_sigma}"))
    return ok


@pytest.mark.parametrize("p,n", [(3, 2), (5, 1), (7, 1)])
def test_criterion_2(p, n):
    assert _criterion_2(p, n)


@pytest.mark.xfail(strict=True, reason="at p=3, n=1 the exponent 4 = 11 (base 3) doubles without a carry: "
                                       "(u_4=2) at length 2 is minimal, so Sigma={1,2,3}, vertex (3,3/2), "
                                       "H=a_4^3; the L-function oracle confirms this on all 666 polynomials")
def test_criterion_2_p3_n1():
    assert _criterion_2(3, 1)


# --------------------------------------------------------------------------
# 3. characteristic two, d = 2^(n+1) - 3
# --------------------------------------------------------------------------
@pytest.mark.parametrize("n", [2, 3])
def test_criterion_3_prediction(n):
    D = family_exponents("char2", 2, n)
    r = predict(D)
    c = 3 * 2 ** (n - 1) - 1
    powers = {c: 1}
    powers[D.d0] = powers.get(D.d0, 0) + 2 ** (n - 1)
    ok = r.vertex == (2 * n, Fraction(2)) and r.hasse == mono(2, D.exponents, 1, powers)
    record(3, ok, f"n={n} vertex {fmt(r.vertex)} H={r.hasse}")
    assert ok


@pytest.mark.parametrize("n,m", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_criterion_3_oracle_and_fallback(n, m):
    D = family_exponents("char2", 2, n)
    c, t = 3 * 2 ** (n - 1) - 1, 2 ** n - 1
    rep = verify_prediction(D, m, keep_records=True, point_budget=2 ** 25, tuple_cap=10 ** 6)
    bad = len(rep.mismatches) + len(rep.support_mismatches)
    fallback_bad = 0
    sub = 0
    for rec in rep.records:
        coeffs = dict(kv.split(":") for kv in rec.poly.split(","))
        if str(c) in coeffs:
            continue
        sub += 1
        if str(t) in coeffs:
            fallback_bad += rec.vertex != (n, Fraction(1))
        else:
            fallback_bad += not rec.first_slope > Fraction(1, n)
    ok = bad == 0 and fallback_bad == 0
    record(3, ok, f"n={n} m={m}: {rep.total} polys, {bad} mismatches, {sub} with a_{c}=0, "
                  f"{fallback_bad} fallback failures")
    assert ok


# --------------------------------------------------------------------------
# 4. small degree and the characteristic-three example
# --------------------------------------------------------------------------
def test_criterion_4_small_degree():
    D = ExponentSet.of(7, [1, 2, 3])
    r = predict(D)
    ref = family_predictor("small_d0", 7, 3).hasse
    unit = r.hasse.same_up_to_unit(ref)
    zero_set = all((evaluate(r.hasse, {1: a1, 2: a2, 3: a3}) == 0) == (a3 == 0)
                   for a1, a2, a3 in itertools.product(range(7), range(7), range(1, 7)))
    ok = r.delta == Fraction(1, 3) and unit is not None and zero_set
    record(4, ok, f"p=7 D={{1,2,3}}: delta {r.delta}, H={r.hasse} = {unit} * ({ref})")
    assert ok


def test_criterion_4_char3():
    D = ExponentSet.of(3, [1, 2, 4, 5, 7])
    r = predict(D)
    ok = r.vertex == (3, Fraction(1)) and r.hasse == mono(3, D.exponents, 1, {5: 1, 7: 3})
    rep = verify_prediction(D, 1)
    ok = ok and not rep.mismatches
    record(4, ok, f"p=3 D={{1,2,4,5,7}}: vertex {fmt(r.vertex)} H={r.hasse}, oracle mismatches {len(rep.mismatches)}")
    assert ok


# --------------------------------------------------------------------------
# 5. oracle agreement
# --------------------------------------------------------------------------
SWEEPS = [(2, m, (1, 3)) for m in (1, 2, 3)] + [(2, m, (1, 3, 5, 7)) for m in (1, 2)] + \
         [(3, m, (1, 2, 4)) for m in (1, 2)] + [(3, 1, (1, 2, 4, 5, 7, 8)), (5, 1, (1, 2, 3, 4))]
_SWEEP_TIME = [0.0]


@pytest.mark.parametrize("p,m,exps", SWEEPS)
def test_criterion_5(p, m, exps):
    D = ExponentSet.of(p, exps)
    t0 = time.perf_counter()
    rep = verify_prediction(D, m, tuple_cap=10 ** 6)
    _SWEEP_TIME[0] += time.perf_counter() - t0
    ok = (not rep.mismatches and not rep.support_mismatches and not rep.slope_violations
          and rep.support_undetermined == 0 and _SWEEP_TIME[0] < 600)
    record(5, ok, f"p={p} m={m} D={set(exps)}: {rep.total} polys, {len(rep.mismatches)} mismatches, "
                  f"{len(rep.support_mismatches)} support mismatches")
    assert ok


# --------------------------------------------------------------------------
# 6. supersingularity desk checks
# --------------------------------------------------------------------------
@pytest.mark.parametrize("p,d0,m,slope", [(2, 7, 1, "1/3"), (2, 7, 2, "1/3"), (2, 7, 3, "1/3"),
                                          (3, 8, 1, "1/4"), (3, 8, 2, "1/4")])
def test_criterion_6_first_slopes(p, d0, m, slope):
    r = supersingular_scan(p, d0, m)
    ok = set(r.histogram) == {slope} and r.pure_half == 0
    record(6, ok, f"p={p} d0={d0} m={m}: {r.total} polys, slopes {r.histogram}, pure 1/2: {r.pure_half}")
    assert ok


@pytest.mark.parametrize("m", [1, 2])
def test_criterion_6_excluded_case(m):
    D = ExponentSet.of(3, [1, 2, 4])
    rep = verify_prediction(D, m, keep_records=True)
    bad = 0
    for rec in rep.records:
        has_a2 = any(kv.startswith("2:") for kv in rec.poly.split(","))
        if has_a2:
            bad += rec.first_slope != Fraction(1, 2)
        else:
            fallback = predict(ExponentSet.of(3, rec.support))
            bad += rec.first_slope != fallback.delta
    ok = bad == 0
    record(6, ok, f"p=3 d0=4 m={m}: {rep.total} polys, {bad} off the expected first slope")
    assert ok


# --------------------------------------------------------------------------
# 7. splitting-function coefficients
# --------------------------------------------------------------------------
@pytest.mark.parametrize("p", [2, 3, 5])
def test_criterion_7(p):
    ns = range(0, p ** 3 + 1)
    K = max(p_weight(n, p) for n in ns) + p + 2
    r = verify_coeffssplit(p, ns, K)
    record(7, r.ok, f"p={p} n=0..{p ** 3} at K={K}: {sum(x['pass'] for x in r.rows)}/{len(r.rows)} pass")
    assert r.ok


# --------------------------------------------------------------------------
# 8. Dwork-matrix congruence and valuation bounds
# --------------------------------------------------------------------------
@pytest.mark.parametrize("p,exps", [(2, (1, 3)), (2, (1, 3, 5)), (3, (1, 2, 4)), (7, (1, 2, 3))])
def test_criterion_8(p, exps):
    D = ExponentSet.of(p, exps)
    pred = predict(D)
    polys = list(iter_polynomials(D, 1))
    if len(polys) > 300:
        polys = random.Random(8).sample(polys, 300)
    universe = sorted(set(pred.sigma) | set(range(1, max(pred.sigma) + 2)))
    thetas = list(injections(universe, 3))
    subsets = list(small_subsets(universe, 3))
    res_bad = bound_bad = 0
    for f in polys:
        rep = minor_congruence_check(D, f, with_oracle=True, prediction=pred)
        res_bad += not rep.agree
        for th in thetas:
            bound_bad += not cyclic_minor_check(D, f, th, prediction=pred).passed
        for F in subsets:
            d = decomposition_check(D, f, F, prediction=pred)
            bound_bad += (not d.agree) or d.supp2_pass is False
    ok = res_bad == 0 and bound_bad == 0
    record(8, ok, f"p={p} D={set(exps)}: {len(polys)} polys, {res_bad} residue failures, "
                  f"{len(thetas)} theta x {len(subsets)} F, {bound_bad} bound failures")
    assert ok


# --------------------------------------------------------------------------
# 9. property suites
# --------------------------------------------------------------------------
def _random_instances(count: int, seed: int):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        p = rng.choice([2, 3, 5, 7])
        nmax = max(n for n in range(1, 13) if p ** n - 1 <= 4096)
        n = rng.randint(1, nmax)
        q = p ** n
        k_max = 1 + int(np.log(3e5) / np.log(q))
        k = rng.randint(1, max(1, min(4, k_max)))
        pool = [d for d in range(1, 25) if d % p]
        D = ExponentSet.of(p, rng.sample(pool, k))
        out.append((D, n))
    return out


def test_criterion_9_bfs_vs_brute():
    inst = _random_instances(220, seed=2024)
    bad = [(D, n) for D, n in inst if min_weight_bfs(D, n) != brute_min_weight(D, n)]
    top = max(D.p ** n - 1 for D, n in inst)
    record(9, not bad, f"s(n) by BFS and brute force on {len(inst)} random instances (largest p^n-1 = {top}): "
                       f"{len(bad)} disagreements")
    assert not bad


def test_criterion_9_valuation_axioms():
    rng = random.Random(9)
    bad = 0
    for _ in range(400):
        p = rng.choice([2, 3, 5, 7])
        w = max(p - 1, 1)
        a = CyclotomicInteger(p, tuple(rng.randint(-60, 60) for _ in range(w)))
        b = CyclotomicInteger(p, tuple(rng.randint(-60, 60) for _ in range(w)))
        va, vb = pi_valuation(a), pi_valuation(b)
        prod = pi_valuation(a * b)
        bad += prod != (INF if INF in (va, vb) else va + vb)
        bad += pi_valuation(a + b) < min(va, vb)
        bad += any(pi_valuation(a.galois(k)) != va for k in range(1, p))
    record(9, bad == 0, f"valuation axioms on 400 random pairs: {bad} violations")
    assert bad == 0


def _oracle_corpus():
    corpus = []
    for p, m, exps in [(2, 1, (1, 3, 5, 7)), (2, 2, (1, 3, 5)), (3, 1, (1, 2, 4, 5)), (3, 2, (1, 2, 4)),
                       (5, 1, (1, 2, 3, 4)), (7, 1, (1, 2, 3, 4, 5))]:
        polys = list(iter_polynomials(ExponentSet.of(p, exps), m))
        corpus += random.Random(p * 10 + m).sample(polys, min(25, len(polys)))
    return corpus


def test_criterion_9_oracle_runs():
    integral_bad = slope_bad = 0
    corpus = _oracle_corpus()
    for f in corpus:
        try:
            L = l_polynomial(f)
        except ArithmeticError:
            integral_bad += 1
            continue
        slope = newton_polygon(L).first_slope()
        slope_bad += slope < density(f.support).delta
    ok = integral_bad == 0 and slope_bad == 0
    record(9, ok, f"{len(corpus)} oracle runs: {integral_bad} inexact Newton divisions, "
                  f"{slope_bad} first slopes below the density")
    assert ok


def test_criterion_9_witnesses():
    count = bad = 0
    for p, exps in [(2, (1, 3, 5)), (2, (1, 3, 5, 7)), (3, (1, 2, 4)), (3, (1, 2, 4, 5, 7)), (5, (1, 2, 3)),
                    (7, (1, 2, 3, 4, 5)), (5, (1, 3, 7))]:
        D = ExponentSet.of(p, exps)
        for n in range(1, 7):
            if p ** n - 1 > 20000:
                break
            for U in enumerate_minimal(D, n):
                count += 1
                V = U
                for _ in range(n):
                    V = shift(V)
                bad += V != U
                V, phis = U, []
                for _ in range(n):
                    bad += V.linear_sum % V.modulus != 0
                    phis.append(V.linear_sum // V.modulus)
                    V = shift(V)
                bad += tuple(phis) != U.phi_map or any(x < 1 or x > D.total for x in phis)
    ok = bad == 0 and count > 0
    record(9, ok, f"shift order and phi integrality on {count} enumerated witnesses: {bad} violations")
    assert ok


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    for mod in list(sys.modules.values()):
        if getattr(mod, "__file__", None) == __file__ and mod.__name__ != "__main__":
            print("\n".join(mod.summary_lines()))
    sys.exit(code)
