"""Exact L-functions of additive character sums and sweeps against the Hasse prediction.

Two independent routes compute the same data:

* the scalar route (:func:`character_sum`, :func:`l_polynomial`) handles one
  polynomial at a time by counting trace fibres over k_r;
* :class:`SweepEngine` handles every coefficient tuple of a family at once.  For
  each r it histograms the vectors ``(Tr(e_i x^d))_{d,i}`` over x in k_r and turns
  the histogram into fibre counts for all tuples with a transform over (Z/p)^M.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cyclotomic import (
    INF,
    CyclotomicInteger,
    NewtonPolygon,
    batch_from_counts,
    batch_mul,
    batch_pi_valuation,
    from_counts,
    lower_hull,
    pi_valuation_fast,
    render_rational,
)
from .errors import BudgetExceeded, InputError, IntegralityError
from .ffield import FieldSpec, FqElement, embed, field_tables, poly_eval, require_prime
from .hasse import STATUS_OK, HassePrediction, predict
from .modular import ExponentSet, density

log = logging.getLogger(__name__)

DEFAULT_POINT_BUDGET = 10 ** 7
DEFAULT_TUPLE_CAP = 10 ** 4
DEFAULT_SCAN_CAP = 2 * 10 ** 6


# --------------------------------------------------------------------------
# input polynomials
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class InputPolynomial:
    spec: FieldSpec
    coeffs: tuple[tuple[int, FqElement], ...]

    @classmethod
    def build(cls, spec: FieldSpec, coeffs: Mapping[int, FqElement | int]) -> "InputPolynomial":
        items = []
        for d, a in sorted(coeffs.items()):
            if not isinstance(a, FqElement):
                a = spec.const(a)
            if a.spec is not spec:
                raise InputError(f"coefficient of x^{d} lives in {a.spec}, expected {spec}")
            if d < 1:
                raise InputError("exponents must be positive (constant terms do not change the sums' slopes)")
            if a.is_zero():
                continue
            if d % spec.p == 0:
                raise InputError(f"exponent {d} is divisible by p={spec.p}")
            items.append((d, a))
        if not items:
            raise InputError("polynomial is zero")
        return cls(spec, tuple(items))

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def m(self) -> int:
        return self.spec.s

    @property
    def d0(self) -> int:
        return self.coeffs[-1][0]

    @property
    def support(self) -> ExponentSet:
        return ExponentSet.of(self.p, [d for d, _ in self.coeffs])

    def as_dict(self) -> dict[int, FqElement]:
        return dict(self.coeffs)

    def render(self) -> str:
        parts = []
        for d, a in self.coeffs:
            c = str(a.coeffs[0]) if self.m == 1 else ".".join(map(str, a.coeffs))
            parts.append(f"{d}:{c}")
        return ",".join(parts)

    __str__ = render


def parse_poly(text: str, p: int, m: int = 1) -> InputPolynomial:
    """Parse ``"d:coeff[,d:coeff...]"``; extension coefficients read ``c0.c1...``."""
    require_prime(p)
    if m < 1:
        raise InputError("m must be >= 1")
    spec = FieldSpec.get(p, m)
    coeffs: dict[int, FqElement] = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            d_txt, c_txt = chunk.split(":")
            d = int(d_txt)
            if "." in c_txt:
                val = spec.from_coeffs([int(x) for x in c_txt.split(".")])
            else:
                val = spec.const(int(c_txt))
        except ValueError as exc:
            raise InputError(f"cannot parse term {chunk!r}; expected d:coeff") from exc
        if d in coeffs:
            raise InputError(f"exponent {d} given twice")
        coeffs[d] = val
    return InputPolynomial.build(spec, coeffs)


# --------------------------------------------------------------------------
# scalar route
# --------------------------------------------------------------------------

def _check_points(p: int, s: int, budget: int) -> None:
    if p ** s > budget:
        raise BudgetExceeded(f"F_{p}^{s} has {p ** s} points; point budget is {budget}")


def character_sum(f: InputPolynomial, r: int, point_budget: int = DEFAULT_POINT_BUDGET) -> CyclotomicInteger:
    """S_r(f) as an element of Z[zeta_p], from the fibre counts of Tr(f(x))."""
    if r < 1:
        raise InputError("r must be >= 1")
    p, s = f.p, f.m * r
    _check_points(p, s, point_budget)
    K = FieldSpec.get(p, s)
    T = field_tables(p, s)
    n = T.Q - 1
    logs = [(d, int(T.log[embed(a, K).code])) for d, a in f.coeffs]
    counts = np.zeros(p, dtype=np.int64)
    counts[0] += 1  # x = 0
    chunk = 1 << 20
    for start in range(0, n, chunk):
        k = np.arange(start, min(start + chunk, n), dtype=np.int64)
        acc = np.zeros(len(k), dtype=np.int64)
        for d, la in logs:
            acc += T.trace[T.exp[(la + k * d) % n]]
        counts += np.bincount(acc % p, minlength=p)
    return from_counts(p, counts.tolist())


def character_sum_naive(f: InputPolynomial, r: int) -> CyclotomicInteger:
    """Element-by-element summation; for cross-checks on tiny fields only."""
    p, s = f.p, f.m * r
    K = FieldSpec.get(p, s)
    lifted = {d: embed(a, K) for d, a in f.coeffs}
    counts = [0] * p
    for x in K.elements():
        counts[poly_eval(lifted, x).trace()] += 1
    return from_counts(p, counts)


@dataclass(frozen=True)
class LFunction:
    f: InputPolynomial
    sums: tuple[CyclotomicInteger, ...]
    coeffs: tuple[CyclotomicInteger, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def valuations(self) -> list:
        return [pi_valuation_fast(c) for c in self.coeffs]

    def to_json(self) -> dict:
        return {"coeffs": [c.to_json() for c in self.coeffs], "sums": [s.to_json() for s in self.sums]}


def newton_coefficients(p: int, sums: Sequence[CyclotomicInteger], top: int) -> list[CyclotomicInteger]:
    """l_0..l_top from n*l_n = sum_{r=1}^n S_r l_{n-r}; every division must be exact."""
    ell = [CyclotomicInteger.from_int(p, 1)]
    for n in range(1, top + 1):
        acc = CyclotomicInteger.from_int(p, 0)
        for r in range(1, n + 1):
            acc = acc + sums[r - 1] * ell[n - r]
        ell.append(acc.exact_div(n))
    return ell


def l_polynomial(f: InputPolynomial, point_budget: int = DEFAULT_POINT_BUDGET) -> LFunction:
    top = f.d0 - 1
    sums = [character_sum(f, r, point_budget) for r in range(1, top + 1)]
    coeffs = newton_coefficients(f.p, sums, top)
    if top >= 1 and coeffs[-1].is_zero():
        raise IntegralityError(f"l_{top} vanished for {f}; the L-function must have degree d0-1")
    return LFunction(f, tuple(sums), tuple(coeffs))


def polygon_points(vals: Sequence, m: int, p: int) -> list[tuple[int, object]]:
    scale = m * (p - 1)
    return [(n, INF if v is INF else Fraction(v, scale)) for n, v in enumerate(vals)]


def newton_polygon(f: InputPolynomial | LFunction, point_budget: int = DEFAULT_POINT_BUDGET) -> NewtonPolygon:
    L = f if isinstance(f, LFunction) else l_polynomial(f, point_budget)
    return lower_hull(polygon_points(L.valuations(), L.f.m, L.f.p))


# --------------------------------------------------------------------------
# batched route
# --------------------------------------------------------------------------

def _group_ring_transform(hist: np.ndarray, p: int, M: int) -> np.ndarray:
    """counts[c, t] = sum over y with <c, y> = t of hist[y], for every c in F_p^M.

    ``hist`` is indexed by y with y_j the j-th base-p digit; output rows follow the
    same digit convention for c.
    """
    G = np.zeros((p,) * M + (p,), dtype=np.int64)
    # digit j of the flat index is the axis M-1-j of a C-ordered reshape
    G[..., 0] = hist.reshape((p,) * M)
    for axis in range(M):
        new = np.zeros_like(G)
        for y in range(p):
            src = np.take(G, y, axis=axis)
            for c in range(p):
                sl = [slice(None)] * (M + 1)
                sl[axis] = c
                new[tuple(sl)] += np.roll(src, (c * y) % p, axis=-1)
        G = new
    return G.reshape(p ** M, p)


class SweepEngine:
    """L-function data for every f = sum_{d in D} a_d x^d with a_d in F_{p^m}.

    Tuples are indexed by the integer whose base-p digits are the coordinates of
    ``a_d`` (in the basis of F_{p^m}) listed d-major, basis-minor, least significant
    first.
    """

    def __init__(self, D: ExponentSet, m: int, point_budget: int = DEFAULT_POINT_BUDGET,
                 tuple_cap: int = DEFAULT_SCAN_CAP):
        self.D = D
        self.p = D.p
        self.m = m
        self.spec = FieldSpec.get(D.p, m)
        self.M = m * len(D)
        self.size = self.p ** self.M
        if self.size > tuple_cap:
            raise BudgetExceeded(f"{self.size} coefficient tuples exceed the tuple cap {tuple_cap}")
        _check_points(self.p, m * (D.d0 - 1), point_budget)
        self._vals: np.ndarray | None = None
        self._coeffs: list[np.ndarray] | None = None

    # -- tuple bookkeeping --------------------------------------------------
    def digits(self, idx: np.ndarray) -> np.ndarray:
        return (idx[:, None] // (self.p ** np.arange(self.M, dtype=np.int64))) % self.p

    def codes(self, idx: np.ndarray) -> np.ndarray:
        """(rows, #D) element codes of a_d."""
        dg = self.digits(idx).reshape(len(idx), len(self.D), self.m)
        return dg @ (self.p ** np.arange(self.m, dtype=np.int64))

    def index_of(self, coeffs: Mapping[int, FqElement]) -> int:
        out = 0
        j = 0
        for d in self.D.exponents:
            a = coeffs.get(d, self.spec.zero())
            for c in a.coeffs:
                out += c * self.p ** j
                j += 1
        return out

    def polynomial(self, idx: int) -> InputPolynomial:
        codes = self.codes(np.array([idx], dtype=np.int64))[0]
        return InputPolynomial.build(self.spec, {d: self.spec.from_code(int(c))
                                                 for d, c in zip(self.D.exponents, codes)})

    def valid(self) -> np.ndarray:
        """Indices with a_{d0} != 0 (membership in k[x]_D)."""
        idx = np.arange(self.size, dtype=np.int64)
        return idx[self.codes(idx)[:, -1] != 0]

    # -- sums -----------------------------------------------------------------
    def fibre_counts(self, r: int) -> np.ndarray:
        p, m = self.p, self.m
        s = m * r
        K = FieldSpec.get(p, s)
        T = field_tables(p, s)
        n = T.Q - 1
        basis_logs = [int(T.log[embed(self.spec.basis(i), K).code]) for i in range(m)]
        hist = np.zeros(self.size, dtype=np.int64)
        hist[0] += 1  # x = 0
        chunk = 1 << 20
        for start in range(0, n, chunk):
            k = np.arange(start, min(start + chunk, n), dtype=np.int64)
            key = np.zeros(len(k), dtype=np.int64)
            j = 0
            for d in self.D.exponents:
                kd = (k * d) % n
                for lb in basis_logs:
                    key += T.trace[T.exp[(kd + lb) % n]] * p ** j
                    j += 1
            hist += np.bincount(key, minlength=self.size)
        return _group_ring_transform(hist, p, self.M)

    def coefficients(self) -> list[np.ndarray]:
        """[l_0, ..., l_{d0-1}] as (size, max(p-1, 1)) coordinate arrays."""
        if self._coeffs is not None:
            return self._coeffs
        p = self.p
        top = self.D.d0 - 1
        width = max(p - 1, 1)
        sums = [batch_from_counts(self.fibre_counts(r), p) for r in range(1, top + 1)]
        one = np.zeros((self.size, width), dtype=np.int64)
        one[:, 0] = 1
        ell = [one]
        for n in range(1, top + 1):
            acc = np.zeros((self.size, width), dtype=np.int64)
            for r in range(1, n + 1):
                acc += batch_mul(sums[r - 1], ell[n - r], p)
            if (acc % n).any():
                raise IntegralityError(f"Newton identity at n={n} is not exact in Z[zeta_{p}]")
            ell.append(acc // n)
        self._coeffs = ell
        return ell

    def valuations(self) -> np.ndarray:
        """(size, d0) array of v_pi(l_n); -1 marks l_n = 0."""
        if self._vals is None:
            ell = self.coefficients()
            self._vals = np.stack([batch_pi_valuation(c, self.p) for c in ell], axis=1)
        return self._vals


def first_vertices(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise first vertex (n, v) of the lower hull of (n, v_n), v_0 = 0; -1 = infinite."""
    rows, width = vals.shape
    L = lcm(*range(1, width)) if width > 1 else 1
    big = np.iinfo(np.int64).max // 4
    scaled = np.full((rows, width), big, dtype=np.int64)
    for n in range(1, width):
        fin = vals[:, n] >= 0
        scaled[fin, n] = vals[fin, n] * (L // n)
    best = scaled[:, 1:].min(axis=1)
    hit = scaled == best[:, None]
    hit[:, 0] = False
    # largest index attaining the least slope
    idx = width - 1 - np.argmax(hit[:, ::-1], axis=1)
    return idx, vals[np.arange(rows), idx]


# --------------------------------------------------------------------------
# batched Hasse evaluation
# --------------------------------------------------------------------------

def evaluate_batch(pred: HassePrediction, spec: FieldSpec, codes: np.ndarray,
                   exponents: Sequence[int]) -> np.ndarray:
    """Boolean array H(alpha) != 0 for element codes (rows, len(exponents))."""
    H = pred.hasse
    p = spec.p
    rows = codes.shape[0]
    pos = {d: i for i, d in enumerate(exponents)}
    if H is None:
        return np.zeros(rows, dtype=bool)
    if spec.s == 1:
        total = np.zeros(rows, dtype=np.int64)
        for mono, c in H.monomials():
            t = np.full(rows, c, dtype=np.int64)
            for d, e in mono.items():
                col = codes[:, pos[d]] if d in pos else np.zeros(rows, dtype=np.int64)
                t = t * pow_mod(col, e, p) % p
            total = (total + t) % p
        return total != 0
    T = field_tables(p, spec.s)
    q1 = T.Q - 1
    digits_total = np.zeros((rows, spec.s), dtype=np.int64)
    for mono, c in H.monomials():
        lg = np.full(rows, int(T.log[c]), dtype=np.int64)
        zero = np.zeros(rows, dtype=bool)
        for d, e in mono.items():
            col = codes[:, pos[d]] if d in pos else np.zeros(rows, dtype=np.int64)
            zero |= col == 0
            lg = (lg + e * np.where(col == 0, 0, T.log[col])) % q1
        term = np.where(zero, 0, T.exp[lg])
        digits_total = (digits_total + T.digits(term)) % p
    return digits_total.any(axis=1)


def pow_mod(a: np.ndarray, e: int, p: int) -> np.ndarray:
    out = np.ones_like(a)
    base = a % p
    while e:
        if e & 1:
            out = out * base % p
        base = base * base % p
        e >>= 1
    return out


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

@dataclass
class SweepRecord:
    poly: str
    vertex: tuple[int, Fraction]
    first_slope: Fraction
    h_nonzero: bool
    support: tuple[int, ...]
    support_h_nonzero: bool | None
    support_vertex: tuple[int, Fraction] | None

    def to_json(self) -> dict:
        return {
            "poly": self.poly,
            "vertex": [self.vertex[0], render_rational(self.vertex[1])],
            "first_slope": render_rational(self.first_slope),
            "h_nonzero": self.h_nonzero,
            "support": list(self.support),
            "support_h_nonzero": self.support_h_nonzero,
            "support_vertex": None if self.support_vertex is None
            else [self.support_vertex[0], render_rational(self.support_vertex[1])],
        }


@dataclass
class VerifyReport:
    D: ExponentSet
    m: int
    mode: str
    seed: int | None
    prediction: HassePrediction
    total: int = 0
    hits: int = 0
    h_nonzero: int = 0
    mismatches: list[SweepRecord] = field(default_factory=list)
    support_checked: int = 0
    support_mismatches: list[SweepRecord] = field(default_factory=list)
    support_undetermined: int = 0
    slope_violations: list[SweepRecord] = field(default_factory=list)
    strata: dict[str, int] = field(default_factory=dict)
    records: list[SweepRecord] = field(default_factory=list)

    @property
    def findings(self) -> list[str]:
        out = []
        for rec in self.mismatches:
            out.append(f"mismatch: {rec.poly} vertex {rec.vertex} but H(alpha) != 0 is {rec.h_nonzero}")
        for rec in self.support_mismatches:
            out.append(f"support mismatch: {rec.poly} on support {rec.support}")
        for rec in self.slope_violations:
            out.append(f"first slope below density: {rec.poly}")
        return out

    def to_json(self, include_records: bool = False) -> dict:
        pv = self.prediction.vertex
        out = {
            "p": self.D.p,
            "m": self.m,
            "exponents": list(self.D.exponents),
            "mode": self.mode,
            "seed": self.seed,
            "prediction": {
                "status": self.prediction.status,
                "vertex": None if pv is None else [pv[0], render_rational(pv[1])],
                "hasse": None if self.prediction.hasse is None else self.prediction.hasse.render(),
            },
            "total": self.total,
            "vertex_hits": self.hits,
            "h_nonzero": self.h_nonzero,
            "mismatches": [r.to_json() for r in self.mismatches],
            "support_checked": self.support_checked,
            "support_mismatches": [r.to_json() for r in self.support_mismatches],
            "support_undetermined": self.support_undetermined,
            "slope_violations": [r.to_json() for r in self.slope_violations],
            "strata": dict(sorted(self.strata.items())),
        }
        if include_records:
            out["records"] = [r.to_json() for r in self.records]
        return out


@lru_cache(maxsize=256)
def _predict_cached(D: ExponentSet) -> HassePrediction:
    return predict(D)


def _vertex(n: int, v: int, m: int, p: int) -> tuple[int, Fraction]:
    return (int(n), Fraction(int(v), m * (p - 1)))


def verify_prediction(D: ExponentSet, m: int = 1, mode: str = "exhaustive", samples: int = 100,
                      seed: int = 0, point_budget: int = DEFAULT_POINT_BUDGET,
                      tuple_cap: int = DEFAULT_TUPLE_CAP, threads: int = 1,
                      keep_records: bool = False) -> VerifyReport:
    """Compare oracle first vertices with the H(alpha) != 0 criterion.

    Every polynomial is checked twice: against the prediction for D, and against
    the prediction for its own support (which is where a vanishing coefficient
    pushes the polygon).
    """
    p = D.p
    pred = _predict_cached(D)
    spec = FieldSpec.get(p, m)
    rep = VerifyReport(D, m, mode, seed if mode == "sample" else None, pred)
    if mode == "exhaustive":
        n_tuples = (spec.order - 1) * spec.order ** (len(D) - 1)
        if n_tuples > tuple_cap:
            raise BudgetExceeded(f"{n_tuples} polynomials exceed the tuple cap {tuple_cap}; use sampling")
        eng = SweepEngine(D, m, point_budget, tuple_cap=max(tuple_cap, spec.order ** len(D)))
        idx = eng.valid()
        vals = eng.valuations()[idx]
        fn, fv = first_vertices(vals)
        codes = eng.codes(idx)
        polys = [eng.polynomial(int(i)) for i in idx]
    elif mode == "sample":
        rng = random.Random(seed)
        elems = list(spec.elements())
        polys = []
        for _ in range(samples):
            cf = {d: rng.choice(elems[1:] if d == D.d0 else elems) for d in D.exponents}
            polys.append(InputPolynomial.build(spec, cf))
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            Ls = list(pool.map(lambda f: l_polynomial(f, point_budget), polys))
        vals = np.array([[(-1 if v is INF else v) for v in L.valuations()] for L in Ls], dtype=np.int64)
        fn, fv = first_vertices(vals)
        codes = np.array([[f.as_dict().get(d, spec.zero()).code for d in D.exponents] for f in polys],
                         dtype=np.int64)
    else:
        raise InputError(f"unknown sweep mode {mode!r}")

    hz = evaluate_batch(pred, spec, codes, D.exponents)
    pv = pred.vertex
    delta_cache: dict[tuple[int, ...], Fraction] = {}
    for k, f in enumerate(polys):
        vert = _vertex(fn[k], fv[k], m, p)
        slope = vert[1] / vert[0]
        sup = f.support
        sup_key = sup.exponents
        if sup_key == D.exponents:
            sp, s_nz = pred, bool(hz[k])
        else:
            sp = _predict_cached(sup)
            sub_codes = codes[k : k + 1, [D.exponents.index(d) for d in sup_key]]
            s_nz = bool(evaluate_batch(sp, spec, sub_codes, sup_key)[0]) if sp.status == STATUS_OK else None
        rec = SweepRecord(f.render(), vert, slope, bool(hz[k]), sup_key,
                          s_nz if sp.status == STATUS_OK else None, sp.vertex)
        rep.total += 1
        key = f"{vert[0]},{render_rational(vert[1])}"
        rep.strata[key] = rep.strata.get(key, 0) + 1
        if keep_records:
            rep.records.append(rec)
        if rec.h_nonzero:
            rep.h_nonzero += 1
        hit = pv is not None and vert == pv
        if hit:
            rep.hits += 1
        if pv is not None and hit != rec.h_nonzero:
            rep.mismatches.append(rec)
        if sp.status == STATUS_OK:
            rep.support_checked += 1
            if (vert == sp.vertex) != s_nz:
                rep.support_mismatches.append(rec)
        else:
            rep.support_undetermined += 1
        if sup_key not in delta_cache:
            delta_cache[sup_key] = density(sup).delta if sup.d0 >= 2 else Fraction(0)
        if slope < delta_cache[sup_key]:
            rep.slope_violations.append(rec)
    return rep


@dataclass
class ScanReport:
    p: int
    d0: int
    m: int
    total: int
    histogram: dict[str, int]
    pure_half: int
    pure_half_examples: list[str]

    def to_json(self) -> dict:
        return {"p": self.p, "d0": self.d0, "m": self.m, "total": self.total,
                "first_slopes": dict(sorted(self.histogram.items())),
                "pure_slope_half": self.pure_half, "examples": self.pure_half_examples}


def supersingular_scan(p: int, d0: int, m: int = 1, point_budget: int = DEFAULT_POINT_BUDGET,
                       tuple_cap: int = DEFAULT_SCAN_CAP) -> ScanReport:
    """Histogram of first slopes over every degree-d0 polynomial with exponents prime to p.

    A polygon of pure slope 1/2 has its first vertex at the end point (d0-1, (d0-1)/2).
    """
    require_prime(p)
    if d0 < 2 or d0 % p == 0:
        raise InputError("d0 must be >= 2 and prime to p")
    D = ExponentSet.of(p, [i for i in range(1, d0 + 1) if i % p])
    eng = SweepEngine(D, m, point_budget, tuple_cap)
    idx = eng.valid()
    fn, fv = first_vertices(eng.valuations()[idx])
    scale = m * (p - 1)
    hist: dict[str, int] = {}
    slopes = [Fraction(int(v), scale * int(n)) for n, v in zip(fn, fv)]
    for s in slopes:
        hist[render_rational(s)] = hist.get(render_rational(s), 0) + 1
    pure = np.nonzero(fn == d0 - 1)[0]
    pure = [k for k in pure if slopes[k] == Fraction(1, 2)]
    examples = [eng.polynomial(int(idx[k])).render() for k in pure[:5]]
    return ScanReport(p, d0, m, len(idx), hist, len(pure), examples)


def iter_polynomials(D: ExponentSet, m: int) -> Iterable[InputPolynomial]:
    spec = FieldSpec.get(D.p, m)
    eng = SweepEngine(D, m, tuple_cap=spec.order ** len(D))
    for i in eng.valid():
        yield eng.polynomial(int(i))
