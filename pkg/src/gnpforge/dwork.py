"""Finite-precision pi-adic arithmetic and checks on truncated Dwork matrices (m = 1).

Elements of Z_p[pi] / (pi^K), pi^(p-1) = -p, are stored as coordinates on
1, pi, ..., pi^(p-2).  Coordinate i is only meaningful modulo p^ceil((K-i)/(p-1)),
and is kept reduced there, so equality of stored tuples is equality mod pi^K.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil, factorial, floor
from typing import Iterable, Mapping, Sequence

from .cyclotomic import residue as cyclotomic_residue, pi_valuation_fast, INF
from .errors import InputError, PrecisionError
from .ffield import FieldSpec, require_prime
from .hasse import STATUS_FAILS, HassePrediction, evaluate, predict
from .lfunction import InputPolynomial, l_polynomial
from .modular import ExponentSet, digit_double_factorial, p_weight


def _v_p(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


@dataclass(frozen=True)
class PiAdicElement:
    p: int
    K: int
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", _canon(self.p, self.K, self.coords))

    # -- constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, p: int, K: int) -> "PiAdicElement":
        return cls(p, K, (0,) * _width(p))

    @classmethod
    def from_int(cls, p: int, K: int, n: int) -> "PiAdicElement":
        return cls(p, K, (n,) + (0,) * (_width(p) - 1))

    @classmethod
    def pi_power(cls, p: int, K: int, k: int) -> "PiAdicElement":
        """pi^k = (-p)^q pi^i with k = q(p-1) + i."""
        if k < 0:
            raise InputError("negative power of pi")
        w = _width(p)
        if k >= K:
            return cls.zero(p, K)
        q, i = divmod(k, w)
        c = [0] * w
        c[i] = (-p) ** q
        return cls(p, K, tuple(c))

    # -- ring operations --------------------------------------------------------
    def _same(self, other: "PiAdicElement") -> None:
        if self.p != other.p or self.K != other.K:
            raise InputError("pi-adic operands differ in p or precision")

    def __add__(self, other):
        if isinstance(other, int):
            other = PiAdicElement.from_int(self.p, self.K, other)
        self._same(other)
        return PiAdicElement(self.p, self.K, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return PiAdicElement(self.p, self.K, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-other if isinstance(other, PiAdicElement) else -other)

    def __mul__(self, other):
        if isinstance(other, int):
            return PiAdicElement(self.p, self.K, tuple(a * other for a in self.coords))
        self._same(other)
        w = _width(self.p)
        prod = [0] * (2 * w - 1)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(other.coords):
                    prod[i + j] += a * b
        for k in range(2 * w - 2, w - 1, -1):
            prod[k - w] += -self.p * prod[k]
        return PiAdicElement(self.p, self.K, tuple(prod[:w]))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = PiAdicElement.from_int(self.p, self.K, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # -- valuation and residues ----------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coords)

    def valuation(self) -> int | None:
        """v_pi, or None when the element vanishes at this precision (v >= K)."""
        w = _width(self.p)
        best = None
        for i, c in enumerate(self.coords):
            if c:
                v = i + w * _v_p(c, self.p)
                best = v if best is None else min(best, v)
        return best

    def valuation_at_least(self, bound: int) -> bool:
        if bound > self.K:
            v = self.valuation()
            if v is None:
                raise PrecisionError(f"cannot certify v >= {bound} at precision {self.K}")
            return v >= bound
        v = self.valuation()
        return v is None or v >= bound

    def divide_pi(self, k: int = 1) -> "PiAdicElement":
        """self / pi^k, known modulo pi^(K-k); requires v(self) >= k."""
        x = self
        w = _width(self.p)
        for _ in range(k):
            c = list(x.coords)
            if c[0] % x.p:
                raise InputError("element is not divisible by pi")
            # c0 = -pi^(p-1) * (c0/p), so c0/pi = -(c0/p) pi^(p-2)
            head = -(c[0] // x.p)
            new = c[1:] + [0]
            new[w - 1] += head
            x = PiAdicElement(x.p, x.K - 1, tuple(new))
        return x

    def residue(self, v: int) -> int:
        """(self / pi^v) mod pi as an element of F_p; 0 when v(self) > v."""
        if v >= self.K:
            raise PrecisionError(f"residue at pi^{v} needs precision > {v}, have {self.K}")
        val = self.valuation()
        if val is not None and val < v:
            raise InputError(f"valuation {val} is below {v}")
        if val is None or val > v:
            return 0
        return self.divide_pi(v).coords[0] % self.p

    def to_json(self) -> dict:
        v = self.valuation()
        return {"coords": list(self.coords), "precision": self.K,
                "valuation": f">={self.K}" if v is None else v}


def _width(p: int) -> int:
    return max(p - 1, 1)


def _canon(p: int, K: int, coords: Sequence[int]) -> tuple[int, ...]:
    w = _width(p)
    out = []
    for i, c in enumerate(coords):
        e = max(0, -(-(K - i) // w))
        out.append(c % p ** e if e else 0)
    return tuple(out)


def _unit_inverse(u: int, p: int, K: int) -> int:
    mod = p ** (K // _width(p) + 2)
    return pow(u, -1, mod)


# --------------------------------------------------------------------------
# Teichmueller lifts and splitting-function coefficients
# --------------------------------------------------------------------------

def teichmuller(a: int, p: int, K: int) -> PiAdicElement:
    """The root of unity of order dividing p-1 congruent to a mod p."""
    require_prime(p)
    a %= p
    if a == 0:
        return PiAdicElement.zero(p, K)
    mod = p ** (K // _width(p) + 2)
    x = a
    while True:
        y = pow(x, p, mod)
        if y == x:
            break
        x = y
    return PiAdicElement.from_int(p, K, x)


@lru_cache(maxsize=4096)
def theta_coefficient(n: int, p: int, K: int) -> PiAdicElement:
    """lambda_n = sum_{r + p s = n} (-1)^s pi^(r+s) / (r! s!)."""
    if n < 0:
        raise InputError("index must be >= 0")
    total = PiAdicElement.zero(p, K)
    w = _width(p)
    for s in range(n // p + 1):
        r = n - p * s
        denom = factorial(r) * factorial(s)
        e = _v_p(denom, p)
        unit = denom // p ** e
        k = r + s - e * w
        if k < 0:
            raise AssertionError("negative pi-adic exponent in theta coefficient")
        if k >= K:
            continue
        # 1/p^e = (-1)^e pi^(-e(p-1))
        sign = (-1) ** (s + e)
        total = total + PiAdicElement.pi_power(p, K, k) * (sign * _unit_inverse(unit, p, K))
    return total


@dataclass
class CoeffsplitReport:
    p: int
    K: int
    rows: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r["pass"] for r in self.rows)

    def to_json(self) -> dict:
        return {"p": self.p, "precision": self.K, "pass": self.ok, "rows": self.rows}


def verify_coeffssplit(p: int, n_range: Iterable[int], K: int | None = None) -> CoeffsplitReport:
    """lambda_n = pi^s(n) / n!! mod pi^(s(n)+p-1) for n < p, and v(lambda_n) >= s(n)+p-1 for n >= p."""
    require_prime(p)
    ns = list(n_range)
    need = max((p_weight(n, p) for n in ns), default=0) + p - 1
    if K is None:
        K = need + 3
    if K < need:
        raise PrecisionError(f"precision {K} below the required {need}; raise K")
    rep = CoeffsplitReport(p, K)
    for n in ns:
        s = p_weight(n, p)
        lam = theta_coefficient(n, p, K)
        bound = s + p - 1
        if n <= p - 1:
            main = PiAdicElement.pi_power(p, K, s) * _unit_inverse(digit_double_factorial(n, p), p, K)
            diff = lam - main
            ok = diff.valuation_at_least(bound)
            kind = "congruence"
            v = diff.valuation()
        else:
            ok = lam.valuation_at_least(bound)
            kind = "valuation"
            v = lam.valuation()
        rep.rows.append({"n": n, "check": kind, "bound": bound,
                         "valuation": f">={K}" if v is None else v, "pass": bool(ok)})
    return rep


# --------------------------------------------------------------------------
# F_1 and the Dwork matrix
# --------------------------------------------------------------------------

def _prime_field_coeffs(f: InputPolynomial) -> dict[int, int]:
    if f.m != 1:
        raise InputError("Dwork-matrix checks are implemented over the prime field only (m = 1)")
    return {d: a.coeffs[0] for d, a in f.coeffs}


def _compositions(exps: Sequence[int], n: int, p: int) -> Iterable[tuple[int, ...]]:
    """Tuples u with sum d*u_d = n."""
    if not exps:
        if n == 0:
            yield ()
        return
    d = exps[0]
    for u in range(n // d + 1):
        for rest in _compositions(exps[1:], n - d * u, p):
            yield (u,) + rest


def f1_coefficient(f: InputPolynomial, n: int, K: int) -> PiAdicElement:
    """Coefficient of X^n in prod_d theta(omega(a_d) X^d), by composition sums."""
    a = _prime_field_coeffs(f)
    p = f.p
    if n < 0:
        return PiAdicElement.zero(p, K)
    exps = sorted(a)
    lifts = {d: teichmuller(a[d], p, K) for d in exps}
    total = PiAdicElement.zero(p, K)
    for u in _compositions(exps, n, p):
        term = PiAdicElement.from_int(p, K, 1)
        for d, ud in zip(exps, u):
            if ud:
                term = term * theta_coefficient(ud, p, K) * lifts[d] ** ud
        total = total + term
    return total


def f1_series(f: InputPolynomial, nmax: int, K: int) -> list[PiAdicElement]:
    """Coefficients 0..nmax of F_1 by multiplying truncated series."""
    a = _prime_field_coeffs(f)
    p = f.p
    out = [PiAdicElement.from_int(p, K, 1)] + [PiAdicElement.zero(p, K)] * nmax
    for d in sorted(a):
        lift = teichmuller(a[d], p, K)
        factor = [PiAdicElement.zero(p, K)] * (nmax + 1)
        for u in range(nmax // d + 1):
            factor[d * u] = theta_coefficient(u, p, K) * lift ** u
        new = [PiAdicElement.zero(p, K)] * (nmax + 1)
        for i, x in enumerate(out):
            if x.is_zero():
                continue
            for j in range(0, nmax + 1 - i, d):
                if not factor[j].is_zero():
                    new[i + j] = new[i + j] + x * factor[j]
        out = new
    return out


class DworkMatrix:
    """Entries f^(1)_{p i - j} for i, j in ``index``."""

    def __init__(self, f: InputPolynomial, index: Sequence[int], K: int):
        self.f = f
        self.index = tuple(index)
        self.K = K
        p = f.p
        top = p * max(self.index) - min(self.index) if self.index else 0
        self._coeffs = f1_series(f, max(top, 0), K)
        self.entries = [[self.coeff(p * i - j) for j in self.index] for i in self.index]

    def coeff(self, n: int) -> PiAdicElement:
        if n < 0:
            return PiAdicElement.zero(self.f.p, self.K)
        return self._coeffs[n]

    def det(self) -> PiAdicElement:
        return cofactor_det(self.entries, self.f.p, self.K)


def cofactor_det(M: Sequence[Sequence[PiAdicElement]], p: int, K: int) -> PiAdicElement:
    """Laplace expansion along rows, memoised on the set of remaining columns."""
    n = len(M)
    if n == 0:
        return PiAdicElement.from_int(p, K, 1)

    @lru_cache(maxsize=None)
    def rec(row: int, cols: int) -> PiAdicElement:
        if row == n:
            return PiAdicElement.from_int(p, K, 1)
        total = PiAdicElement.zero(p, K)
        sign = 1
        for c in range(n):
            if cols >> c & 1:
                entry = M[row][c]
                if not entry.is_zero():
                    sub = rec(row + 1, cols & ~(1 << c))
                    total = total + entry * sub * sign
                sign = -sign
        return total

    return rec(0, (1 << n) - 1)


def cyclic_minor(f: InputPolynomial, theta: Sequence[int], K: int) -> PiAdicElement:
    """M_theta = (-1)^(n-1) prod_i f_{p theta(i) - theta(i+1)}, indices cyclic."""
    p = f.p
    n = len(theta)
    top = p * max(theta)
    coeffs = f1_series(f, top, K)
    out = PiAdicElement.from_int(p, K, (-1) ** (n - 1))
    for i in range(n):
        k = p * theta[i] - theta[(i + 1) % n]
        out = out * (coeffs[k] if k >= 0 else PiAdicElement.zero(p, K))
    return out


def cyclic_decompositions(F: Sequence[int]) -> Iterable[list[tuple[int, ...]]]:
    """Partitions of F into cycles, each written from its least element."""
    F = sorted(F)
    if not F:
        yield []
        return
    first, rest = F[0], F[1:]
    for k in range(len(rest) + 1):
        for others in itertools.combinations(rest, k):
            remaining = [x for x in rest if x not in others]
            for perm in itertools.permutations(others):
                cyc = (first,) + perm
                for tail in cyclic_decompositions(remaining):
                    yield [cyc] + tail


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------

def default_precision(target: Fraction | int, p: int) -> int:
    return ceil(target) + p


@dataclass
class MinorReport:
    p: int
    exponents: tuple[int, ...]
    poly: str
    status: str
    sigma: tuple[int, ...] = ()
    target: int | None = None
    precision: int | None = None
    det_valuation: int | str | None = None
    det_residue: int | None = None
    hasse_value: int | None = None
    oracle_residue: int | None = None
    agree: bool | None = None
    findings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "p": self.p, "exponents": list(self.exponents), "poly": self.poly, "status": self.status,
            "sigma": list(self.sigma), "target_valuation": self.target, "precision": self.precision,
            "det_valuation": self.det_valuation, "det_residue": self.det_residue,
            "hasse_value": self.hasse_value, "oracle_residue": self.oracle_residue,
            "agree": self.agree, "findings": self.findings,
        }


def minor_congruence_check(D: ExponentSet, f: InputPolynomial, K: int | None = None,
                           with_oracle: bool = False, prediction: HassePrediction | None = None) -> MinorReport:
    """Residue of det A_1^Sigma / pi^(N(p-1)delta) against H(alpha).

    With ``with_oracle`` the coefficient l_N of the exact L-function is reduced the
    same way; it should equal (-1)^N H(alpha), the sign coming from det(1 - T A).
    """
    p = D.p
    a = _prime_field_coeffs(f)
    if any(d not in D.exponents for d in a):
        raise InputError(f"support of {f} is not contained in {D}")
    pred = prediction or predict(D)
    rep = MinorReport(p, D.exponents, f.render(), pred.status, pred.sigma)
    if pred.status == STATUS_FAILS:
        rep.findings.append("hypothesis (H) fails: no congruence to check")
        return rep
    target = pred.N * (p - 1) * pred.delta
    assert target.denominator == 1
    t = int(target)
    K = K or default_precision(t, p)
    if K <= t:
        raise PrecisionError(f"precision {K} must exceed the target valuation {t}")
    rep.target, rep.precision = t, K
    det = DworkMatrix(f, pred.sigma, K).det()
    v = det.valuation()
    rep.det_valuation = f">={K}" if v is None else v
    if v is not None and v < t:
        rep.findings.append(f"det valuation {v} below N(p-1)delta = {t}")
        rep.agree = False
        return rep
    rep.det_residue = det.residue(t)
    rep.hasse_value = int(evaluate(pred.hasse, a)) if pred.hasse is not None else 0
    rep.agree = rep.det_residue == rep.hasse_value
    if not rep.agree:
        rep.findings.append(f"residue {rep.det_residue} != H(alpha) = {rep.hasse_value}")
    if with_oracle:
        L = l_polynomial(f)
        if pred.N < len(L.coeffs):
            ell = L.coeffs[pred.N]
            vo = pi_valuation_fast(ell)
            rep.oracle_residue = 0 if vo is INF or vo > t else cyclotomic_residue(ell, t)
            expect = (-1) ** pred.N * rep.hasse_value % p
            if rep.oracle_residue != expect:
                rep.findings.append(f"oracle residue {rep.oracle_residue} != (-1)^N H = {expect}")
                rep.agree = False
    return rep


@dataclass
class CyclicReport:
    theta: tuple[int, ...]
    bound: Fraction
    strict: bool
    valuation: int | str
    passed: bool

    def to_json(self) -> dict:
        return {"theta": list(self.theta), "bound": f"{self.bound.numerator}/{self.bound.denominator}",
                "strict": self.strict, "valuation": self.valuation, "pass": self.passed}


def _bound_holds(x: PiAdicElement, bound: Fraction, strict: bool) -> bool:
    need = floor(bound) + 1 if strict else ceil(bound)
    return x.valuation_at_least(need)


def cyclic_minor_check(D: ExponentSet, f: InputPolynomial, theta: Sequence[int], K: int | None = None,
                       prediction: HassePrediction | None = None) -> CyclicReport:
    """v(M_theta) >= n(p-1)delta, strictly when Im theta is not inside Sigma."""
    if len(set(theta)) != len(theta) or min(theta) < 1:
        raise InputError("theta must be an injection into the positive integers")
    pred = prediction or predict(D)
    p = D.p
    bound = len(theta) * (p - 1) * pred.delta
    strict = not set(theta) <= set(pred.sigma)
    K = K or default_precision(bound, p)
    M = cyclic_minor(f, theta, K)
    v = M.valuation()
    return CyclicReport(tuple(theta), bound, strict, f">={K}" if v is None else v,
                        _bound_holds(M, bound, strict))


@dataclass
class DecompReport:
    F: tuple[int, ...]
    direct: PiAdicElement
    cyclic_sum: PiAdicElement
    supp2_bound: Fraction | None
    supp2_pass: bool | None

    @property
    def agree(self) -> bool:
        return self.direct == self.cyclic_sum

    def to_json(self) -> dict:
        return {"F": list(self.F), "agree": self.agree, "det": self.direct.to_json(),
                "supp2_bound": None if self.supp2_bound is None else
                f"{self.supp2_bound.numerator}/{self.supp2_bound.denominator}",
                "supp2_pass": self.supp2_pass}


def decomposition_check(D: ExponentSet, f: InputPolynomial, F: Sequence[int], K: int | None = None,
                        prediction: HassePrediction | None = None) -> DecompReport:
    """det A^F against the sum over cyclic decompositions; plus the F-not-in-Sigma bound."""
    pred = prediction or predict(D)
    p = D.p
    bound = len(F) * (p - 1) * pred.delta
    K = K or default_precision(bound, p)
    direct = DworkMatrix(f, sorted(F), K).det()
    total = PiAdicElement.zero(p, K)
    for parts in cyclic_decompositions(F):
        term = PiAdicElement.from_int(p, K, 1)
        for cyc in parts:
            term = term * cyclic_minor(f, cyc, K)
        total = total + term
    if set(F) <= set(pred.sigma):
        return DecompReport(tuple(sorted(F)), direct, total, None, None)
    return DecompReport(tuple(sorted(F)), direct, total, bound, _bound_holds(direct, bound, True))


def small_subsets(universe: Sequence[int], max_size: int) -> Iterable[tuple[int, ...]]:
    for k in range(1, max_size + 1):
        yield from itertools.combinations(sorted(universe), k)


def injections(universe: Sequence[int], max_size: int) -> Iterable[tuple[int, ...]]:
    """Injections with theta(0) = min Im theta (one per cyclic class)."""
    for F in small_subsets(universe, max_size):
        first, rest = F[0], F[1:]
        for perm in itertools.permutations(rest):
            yield (first,) + perm


def coeffs_over_fp(spec: FieldSpec, a: Mapping[int, int]) -> InputPolynomial:
    return InputPolynomial.build(spec, {d: spec.const(c) for d, c in a.items()})
