"""Hasse polynomial of the first generic vertex and closed-form family predictors."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .errors import InputError
from .ffield import FqElement, require_prime
from .modular import (
    DEFAULT_LENGTH_CAP,
    DEFAULT_NODE_BUDGET,
    ExponentSet,
    OrbitCatalog,
    Witness,
    digit_double_factorial,
    orbit_catalog,
)

STATUS_OK = "ok"
STATUS_VANISHES = "H-vanishes"
STATUS_FAILS = "(H)-fails"


@dataclass(frozen=True)
class HassePolynomial:
    """Polynomial over F_p in the variables a_d, d in ``exponents``.

    ``terms`` maps exponent vectors (aligned with ``exponents``) to nonzero
    coefficients in ``[1, p-1]``.
    """

    p: int
    exponents: tuple[int, ...]
    terms: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def build(cls, p: int, exponents: Sequence[int], terms: Mapping[tuple[int, ...], int]) -> "HassePolynomial":
        clean = {}
        for mono, c in terms.items():
            c %= p
            if c:
                clean[tuple(mono)] = c
        order = sorted(clean, key=lambda mono: (sum(mono), tuple(reversed(mono))))
        return cls(p, tuple(exponents), tuple((mono, clean[mono]) for mono in order))

    @classmethod
    def from_monomials(cls, p: int, exponents: Sequence[int],
                       monos: Sequence[tuple[int, Mapping[int, int]]]) -> "HassePolynomial":
        """Build from ``[(coeff, {d: e})]``."""
        exps = tuple(exponents)
        acc: dict[tuple[int, ...], int] = {}
        for c, m in monos:
            vec = tuple(m.get(d, 0) for d in exps)
            acc[vec] = acc.get(vec, 0) + c
        return cls.build(p, exps, acc)

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self) -> list[tuple[dict[int, int], int]]:
        return [({d: e for d, e in zip(self.exponents, mono) if e}, c) for mono, c in self.terms]

    def scale(self, c: int) -> "HassePolynomial":
        return HassePolynomial.build(self.p, self.exponents, {m: k * c for m, k in self.terms})

    def restrict(self, exponents: Sequence[int]) -> "HassePolynomial":
        """Re-express over a larger or smaller variable set; dropped variables must be absent."""
        exps = tuple(exponents)
        acc = {}
        for m, c in self.monomials():
            if any(d not in exps for d in m):
                raise InputError(f"variable outside {exps}")
            acc[tuple(m.get(d, 0) for d in exps)] = c
        return HassePolynomial.build(self.p, exps, acc)

    def same_up_to_unit(self, other: "HassePolynomial") -> int | None:
        """The unit c with self = c * other, or None."""
        if self.p != other.p:
            return None
        a = dict((tuple(sorted(m.items())), c) for m, c in self.monomials())
        b = dict((tuple(sorted(m.items())), c) for m, c in other.monomials())
        if a.keys() != b.keys():
            return None
        if not a:
            return 1
        k0 = next(iter(a))
        c = a[k0] * pow(b[k0], -1, self.p) % self.p
        return c if all(a[k] == c * b[k] % self.p for k in a) else None

    def evaluate(self, coeffs: Mapping[int, FqElement | int]) -> FqElement | int:
        return evaluate(self, coeffs)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.monomials():
            vars_ = "*".join(f"a{d}" if e == 1 else f"a{d}^{e}" for d, e in sorted(m.items()))
            if not vars_:
                parts.append(str(c))
            elif c == 1:
                parts.append(vars_)
            else:
                parts.append(f"{c}*{vars_}")
        return " + ".join(parts)

    __str__ = render

    def to_json(self) -> list[dict]:
        return [{"monomial": {str(d): e for d, e in sorted(m.items())}, "coeff": c}
                for m, c in self.monomials()]


@dataclass(frozen=True)
class HassePrediction:
    D: ExponentSet
    status: str
    delta: Fraction
    N: int
    hasse: HassePolynomial | None
    covers: tuple[tuple[Witness, ...], ...] = ()
    sigma: tuple[int, ...] = ()
    warnings: tuple[str, ...] = field(default=())

    @property
    def holds_H(self) -> bool:
        return self.status != STATUS_FAILS

    @property
    def vertex(self) -> tuple[int, Fraction] | None:
        if self.status != STATUS_OK:
            return None
        return (self.N, self.N * self.delta)

    def to_json(self) -> dict:
        v = self.vertex
        return {
            "p": self.D.p,
            "exponents": list(self.D.exponents),
            "status": self.status,
            "holds_H": self.holds_H,
            "delta": _rat(self.delta),
            "N": self.N,
            "sigma": list(self.sigma),
            "vertex": None if v is None else [v[0], _rat(v[1])],
            "hasse": None if self.hasse is None else self.hasse.render(),
            "hasse_terms": None if self.hasse is None else self.hasse.to_json(),
            "covers": [[w.to_json() for w in cover] for cover in self.covers],
            "warnings": list(self.warnings),
        }


def _rat(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def exact_covers(catalog: OrbitCatalog) -> list[tuple[Witness, ...]]:
    """Sets of MI* representatives whose supports partition Sigma."""
    sigma = set(catalog.sigma)
    cands = [w for w in catalog.orbits if w.support <= sigma]
    out: list[tuple[Witness, ...]] = []

    def rec(uncovered: frozenset[int], chosen: list[Witness], start: int):
        if not uncovered:
            out.append(tuple(chosen))
            return
        pivot = min(uncovered)
        for i, w in enumerate(cands):
            if pivot in w.support and w.support <= uncovered:
                chosen.append(w)
                rec(uncovered - w.support, chosen, i + 1)
                chosen.pop()

    if sigma:
        rec(frozenset(sigma), [], 0)
    return out


def hasse_polynomial(D: ExponentSet, covers: Sequence[Sequence[Witness]], N: int) -> HassePolynomial:
    """Sum over covers of (-1)^(N-k) prod_t A^{U_t} / U_t!!, reduced mod p."""
    p = D.p
    acc: dict[tuple[int, ...], int] = {}
    for cover in covers:
        mono = [0] * len(D)
        denom = 1
        for w in cover:
            for j, x in enumerate(w.u):
                mono[j] += x
                denom *= digit_double_factorial(x, p)
        sign = -1 if (N - len(cover)) % 2 else 1
        key = tuple(mono)
        acc[key] = (acc.get(key, 0) + sign * pow(denom % p, -1, p)) % p
    return HassePolynomial.build(p, D.exponents, acc)


def predict(D: ExponentSet, length_cap: int = DEFAULT_LENGTH_CAP,
            budget: int = DEFAULT_NODE_BUDGET) -> HassePrediction:
    cat = orbit_catalog(D, length_cap, budget)
    covers = exact_covers(cat)
    if not covers:
        return HassePrediction(D, STATUS_FAILS, cat.delta, cat.N, None, (), cat.sigma, cat.warnings)
    H = hasse_polynomial(D, covers, cat.N)
    status = STATUS_VANISHES if H.is_zero() else STATUS_OK
    return HassePrediction(D, status, cat.delta, cat.N, H, tuple(covers), cat.sigma, cat.warnings)


def evaluate(H: HassePolynomial, coeffs: Mapping[int, FqElement | int]) -> FqElement | int:
    """H(alpha).  Integer coefficients are read in F_p; field elements stay in their field."""
    d0 = max(H.exponents)
    lead = coeffs.get(d0, 0)
    if (lead.code if isinstance(lead, FqElement) else lead % H.p) == 0:
        raise InputError(f"a_{d0} = 0: polynomial is outside k[x]_D; re-run predict on its support")
    fe = next((v for v in coeffs.values() if isinstance(v, FqElement)), None)
    if fe is None:
        total = 0
        for m, c in H.monomials():
            t = c
            for d, e in m.items():
                t = t * pow(coeffs.get(d, 0) % H.p, e, H.p) % H.p
            total = (total + t) % H.p
        return total
    spec = fe.spec
    total = spec.zero()
    for m, c in H.monomials():
        t = spec.const(c)
        for d, e in m.items():
            v = coeffs.get(d, spec.zero())
            if not isinstance(v, FqElement):
                v = spec.const(v)
            t = t * v ** e
        total = total + t
    return total


# --------------------------------------------------------------------------
# closed-form family predictors
# --------------------------------------------------------------------------

FAMILIES = ("T1", "T2", "char2", "small_d0", "char3")


def family_exponents(family: str, p: int, n: int) -> ExponentSet:
    """The exponent set of a family; for ``small_d0`` the parameter n is d0."""
    if family == "T1":
        top = p ** n - 1
    elif family == "T2":
        top = 2 * p ** n - 2
    elif family == "char2":
        top = 2 ** (n + 1) - 3
    elif family == "char3":
        top = 3 ** (n + 1) - 2
    elif family == "small_d0":
        top = n
    else:
        raise InputError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return ExponentSet.of(p, [i for i in range(1, top + 1) if i % p])


def family_predictor(family: str, p: int, n: int) -> HassePrediction:
    """Prediction straight from the closed-form statements, without any search."""
    require_prime(p)
    if n < 1:
        raise InputError("family parameter must be >= 1")
    if family == "T1":
        D = family_exponents(family, p, n)
        if D.d0 < 2:
            raise InputError("T1 needs p^n - 1 >= 2")
        H = HassePolynomial.from_monomials(p, D.exponents, [((-1) ** (n - 1), {p ** n - 1: 1})])
        return HassePrediction(D, STATUS_OK, Fraction(1, n * (p - 1)), n, H,
                               sigma=tuple(p ** i for i in range(n)))
    if family == "T2":
        if p == 2:
            raise InputError("T2 needs an odd prime")
        D = family_exponents(family, p, n)
        H = HassePolynomial.from_monomials(p, D.exponents, [(1, {2 * p ** n - 2: 1, p ** n - 1: 1})])
        sigma = sorted({p ** i for i in range(n)} | {2 * p ** i for i in range(n)})
        return HassePrediction(D, STATUS_OK, Fraction(1, n * (p - 1)), 2 * n, H, sigma=tuple(sigma))
    if family == "char2":
        if p != 2:
            raise InputError("char2 family needs p = 2")
        if n < 2:
            raise InputError("char2 family needs n >= 2")
        D = family_exponents(family, 2, n)
        d = D.d0
        mono: dict[int, int] = {3 * 2 ** (n - 1) - 1: 1}
        mono[d] = mono.get(d, 0) + 2 ** (n - 1)
        H = HassePolynomial.from_monomials(2, D.exponents, [(1, mono)])
        sigma = sorted(set(2 ** i for i in range(n + 1)) | {3 * 2 ** i for i in range(n - 1)})
        return HassePrediction(D, STATUS_OK, Fraction(1, n), 2 * n, H, sigma=tuple(sigma))
    if family == "small_d0":
        d0 = n
        if not 2 <= d0 < p:
            raise InputError("small_d0 family needs 2 <= d0 < p")
        D = family_exponents(family, p, d0)
        c = -(-(p - 1) // d0)
        H = _power_coefficient(p, D.exponents, c, p - 1)
        return HassePrediction(D, STATUS_OK, Fraction(c, p - 1), 1, H, sigma=(1,))
    if family == "char3":
        if p != 3:
            raise InputError("char3 family needs p = 3")
        D = family_exponents(family, 3, n)
        dn, d0 = 3 ** (n + 1) - 3 ** n - 1, 3 ** (n + 1) - 2
        H = HassePolynomial.from_monomials(3, D.exponents, [(1, {dn: 1, d0: 3 ** n})])
        sigma = sorted({3 ** i for i in range(n + 1)} | {2 * 3 ** i for i in range(n)})
        return HassePrediction(D, STATUS_OK, Fraction(1, 2 * n + 1), 2 * n + 1, H, sigma=tuple(sigma))
    raise InputError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _power_coefficient(p: int, exponents: Sequence[int], c: int, degree: int) -> HassePolynomial:
    """Coefficient of x^degree in (sum_d a_d x^d)^c as a polynomial in the a_d."""
    exps = tuple(exponents)
    acc: dict[tuple[int, ...], int] = {}

    def rec(i: int, left: int, deg: int, vec: list[int]):
        if i == len(exps):
            if left == 0 and deg == degree:
                mult = factorial(c)
                for e in vec:
                    mult //= factorial(e)
                acc[tuple(vec)] = acc.get(tuple(vec), 0) + mult
            return
        for e in range(left + 1):
            if deg + e * exps[i] > degree:
                break
            vec.append(e)
            rec(i + 1, left - e, deg + e * exps[i], vec)
            vec.pop()

    rec(0, c, 0, [])
    return HassePolynomial.build(p, exps, acc)
