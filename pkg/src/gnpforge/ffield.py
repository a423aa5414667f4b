"""Exact arithmetic in F_p and its extensions F_{p^s}.

Elements of F_{p^s} are coefficient vectors ``(c_0, ..., c_{s-1})`` over F_p in the
power basis of ``F_p[X]/(g)``, where ``g`` is the canonical modulus returned by
:func:`canonical_irreducible`.  An element also has an integer *code*
``sum(c_j * p**j)`` used as an index by the vectorised :class:`FieldTables`.

Two layers live here:

* :class:`FieldSpec` / :class:`FqElement`: scalar, readable, immutable.
* :class:`FieldTables`: exp/log/trace tables in numpy for the character-sum hot loops.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import BudgetExceeded, InputError

Poly = tuple[int, ...]  # low -> high coefficients over F_p


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n`` by trial division (``n`` is at most ~1e12 here)."""
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out.append(n)
    return out


def require_prime(p: int) -> None:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise InputError(f"p must be a prime, got {p!r}")


# --------------------------------------------------------------------------
# polynomials over F_p (tuples, low -> high, no trailing zeros)
# --------------------------------------------------------------------------

def _trim(a: list[int]) -> Poly:
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def _pmul(a: Poly, b: Poly, p: int) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim([c % p for c in out])


def _psub(a: Poly, b: Poly, p: int) -> Poly:
    n = max(len(a), len(b))
    return _trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p
                  for i in range(n)])


def _pmod(a: Poly, g: Poly, p: int) -> Poly:
    a = list(a)
    dg = len(g) - 1
    inv_lead = pow(g[-1], -1, p)
    while len(a) - 1 >= dg and a:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dg
        for i, gi in enumerate(g):
            a[shift + i] = (a[shift + i] - c * gi) % p
        a = list(_trim(a))
    return tuple(a)


def _pgcd(a: Poly, b: Poly, p: int) -> Poly:
    while b:
        a, b = b, _pmod(a, b, p)
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return tuple(c * inv % p for c in a)


def _ppowmod(base: Poly, e: int, g: Poly, p: int) -> Poly:
    result: Poly = (1,)
    base = _pmod(base, g, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), g, p)
        base = _pmod(_pmul(base, base, p), g, p)
        e >>= 1
    return result


def is_irreducible(g: Poly, p: int) -> bool:
    """Rabin's test for a monic polynomial ``g`` of degree s over F_p."""
    s = len(g) - 1
    if s < 1:
        return False
    if s == 1:
        return True
    if any(sum(c * pow(a, i, p) for i, c in enumerate(g)) % p == 0 for a in range(p)):
        return False
    x: Poly = (0, 1)
    # X^{p^s} == X mod g
    t = x
    for _ in range(s):
        t = _ppowmod(t, p, g, p)
    if _psub(t, x, p):
        return False
    for ell in prime_factors(s):
        t = x
        for _ in range(s // ell):
            t = _ppowmod(t, p, g, p)
        if len(_pgcd(g, _psub(t, x, p), p)) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def canonical_irreducible(p: int, s: int) -> Poly:
    """Lexicographically smallest monic irreducible of degree ``s`` over F_p.

    Candidates are ordered by ``(c_0, c_1, ..., c_{s-1})``; the leading 1 is implicit.
    """
    require_prime(p)
    if s < 1:
        raise InputError(f"extension degree must be >= 1, got {s}")
    # c_0 == 0 means X | g, reducible for s >= 2: skip that whole block
    first = range(1 if s > 1 else 0, p)
    for low in itertools.product(first, *[range(p)] * (s - 1)):
        g = tuple(low) + (1,)
        if is_irreducible(g, p):
            return g
    raise AssertionError("unreachable: irreducibles exist in every degree")


# --------------------------------------------------------------------------
# scalar field layer
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldSpec:
    """F_{p^s} = F_p[X]/(modulus).  Obtain instances through :meth:`get`."""

    p: int
    s: int
    modulus: Poly
    frobenius_matrix: tuple[tuple[int, ...], ...] = field(repr=False)
    trace_vector: tuple[int, ...] = field(repr=False)

    @staticmethod
    @lru_cache(maxsize=None)
    def get(p: int, s: int = 1) -> "FieldSpec":
        g = canonical_irreducible(p, s)
        # column j = coordinates of X^{j p}
        cols = []
        for j in range(s):
            img = _ppowmod((0,) * j + (1,), p, g, p)
            cols.append(tuple(img) + (0,) * (s - len(img)))
        frob = tuple(tuple(cols[j][i] for j in range(s)) for i in range(s))
        spec = FieldSpec(p, s, g, frob, ())
        tr = tuple(spec.basis(j).trace_naive() for j in range(s))
        object.__setattr__(spec, "trace_vector", tr)
        return spec

    @property
    def order(self) -> int:
        return self.p ** self.s

    def __repr__(self) -> str:
        return f"F_{self.p}^{self.s}"

    def __reduce__(self):
        return (FieldSpec.get, (self.p, self.s))

    def zero(self) -> "FqElement":
        return FqElement(self, (0,) * self.s)

    def one(self) -> "FqElement":
        return self.const(1)

    def const(self, a: int) -> "FqElement":
        return FqElement(self, (a % self.p,) + (0,) * (self.s - 1))

    def basis(self, j: int) -> "FqElement":
        c = [0] * self.s
        c[j] = 1
        return FqElement(self, tuple(c))

    def gen(self) -> "FqElement":
        """Class of X.  For s == 1 this is the root of ``X + c_0``, i.e. ``-c_0``."""
        if self.s == 1:
            return self.const(-self.modulus[0])
        return self.basis(1)

    def from_coeffs(self, coeffs: Sequence[int]) -> "FqElement":
        if len(coeffs) > self.s:
            raise InputError(f"{len(coeffs)} coefficients for a degree-{self.s} field")
        c = tuple(int(x) % self.p for x in coeffs) + (0,) * (self.s - len(coeffs))
        return FqElement(self, c)

    def from_code(self, code: int) -> "FqElement":
        c = []
        for _ in range(self.s):
            code, r = divmod(code, self.p)
            c.append(r)
        return FqElement(self, tuple(c))

    def elements(self) -> Iterator["FqElement"]:
        """All elements in code order."""
        for code in range(self.order):
            yield self.from_code(code)

    def elements_lex(self) -> Iterator["FqElement"]:
        """All elements in lexicographic order of ``(c_0, c_1, ...)``."""
        for c in itertools.product(range(self.p), repeat=self.s):
            yield FqElement(self, tuple(c))

    @lru_cache(maxsize=None)
    def primitive_element(self) -> "FqElement":
        n = self.order - 1
        factors = prime_factors(n)
        for code in range(1, self.order):
            x = self.from_code(code)
            if all(x ** (n // ell) != self.one() for ell in factors):
                return x
        raise AssertionError("unreachable: the multiplicative group is cyclic")


@dataclass(frozen=True)
class FqElement:
    spec: FieldSpec
    coeffs: tuple[int, ...]

    # -- plumbing -----------------------------------------------------------
    def _check(self, other: object) -> "FqElement":
        if isinstance(other, int):
            return self.spec.const(other)
        if not isinstance(other, FqElement):
            return NotImplemented  # type: ignore[return-value]
        if other.spec is not self.spec:
            raise TypeError(f"cross-field operation {self.spec} vs {other.spec}; embed first")
        return other

    @property
    def code(self) -> int:
        return sum(c * self.spec.p ** j for j, c in enumerate(self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __repr__(self) -> str:
        if self.spec.s == 1:
            return f"{self.coeffs[0]}"
        return "(" + ".".join(map(str, self.coeffs)) + ")"

    def lex_key(self) -> tuple[int, ...]:
        return self.coeffs

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        o = self._check(other)
        if o is NotImplemented:
            return o
        p = self.spec.p
        return FqElement(self.spec, tuple((a + b) % p for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.spec.p
        return FqElement(self.spec, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        o = self._check(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._check(other)
        if o is NotImplemented:
            return o
        p, s = self.spec.p, self.spec.s
        prod = _pmod(_pmul(_trim(list(self.coeffs)), _trim(list(o.coeffs)), p),
                     self.spec.modulus, p)
        return FqElement(self.spec, tuple(prod) + (0,) * (s - len(prod)))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "FqElement":
        if e < 0:
            return self.inverse() ** (-e)
        result = self.spec.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> "FqElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of 0 in a finite field")
        return self ** (self.spec.order - 2)

    def __truediv__(self, other):
        o = self._check(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    # -- Frobenius and trace ------------------------------------------------
    def frobenius(self, k: int = 1) -> "FqElement":
        """x -> x^{p^k}, applied as the precomputed F_p-linear map."""
        m = self.spec.frobenius_matrix
        p, s = self.spec.p, self.spec.s
        c = self.coeffs
        for _ in range(k % s if s > 1 else 0):
            c = tuple(sum(m[i][j] * c[j] for j in range(s)) % p for i in range(s))
        return FqElement(self.spec, c)

    def trace_naive(self) -> int:
        acc = self.spec.zero()
        y = self
        for _ in range(self.spec.s):
            acc = acc + y
            y = y ** self.spec.p
        assert all(c == 0 for c in acc.coeffs[1:])
        return acc.coeffs[0]

    def trace(self) -> int:
        return trace_to_prime(self)


def trace_to_prime(x: FqElement) -> int:
    """Absolute trace Tr_{F_{p^s}/F_p}(x), as an integer in [0, p)."""
    tv = x.spec.trace_vector
    return sum(c * t for c, t in zip(x.coeffs, tv)) % x.spec.p


@lru_cache(maxsize=None)
def _embedding_root(src: FieldSpec, dst: FieldSpec) -> FqElement:
    """Lex-first root of the modulus of ``src`` inside ``dst``.

    Roots of a degree-m irreducible lie in the unique subfield F_{p^m} of ``dst``,
    which is enumerated as the powers of gamma = g^{(Q-1)/(q-1)}, g primitive.
    """
    q, Q = src.order, dst.order
    g = dst.primitive_element()
    gamma = g ** ((Q - 1) // (q - 1))
    roots = []
    y = dst.one()
    for _ in range(q - 1):
        val = dst.zero()
        for c in reversed(src.modulus):
            val = val * y + c
        if val.is_zero():
            roots.append(y)
        y = y * gamma
    if src.s == 1:
        roots = [dst.const(-src.modulus[0])]
    return min(roots, key=FqElement.lex_key)


def embed(x: FqElement, target: FieldSpec) -> FqElement:
    """Canonical embedding F_{p^m} -> F_{p^{s}} (m | s): X maps to the lex-first root."""
    src = x.spec
    if src.p != target.p or target.s % src.s:
        raise InputError(f"cannot embed {src} into {target}")
    if src is target:
        return x
    if src.s == 1:
        return target.const(x.coeffs[0])
    rho = _embedding_root(src, target)
    acc = target.zero()
    for c in reversed(x.coeffs):
        acc = acc * rho + c
    return acc


def poly_eval(f: Mapping[int, FqElement], x: FqElement) -> FqElement:
    """Evaluate ``sum_d f[d] * x**d`` exactly."""
    acc = x.spec.zero()
    for d, a in f.items():
        if d < 1:
            raise InputError(f"exponents must be positive, got {d}")
        acc = acc + a * x ** d
    return acc


# --------------------------------------------------------------------------
# vectorised tables
# --------------------------------------------------------------------------

class FieldTables:
    """exp / log / trace tables for F_{p^s}, indexed by element code.

    ``exp[k]`` is the code of g^k (0 <= k < Q-1) for the primitive element g of
    :meth:`FieldSpec.primitive_element`; ``log[code]`` inverts it with ``log[0] = -1``.
    """

    DEFAULT_LIMIT = 1 << 24

    def __init__(self, spec: FieldSpec, limit: int = DEFAULT_LIMIT):
        Q = spec.order
        if Q > limit:
            raise BudgetExceeded(f"field {spec} has {Q} elements; table limit is {limit}")
        self.spec = spec
        p, s = spec.p, spec.s
        self.Q = Q
        self.pows = p ** np.arange(s, dtype=np.int64)
        g = spec.primitive_element()
        mult_g = self._mult_matrix(g)

        block = max(1, int(Q ** 0.5))
        first = np.zeros((block, s), dtype=np.int64)
        v = np.array(spec.one().coeffs, dtype=np.int64)
        for k in range(block):
            first[k] = v
            v = mult_g @ v % p
        mult_G = self._mult_matrix(g ** block).T.copy()

        n = Q - 1
        self.exp = np.empty(n, dtype=np.int64)
        cur = first
        for start in range(0, n, block):
            stop = min(start + block, n)
            self.exp[start:stop] = cur[: stop - start] @ self.pows
            cur = cur @ mult_G % p
        self.log = np.full(Q, -1, dtype=np.int64)
        self.log[self.exp] = np.arange(n, dtype=np.int64)
        codes = np.arange(Q, dtype=np.int64)
        trace = np.zeros(Q, dtype=np.int64)
        for j, t in enumerate(spec.trace_vector):
            if t:
                trace += (codes // int(self.pows[j])) % p * t
        self.trace = trace % p

    def _mult_matrix(self, a: FqElement) -> np.ndarray:
        s = self.spec.s
        m = np.zeros((s, s), dtype=np.int64)
        for j in range(s):
            m[:, j] = (a * self.spec.basis(j)).coeffs
        return m

    def digits(self, codes: np.ndarray) -> np.ndarray:
        p, s = self.spec.p, self.spec.s
        return (codes[..., None] // self.pows) % p if s > 1 else codes[..., None] % p

    def power(self, codes: np.ndarray, d: int) -> np.ndarray:
        """Elementwise x**d for d >= 1."""
        lg = self.log[codes]
        out = self.exp[(lg * d) % (self.Q - 1)]
        return np.where(codes == 0, 0, out)

    def mul_const(self, codes: np.ndarray, c: int) -> np.ndarray:
        if c == 0:
            return np.zeros_like(codes)
        lg = self.log[codes]
        out = self.exp[(lg + self.log[c]) % (self.Q - 1)]
        return np.where(codes == 0, 0, out)


@lru_cache(maxsize=8)
def field_tables(p: int, s: int) -> FieldTables:
    return FieldTables(FieldSpec.get(p, s))


def iter_tuples(spec: FieldSpec, exponents: Iterable[int], top: int) -> Iterator[dict[int, FqElement]]:
    """All coefficient maps over ``spec`` on ``exponents`` with nonzero coefficient at ``top``."""
    exps = sorted(exponents)
    elems = list(spec.elements())
    choices = [elems[1:] if d == top else elems for d in exps]
    for combo in itertools.product(*choices):
        yield dict(zip(exps, combo))
