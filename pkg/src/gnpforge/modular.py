"""Modular equations, p-density and minimal irreducible solutions.

An element ``U = (u_d)`` of E_{D,p}(n) is a tuple of integers in ``[0, p^n - 1]``
with ``sum(d * u_d) = phi * (p^n - 1)`` for a positive integer ``phi``.  The search
engine works on the *carry graph*: its states are the positive integers
``1..sum(D)`` and an edge ``a -> b`` exists when ``c = p*a - b`` lies in
``[0, (p-1)*sum(D)]``; its cost is the least digit sum of a vector
``x in [0, p-1]^D`` with ``sum(d * x_d) = c``.  Closed walks of length ``n`` are
exactly the elements of E_{D,p}(n) read digit by digit (the walk visits
``phi_U(0), phi_U(1), ...``), so

* s_{D,p}(n) is the min-plus trace of the n-th power of the cost matrix,
* (p-1) * delta_{D,p} is the minimum cycle mean,
* minimal irreducible elements are the simple cycles of the tight subgraph.

The residue-graph BFS and the exhaustive enumerations below are kept as
independent oracles for small ``p^n - 1``.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, InputError
from .ffield import require_prime

log = logging.getLogger(__name__)

_INF = np.iinfo(np.int64).max // 4

DEFAULT_NODE_BUDGET = 2_000_000
DEFAULT_LENGTH_CAP = 24


# --------------------------------------------------------------------------
# digits
# --------------------------------------------------------------------------

def p_digits(n: int, p: int) -> list[int]:
    out = []
    while n:
        n, r = divmod(n, p)
        out.append(r)
    return out


def p_weight(n: int, p: int) -> int:
    """Sum of the base-p digits of n."""
    if n < 0:
        raise InputError("p_weight needs n >= 0")
    return sum(p_digits(n, p))


def digit_double_factorial(n: int, p: int) -> int:
    """Product of the factorials of all base-p digits of n (1 for n = 0)."""
    out = 1
    for r in p_digits(n, p):
        out *= factorial(r)
    return out


# --------------------------------------------------------------------------
# exponent sets and witnesses
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentSet:
    p: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        require_prime(self.p)
        exps = tuple(sorted(set(int(d) for d in self.exponents)))
        if not exps:
            raise InputError("exponent set D must be nonempty")
        if exps[0] < 1:
            raise InputError("exponents must be positive integers")
        bad = [d for d in exps if d % self.p == 0]
        if bad:
            raise InputError(f"exponents {bad} are divisible by p={self.p}; D must be prime to p")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def of(cls, p: int, exponents: Iterable[int]) -> "ExponentSet":
        return cls(p, tuple(exponents))

    @property
    def d0(self) -> int:
        return self.exponents[-1]

    @property
    def total(self) -> int:
        return sum(self.exponents)

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def index(self, d: int) -> int:
        return self.exponents.index(d)

    def without(self, *drop: int) -> "ExponentSet":
        return ExponentSet(self.p, tuple(d for d in self.exponents if d not in drop))

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.exponents)) + f"}}@p={self.p}"


@dataclass(frozen=True)
class Witness:
    """An element U of E_{D,p}(n); coordinates follow ``D.exponents``."""

    D: ExponentSet
    n: int
    u: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise InputError("witness length must be >= 1")
        if len(self.u) != len(self.D):
            raise InputError("one coordinate per exponent required")
        top = self.modulus
        if any(not 0 <= x <= top for x in self.u):
            raise InputError(f"coordinates must lie in [0, {top}]")
        s = self.linear_sum
        if s <= 0 or s % top:
            raise InputError(f"{self.u} is not in E(n={self.n})")

    @property
    def p(self) -> int:
        return self.D.p

    @property
    def modulus(self) -> int:
        return self.D.p ** self.n - 1

    @property
    def linear_sum(self) -> int:
        return sum(d * x for d, x in zip(self.D.exponents, self.u))

    @cached_property
    def weight(self) -> int:
        return sum(p_weight(x, self.p) for x in self.u)

    @property
    def phi0(self) -> int:
        return self.linear_sum // self.modulus

    @cached_property
    def phi_map(self) -> tuple[int, ...]:
        return tuple(phi_map(self))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.phi_map)

    @property
    def irreducible(self) -> bool:
        return len(self.support) == self.n

    @property
    def density(self) -> Fraction:
        return Fraction(self.weight, (self.p - 1) * self.n)

    def coords(self) -> dict[int, int]:
        return {d: x for d, x in zip(self.D.exponents, self.u) if x}

    def double_factorial(self) -> int:
        out = 1
        for x in self.u:
            out *= digit_double_factorial(x, self.p)
        return out

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "u": {str(d): x for d, x in zip(self.D.exponents, self.u) if x},
            "weight": self.weight,
            "phi": list(self.phi_map),
            "irreducible": self.irreducible,
        }


def shift(U: Witness) -> Witness:
    """delta_n: k -> p*k mod (p^n - 1) on every coordinate, with p^n - 1 fixed."""
    m = U.modulus
    return Witness(U.D, U.n, tuple(x if x == m else (U.p * x) % m for x in U.u))


def phi_map(U: Witness) -> list[int]:
    out = []
    V = U
    for _ in range(U.n):
        out.append(V.phi0)
        V = shift(V)
    return out


# --------------------------------------------------------------------------
# digit knapsack: least digit sum realising c = sum d x_d, x_d in [0, p-1]
# --------------------------------------------------------------------------

class DigitKnapsack:
    def __init__(self, D: ExponentSet):
        self.D = D
        p = D.p
        self.cmax = (p - 1) * D.total
        cost = np.full(self.cmax + 1, _INF, dtype=np.int64)
        cost[0] = 0
        for d in D.exponents:
            # bounded multiplicity p-1: iterate copies
            for _ in range(p - 1):
                shifted = np.full_like(cost, _INF)
                shifted[d:] = cost[:-d] + 1 if d <= self.cmax else _INF
                cost = np.minimum(cost, shifted)
        # ``cost`` above allows any multiplicity <= p-1 per exponent
        self.cost = cost

    def options(self, c: int) -> list[tuple[int, ...]]:
        """All digit vectors of minimal digit sum realising c."""
        return list(self._options(c))

    @lru_cache(maxsize=None)
    def _options(self, c: int) -> tuple[tuple[int, ...], ...]:
        if c < 0 or c > self.cmax or self.cost[c] >= _INF:
            return ()
        target = int(self.cost[c])
        exps = self.D.exponents
        p = self.D.p
        out: list[tuple[int, ...]] = []

        def rec(i: int, rem: int, used: int, acc: list[int]):
            if used > target:
                return
            if i == len(exps):
                if rem == 0 and used == target:
                    out.append(tuple(acc))
                return
            d = exps[i]
            for x in range(min(p - 1, rem // d) + 1):
                acc.append(x)
                rec(i + 1, rem - d * x, used + x, acc)
                acc.pop()

        rec(0, c, 0, [])
        return tuple(out)


# --------------------------------------------------------------------------
# carry graph
# --------------------------------------------------------------------------

class CarryGraph:
    """States 1..sum(D); ``W[a-1, b-1]`` is the least cost of the step a -> b."""

    def __init__(self, D: ExponentSet):
        self.D = D
        self.knap = DigitKnapsack(D)
        p = D.p
        S = D.total
        self.size = S
        a = np.arange(1, S + 1, dtype=np.int64)[:, None]
        b = np.arange(1, S + 1, dtype=np.int64)[None, :]
        c = p * a - b
        ok = (c >= 0) & (c <= self.knap.cmax)
        W = np.full((S, S), _INF, dtype=np.int64)
        W[ok] = self.knap.cost[c[ok]]
        self.W = W

    def step_cost(self, a: int, b: int) -> int:
        return int(self.W[a - 1, b - 1])

    def digit_options(self, a: int, b: int) -> list[tuple[int, ...]]:
        return self.knap.options(self.D.p * a - b)

    def closed_walk_minima(self, nmax: int) -> dict[int, int]:
        """n -> least cost of a closed walk of length exactly n, for n = 1..nmax."""
        W = self.W
        P = W.copy()
        out = {}
        for n in range(1, nmax + 1):
            if n > 1:
                P = minplus(P, W)
            out[n] = int(np.diagonal(P).min())
        return out

    def min_cycle_mean(self) -> Fraction:
        """Karp's algorithm on the whole graph."""
        W = self.W
        S = self.size
        Dk = np.full((S + 1, S), _INF, dtype=np.int64)
        Dk[0, :] = 0
        for k in range(1, S + 1):
            Dk[k] = minplus(Dk[k - 1][None, :], W)[0]
        best: Fraction | None = None
        for v in range(S):
            if Dk[S, v] >= _INF:
                continue
            worst: Fraction | None = None
            for k in range(S):
                if Dk[k, v] >= _INF:
                    continue
                val = Fraction(int(Dk[S, v] - Dk[k, v]), S - k)
                if worst is None or val > worst:
                    worst = val
            if worst is not None and (best is None or worst < best):
                best = worst
        assert best is not None
        return best

    def tight_subgraph(self, mean: Fraction) -> dict[int, list[int]]:
        """Edges lying on cycles of mean ``mean`` (assumed to be the minimum mean).

        Potentials come from Bellman-Ford on the integer weights den*w - num.
        """
        num, den = mean.numerator, mean.denominator
        S = self.size
        fin = self.W < _INF
        Wr = np.where(fin, self.W * den - num, _INF)
        dist = np.zeros(S, dtype=np.int64)
        for _ in range(S + 1):
            cand = np.where(fin, dist[:, None] + Wr, _INF).min(axis=0)
            new = np.minimum(dist, cand)
            if np.array_equal(new, dist):
                break
            dist = new
        else:
            raise AssertionError("negative reduced cycle: mean is not minimal")
        tight = fin & (dist[:, None] + Wr - dist[None, :] == 0)
        # keep only edges inside strongly connected components of the tight graph
        adj = {a + 1: [int(b) + 1 for b in np.nonzero(tight[a])[0]] for a in range(S)}
        comp = _scc(adj)
        # an edge lies on a cycle iff both ends share a component (self-loops included)
        out: dict[int, list[int]] = {}
        for a, succ in adj.items():
            keep = [b for b in succ if comp[a] == comp[b]]
            if keep:
                out[a] = keep
        return out


def comp_size(comp: dict[int, int], c: int) -> int:
    return sum(1 for x in comp.values() if x == c)


def _scc(adj: dict[int, list[int]]) -> dict[int, int]:
    """Tarjan, iterative.  Returns node -> component id."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comp: dict[int, int] = {}
    counter = 0
    ncomp = 0
    for root in adj:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succ = adj.get(v, [])
            recurse = False
            while i < len(succ):
                w = succ[i]
                i += 1
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comp


def minplus(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(A (x) B)[i, j] = min_k A[i, k] + B[k, j], saturating at the sentinel."""
    out = np.empty((A.shape[0], B.shape[1]), dtype=np.int64)
    rows = max(1, (1 << 22) // max(1, A.shape[1] * B.shape[1]))
    for start in range(0, A.shape[0], rows):
        blk = A[start : start + rows, :, None] + B[None, :, :]
        out[start : start + rows] = blk.min(axis=1)
    return np.minimum(out, _INF)


@lru_cache(maxsize=64)
def carry_graph(D: ExponentSet) -> CarryGraph:
    return CarryGraph(D)


# --------------------------------------------------------------------------
# minimal weights
# --------------------------------------------------------------------------

def min_weight(D: ExponentSet, n: int) -> int:
    """s_{D,p}(n) from the carry graph."""
    if n < 1:
        raise InputError("n must be >= 1")
    return carry_graph(D).closed_walk_minima(n)[n]


def min_weight_bfs(D: ExponentSet, n: int, budget: int = 1 << 22) -> int:
    """s_{D,p}(n) as the shortest nonempty closed walk at 0 in Z/(p^n - 1).

    Steps are the residues p^j * d; a minimal walk never repeats one step p times.
    """
    p = D.p
    M = p ** n - 1
    if M > budget:
        raise BudgetExceeded(f"residue graph of size {M} exceeds budget {budget}")
    steps = sorted({(pow(p, j) * d) % M for d in D.exponents for j in range(n)} if M > 1 else {0})
    if 0 in steps:
        return 1
    dist = np.full(M, -1, dtype=np.int64)
    dist[0] = 0
    frontier = np.array([0], dtype=np.int64)
    depth = 0
    step_arr = np.array(steps, dtype=np.int64)
    while frontier.size:
        depth += 1
        nxt = (frontier[:, None] + step_arr[None, :]).ravel() % M
        if (nxt == 0).any():
            return depth
        nxt = np.unique(nxt)
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = depth
        frontier = nxt
    raise AssertionError("residue graph has no cycle through 0")


def _weight_table(p: int, top: int) -> np.ndarray:
    w = np.zeros(top + 1, dtype=np.int64)
    for k in range(1, top + 1):
        w[k] = w[k // p] + k % p
    return w


def iter_E(D: ExponentSet, n: int, budget: int = 50_000_000) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Exhaustive enumeration of E_{D,p}(n) in chunks ``(U rows, weights)``.

    The last coordinate is solved from the congruence instead of looped over,
    which keeps the enumeration exhaustive at cost (p^n)^(#D - 1).
    """
    p = D.p
    M = p ** n - 1
    k = len(D)
    if (M + 1) ** max(k - 1, 1) > budget:
        raise BudgetExceeded(f"exhaustive enumeration of E(n={n}) exceeds budget {budget}")
    exps = np.array(D.exponents, dtype=np.int64)
    wt = _weight_table(p, M)
    last = int(exps[-1])
    rng = np.arange(M + 1, dtype=np.int64)
    # all u_last in [0, M] grouped by residue of last * u_last mod M
    by_res: dict[int, np.ndarray] = {}
    res = (last * rng) % M if M > 1 else np.zeros_like(rng)
    order = np.argsort(res, kind="stable")
    sr = res[order]
    bounds = np.searchsorted(sr, np.arange(M + 2 if M > 1 else 2))
    for r in range(M if M > 1 else 1):
        by_res[r] = order[bounds[r] : bounds[r + 1]]
    if k > 1:
        heads = np.array(list(itertools.product(range(M + 1), repeat=k - 1)), dtype=np.int64)
    else:
        heads = np.zeros((1, 0), dtype=np.int64)
    chunk = 1 << 16
    for start in range(0, len(heads), chunk):
        H = heads[start : start + chunk]
        partial = H @ exps[:-1] if k > 1 else np.zeros(len(H), dtype=np.int64)
        need = (-partial) % M if M > 1 else np.zeros_like(partial)
        rows = []
        for r in np.unique(need):
            tails = by_res[int(r)]
            sel = H[need == r]
            if not len(tails):
                continue
            rep_h = np.repeat(sel, len(tails), axis=0)
            rep_t = np.tile(tails, len(sel))[:, None]
            rows.append(np.hstack([rep_h, rep_t]))
        if not rows:
            continue
        U = np.vstack(rows)
        pos = (U @ exps) > 0
        U = U[pos]
        yield U, wt[U].sum(axis=1)


def brute_min_weight(D: ExponentSet, n: int, budget: int = 50_000_000) -> int:
    """Exhaustive minimum of s_p(U) over E_{D,p}(n)."""
    best = None
    for _, w in iter_E(D, n, budget):
        if len(w):
            m = int(w.min())
            best = m if best is None else min(best, m)
    if best is None:
        raise AssertionError("E(n) is empty")
    return best


# --------------------------------------------------------------------------
# density
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityReport:
    D: ExponentSet
    table: dict[int, int]
    delta: Fraction
    argmins: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "p": self.D.p,
            "exponents": list(self.D.exponents),
            "table": {str(n): s for n, s in self.table.items()},
            "delta": f"{self.delta.numerator}/{self.delta.denominator}",
            "argmins": list(self.argmins),
        }


@lru_cache(maxsize=64)
def density(D: ExponentSet, nmax: int | None = None) -> DensityReport:
    """p-density over n = 1..d0-1 (or ``nmax`` when given)."""
    if D.d0 < 2:
        raise InputError("d0 = 1 gives a constant L-function; nothing to compute")
    top = D.d0 - 1 if nmax is None else nmax
    table = carry_graph(D).closed_walk_minima(top)
    ratios = {n: Fraction(s, n) for n, s in table.items()}
    best = min(ratios.values())
    argmins = tuple(n for n, r in ratios.items() if r == best)
    return DensityReport(D, table, best / (D.p - 1), argmins)


# --------------------------------------------------------------------------
# enumeration of minimal elements
# --------------------------------------------------------------------------

def _witness_from_walk(D: ExponentSet, walk: Sequence[int], digits: Sequence[tuple[int, ...]]) -> Witness:
    """Closed walk phi(0..n-1) with edge digit vectors -> U (digit i sits at p^{n-1-i})."""
    n = len(walk)
    p = D.p
    u = [0] * len(D)
    for i, vec in enumerate(digits):
        scale = p ** (n - 1 - i)
        for j, x in enumerate(vec):
            u[j] += x * scale
    return Witness(D, n, tuple(u))


def _expand_digits(graph: CarryGraph, walk: Sequence[int], D: ExponentSet,
                   budget: list[int]) -> Iterator[Witness]:
    n = len(walk)
    opts = [graph.digit_options(walk[i], walk[(i + 1) % n]) for i in range(n)]
    for combo in itertools.product(*opts):
        budget[0] -= 1
        if budget[0] < 0:
            raise BudgetExceeded("minimal-element enumeration exceeded its node budget")
        yield _witness_from_walk(D, walk, combo)


def _sorted_witnesses(ws: Iterable[Witness]) -> list[Witness]:
    return sorted(ws, key=lambda w: (w.n, w.phi_map, w.u))


def enumerate_minimal(D: ExponentSet, n: int, budget: int = DEFAULT_NODE_BUDGET) -> list[Witness]:
    """All U in E_{D,p}(n) of weight s_{D,p}(n), provided that weight realises the density."""
    rep = density(D)
    s = min_weight(D, n) if n not in rep.table else rep.table[n]
    if Fraction(s, (D.p - 1) * n) != rep.delta:
        return []
    graph = carry_graph(D)
    tight = graph.tight_subgraph(rep.delta * (D.p - 1))
    left = [budget]
    out: list[Witness] = []

    # closed walks of length n in the tight graph, labelled start
    def walks(start: int) -> Iterator[list[int]]:
        path = [start]

        def rec():
            left[0] -= 1
            if left[0] < 0:
                raise BudgetExceeded("minimal-element enumeration exceeded its node budget")
            if len(path) == n:
                if start in tight.get(path[-1], ()):
                    yield list(path)
                return
            for b in tight.get(path[-1], ()):
                path.append(b)
                yield from rec()
                path.pop()

        yield from rec()

    for start in sorted(tight):
        for walk in walks(start):
            out.extend(_expand_digits(graph, walk, D, left))
    return _sorted_witnesses(out)


def enumerate_minimal_residue(D: ExponentSet, n: int, budget: int = DEFAULT_NODE_BUDGET) -> list[Witness]:
    """Same set as :func:`enumerate_minimal`, found in the residue graph Z/(p^n - 1).

    Depth-first search over multisets of steps (d, j) in canonical order whose
    residues sum to 0, pruned by BFS distance-to-zero.
    """
    rep = density(D)
    p = D.p
    M = p ** n - 1
    s = min_weight_bfs(D, n)
    if Fraction(s, (p - 1) * n) != rep.delta:
        return []
    steps = [(j_d, j, (pow(p, j) * d) % M if M > 1 else 0)
             for j_d, d in enumerate(D.exponents) for j in range(n)]
    # dist[r]: fewest steps whose residues, added to r, reach 0 (multiplicity caps ignored)
    dist = np.full(max(M, 1), _INF, dtype=np.int64)
    dist[0] = 0
    frontier = [0]
    d = 0
    res = np.array([st[2] for st in steps], dtype=np.int64)
    while frontier:
        d += 1
        nxt = np.unique((np.array(frontier)[:, None] - res[None, :]).ravel() % max(M, 1))
        nxt = nxt[dist[nxt] >= _INF]
        dist[nxt] = d
        frontier = list(nxt)
    found: set[tuple[int, ...]] = set()
    left = [budget]

    def rec(idx: int, remaining: int, cur: int, mult: list[int]):
        left[0] -= 1
        if left[0] < 0:
            raise BudgetExceeded("residue-graph enumeration exceeded its node budget")
        if remaining == 0:
            if cur % max(M, 1) == 0:
                u = [0] * len(D)
                for (jd, j, _), c in zip(steps, mult):
                    u[jd] += c * p ** j
                found.add(tuple(u))
            return
        if dist[cur % max(M, 1)] > remaining:
            return
        for k in range(idx, len(steps)):
            if mult[k] == p - 1:
                continue
            mult[k] += 1
            rec(k, remaining - 1, (cur + steps[k][2]) % max(M, 1), mult)
            mult[k] -= 1

    rec(0, s, 0, [0] * len(steps))
    return _sorted_witnesses(Witness(D, n, u) for u in found)


def brute_enumerate_minimal(D: ExponentSet, n: int, budget: int = 50_000_000) -> list[Witness]:
    rep = density(D)
    s = brute_min_weight(D, n, budget)
    if Fraction(s, (D.p - 1) * n) != rep.delta:
        return []
    out = []
    for U, w in iter_E(D, n, budget):
        for row in U[w == s]:
            out.append(Witness(D, n, tuple(int(x) for x in row)))
    return _sorted_witnesses(out)


# --------------------------------------------------------------------------
# orbit catalogue
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitCatalog:
    D: ExponentSet
    delta: Fraction
    orbits: tuple[Witness, ...]
    sigma: tuple[int, ...]
    warnings: tuple[str, ...] = field(default=())

    @property
    def N(self) -> int:
        return len(self.sigma)

    def to_json(self) -> dict:
        return {
            "delta": f"{self.delta.numerator}/{self.delta.denominator}",
            "orbits": [w.to_json() for w in self.orbits],
            "sigma": list(self.sigma),
            "N": self.N,
            "warnings": list(self.warnings),
        }


def _simple_cycles_min_start(adj: dict[int, list[int]], cap: int,
                             budget: list[int]) -> Iterator[list[int]]:
    """Simple cycles listed from their least node, length <= cap."""
    for start in sorted(adj):
        path = [start]
        on_path = {start}

        def rec():
            budget[0] -= 1
            if budget[0] < 0:
                raise BudgetExceeded("cycle enumeration exceeded its node budget")
            for b in adj.get(path[-1], ()):
                if b == start:
                    yield list(path)
                elif b > start and b not in on_path and len(path) < cap:
                    path.append(b)
                    on_path.add(b)
                    yield from rec()
                    path.pop()
                    on_path.discard(b)

        yield from rec()


@lru_cache(maxsize=64)
def orbit_catalog(D: ExponentSet, length_cap: int = DEFAULT_LENGTH_CAP,
                  budget: int = DEFAULT_NODE_BUDGET) -> OrbitCatalog:
    """Representatives of MI*_{D,p} (phi_U(0) = min phi_U) and Sigma_{D,p}."""
    rep = density(D)
    graph = carry_graph(D)
    mean = rep.delta * (D.p - 1)
    tight = graph.tight_subgraph(mean)
    sigma = tuple(sorted(tight))
    warnings = []
    comp = _scc(tight)
    biggest = max((comp_size(comp, c) for c in set(comp.values())), default=0)
    cap = min(length_cap, graph.size)
    if biggest > cap:
        warnings.append(f"cap reached: tight component of size {biggest} > length cap {cap}")
        log.warning(warnings[-1])
    left = [budget]
    orbits = []
    for cyc in _simple_cycles_min_start(tight, cap, left):
        orbits.extend(_expand_digits(graph, cyc, D, left))
    for w in orbits:
        assert w.irreducible and w.phi_map[0] == min(w.phi_map)
    return OrbitCatalog(D, rep.delta, tuple(_sorted_witnesses(orbits)), sigma, tuple(warnings))
