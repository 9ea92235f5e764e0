"""Positive association and the FKG lattice condition for coloring indicators."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidInput
from .exact import ExactDistribution, conditional_marginal
from .lattice import explicit

UPSET_CAP = 5

# A 9-vertex witness returned by the search below.  Class A is 0..4, class B
# is 5..8 with neighbourhoods {0,1}, {0,1,2}, {0,1,3}, {2,3,4}.  With q = 3,
# P(f(4)=1 | f(0)=1) = 23/56 and P(f(4)=1 | f(0)=f(1)=1) = 9/22.
DREIDEL_WITNESS = ((0, 5), (1, 5), (0, 6), (1, 6), (2, 6), (0, 7), (1, 7),
                   (3, 7), (2, 8), (3, 8), (4, 8))
DREIDEL_SITES = {"u": 4, "v": 0, "w": 1}


def dreidel_graph():
    return explicit(DREIDEL_WITNESS, 9)


@dataclass
class IndicatorFamily:
    base: ExactDistribution        # joint law of the colors on the involved vertices
    sites: tuple                   # vertices, or vertex pairs for kind='equal-pairs'
    kind: str
    law: dict                      # 0/1 vector -> probability

    def __post_init__(self):
        if sum(self.law.values()) != 1:
            raise ValueError("indicator law must sum to one")

    def prob(self, x):
        return self.law.get(tuple(x), Fraction(0))


def _family(base, sites, kind, indicator):
    law = {}
    for colors, w in zip(base.support, base.weights):
        val = dict(zip(base.sites, colors))
        key = tuple(indicator(val, s) for s in sites)
        law[key] = law.get(key, 0) + w
    return IndicatorFamily(base, tuple(sites), kind, law)


def color_one_family(G, q, sites, tau=None, color=1):
    """(1{f(x) = color}) over the given sites."""
    sites = list(sites)
    base = conditional_marginal(G, q, dict(tau or {}), sites)
    return _family(base, sites, "color1", lambda val, s: int(val[s] == color))


def equal_pairs_family(G, q, pairs, tau=None):
    """(1{f(x) = f(y)}) over the given vertex pairs."""
    pairs = [tuple(p) for p in pairs]
    verts = sorted({v for p in pairs for v in p})
    base = conditional_marginal(G, q, dict(tau or {}), verts)
    return _family(base, pairs, "equal-pairs",
                   lambda val, p: int(val[p[0]] == val[p[1]]))


def product_family(probs):
    """Independent Bernoulli coordinates, for testing."""
    probs = [Fraction(p) for p in probs]
    law = {}
    for bits in itertools.product((0, 1), repeat=len(probs)):
        w = Fraction(1)
        for b, p in zip(bits, probs):
            w *= p if b else 1 - p
        law[bits] = w
    sites = tuple(range(len(probs)))
    base = ExactDistribution(sites, tuple(law), tuple(law.values()))
    return IndicatorFamily(base, sites, "product", law)


# ---------------------------------------------------------------- checks

@dataclass
class Verdict:
    holds: bool
    witness: tuple | None = None
    mode: str = "exhaustive"
    checked: int = 0
    details: dict = field(default_factory=dict)


def fkg_lattice_check(fam):
    """mu(x v y) mu(x ^ y) >= mu(x) mu(y) for all pairs of 0/1 vectors."""
    k = len(fam.sites)
    pts = list(itertools.product((0, 1), repeat=k))
    n = 0
    for x, y in itertools.combinations(pts, 2):
        join = tuple(max(a, b) for a, b in zip(x, y))
        meet = tuple(min(a, b) for a, b in zip(x, y))
        n += 1
        if fam.prob(join) * fam.prob(meet) < fam.prob(x) * fam.prob(y):
            return Verdict(False, (x, y), checked=n)
    return Verdict(True, checked=n)


def upsets(k):
    """All up-sets of {0,1}^k as bitmasks over points (point index = int of bits)."""
    if k == 0:
        return [0, 1]
    prev = upsets(k - 1)
    half = 1 << (k - 1)
    out = []
    for low in prev:          # points with top bit 0
        for high in prev:     # points with top bit 1
            if low & ~high == 0:
                out.append(low | (high << half))
    return out


def _point_masses(fam):
    k = len(fam.sites)
    masses = [Fraction(0)] * (1 << k)
    for x, p in fam.law.items():
        masses[sum(b << i for i, b in enumerate(x))] = p
    return masses


def positive_association_check(fam, cap=UPSET_CAP):
    """E[XY] >= E[X]E[Y] over pairs of increasing 0/1 functions.

    Up to ``cap`` sites every pair of up-sets is checked.  Beyond it only
    products of coordinate indicators over nonempty site subsets are
    compared, and the verdict is flagged partial.
    """
    k = len(fam.sites)
    masses = _point_masses(fam)
    if k <= cap:
        den = 1
        for p in masses:
            den = den * p.denominator // np.gcd(den, p.denominator)
        ints = [int(p * den) for p in masses]
        family = upsets(k)
        if den >= 1 << 30:
            return _pa_slow(family, ints, den, k)
        M = np.array([[U >> i & 1 for i in range(1 << k)] for U in family], dtype=np.int64)
        vec = np.array(ints, dtype=np.int64)
        vals = M @ vec
        Mw = M * vec
        n = 0
        for lo in range(0, len(family), 512):
            both = Mw[lo:lo + 512] @ M.T
            bad = both * den < vals[lo:lo + 512, None] * vals[None, :]
            n += bad.size
            if bad.any():
                i, j = np.argwhere(bad)[0]
                return Verdict(False, (_points(family[lo + i], k), _points(family[j], k)),
                               checked=n)
        return Verdict(True, checked=n)
    # partial mode: events "all sites in S are 1"
    subsets = [S for r in range(1, k + 1) for S in itertools.combinations(range(k), r)]
    prob = {S: sum(p for x, p in fam.law.items() if all(x[i] for i in S)) for S in subsets}
    n = 0
    for S, T in itertools.combinations_with_replacement(subsets, 2):
        both = prob[tuple(sorted(set(S) | set(T)))]
        n += 1
        if both < prob[S] * prob[T]:
            return Verdict(False, (S, T), mode="pair-correlation", checked=n)
    return Verdict(True, mode="pair-correlation", checked=n,
                   details={"partial": True})


def _pa_slow(family, ints, den, k):
    vals = {U: sum(ints[i] for i in range(1 << k) if U >> i & 1) for U in family}
    n = 0
    for a_i, U in enumerate(family):
        for V in family[a_i:]:
            both = sum(ints[i] for i in range(1 << k) if (U & V) >> i & 1)
            n += 1
            if both * den < vals[U] * vals[V]:
                return Verdict(False, (_points(U, k), _points(V, k)), checked=n)
    return Verdict(True, checked=n)


def _points(U, k):
    return [tuple(i >> j & 1 for j in range(k)) for i in range(1 << k) if U >> i & 1]


def correlation(fam, i, j):
    """Cov of coordinates i and j as an exact rational."""
    pi = sum(p for x, p in fam.law.items() if x[i])
    pj = sum(p for x, p in fam.law.items() if x[j])
    pij = sum(p for x, p in fam.law.items() if x[i] and x[j])
    return pij - pi * pj


def kempe_single_set_check(G, q, u, S, tau=None, color=1):
    """P(f(u)=c, f(S)={c}) >= P(f(S)={c}) / q for u and S in one class."""
    S = list(S)
    if u in S:
        raise InvalidInput("u must not lie in S")
    if G.is_bipartite and len({G.parity(v) for v in S + [u]}) > 1:
        raise InvalidInput("u and S must lie in one bipartition class")
    marg = conditional_marginal(G, q, dict(tau or {}), [u] + S)
    p_s = sum(w for x, w in zip(marg.support, marg.weights)
              if all(c == color for c in x[1:]))
    p_us = sum(w for x, w in zip(marg.support, marg.weights)
               if all(c == color for c in x))
    return p_us, p_s / q, p_us >= p_s / q


def conditional_ratios(G, q, u, v, w, tau=None, color=1):
    """(P(f(u)=c | f(v)=c), P(f(u)=c | f(v)=f(w)=c)) as exact rationals."""
    marg = conditional_marginal(G, q, dict(tau or {}), [u, v, w])
    law = marg.as_dict()
    pv = sum(p for x, p in law.items() if x[1] == color)
    puv = sum(p for x, p in law.items() if x[0] == color and x[1] == color)
    pvw = sum(p for x, p in law.items() if x[1] == color and x[2] == color)
    puvw = sum(p for x, p in law.items() if x == (color,) * 3)
    return puv / pv, puvw / pvw


# ---------------------------------------------------------------- search

@dataclass
class SearchResult:
    found: bool
    edges: tuple = ()
    n: int = 0
    side_a: tuple = ()
    u: int | None = None
    v: int | None = None
    w: int | None = None
    ratios: tuple = ()
    lattice_violation: bool = False
    examined: int = 0


def _connected(ms, a):
    cover = 0
    for S in ms:
        cover |= S
    if cover != (1 << a) - 1:
        return False
    cur, rest = ms[0], list(ms[1:])
    changed = True
    while changed and rest:
        changed = False
        for S in rest[:]:
            if S & cur:
                cur |= S
                rest.remove(S)
                changed = True
    return not rest


def _lattice_violated(mu, a):
    n = 1 << a
    idx = np.arange(n)
    join = idx[:, None] | idx[None, :]
    meet = idx[:, None] & idx[None, :]
    return bool(np.any(mu[join] * mu[meet] < mu[:, None] * mu[None, :]))


def counterexample_search(budget, q=3, seed=0, target=(Fraction(23, 56), Fraction(9, 22))):
    """Search bipartite graphs on <= budget vertices for FKG failures.

    A graph is a class A of size a plus a multiset of neighbourhoods (subsets
    of A) for the class-B vertices.  Summing out class B, a coloring of A has
    weight prod_b (q - #colors on N(b)).  With a ``target`` ratio pair the
    search looks for sites u, v, w in A with
    P(f(u)=1 | f(v)=1) and P(f(u)=1 | f(v)=f(w)=1) equal to it; with
    ``target=None`` it returns the first violation of the lattice condition
    for (1{f(x)=1})_{x in A}.  ``seed`` shuffles the order of the class sizes.
    """
    if budget > 10:
        raise InvalidInput("budget is capped at 10 vertices")
    if target is not None:
        target = tuple(Fraction(t) for t in target)
    rng = random.Random(seed)
    examined = 0
    for n in range(2, budget + 1):
        sizes = list(range(1, n))
        rng.shuffle(sizes)
        for a in sizes:
            b = n - a
            if target is not None and a < 3:
                continue
            cols = np.array(list(itertools.product(range(q), repeat=a)), dtype=np.int64)
            table = {}
            for S in range(1, 1 << a):
                sub = cols[:, [i for i in range(a) if S >> i & 1]]
                distinct = np.array([len(set(r)) for r in sub.tolist()])
                table[S] = (q - distinct).astype(np.float64)
            is1 = (cols == 0).astype(np.float64)
            keys = (cols == 0).astype(np.int64) @ (1 << np.arange(a))
            for ms in itertools.combinations_with_replacement(range(1, 1 << a), b):
                if not _connected(ms, a):
                    continue
                examined += 1
                w = np.ones(len(cols))
                for S in ms:
                    w = w * table[S]
                if target is None:
                    mu = np.bincount(keys, weights=w, minlength=1 << a)
                    if _lattice_violated(mu, a):
                        return _result(ms, a, q, None, examined)
                    continue
                wi = is1 * w[:, None]
                pair = wi.T @ is1                    # pair[v, u] = N(f(v)=f(u)=1)
                single = np.diag(pair)
                for v in range(a):
                    for u in range(a):
                        if u == v or pair[v, u] * target[0].denominator != \
                                target[0].numerator * single[v]:
                            continue
                        for x in range(a):
                            if x in (u, v):
                                continue
                            m = wi[:, v] * is1[:, x]
                            num = float(m @ is1[:, u]) * target[1].denominator
                            if num == target[1].numerator * float(m.sum()):
                                res = _result(ms, a, q, (u, v, x), examined)
                                if res.ratios == target:
                                    return res
    return SearchResult(False, examined=examined)


def _result(ms, a, q, triple, examined):
    edges = []
    for j, S in enumerate(ms):
        edges += [(i, a + j) for i in range(a) if S >> i & 1]
    G = explicit(edges, a + len(ms))
    fam = color_one_family(G, q, range(a))
    viol = not fkg_lattice_check(fam).holds
    res = SearchResult(True, tuple(edges), G.n, tuple(range(a)), examined=examined,
                       lattice_violation=viol)
    if triple is not None:
        u, v, w = triple
        res.u, res.v, res.w = u, v, w
        res.ratios = conditional_ratios(G, q, u, v, w, color=1)
    return res
