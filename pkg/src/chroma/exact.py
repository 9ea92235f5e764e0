"""Exact counting, conditional marginals and influence computations.

All probabilities are ``fractions.Fraction``.  Counting enumerates the
colorings of a vertex set E and, for each, multiplies the number of free
colors left at the remaining vertices R; R is chosen independent so the
product is exact.  On bipartite graphs E is essentially one colour class,
which is what makes 20-vertex boxes feasible.
"""
from __future__ import annotations

import bisect
import itertools
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InfeasibleBoundary, InvalidInput, SizeCapError
from .lattice import GraphSpec, disagreement

FREE_CAP = 20
SUPPORT_CAP = 2_000_000
CHUNK_ROWS = 1 << 21
STATE_CAP = 60_000
ENUM_ROWS_CAP = 1 << 27   # bound on partial colorings the brute-force counter may list


@dataclass(frozen=True)
class ExactDistribution:
    sites: tuple
    support: tuple
    weights: tuple
    count: int | None = None

    def __post_init__(self):
        if sum(self.weights) != 1:
            raise ValueError("weights must sum to one")

    def prob(self, x):
        x = tuple(x)
        for s, w in zip(self.support, self.weights):
            if s == x:
                return w
        return Fraction(0)

    def as_dict(self):
        return dict(zip(self.support, self.weights))

    @classmethod
    def from_counts(cls, sites, counts, total=None):
        items = sorted((k, c) for k, c in counts.items() if c)
        total = total if total is not None else sum(c for _, c in items)
        if total == 0:
            raise InfeasibleBoundary("infeasible boundary condition")
        return cls(tuple(sites), tuple(k for k, _ in items),
                   tuple(Fraction(c, total) for _, c in items), total)


# ------------------------------------------------------------ enumeration core

def _allowed_masks(G, q, tau, lists):
    full = (1 << (q + 1)) - 2          # bits 1..q
    masks = [full] * G.n
    if lists is not None:
        items = lists.items() if isinstance(lists, dict) else enumerate(lists)
        for v, cols in items:
            masks[v] = sum(1 << c for c in cols) & full
    for v, c in tau.items():
        if not 1 <= c <= q:
            raise InvalidInput(f"boundary color {c} outside 1..{q}")
        masks[v] = 1 << c
    return masks


def _check_tau(G, tau):
    for v in tau:
        if not 0 <= v < G.n:
            raise InvalidInput(f"boundary vertex {v} not in graph")
    for u, v in G.edges:
        if u in tau and v in tau and tau[u] == tau[v]:
            raise InfeasibleBoundary("infeasible boundary condition")


_POP = np.array([bin(i).count("1") for i in range(1 << 14)], dtype=np.int64)


def _popcount(x):
    if x.size and int(x.max()) >= len(_POP):
        return np.array([bin(int(v)).count("1") for v in x.ravel()]).reshape(x.shape)
    return _POP[x]


def _split_sets(G, free, keep):
    """Choose an independent R inside free-keep; E is the rest of free."""
    cand = [v for v in free if v not in keep]
    if G.is_bipartite:
        cls = [[v for v in cand if G.parity(v) == p] for p in (0, 1)]
        R = max(cls, key=len)
    else:
        R, blocked = [], set()
        for v in sorted(cand, key=lambda v: G.degree(v)):
            if v not in blocked:
                R.append(v)
                blocked.update(G.adj[v])
    Rs = set(R)
    E = [v for v in free if v not in Rs]
    return E, sorted(R)


def _order_for_pruning(G, E, keep):
    """Keep-vertices first, then a BFS-like order so neighbours are adjacent."""
    E = list(E)
    inE = set(E)
    head = [v for v in keep if v in inE]
    rest = [v for v in E if v not in set(keep)]
    order, placed = list(head), set(head)
    while rest:
        best = max(rest, key=lambda v: sum(w in placed for w in G.adj[v]))
        order.append(best)
        placed.add(best)
        rest.remove(best)
    return order


def _extend(rows, G, q, order, start, masks, tau):
    """Extend rows (N, start) of colours for order[:start] to the full order."""
    pos = {v: i for i, v in enumerate(order)}
    for i in range(start, len(order)):
        v = order[i]
        cols = [c for c in range(1, q + 1) if masks[v] >> c & 1]
        for w in G.adj[v]:
            if w in tau and tau[w] in cols:
                cols.remove(tau[w])
        if not cols:
            return np.zeros((0, len(order)), dtype=np.int8)
        prev = [pos[w] for w in G.adj[v] if w in pos and pos[w] < i]
        n = rows.shape[0]
        new = np.repeat(rows, len(cols), axis=0)
        col = np.tile(np.array(cols, dtype=np.int8), n)
        ok = np.ones(len(col), dtype=bool)
        for j in prev:
            ok &= new[:, j] != col
        rows = np.concatenate([new[ok], col[ok, None]], axis=1)
    return rows


def _row_chunks(G, q, order, masks, tau):
    sizes = [bin(masks[v]).count("1") for v in order]
    split = 0
    while split < len(order) and math.prod(sizes[split:]) > CHUNK_ROWS:
        split += 1
    prefix = _extend(np.zeros((1, 0), dtype=np.int8), G, q, order[:split], 0, masks, tau)
    if split == 0:
        yield _extend(prefix, G, q, order, 0, masks, tau)
        return
    for r in prefix:
        yield _extend(r[None, :].copy(), G, q, order, split, masks, tau)


def _weights(rows, G, q, order, R, masks, tau):
    pos = {v: i for i, v in enumerate(order)}
    n = rows.shape[0]
    big = math.log2(max(q, 2)) * len(R) + math.log2(max(n, 2)) > 60
    w = np.ones(n, dtype=object if big else np.int64)
    one = np.int64(1)
    for r in R:
        mask = np.zeros(n, dtype=np.int64)
        fixed = 0
        for x in G.adj[r]:
            if x in tau:
                fixed |= 1 << tau[x]
            else:
                mask |= one << rows[:, pos[x]].astype(np.int64)
        avail = _popcount(np.int64(masks[r]) & ~(mask | fixed))
        w = w * (avail.astype(object) if big else avail)
    return w


def _extension_table(G, q, tau, keep, lists=None):
    """Map assignments of ``keep`` to their number of proper extensions."""
    tau = dict(tau)
    _check_tau(G, tau)
    keep = [v for v in keep if v not in tau]
    free = [v for v in G.vertices if v not in tau]
    masks = _allowed_masks(G, q, tau, lists)
    E, R = _split_sets(G, free, set(keep))
    rows = math.prod(bin(masks[v]).count("1") for v in E)
    if rows > ENUM_ROWS_CAP:
        raise SizeCapError(f"up to {rows} partial colorings exceed the cap {ENUM_ROWS_CAP}")
    order = _order_for_pruning(G, E, keep)
    k = len(keep)
    table = {}
    for rows in _row_chunks(G, q, order, masks, tau):
        if rows.shape[0] == 0:
            continue
        w = _weights(rows, G, q, order, R, masks, tau)
        if k == 0:
            table[()] = table.get((), 0) + int(sum(w.tolist()))
            continue
        keys = rows[:, :k]
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.ravel()
        if w.dtype == object:
            sums = [0] * len(uniq)
            for i, x in zip(inv.tolist(), w.tolist()):
                sums[i] += x
        else:
            sums = np.zeros(len(uniq), dtype=np.int64)
            np.add.at(sums, inv, w)
            sums = sums.tolist()
        for key, s in zip(map(tuple, uniq.tolist()), sums):
            if s:
                table[key] = table.get(key, 0) + int(s)
    return keep, table


def count_colorings(G, q, tau=None, lists=None):
    """Exact number of proper q-colorings extending ``tau`` (brute force)."""
    _, table = _extension_table(G, q, tau or {}, [], lists)
    return table.get((), 0)


def is_feasible(G, q, tau, lists=None):
    return find_extension(G, q, tau, lists) is not None


def find_extension(G, q, tau, lists=None, rng=None):
    """Depth-first search with forward checking for one proper extension."""
    tau = dict(tau)
    try:
        _check_tau(G, tau)
    except InfeasibleBoundary:
        return None
    masks = _allowed_masks(G, q, tau, lists)
    dom = {}
    for v in G.vertices:
        m = masks[v]
        if v not in tau:
            for w in G.adj[v]:
                if w in tau:
                    m &= ~(1 << tau[w])
        dom[v] = m
    f = dict(tau)

    def colors(m):
        cs = [c for c in range(1, q + 1) if m >> c & 1]
        if rng is not None:
            rng.shuffle(cs)
        return cs

    def rec(dom):
        todo = [v for v in G.vertices if v not in f]
        if not todo:
            return True
        v = min(todo, key=lambda x: bin(dom[x]).count("1"))
        for c in colors(dom[v]):
            f[v] = c
            nd = dict(dom)
            ok = True
            for w in G.adj[v]:
                if w not in f:
                    nd[w] &= ~(1 << c)
                    if nd[w] == 0:
                        ok = False
                        break
            if ok and rec(nd):
                return True
            del f[v]
        return False

    if any(dom[v] == 0 for v in G.vertices if v not in tau):
        return None
    sys.setrecursionlimit(max(10_000, sys.getrecursionlimit()))
    return [f[v] for v in G.vertices] if rec(dom) else None


def enumerate_colorings(G, q, tau=None, lists=None, free_cap=FREE_CAP,
                        support_cap=SUPPORT_CAP):
    """Uniform distribution over all proper extensions of ``tau``."""
    tau = dict(tau or {})
    free = [v for v in G.vertices if v not in tau]
    if len(free) > free_cap:
        raise SizeCapError(f"{len(free)} free vertices exceed the cap {free_cap}")
    total = count_colorings(G, q, tau, lists)
    if total == 0:
        raise InfeasibleBoundary("infeasible boundary condition")
    if total > support_cap:
        raise SizeCapError(f"{total} colorings exceed the support cap {support_cap}")
    keep, table = _extension_table(G, q, tau, list(G.vertices), lists)
    support = []
    for key in table:
        f = dict(tau)
        f.update(zip(keep, key))
        support.append(tuple(f[v] for v in G.vertices))
    support.sort()
    w = Fraction(1, total)
    return ExactDistribution(tuple(G.vertices), tuple(support), (w,) * len(support), total)


def conditional_marginal(G, q, tau, U, lists=None):
    """Exact marginal of the uniform extension measure on the vertex list U."""
    tau = dict(tau)
    U = list(U)
    keep, table = _extension_table(G, q, tau, U, lists)
    counts = {}
    for key, c in table.items():
        f = dict(zip(keep, key))
        vals = tuple(tau[u] if u in tau else f[u] for u in U)
        counts[vals] = counts.get(vals, 0) + c
    return ExactDistribution.from_counts(U, counts)


def tv_distance(p, r):
    if p.sites != r.sites:
        raise InvalidInput("distributions live on different site sets")
    a, b = p.as_dict(), r.as_dict()
    return sum((abs(a.get(k, 0) - b.get(k, 0)) for k in set(a) | set(b)),
               Fraction(0)) / 2


# ------------------------------------------------------------ transfer matrix

def _box_rows(G):
    if G.kind != "box" or G.coords is None or G.d not in (1, 2):
        raise InvalidInput("transfer-matrix counting needs a one- or two-dimensional box")
    if G.d == 1:
        return [sorted(G.vertices, key=lambda v: G.coords[v])]
    xs = sorted({c[0] for c in G.coords})
    ys = sorted({c[1] for c in G.coords})
    axis = 0 if len(xs) >= len(ys) else 1      # rows run along the shorter side
    lines = {}
    for v, c in enumerate(G.coords):
        lines.setdefault(c[axis], []).append(v)
    return [sorted(lines[k], key=lambda v: G.coords[v]) for k in sorted(lines)]


def _row_states(row, q, masks, tau, cap):
    states = np.zeros((1, 0), dtype=np.int8)
    for i, v in enumerate(row):
        cols = np.array([c for c in range(1, q + 1) if masks[v] >> c & 1], dtype=np.int8)
        n = states.shape[0]
        if n * len(cols) > 4 * cap:
            raise SizeCapError("row state space exceeds the transfer-matrix cap")
        new = np.repeat(states, len(cols), axis=0)
        col = np.tile(cols, n)
        ok = np.ones(len(col), dtype=bool) if i == 0 else new[:, i - 1] != col
        states = np.concatenate([new[ok], col[ok, None]], axis=1)
    if states.shape[0] > cap:
        raise SizeCapError("row state space exceeds the transfer-matrix cap")
    return states


def _compat(S1, S2, block=2048):
    out = np.empty((S1.shape[0], S2.shape[0]), dtype=bool)
    for i in range(0, S1.shape[0], block):
        out[i:i + block] = np.all(S1[i:i + block, None, :] != S2[None, :, :], axis=2)
    return out


def _limb_matvec(M, vec):
    """Exact M.T @ vec for a 0/1 matrix M and a list of Python ints."""
    vec = [int(x) for x in vec]
    top = max(vec, default=0)
    out = [0] * M.shape[1]
    shift = 0
    Mi = M.astype(np.int64)
    while top >> shift:
        limb = np.array([(x >> shift) & ((1 << 30) - 1) for x in vec], dtype=np.int64)
        part = limb @ Mi
        out = [o + (int(p) << shift) for o, p in zip(out, part.tolist())]
        shift += 30
    return out


class RowTransfer:
    """Forward counts of a box processed row by row."""

    def __init__(self, G, q, tau=None, lists=None, state_cap=STATE_CAP):
        tau = dict(tau or {})
        _check_tau(G, tau)
        self.G, self.q = G, q
        self.rows = _box_rows(G)
        masks = _allowed_masks(G, q, tau, lists)
        self.states = [_row_states(r, q, masks, tau, state_cap) for r in self.rows]
        self.forward = [[1] * self.states[0].shape[0]]
        self.compat = []
        for k in range(1, len(self.rows)):
            M = _compat(self.states[k - 1], self.states[k])
            self.compat.append(M)
            self.forward.append(_limb_matvec(M, self.forward[-1]))

    @property
    def count(self):
        return sum(self.forward[-1])

    def sample(self, size, rng):
        """Exact uniform samples by backward sampling; returns (size, n) colors."""
        total = self.count
        if total == 0:
            raise InfeasibleBoundary("infeasible boundary condition")
        out = np.zeros((size, self.G.n), dtype=np.int8)
        idx = _draw(self.forward[-1], size, rng)
        k = len(self.rows) - 1
        out[:, self.rows[k]] = self.states[k][idx]
        while k > 0:
            k -= 1
            new = np.empty(size, dtype=np.int64)
            M = self.compat[k]
            for s in np.unique(idx):
                sel = np.flatnonzero(idx == s)
                w = [f if m else 0 for f, m in zip(self.forward[k], M[:, s].tolist())]
                new[sel] = _draw(w, len(sel), rng)
            idx = new
            out[:, self.rows[k]] = self.states[k][idx]
        return out


def _draw(weights, size, rng):
    weights = [int(w) for w in weights]
    total = sum(weights)
    if total < 2 ** 62:
        cum = np.cumsum(np.array(weights, dtype=np.int64))
        r = rng.integers(0, total, size=size)
        return np.searchsorted(cum, r, side="right")
    out = np.empty(size, dtype=np.int64)
    cum = list(itertools.accumulate(weights))
    for i in range(size):
        out[i] = bisect.bisect_right(cum, _uniform_below(total, rng))
    return out


def _uniform_below(total, rng):
    """Exactly uniform integer in [0, total) for arbitrary big totals."""
    nbits = total.bit_length()
    words = (nbits + 31) // 32
    while True:
        r = 0
        for w in rng.integers(0, 1 << 32, size=words).tolist():
            r = (r << 32) | w
        r >>= words * 32 - nbits
        if r < total:
            return r


def count_transfer_matrix(G, q, tau=None, lists=None, state_cap=STATE_CAP):
    """Exact count of proper colorings of a box by row transfer matrices."""
    return RowTransfer(G, q, tau, lists, state_cap).count


def sample_colorings(G, q, tau, size, rng, lists=None):
    """Exact independent uniform proper colorings extending tau."""
    tau = dict(tau or {})
    if G.kind == "box" and G.d in (1, 2):
        try:
            return RowTransfer(G, q, tau, lists).sample(size, rng)
        except SizeCapError:
            pass
    dist = enumerate_colorings(G, q, tau, lists)
    idx = rng.integers(0, len(dist.support), size=size)
    return np.array(dist.support, dtype=np.int8)[idx]


# ------------------------------------------------------------ influences

@dataclass(frozen=True)
class ColoringModel:
    q: int


@dataclass(frozen=True)
class PottsModel:
    """Antiferromagnetic Potts weights x^{#monochromatic edges}, x = exp(-beta)."""

    q: int
    x: Fraction


def _tv_uniform(A1, A2, q):
    """TV between uniform laws on the complements of colour sets A1, A2."""
    S1 = q - len(A1)
    S2 = q - len(A2)
    tot = Fraction(0)
    for c in range(1, q + 1):
        p = Fraction(int(c not in A1), S1)
        r = Fraction(int(c not in A2), S2)
        tot += abs(p - r)
    return tot / 2


@lru_cache(maxsize=None)
def _coloring_star_influence(deg, q):
    """Max over feasible star boundary pairs differing at one leaf."""
    best = Fraction(0)
    for others in itertools.product(range(1, q + 1), repeat=deg - 1):
        base = set(others)
        for a in range(1, q + 1):
            A1 = base | {a}
            if len(A1) >= q:
                continue
            for b in range(a + 1, q + 1):
                A2 = base | {b}
                if len(A2) >= q:
                    continue
                best = max(best, _tv_uniform(A1, A2, q))
    return best


def _potts_conditional(nbr_colors, q, x):
    w = [x ** sum(1 for c in nbr_colors if c == k) for k in range(1, q + 1)]
    z = sum(w)
    return [wi / z for wi in w]


@lru_cache(maxsize=None)
def _potts_star_influence(deg, q, x):
    best = Fraction(0)
    for others in itertools.product(range(1, q + 1), repeat=deg - 1):
        for a in range(1, q + 1):
            p = _potts_conditional(others + (a,), q, x)
            for b in range(a + 1, q + 1):
                r = _potts_conditional(others + (b,), q, x)
                best = max(best, sum(abs(s - t) for s, t in zip(p, r)) / 2)
    return best


def influence(G, model, u, v, star_restriction=True):
    """I_{u->v}: worst-case effect of the colour at u on the conditional law at v."""
    if u == v:
        raise InvalidInput("influence needs u != v")
    if u not in G.adj[v]:
        return Fraction(0)
    if isinstance(model, ColoringModel):
        if not star_restriction:
            raise InvalidInput("the hard-constraint model needs star restriction")
        return _coloring_star_influence(G.degree(v), model.q)
    return _potts_star_influence(G.degree(v), model.q, Fraction(model.x))


@dataclass(frozen=True)
class InfluenceMatrix:
    entries: dict
    alpha: Fraction
    certified: bool


def dobrushin_alpha(G, model, vertices=None):
    vertices = list(G.vertices) if vertices is None else list(vertices)
    entries = {}
    alpha = Fraction(0)
    for v in vertices:
        col = Fraction(0)
        for u in G.adj[v]:
            entries[(u, v)] = influence(G, model, u, v)
            col += entries[(u, v)]
        alpha = max(alpha, col)
    return InfluenceMatrix(entries, alpha, alpha < 1)


# ------------------------------------------------------------ SSM certificate

@dataclass(frozen=True)
class SSMReport:
    lhs: Fraction
    rhs: Fraction | None      # None encodes +infinity (q <= max degree)
    distance: float
    holds: bool


def ssm_rhs(G, q, U, B_diff):
    delta = G.max_degree
    dist = G.set_distance(set(U), set(B_diff))
    if dist == float("inf"):
        return Fraction(0), dist
    if q <= delta:
        return None, dist
    return len(U) * Fraction(delta, q - delta) ** dist, dist


def ssm_certificate(G, q, B, tau1, tau2, U):
    B = set(B)
    if set(tau1) != B or set(tau2) != B:
        raise InvalidInput("both boundary conditions must be defined exactly on B")
    U = sorted(U)
    m1 = conditional_marginal(G, q, tau1, U)
    m2 = conditional_marginal(G, q, tau2, U)
    lhs = tv_distance(m1, m2)
    rhs, dist = ssm_rhs(G, q, U, disagreement(tau1, tau2))
    return SSMReport(lhs, rhs, dist, rhs is None or lhs <= rhs)


# ------------------------------------------------------------ Potts / Ising

def edge_statistic_table(G, q, tau, sites, stat="mono", cap=5_000_000):
    """Counts of maps by (values on ``sites``, number of edges of a given kind).

    ``stat='mono'`` counts monochromatic edges, ``'diff'`` bichromatic ones.
    All q^{free} maps are enumerated, so this is for small graphs only.
    """
    tau = dict(tau or {})
    free = [v for v in G.vertices if v not in tau]
    if q ** len(free) > cap:
        raise SizeCapError(f"{q}^{len(free)} maps exceed the cap {cap}")
    grid = np.array(list(itertools.product(range(1, q + 1), repeat=len(free))),
                    dtype=np.int8).reshape(-1, len(free))
    full = np.empty((grid.shape[0], G.n), dtype=np.int8)
    for v, c in tau.items():
        full[:, v] = c
    full[:, free] = grid
    k = np.zeros(grid.shape[0], dtype=np.int64)
    for a, b in G.edges:
        k += full[:, a] == full[:, b]
    if stat == "diff":
        k = len(G.edges) - k
    keys = np.concatenate([full[:, list(sites)].astype(np.int64), k[:, None]], axis=1)
    uniq, cnt = np.unique(keys, axis=0, return_counts=True)
    table = {}
    for row, c in zip(uniq.tolist(), cnt.tolist()):
        table.setdefault(tuple(row[:-1]), {})[row[-1]] = c
    return table


def potts_distribution(G, q, x, tau=None):
    """Exact AF Potts law with weight x^{#monochromatic edges}, x rational."""
    tau = dict(tau or {})
    x = Fraction(x)
    table = edge_statistic_table(G, q, tau, list(G.vertices))
    weights = {}
    for key, hist in table.items():
        w = sum(c * x ** k for k, c in hist.items())
        if w:
            weights[key] = w
    z = sum(weights.values())
    if z == 0:
        raise InfeasibleBoundary("infeasible boundary condition")
    items = sorted(weights.items())
    return ExactDistribution(tuple(G.vertices), tuple(k for k, _ in items),
                             tuple(w / z for _, w in items))
