"""Height functions of 3-colorings: lifting, exact marginals and estimates."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lattice
from .dynamics import ChainState, cftp_heights, glauber_sweep, height_extremes
from .errors import InvalidInput, SizeCapError
from .exact import _limb_matvec, conditional_marginal, find_extension


# ---------------------------------------------------------------- domains

def height_window(n, d=2):
    """Zero-boundary window with an n^d interior.

    The box has side n+2 and its lowest corner is an odd vertex; the even
    rim vertices are pinned to 0 and odd rim vertices stay free.  With odd n
    the centre is odd and its four neighbours, when on the rim, are pinned.
    """
    G = lattice.box((n + 2,) * d, origin=(1,) + (0,) * (d - 1), rimmed=True)
    fixed = {v: 0 for v in G.rim if G.parity(v) == 0}
    return G, fixed


def height_ball(L, d=2):
    """Lambda(L) with h = 0 on its inner boundary (the L1 sphere); L even."""
    if L % 2:
        raise InvalidInput("ball radius must be even so the sphere is even")
    G = lattice.ball(d, L)
    fixed = {v: 0 for v in G.vertices if sum(map(abs, G.coords[v])) == L}
    return G, fixed


def center(G):
    """Vertex nearest the centroid of the embedding (ties by vertex id)."""
    c = np.array(G.coords, dtype=float)
    mid = (c.min(axis=0) + c.max(axis=0)) / 2
    return int(np.argmin(np.abs(c - mid).sum(axis=1) + 1e-9 * np.arange(G.n)))


# ---------------------------------------------------------------- bijection

def default_anchor(G):
    cand = sorted(G.rim) if G.rim else list(G.vertices)
    even = [v for v in cand if G.parity(v) == 0] or cand
    if G.coords is not None:
        return min(even, key=lambda v: G.coords[v])
    return min(even)


def coloring_to_height(f, G, anchor=None, anchor_value=None):
    """Lift a proper 3-coloring (colors 1..3) to a height function.

    The lift satisfies h = f - 1 (mod 3).  Every edge is checked afterwards,
    so an inconsistent input (e.g. a coloring winding around a torus) is
    reported rather than silently mis-lifted.
    """
    if not lattice.is_proper(f, G, 3):
        raise InvalidInput("coloring is not a proper 3-coloring")
    anchor = default_anchor(G) if anchor is None else anchor
    par = G.parity(anchor)
    if anchor_value is None:
        anchor_value = next(x for x in range(-2, 4)
                            if x % 3 == (f[anchor] - 1) % 3 and x % 2 == par)
    if anchor_value % 3 != (f[anchor] - 1) % 3 or anchor_value % 2 != par:
        raise InvalidInput("anchor value incompatible with the anchor's colour or parity")
    h = [None] * G.n
    h[anchor] = anchor_value
    queue = deque([anchor])
    while queue:
        v = queue.popleft()
        for w in G.adj[v]:
            if h[w] is None:
                h[w] = h[v] + (1 if (h[v] + 1 - (f[w] - 1)) % 3 == 0 else -1)
                queue.append(w)
    if any(x is None for x in h):
        raise InvalidInput("graph is not connected")
    bad = [(u, v) for u, v in G.edges if abs(h[u] - h[v]) != 1]
    if bad:
        raise InvalidInput(f"coloring has nonzero winding; inconsistent edges {bad[:3]}")
    return tuple(h)


def height_to_coloring(h):
    return tuple(x % 3 + 1 for x in h)


# ---------------------------------------------------------------- exact marginals

def enumerate_heights(G, fixed, limit=5_000_000):
    """All height functions with the given pinned values (plain DFS oracle)."""
    top, bot = height_extremes(G, fixed)
    order = sorted((v for v in G.vertices if v not in fixed),
                   key=lambda v: (G.coords[v][::-1] if G.coords else v))
    h = dict(fixed)
    out = []

    def rec(i):
        if i == len(order):
            out.append(tuple(h[v] for v in G.vertices))
            if len(out) > limit:
                raise SizeCapError("too many height functions")
            return
        v = order[i]
        nb = [h[w] for w in G.adj[v] if w in h]
        for x in range(int(bot[v]), int(top[v]) + 1, 2):
            if all(abs(x - y) == 1 for y in nb):
                h[v] = x
                rec(i + 1)
                del h[v]

    rec(0)
    return out


def _height_rows(G):
    if G.coords is None or G.d != 2:
        raise InvalidInput("row transfer for heights needs a planar grid embedding")
    rows = {}
    for v, c in enumerate(G.coords):
        rows.setdefault(c[1], []).append(v)
    keys = sorted(rows)
    return [sorted(rows[k], key=lambda v: G.coords[v][0]) for k in keys]


def _height_row_states(row, G, fixed, top, bot):
    pos = {v: i for i, v in enumerate(row)}
    states = np.zeros((1, 0), dtype=np.int64)
    for i, v in enumerate(row):
        vals = [fixed[v]] if v in fixed else list(range(int(bot[v]), int(top[v]) + 1, 2))
        n = states.shape[0]
        new = np.repeat(states, len(vals), axis=0)
        col = np.tile(np.array(vals, dtype=np.int64), n)
        ok = np.ones(len(col), dtype=bool)
        for w in G.adj[v]:
            j = pos.get(w)
            if j is not None and j < i:
                ok &= np.abs(new[:, j] - col) == 1
        states = np.concatenate([new[ok], col[ok, None]], axis=1)
    return states


def _height_compat(rows, k, S1, S2, G):
    pos1 = {v: i for i, v in enumerate(rows[k - 1])}
    pairs = [(pos1[w], j) for j, v in enumerate(rows[k]) for w in G.adj[v] if w in pos1]
    M = np.ones((S1.shape[0], S2.shape[0]), dtype=bool)
    for a, b in pairs:
        M &= np.abs(S1[:, a][:, None] - S2[:, b][None, :]) == 1
    return M


def exact_height_marginal(G, fixed, v):
    """Exact law of h(v) by a row transfer matrix (2-d embedded graphs)."""
    rows = _height_rows(G)
    for u, w in G.edges:
        ru = G.coords[u][1]
        rw = G.coords[w][1]
        if abs(ru - rw) > 1:
            raise InvalidInput("edges must join equal or consecutive rows")
    top, bot = height_extremes(G, fixed)
    states = [_height_row_states(r, G, fixed, top, bot) for r in rows]
    compat = [None] + [_height_compat(rows, k, states[k - 1], states[k], G)
                       for k in range(1, len(rows))]
    fwd = [[1] * states[0].shape[0]]
    for k in range(1, len(rows)):
        fwd.append(_limb_matvec(compat[k], fwd[-1]))
    bwd = [None] * len(rows)
    bwd[-1] = [1] * states[-1].shape[0]
    for k in range(len(rows) - 2, -1, -1):
        bwd[k] = _limb_matvec(compat[k + 1].T, bwd[k + 1])
    k = next(i for i, r in enumerate(rows) if v in r)
    col = rows[k].index(v)
    counts = {}
    for s, a, b in zip(states[k][:, col].tolist(), fwd[k], bwd[k]):
        if a and b:
            counts[s] = counts.get(s, 0) + a * b
    total = sum(counts.values())
    return MarginalTable(v, {x: Fraction(c, total) for x, c in sorted(counts.items())},
                         "exact", count=total)


@dataclass
class MarginalTable:
    site: int
    values: dict
    mode: str
    sample_count: int | None = None
    count: int | None = None


# ---------------------------------------------------------------- log-concavity

@dataclass
class LogConcavityReport:
    holds: bool
    monotone: bool
    symmetric: bool
    violations: list = field(default_factory=list)
    checked: int = 0
    marginal: MarginalTable | None = None
    exact: bool = True


def log_concavity_check(G, fixed, v, marginal=None):
    """Check P(h=i)^2 >= P(h=i+2j) P(h=i-2j) exactly, plus (p_i) monotone."""
    if marginal is None:
        marginal = exact_height_marginal(G, fixed, v)
    P = marginal.values
    if not P:
        raise InvalidInput("empty marginal")
    lo, hi = min(P), max(P)
    span = (hi - lo) // 2
    viol, checked = [], 0
    for i in range(lo - 2 * span, hi + 2 * span + 1, 2):
        for j in range(0, span + 2):
            a = P.get(i, 0) ** 2
            b = P.get(i + 2 * j, 0) * P.get(i - 2 * j, 0)
            checked += 1
            if a < b:
                viol.append((i, j))
    nonneg = [x for x in sorted(P) if x >= 0]
    monotone = all(P[a] >= P.get(a + 2, 0) for a in nonneg)
    symmetric = all(P.get(-x, 0) == p for x, p in P.items())
    return LogConcavityReport(not viol, monotone, symmetric, viol, checked, marginal)


def mod3_profile(P):
    """(q0, q1, q2) with q_r = P(h = r mod 3)."""
    q = [Fraction(0)] * 3
    for x, p in P.items():
        q[x % 3] += p
    return tuple(q)


# ---------------------------------------------------------------- estimates

@dataclass
class ScanRow:
    L: int
    samples: int
    mean: float
    var: float
    var_stderr: float
    p_mod3: tuple
    p_mod3_stderr: tuple

    def csv(self):
        return f"{self.L},{self.var:.6f},{self.var_stderr:.6f}," + \
            ",".join(f"{p:.6f}" for p in self.p_mod3)


CSV_HEADER = "L,var,stderr,p_mod3_0,p_mod3_1,p_mod3_2"


def _delta_se(a, b):
    """Standard error of mean(b) - mean(a)^2 by the delta method."""
    n = len(a)
    cov = np.cov(np.vstack([a, b]))
    g = np.array([-2 * a.mean(), 1.0])
    return float(np.sqrt(max(g @ cov @ g, 0.0) / n))


def center_statistics(values, nbr_values, L):
    """Rao-Blackwellised estimates of Var h(v) and of h(v) mod 3.

    Given its neighbours, h(v) is uniform on {m-1, m+1} when all neighbours
    equal m and is forced otherwise; averaging these conditional laws
    instead of the raw samples keeps the estimators unbiased and lowers
    their variance.
    """
    x = np.asarray(values, dtype=np.int64)
    nb = np.asarray(nbr_values, dtype=np.int64)
    hi, lo = nb.max(axis=1), nb.min(axis=1)
    flat = hi == lo
    e1 = np.where(flat, hi, x).astype(float)
    e2 = np.where(flat, hi.astype(float) ** 2 + 1, x.astype(float) ** 2)
    n = len(x)
    var = float(e2.mean() - e1.mean() ** 2)
    probs, ses = [], []
    for r in range(3):
        pr = np.where(flat, 0.5 * ((hi + 1) % 3 == r) + 0.5 * ((hi - 1) % 3 == r),
                      (x % 3 == r).astype(float))
        probs.append(float(pr.mean()))
        ses.append(float(pr.std(ddof=1) / np.sqrt(n)))
    return ScanRow(L, n, float(e1.mean()), var, _delta_se(e1, e2), tuple(probs), tuple(ses))


def sample_center_heights(G, fixed, v, samples, seed):
    """CFTP samples of h(v) and of its neighbours' heights."""
    h = cftp_heights(G, fixed, seed, samples)
    return h[:, v], h[:, list(G.adj[v])]


def variance_mod3_scan(L_list, samples, seed):
    """CFTP estimates of Var h(0) and of h(0) mod 3 on zero-boundary balls."""
    rows = []
    for L in L_list:
        G, fixed = height_ball(L)
        v = G.index((0,) * G.d)
        vals, nb = sample_center_heights(G, fixed, v, samples, seed + 1_000_003 * L)
        rows.append(center_statistics(vals, nb, L))
    return rows


def max_mod3_deviation(p):
    return max(abs(x - 1 / 3) for x in p)


# ---------------------------------------------------------------- corners

def box_corners(G):
    c = np.array(G.coords)
    lo = c.min(axis=0)
    hi = c.max(axis=0)
    return G.index(tuple(lo)), G.index(tuple(hi))


def corner_correlation(G, q, samples=None, seed=0, sweeps=200):
    """P(opposite corners equal) - 1/q, exactly or by Glauber sampling."""
    a, b = box_corners(G)
    if samples is None:
        m = conditional_marginal(G, q, {}, [a, b])
        return sum(p for (x, y), p in m.as_dict().items() if x == y) - Fraction(1, q)
    if q <= G.max_degree + 1:
        raise InvalidInput("sampled mode needs q >= max degree + 2")
    hits = 0
    for s in range(samples):
        state = ChainState(tuple(find_extension(G, q, {})), frozenset(), seed + s)
        for _ in range(sweeps):
            state = glauber_sweep(state, G, q)
        hits += state.config[a] == state.config[b]
    p = hits / samples
    return p - 1 / q, float(np.sqrt(p * (1 - p) / samples))
