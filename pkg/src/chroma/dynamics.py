"""Markov chains and couplings on colorings and height functions.

Randomness comes from numpy's counter-based Philox generator, keyed by a
tuple of integers (seed, tag, step, ...).  Coupling from the past instead
hashes (seed, replica, slot, vertex) with SplitMix64 so that a compiled
kernel and the numpy path agree bit for bit.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInput, NonCoalescence
from .exact import sample_colorings
from .lattice import disagreement

_TAGS = {"glauber": 1, "coupling": 2, "cftp": 3, "init": 4, "misc": 5}


def stream(seed, tag, *keys):
    """Counter-based generator keyed by (seed, tag, keys)."""
    ss = np.random.SeedSequence([int(seed) & (2 ** 64 - 1), _TAGS[tag], *map(int, keys)])
    return np.random.Generator(np.random.Philox(ss))


def _neighbor_table(G):
    """(n, Dmax) neighbour indices padded by repeating the first neighbour."""
    dmax = max(1, G.max_degree)
    tab = np.zeros((G.n, dmax), dtype=np.int64)
    for v in G.vertices:
        nb = list(G.adj[v]) or [v]
        tab[v] = (nb * dmax)[:dmax]
    return tab


# ---------------------------------------------------------------- Glauber

@dataclass(frozen=True)
class ChainState:
    config: tuple
    frozen: frozenset
    seed: int
    step_count: int = 0
    blocked: int = 0


def glauber_sweep(state, G, q, order="scan"):
    """One sweep of heat-bath Glauber dynamics over the non-frozen vertices."""
    f = list(state.config)
    rng = stream(state.seed, "glauber", state.step_count)
    free = [v for v in G.vertices if v not in state.frozen]
    if order == "random":
        free = [free[i] for i in rng.integers(0, len(free), size=len(free))]
    elif order != "scan":
        raise InvalidInput("order must be 'scan' or 'random'")
    blocked = state.blocked
    for v in free:
        used = {f[w] for w in G.adj[v]}
        avail = [c for c in range(1, q + 1) if c not in used]
        if not avail:
            blocked += 1
            continue
        f[v] = avail[int(rng.integers(len(avail)))]
    return replace(state, config=tuple(f), step_count=state.step_count + 1,
                   blocked=blocked)


def kempe_flip(f, G, v, a, b):
    """Swap colours a and b on the {a,b}-component of v."""
    if a == b:
        raise InvalidInput("kempe_flip needs two distinct colours")
    f = list(f)
    if f[v] not in (a, b):
        return tuple(f)
    seen = {v}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        for y in G.adj[x]:
            if y not in seen and f[y] in (a, b):
                seen.add(y)
                queue.append(y)
    for x in seen:
        f[x] = b if f[x] == a else a
    return tuple(f)


# ---------------------------------------------------------------- scan coupling

def _color_masks(cols, nbrs):
    """Bit masks of neighbour colours for a batch of colourings."""
    one = np.int64(1)
    m = np.zeros(cols.shape[0], dtype=np.int64)
    for w in nbrs:
        m |= one << cols[:, w].astype(np.int64)
    return m


def maximal_coupling_step(af, ag, u, q):
    """Draw a pair from the maximal coupling of uniform laws on colour masks.

    ``af``/``ag`` are allowed-colour bit masks, ``u`` integer variates in
    [0, nf*ng).  Shared mass min(p, r) is consumed first in colour order,
    then the residual masses, also in colour order.  Returns (cf, cg).
    """
    nf = _bits(af)
    ng = _bits(ag)
    lo = np.minimum(nf, ng)
    both = af & ag
    cf = np.zeros(len(u), dtype=np.int64)
    cg = np.zeros(len(u), dtype=np.int64)
    acc = np.zeros(len(u), dtype=np.int64)
    for c in range(1, q + 1):
        inb = (both >> c) & 1
        nxt = acc + inb * lo
        hit = (u >= acc) & (u < nxt) & (cf == 0)
        cf[hit] = c
        cg[hit] = c
        acc = nxt
    rest = u - acc
    accf = np.zeros(len(u), dtype=np.int64)
    accg = np.zeros(len(u), dtype=np.int64)
    open_ = cf == 0
    for c in range(1, q + 1):
        inf_, ing, inb = (af >> c) & 1, (ag >> c) & 1, (both >> c) & 1
        mf = inf_ * ng - inb * lo
        mg = ing * nf - inb * lo
        hf = open_ & (rest >= accf) & (rest < accf + mf)
        hg = open_ & (rest >= accg) & (rest < accg + mg)
        cf[hf] = c
        cg[hg] = c
        accf += mf
        accg += mg
    return cf, cg


def _bits(m):
    out = np.zeros(len(m), dtype=np.int64)
    x = m.copy()
    while np.any(x):
        out += x & 1
        x >>= 1
    return out


@dataclass
class CouplingResult:
    f: np.ndarray
    g: np.ndarray
    disagreement: np.ndarray      # per-vertex frequency of f != g
    stderr: np.ndarray
    sweeps: int
    reps: int


def scan_coupling(G, q, tau1, tau2, sweeps, reps, seed, init=None):
    """Systematic-scan coupling of two boundary conditions.

    Starts from independent exact samples of the two conditional measures,
    then visits free vertices in ascending id and redraws the pair at each
    vertex from the maximal coupling of its two single-site conditionals.
    """
    disagreement(tau1, tau2)
    full = (1 << (q + 1)) - 2
    if init is None:
        f = sample_colorings(G, q, tau1, reps, stream(seed, "init", 1)).astype(np.int64)
        g = sample_colorings(G, q, tau2, reps, stream(seed, "init", 2)).astype(np.int64)
    else:
        f, g = (np.array(a, dtype=np.int64).copy() for a in init)
    free = [v for v in G.vertices if v not in tau1]
    for s in range(sweeps):
        rng = stream(seed, "coupling", s)
        draws = rng.random((len(free), reps))
        for i, v in enumerate(free):
            af = full & ~_color_masks(f, G.adj[v])
            ag = full & ~_color_masks(g, G.adj[v])
            nf, ng = _bits(af), _bits(ag)
            u = np.minimum((draws[i] * (nf * ng)).astype(np.int64), nf * ng - 1)
            f[:, v], g[:, v] = maximal_coupling_step(af, ag, u, q)
    freq = np.mean(f != g, axis=0)
    return CouplingResult(f, g, freq, np.sqrt(freq * (1 - freq) / reps), sweeps, reps)


# ---------------------------------------------------------------- height CFTP

def height_extremes(G, fixed):
    """Pointwise max and min height functions with prescribed values."""
    top = np.full(G.n, np.iinfo(np.int64).max // 4, dtype=np.int64)
    bot = -top.copy()
    for w, hw in fixed.items():
        d = np.array([x if x is not None else 10 ** 9 for x in G.distances([w])])
        top = np.minimum(top, hw + d)
        bot = np.maximum(bot, hw - d)
    if np.any(top < bot):
        raise InvalidInput("boundary values admit no height function")
    return top, bot


# Coupling from the past reads one random bit per (replica, slot, vertex).
# The bit is a SplitMix64 hash of those integers and the seed, so the numpy
# and compiled paths below produce identical samples.

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)


def _mix(x):
    with np.errstate(over="ignore"):
        x = (x + _GOLD).astype(np.uint64)
        x = (x ^ (x >> np.uint64(30))) * _M1
        x = (x ^ (x >> np.uint64(27))) * _M2
        return x ^ (x >> np.uint64(31))


def slot_bits(seed, reps, t, verts):
    """Random bits (len(reps), len(verts)) for time slot t.

    Vertex v reads bit (v mod 64) of the hash of (seed, replica, t, v div 64).
    """
    base = _mix(np.uint64(seed) ^ _mix(np.asarray(reps, dtype=np.uint64)))
    rt = _mix(base ^ _mix(np.uint64(t)))
    verts = np.asarray(verts, dtype=np.uint64)
    with np.errstate(over="ignore"):
        words = _mix(rt[:, None] ^ ((verts >> np.uint64(6))[None, :] * _GOLD))
    return ((words >> (verts & np.uint64(63))[None, :]) & np.uint64(1)).astype(np.int64)


def _cftp_numpy(top0, bot0, classes, nbr, seed, reps, max_horizon):
    n = len(top0)
    out = np.zeros((len(reps), n), dtype=np.int64)
    horizon = np.zeros(len(reps), dtype=np.int64)
    pending = np.arange(len(reps))
    allv = np.arange(n)
    T = 1
    while len(pending) and T <= max_horizon:
        top = np.tile(top0, (len(pending), 1))
        bot = np.tile(bot0, (len(pending), 1))
        for t in range(T, 0, -1):
            bits = slot_bits(seed, reps[pending], t, allv)
            for cls in classes:
                if len(cls):
                    heat_bath(top, cls, nbr, bits)
                    heat_bath(bot, cls, nbr, bits)
        done = np.all(top == bot, axis=1)
        out[pending[done]] = top[done]
        horizon[pending[done]] = T
        pending = pending[~done]
        T *= 2
    horizon[pending] = -1
    return out, horizon


def heat_bath(h, verts, nbr, bits):
    """Monotone heat-bath update of heights h (batch, n) at independent ``verts``.

    If all neighbours share the value m the new value is m+1 when the bit is
    set and m-1 otherwise; any other neighbourhood forces a single value.
    """
    nv = h[:, nbr[verts]]
    hi = nv.max(axis=2)
    lo = nv.min(axis=2)
    step = 2 * bits[:, verts] - 1
    h[:, verts] = np.where(hi == lo, hi + step, (hi + lo) // 2)
    return h


try:
    import numba

    @numba.njit(cache=True)
    def _mix_scalar(x):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))

    @numba.njit(cache=True)
    def _cftp_compiled(top0, bot0, order, nbr, deg, seed, reps, max_horizon):
        n = top0.shape[0]
        nwords = (n + 63) // 64
        words = np.zeros(nwords, dtype=np.uint64)
        out = np.zeros((reps.shape[0], n), dtype=np.int64)
        horizon = np.full(reps.shape[0], -1, dtype=np.int64)
        gold = np.uint64(0x9E3779B97F4A7C15)
        top = top0.copy()
        bot = bot0.copy()
        for r in range(reps.shape[0]):
            base = _mix_scalar(np.uint64(seed) ^ _mix_scalar(np.uint64(reps[r])))
            T = 1
            while T <= max_horizon:
                top[:] = top0
                bot[:] = bot0
                for t in range(T, 0, -1):
                    rt = _mix_scalar(base ^ _mix_scalar(np.uint64(t)))
                    for w in range(nwords):
                        words[w] = _mix_scalar(rt ^ (np.uint64(w) * gold))
                    for i in range(order.shape[0]):
                        v = order[i]
                        bit = np.int64((words[v >> 6] >> np.uint64(v & 63)) & np.uint64(1))
                        step = 2 * bit - 1
                        dv = deg[v]
                        hi = top[nbr[v, 0]]
                        lo = hi
                        for k in range(1, dv):
                            x = top[nbr[v, k]]
                            hi = max(hi, x)
                            lo = min(lo, x)
                        top[v] = hi + step if hi == lo else hi - 1
                        hi = bot[nbr[v, 0]]
                        lo = hi
                        for k in range(1, dv):
                            x = bot[nbr[v, k]]
                            hi = max(hi, x)
                            lo = min(lo, x)
                        bot[v] = hi + step if hi == lo else hi - 1
                same = True
                for v in range(n):
                    if top[v] != bot[v]:
                        same = False
                        break
                if same:
                    out[r] = top
                    horizon[r] = T
                    break
                T *= 2
        return out, horizon

    HAVE_NUMBA = True
except ImportError:          # pragma: no cover - numba is optional
    HAVE_NUMBA = False


def cftp_heights(G, fixed, seed, batch=1, max_horizon=1 << 16, first_rep=0,
                 compiled=None, return_horizon=False):
    """Exact uniform height functions by monotone coupling from the past.

    Returns an int array of shape (batch, n); row i is replica first_rep+i.
    Time slot t (t = 1, 2, ... counting back from zero) always reads the
    same bits, so a replica's output does not depend on how far the horizon
    had to be doubled.  Each slot updates even then odd free vertices.
    """
    if not G.is_bipartite:
        raise InvalidInput("height functions need a bipartite graph")
    top0, bot0 = height_extremes(G, fixed)
    free = [v for v in G.vertices if v not in fixed]
    classes = [np.array([v for v in free if G.parity(v) == p], dtype=np.int64)
               for p in (0, 1)]
    nbr = _neighbor_table(G)
    reps = np.arange(first_rep, first_rep + batch, dtype=np.int64)
    seed = int(seed) & (2 ** 64 - 1)
    if compiled is None:
        compiled = HAVE_NUMBA
    if compiled:
        deg = np.array([max(1, G.degree(v)) for v in G.vertices], dtype=np.int64)
        order = np.concatenate(classes)
        out, horizon = _cftp_compiled(top0, bot0, order, nbr, deg, np.uint64(seed),
                                      reps, max_horizon)
    else:
        out, horizon = _cftp_numpy(top0, bot0, classes, nbr, seed, reps, max_horizon)
    if np.any(horizon < 0):
        raise NonCoalescence(f"{int(np.sum(horizon < 0))} chains did not coalesce "
                             f"by horizon {max_horizon}")
    return (out, horizon) if return_horizon else out


def cftp_height_sample(G, fixed, seed, max_horizon=1 << 16):
    return tuple(int(x) for x in cftp_heights(G, fixed, seed, 1, max_horizon)[0])


# ---------------------------------------------------------------- cluster swap

def cluster_swap(f, g, G, outside=frozenset()):
    """Exchange f and g on each component of {f != g} that avoids ``outside``.

    ``outside`` is typically the window rim; components meeting it are left
    alone.  The map is an involution because the disagreement set and its
    components are unchanged by the exchange.
    """
    f, g = list(f), list(g)
    diff = {v for v in G.vertices if f[v] != g[v]}
    seen = set()
    for s in sorted(diff):
        if s in seen:
            continue
        comp, queue = [s], deque([s])
        seen.add(s)
        while queue:
            x = queue.popleft()
            for y in G.adj[x]:
                if y in diff and y not in seen:
                    seen.add(y)
                    comp.append(y)
                    queue.append(y)
        if not any(v in outside for v in comp):
            for v in comp:
                f[v], g[v] = g[v], f[v]
    return tuple(f), tuple(g)
