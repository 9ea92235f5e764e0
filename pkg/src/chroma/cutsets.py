"""Contours and odd cutsets, frozen colorings, revealed vertices, separators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, SizeCapError
from .lattice import boundaries, neighborhood

ELL_CAP = 16
_DIRS2 = ((1, 0), (-1, 0), (0, 1), (0, -1))


# ---------------------------------------------------------------- census

@dataclass(frozen=True)
class CutsetCensus:
    d: int
    ell: int
    count: int
    kind: str
    anchor: tuple
    singletons: int = 0          # how many of the counted sets are singletons


def _rooted_connected_sets(root, nbrs, ok, keep_going):
    """Yield each connected set containing ``root`` exactly once.

    ``nbrs(x)`` lists neighbours, ``ok(x)`` filters admissible cells and
    ``keep_going(S)`` prunes a branch (it must be monotone in S).
    """
    def rec(S, frontier, banned):
        yield S
        for i, v in enumerate(frontier):
            S2 = S | {v}
            if not keep_going(S2):
                continue
            banned2 = banned | set(frontier[:i + 1])
            new = [w for w in nbrs(v) if w not in S2 and w not in banned2
                   and w not in frontier and ok(w)]
            yield from rec(S2, frontier[i + 1:] + new, banned2)

    if not ok(root):
        return
    start = [w for w in nbrs(root) if ok(w)]
    yield from rec(frozenset([root]), start, {root})


def _grid_nbrs(c):
    x, y = c
    return [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]


def _bbox(S):
    xs = [c[0] for c in S]
    ys = [c[1] for c in S]
    return min(xs), max(xs), min(ys), max(ys)


def _complement_connected(S):
    x0, x1, y0, y1 = _bbox(S)
    x0, x1, y0, y1 = x0 - 1, x1 + 1, y0 - 1, y1 + 1
    start = (x0, y0)
    seen = {start}
    stack = [start]
    while stack:
        c = stack.pop()
        for w in _grid_nbrs(c):
            if x0 <= w[0] <= x1 and y0 <= w[1] <= y1 and w not in S and w not in seen:
                seen.add(w)
                stack.append(w)
    total = (x1 - x0 + 1) * (y1 - y0 + 1) - len(S)
    return len(seen) == total


def _edge_boundary_size(S):
    return sum(1 for c in S for w in _grid_nbrs(c) if w not in S)


def _inner_parities(S):
    return {(c[0] + c[1]) % 2 for c in S if any(w not in S for w in _grid_nbrs(c))}


def iter_domains(ell_max, anchor=(0, 0), allowed=None):
    """Yield (U, |dU|) for planar domains containing ``anchor``.

    A domain is a finite connected set with connected complement.  Every
    row and column met by U contributes at least two boundary edges, so
    2*(width + height) <= ell_max bounds the search.  ``allowed`` may be a
    predicate or a finite collection of cells; with a finite collection and
    ``ell_max=None`` the search is complete over that region.
    """
    if allowed is None or callable(allowed):
        if ell_max is None or ell_max > ELL_CAP:
            raise SizeCapError(f"ell_max {ell_max} exceeds the cap {ELL_CAP}")
        ok = allowed or (lambda c: True)
    else:
        cells = {tuple(c) for c in allowed}
        ok = cells.__contains__
    limit = ell_max if ell_max is not None else float("inf")

    def keep_going(S):
        x0, x1, y0, y1 = _bbox(S)
        return 2 * ((x1 - x0 + 1) + (y1 - y0 + 1)) <= limit

    for S in _rooted_connected_sets(tuple(anchor), _grid_nbrs, ok, keep_going):
        ell = _edge_boundary_size(S)
        if ell <= limit and _complement_connected(S):
            yield S, ell


def region_census(cells, anchor, kind="all"):
    """Complete {ell: count} over domains inside a finite planar region."""
    out = {}
    for S, ell in iter_domains(None, anchor, cells):
        if kind == "odd" and len(_inner_parities(S)) > 1:
            continue
        out[ell] = out.get(ell, 0) + 1
    return dict(sorted(out.items()))


def enumerate_contours(ell_max, kind="all", anchor=(0, 0), allowed=None):
    """Census {ell: CutsetCensus} of domains containing the anchor, d = 2.

    kind='all' counts every domain; kind='odd' keeps domains that are even
    or odd sets (internal vertex boundary in one sublattice).  Singletons
    are counted under 'odd' and reported separately since they are not
    regular.
    """
    if kind not in ("all", "odd"):
        raise InvalidInput("kind must be 'all' or 'odd'")
    counts = [0] * (ell_max + 1)
    single = [0] * (ell_max + 1)
    for S, ell in iter_domains(ell_max, anchor, allowed):
        if kind == "odd" and len(_inner_parities(S)) > 1:
            continue
        counts[ell] += 1
        single[ell] += len(S) == 1
    return {ell: CutsetCensus(2, ell, counts[ell], kind, tuple(anchor), single[ell])
            for ell in range(ell_max + 1)}


# ---------------------------------------------------------------- frozen

@dataclass
class FrozenVerdict:
    frozen_at_radius: bool
    radius: int
    witness: dict | None = None


def connected_subsets(G, verts, r):
    """Connected vertex sets of size <= r inside ``verts``, each once."""
    verts = set(verts)
    for root in sorted(verts):
        ok = lambda w, root=root: w in verts and w > root
        yield from _rooted_connected_sets(root, lambda x: G.adj[x],
                                          lambda w: w == root or ok(w),
                                          lambda S: len(S) <= r)


def _recolor(S, f, G, q):
    """A proper recolouring changing every vertex of S, or None."""
    S = sorted(S)
    inS = set(S)
    choice = {}

    def rec(i):
        if i == len(S):
            return True
        v = S[i]
        for c in range(1, q + 1):
            if c == f[v]:
                continue
            if any((w in choice and choice[w] == c) or (w not in inS and f[w] == c)
                   for w in G.adj[v]):
                continue
            choice[v] = c
            if rec(i + 1):
                return True
            del choice[v]
        return False

    return dict(choice) if rec(0) else None


def frozen_check(f, G, q, r):
    """Is no proper modification on <= r interior vertices possible?"""
    interior = G.interior
    for S in connected_subsets(G, interior, r):
        w = _recolor(S, f, G, q)
        if w is not None:
            return FrozenVerdict(False, r, w)
    return FrozenVerdict(True, r)


# ---------------------------------------------------------------- revealed / N_t

def boundary_edge_counts(S, G):
    S = set(S)
    cnt = [0] * G.n
    for u, v in G.edges:
        if (u in S) != (v in S):
            cnt[u] += 1
            cnt[v] += 1
    return cnt


def revealed_vertices(S, G):
    """Vertices incident to at least d edges of the boundary of S."""
    cnt = boundary_edge_counts(S, G)
    return {v for v in G.vertices if cnt[v] >= G.d}


def separates(W, S, G):
    """Every boundary edge of S has an endpoint in W."""
    S, W = set(S), set(W)
    return all(u in W or v in W for u, v in G.edges if (u in S) != (v in S))


def n_t_neighbors(U, t, G):
    """N_t(U): vertices with at least t neighbours in U."""
    if t <= 0:
        raise InvalidInput("t must be positive")
    U = set(U)
    return {v for v in G.vertices if sum(w in U for w in G.adj[v]) >= t}


def randomized_cover(A, t, G, seed, max_tries=1000):
    """B inside A whose neighbourhood covers N_t(A), of size <= (1+log D)/t |A|.

    Each vertex of A is kept with probability log(D)/t; every vertex of
    N_t(A) left uncovered then receives its smallest neighbour in A.  When
    log D >= t the whole of A already meets the bound.
    """
    if t <= 0:
        raise InvalidInput("t must be positive")
    A = sorted(set(A))
    delta = G.max_degree
    bound = (1 + math.log(delta)) / t * len(A)
    if math.log(delta) >= t:
        return set(A)
    target = n_t_neighbors(A, t, G)
    Aset = set(A)
    rng = np.random.default_rng(seed)
    p = math.log(delta) / t
    for _ in range(max_tries):
        Z = {a for a, x in zip(A, rng.random(len(A))) if x < p}
        covered = neighborhood(Z, G)
        B = set(Z)
        for w in sorted(target - covered):
            B.add(min(x for x in G.adj[w] if x in Aset))
        if len(B) <= bound:
            return B
    raise SizeCapError("randomized cover exceeded its retry budget")


# ---------------------------------------------------------------- separator

@dataclass
class SeparatorResult:
    U: set
    certified: bool
    size_bound: float
    ell: int
    s: float
    t: float
    parts: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)


def _require_margin(S, G, cut):
    full = 2 * G.d
    bad = [v for v in cut.joint if G.degree(v) != full or v in G.rim]
    if bad:
        raise InvalidInput("window too small: the boundary of the set touches the rim")


def build_separator(S, G, seed=0):
    """Small U whose neighbourhood separates a regular odd set S.

    Follows the construction with s = sqrt(d log d) and t = d/4 for both S
    and its complement, and certifies the result.
    """
    S = set(S)
    cut = boundaries(S, G)
    if not S:
        raise InvalidInput("empty set")
    if not cut.is_odd:
        raise InvalidInput("set is not odd: its internal boundary meets the even sublattice")
    if not cut.is_regular:
        raise InvalidInput("set is not regular: it or its complement has an isolated vertex")
    _require_margin(S, G, cut)
    d = G.d
    delta = G.max_degree
    s = math.sqrt(d * math.log(d))
    t = d / 4
    ell = len(cut.edge_boundary)
    comp = set(G.vertices) - S
    U, parts, checks = set(), {}, {}
    for name, R, inner, outer in (("S", S, cut.inner, cut.outer),
                                  ("Sc", comp, cut.outer, cut.inner)):
        A = set(outer) & n_t_neighbors(inner, s, G)
        A2 = set(inner) & n_t_neighbors(outer, 2 * d - s, G)
        B = randomized_cover(A, t, G, seed)
        B2 = R & n_t_neighbors(A2, t, G)
        parts[name] = {"A": A, "A'": A2, "B": B, "B'": B2}
        checks[name] = {
            "A": len(A) <= delta / s * len(inner),
            "A'": len(A2) <= delta / (2 * d - s) * len(outer),
            "B": len(B) <= (1 + math.log(delta)) / t * len(A),
            "B'": len(B2) <= delta / t * len(A2),
        }
        U |= B | B2
    U_S = parts["S"]["B"] | parts["S"]["B'"]
    rev = revealed_vertices(S, G)
    checks["revealed_in_N(U_S)"] = (S & rev) <= neighborhood(U_S, G)
    local = U <= (set(cut.joint) | neighborhood(cut.joint, G))
    sep = separates(neighborhood(U, G), S, G)
    bound = 40 * ell * d ** -1.5 * math.sqrt(math.log(d))
    size_ok = d < 3 or len(U) <= bound
    checks.update(separates=sep, local=local, size=size_ok)
    certified = sep and local and size_ok
    return SeparatorResult(U, certified, bound, ell, s, t, parts, checks)


def four_cycle_check(S, G):
    """For each boundary edge {u,v} and unit e, {u,u+e} or {v,v+e} is a boundary edge.

    Returns the list of failing (u, v, e) triples (empty when the law holds).
    """
    S = set(S)
    fails = []
    dirs = []
    for k in range(G.d):
        for sgn in (1, -1):
            e = [0] * G.d
            e[k] = sgn
            dirs.append(tuple(e))

    def shifted(v, e):
        c = tuple(a + b for a, b in zip(G.coords[v], e))
        try:
            return G.index(c)
        except KeyError:
            return None

    for u, v in G.edges:
        if (u in S) == (v in S):
            continue
        for e in dirs:
            a, b = shifted(u, e), shifted(v, e)
            if a is None or b is None:
                continue
            if (a in S) == (u in S) and (b in S) == (v in S):
                fails.append((u, v, e))
    return fails


def random_regular_odd_set(G, rng, centers=3, margin=3):
    """Test fixture: union of closed stars with odd leaves, then regularised.

    Star centres are even vertices at distance >= margin from the rim.
    Isolated vertices of the set are removed and isolated vertices of the
    complement are added until neither exists; both moves keep the
    internal boundary odd.
    """
    rim_dist = G.distances(G.rim) if G.rim else [margin] * G.n
    pool = [v for v in G.vertices if G.parity(v) == 0 and rim_dist[v] is not None
            and rim_dist[v] >= margin]
    if not pool:
        raise InvalidInput("window too small for the requested margin")
    chosen = rng.choice(len(pool), size=min(centers, len(pool)), replace=False)
    S = set()
    for i in chosen:
        c = pool[int(i)]
        S.add(c)
        S.update(G.adj[c])
    while True:
        iso_in = {v for v in S if all(w not in S for w in G.adj[v])}
        iso_out = {v for v in G.vertices if v not in S and all(w in S for w in G.adj[v])}
        if not iso_in and not iso_out:
            return S
        S = (S - iso_in) | iso_out
