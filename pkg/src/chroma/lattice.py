"""Graph domains, parity, boundary operators, colorings and patterns.

Vertices are dense integers 0..n-1.  Embedded graphs keep a coordinate per
vertex; the parity of a vertex is its coordinate sum mod 2.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidInput

KINDS = ("ball", "box", "torus", "explicit")


@dataclass(frozen=True)
class GraphSpec:
    n: int
    edges: tuple
    kind: str = "explicit"
    coords: tuple | None = None
    d: int | None = None
    rim: frozenset = frozenset()
    adj: tuple = field(init=False, repr=False, compare=False)
    _parity: tuple | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n <= 0:
            raise InvalidInput("empty graph")
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown graph kind {self.kind!r}")
        nbrs = [[] for _ in range(self.n)]
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise InvalidInput(f"loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidInput(f"edge ({u}, {v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidInput(f"parallel edge {key}")
            seen.add(key)
            nbrs[u].append(v)
            nbrs[v].append(u)
        object.__setattr__(self, "adj", tuple(tuple(sorted(a)) for a in nbrs))
        if self.coords is not None:
            par = tuple(sum(c) % 2 for c in self.coords)
        else:
            par = _two_coloring(self.adj)
        object.__setattr__(self, "_parity", par)

    @property
    def vertices(self):
        return range(self.n)

    def neighbors(self, v):
        return self.adj[v]

    def degree(self, v):
        return len(self.adj[v])

    @property
    def max_degree(self):
        return max(len(a) for a in self.adj)

    @property
    def is_bipartite(self):
        return self._parity is not None and all(
            self._parity[u] != self._parity[v] for u, v in self.edges)

    def parity(self, v):
        if self._parity is None:
            raise InvalidInput("graph is not bipartite")
        return self._parity[v]

    @property
    def interior(self):
        return [v for v in range(self.n) if v not in self.rim]

    def index(self, coord):
        if self.coords is None:
            raise InvalidInput("graph has no embedding")
        lookup = self.__dict__.get("_index")
        if lookup is None:
            lookup = {c: i for i, c in enumerate(self.coords)}
            object.__setattr__(self, "_index", lookup)
        return lookup[tuple(coord)]

    def distances(self, sources):
        """BFS distance from a vertex set; unreachable vertices get None."""
        dist = [None] * self.n
        queue = deque()
        for s in sources:
            if dist[s] is None:
                dist[s] = 0
                queue.append(s)
        while queue:
            v = queue.popleft()
            for w in self.adj[v]:
                if dist[w] is None:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def set_distance(self, a, b):
        """d_G(a, b) for vertex sets; infinite if either set is empty."""
        if not a or not b:
            return float("inf")
        dist = self.distances(a)
        vals = [dist[v] for v in b if dist[v] is not None]
        return min(vals) if vals else float("inf")

    def is_connected(self):
        return all(x is not None for x in self.distances([0]))


def _two_coloring(adj):
    par = [None] * len(adj)
    for s in range(len(adj)):
        if par[s] is not None:
            continue
        par[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if par[w] is None:
                    par[w] = 1 - par[v]
                    queue.append(w)
                elif par[w] == par[v]:
                    return None
    return tuple(par)


def _grid_graph(coords, kind, d, rim=(), wrap=None):
    index = {c: i for i, c in enumerate(coords)}
    edges = set()
    for i, c in enumerate(coords):
        for k in range(d):
            nb = list(c)
            nb[k] += 1
            if wrap is not None:
                nb[k] %= wrap[k]
            j = index.get(tuple(nb))
            if j is not None and j != i:
                edges.add((min(i, j), max(i, j)))
    return GraphSpec(len(coords), tuple(sorted(edges)), kind, tuple(coords), d,
                     frozenset(rim))


def ball(d, L):
    """Lambda(L): lattice points of L1 norm at most L."""
    if d < 1 or L < 0:
        raise InvalidInput("ball needs d >= 1 and L >= 0")
    coords = [c for c in itertools.product(range(-L, L + 1), repeat=d)
              if sum(map(abs, c)) <= L]
    return _grid_graph(coords, "ball", d)


def box(sides, origin=None, rimmed=False):
    """Box with the given side lengths, lowest corner at ``origin`` (default all 1).

    With ``rimmed=True`` the outer layer is recorded as the window rim.
    """
    sides = tuple(int(s) for s in sides)
    if not sides or min(sides) < 1:
        raise InvalidInput("box side lengths must be >= 1")
    d = len(sides)
    origin = tuple(origin) if origin is not None else (1,) * d
    coords = [tuple(o + x for o, x in zip(origin, c))
              for c in itertools.product(*(range(s) for s in sides))]
    rim = []
    if rimmed:
        for i, c in enumerate(coords):
            if any(x == o or x == o + s - 1 for x, o, s in zip(c, origin, sides)):
                rim.append(i)
    return _grid_graph(coords, "box", d, rim)


def window(d, side, origin=None):
    """Rimmed cubic window of the given total side (rim included)."""
    return box((side,) * d, origin=origin if origin is not None else (0,) * d,
               rimmed=True)


def torus(d, L):
    if L < 2 or L % 2:
        raise InvalidInput("torus side must be even (bipartite) and >= 2")
    coords = list(itertools.product(range(L), repeat=d))
    return _grid_graph(coords, "torus", d, wrap=(L,) * d)


def explicit(edges, n=None):
    edges = [tuple(map(int, e)) for e in edges]
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return GraphSpec(n, tuple(sorted((min(u, v), max(u, v)) for u, v in edges)),
                     "explicit")


def build_domain(kind, **params):
    """Build a ball, box, torus or explicit graph from keyword parameters."""
    if kind == "ball":
        return ball(int(params.get("d", 2)), int(params["L"]))
    if kind == "box":
        d = int(params.get("d", 2))
        if "sides" in params:
            sides = params["sides"]
        else:
            names = ["Lx", "Ly", "Lz", "Lw"][:d]
            sides = [int(params.get(nm, params.get("L", 0))) for nm in names]
        return box(sides, origin=params.get("origin"), rimmed=params.get("rimmed", False))
    if kind == "torus":
        return torus(int(params.get("d", 2)), int(params["L"]))
    if kind == "explicit":
        return explicit(params["edges"], params.get("n"))
    raise InvalidInput(f"unknown graph kind {kind!r}")


def parse_graph(spec):
    """Parse ``box:d=2,Lx=4,Ly=4`` style strings or an edge-list file path."""
    if ":" in spec and spec.split(":", 1)[0] in ("ball", "box", "torus", "window"):
        kind, rest = spec.split(":", 1)
        params = {}
        for item in filter(None, rest.split(",")):
            if "=" not in item:
                raise InvalidInput(f"bad graph parameter {item!r}")
            k, v = item.split("=", 1)
            params[k.strip()] = int(v)
        if kind == "window":
            return window(params.get("d", 2), params["L"])
        return build_domain(kind, **params)
    path = Path(spec)
    if not path.exists():
        raise InvalidInput(f"graph spec {spec!r} is neither a grid spec nor a file")
    edges = []
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidInput(f"bad edge line {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return explicit(edges)


# ---------------------------------------------------------------- boundaries

@dataclass(frozen=True)
class CutSet:
    U: frozenset
    edge_boundary: frozenset
    inner: frozenset
    outer: frozenset
    joint: frozenset
    plus: frozenset
    is_even: bool
    is_odd: bool
    is_regular: bool


def boundaries(U, G):
    U = frozenset(U)
    bad = [v for v in U if not 0 <= v < G.n]
    if bad:
        raise InvalidInput(f"vertices {bad} not in graph")
    edges = set()
    inner, outer = set(), set()
    for v in U:
        for w in G.adj[v]:
            if w not in U:
                edges.add((min(v, w), max(v, w)))
                inner.add(v)
                outer.add(w)
    par = G._parity
    is_even = par is not None and all(par[v] == 0 for v in inner)
    is_odd = par is not None and all(par[v] == 1 for v in inner)
    iso_in = any(all(w not in U for w in G.adj[v]) for v in U)
    iso_out = any(all(w in U for w in G.adj[v]) for v in range(G.n) if v not in U)
    return CutSet(U, frozenset(edges), frozenset(inner), frozenset(outer),
                  frozenset(inner | outer), U | frozenset(outer),
                  is_even, is_odd, not (iso_in or iso_out))


def neighborhood(U, G):
    out = set()
    for v in U:
        out.update(G.adj[v])
    return out


def plus(U, G):
    return set(U) | neighborhood(U, G)


# ---------------------------------------------------------------- colorings

def check_colors(f, q):
    for c in f:
        if not 1 <= c <= q:
            raise InvalidInput(f"color {c} outside 1..{q}")


def is_proper(f, G, q=None):
    if len(f) != G.n:
        raise InvalidInput("coloring must be total on the graph")
    if q is not None:
        check_colors(f, q)
    return all(f[u] != f[v] for u, v in G.edges)


def disagreement(tau1, tau2):
    """B_{tau1,tau2}: vertices where two partial colorings differ."""
    if set(tau1) != set(tau2):
        raise InvalidInput("boundary conditions must share a domain")
    return {v for v in tau1 if tau1[v] != tau2[v]}


def is_height_function(h, G):
    if any(abs(h[u] - h[v]) != 1 for u, v in G.edges):
        return False
    if G.coords is not None and G.is_bipartite:
        return all((h[v] - G.parity(v)) % 2 == 0 for v in G.vertices)
    return True


# ---------------------------------------------------------------- patterns

@dataclass(frozen=True)
class Pattern:
    A: frozenset
    B: frozenset

    def __post_init__(self):
        object.__setattr__(self, "A", frozenset(self.A))
        object.__setattr__(self, "B", frozenset(self.B))
        if self.A & self.B:
            raise InvalidInput("pattern classes must be disjoint")

    def is_dominant(self, q):
        return sorted((len(self.A), len(self.B))) == [q // 2, (q + 1) // 2] \
            and self.A | self.B <= set(range(1, q + 1))

    @property
    def even_parity(self):
        """Sublattice parity that plays the role of 'even' for this pattern."""
        return 0 if len(self.A) <= len(self.B) else 1

    def allowed(self, parity):
        return self.A if parity == 0 else self.B

    def __str__(self):
        return "(" + "".join(map(str, sorted(self.A))) + "|" + \
            "".join(map(str, sorted(self.B))) + ")"


def dominant_patterns(q):
    colors = range(1, q + 1)
    out = []
    sizes = {q // 2, (q + 1) // 2}
    for k in sorted(sizes):
        for A in itertools.combinations(colors, k):
            out.append(Pattern(frozenset(A), frozenset(colors) - frozenset(A)))
    return out
