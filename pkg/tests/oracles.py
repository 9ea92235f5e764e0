"""Deliberately naive reference implementations used as test oracles."""
import itertools
from fractions import Fraction


def all_colorings(G, q, tau=None):
    """Every proper q-coloring extending tau, by plain product enumeration."""
    tau = tau or {}
    free = [v for v in G.vertices if v not in tau]
    out = []
    for vals in itertools.product(range(1, q + 1), repeat=len(free)):
        f = dict(tau)
        f.update(zip(free, vals))
        if all(f[u] != f[v] for u, v in G.edges):
            out.append(tuple(f[v] for v in G.vertices))
    return out


def bipartite_count(G, q):
    """Count colorings of a bipartite graph by fixing the smaller class.

    For each coloring of one class the other class factorises: a vertex
    there has q minus (number of distinct neighbour colours) choices.
    """
    side = [v for v in G.vertices if G.parity(v) == 0]
    other = [v for v in G.vertices if G.parity(v) == 1]
    if len(side) > len(other):
        side, other = other, side
    total = 0
    for vals in itertools.product(range(1, q + 1), repeat=len(side)):
        f = dict(zip(side, vals))
        prod = 1
        for v in other:
            prod *= q - len({f[w] for w in G.adj[v]})
            if not prod:
                break
        total += prod
    return total


def marginal(colorings, U):
    counts = {}
    for f in colorings:
        key = tuple(f[u] for u in U)
        counts[key] = counts.get(key, 0) + 1
    n = len(colorings)
    return {k: Fraction(c, n) for k, c in counts.items()}


def tv(p, r):
    return sum(abs(p.get(k, 0) - r.get(k, 0)) for k in set(p) | set(r)) / 2


def all_heights(G, fixed, span):
    """Height functions with values in [-span, span] matching ``fixed``."""
    free = [v for v in G.vertices if v not in fixed]
    out = []
    choices = [[x for x in range(-span, span + 1) if x % 2 == G.parity(v) % 2]
               for v in free]
    for vals in itertools.product(*choices):
        h = dict(fixed)
        h.update(zip(free, vals))
        if all(abs(h[u] - h[v]) == 1 for u, v in G.edges):
            out.append(tuple(h[v] for v in G.vertices))
    return out
