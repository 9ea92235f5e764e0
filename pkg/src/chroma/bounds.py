"""Peierls sums, entropy (Shearer) bounds, droplet ratios and ordered regions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

from .cutsets import enumerate_contours, region_census
from .errors import InvalidInput
from .exact import count_colorings, edge_statistic_table
from .lattice import Pattern, boundaries, box, dominant_patterns, explicit, plus


@dataclass
class BoundReport:
    lhs: object
    rhs: object
    holds: bool
    inputs: dict = field(default_factory=dict)
    label: str = ""
    flags: dict = field(default_factory=dict)


# ---------------------------------------------------------------- Peierls

def peierls_parts(d, beta, ell_max, census=None, C=10.0):
    """(partial, tail) of sum_ell N_ell exp(-2 beta ell).

    ``census`` maps ell to N_ell (CutsetCensus values or plain ints).  The
    tail beyond ell_max uses N_ell <= exp(C log d / d * ell); C has no value
    in the literature, so it is a caller knob.  A divergent tail is inf.
    """
    if beta < 0:
        raise InvalidInput("beta must be non-negative")
    if census is None:
        if d != 2:
            raise InvalidInput("exact census only available in d = 2")
        census = enumerate_contours(ell_max, "all")
    counts = {ell: getattr(c, "count", c) for ell, c in census.items()}
    partial = sum(n * math.exp(-2 * beta * ell) for ell, n in counts.items()
                  if ell <= ell_max)
    if C is None:
        return partial, 0.0
    ratio = math.exp(C * math.log(d) / d - 2 * beta) if d > 1 else math.exp(-2 * beta)
    if ratio >= 1:
        return partial, math.inf
    return partial, ratio ** (ell_max + 1) / (1 - ratio)


def peierls_sum(d, beta, ell_max, census=None, C=10.0):
    partial, tail = peierls_parts(d, beta, ell_max, census, C)
    return partial + tail


def _exp_bracket(beta, digits=60):
    """Rationals lo <= exp(-2 beta) <= hi for a decimal-representable beta."""
    with localcontext() as ctx:
        ctx.prec = digits
        x = (Decimal(-2) * Decimal(str(beta))).exp()
    x = Fraction(x)
    eps = Fraction(1, 10 ** (digits - 5))
    return x - eps, x + eps


def _poly_bounds(coeffs, lo, hi):
    """Interval for sum c_k x^k over lo <= x <= hi, 0 < lo."""
    low = high = Fraction(0)
    for k, c in coeffs.items():
        if c >= 0:
            low += c * lo ** k
            high += c * hi ** k
        else:
            low += c * hi ** k
            high += c * lo ** k
    return low, high


def ising_minus_polynomials(side=5, d=2):
    """Plus boundary on the rim of a box: P(center = -1) = A(x)/Z(x), x = e^{-2 beta}.

    Returns (A, Z) as {k: count} maps over the number k of disagreeing edges.
    Spins -1/+1 are colors 1/2 and the rim is fixed to +1.
    """
    G = box((side,) * d, origin=(0,) * d, rimmed=True)
    mid = G.index((side // 2,) * d)
    tau = {v: 2 for v in G.rim}
    table = edge_statistic_table(G, 2, tau, [mid], stat="diff")
    A = dict(table.get((1,), {}))
    Z = {}
    for hist in table.values():
        for k, c in hist.items():
            Z[k] = Z.get(k, 0) + c
    return A, Z, G


def box_census(G):
    """Complete {ell: count} over domains U with U^+ inside the box G."""
    cells = [G.coords[v] for v in G.interior]
    center = tuple(c // 2 for c in map(max, zip(*G.coords)))
    return region_census(cells, center)


def peierls_check(beta, side=5):
    """Exact minus probability at the center versus the finite-volume Peierls sum.

    Both sides are polynomials in x = exp(-2 beta); A(x) <= S(x) Z(x) is
    decided with a rational bracket around x, so the verdict is rigorous.
    """
    if beta < 0:
        raise InvalidInput("beta must be non-negative")
    A, Z, G = ising_minus_polynomials(side)
    census = box_census(G)
    SZ = {}
    for ell, n in census.items():
        for k, c in Z.items():
            SZ[ell + k] = SZ.get(ell + k, 0) + n * c
    diff = dict(SZ)
    for k, c in A.items():
        diff[k] = diff.get(k, 0) - c
    lo, hi = _exp_bracket(beta)
    low, high = _poly_bounds(diff, lo, hi)
    x = float(lo)
    prob = sum(c * x ** k for k, c in A.items()) / sum(c * x ** k for k, c in Z.items())
    rhs = sum(n * x ** ell for ell, n in census.items())
    return BoundReport(prob, rhs, low >= 0,
                       {"beta": beta, "side": side, "census": census},
                       label="peierls", flags={"certified_margin": float(low)})


# ---------------------------------------------------------------- Shearer

def _regular_bipartite_degree(G):
    if not G.is_bipartite:
        raise InvalidInput("graph must be bipartite")
    degs = {G.degree(v) for v in G.vertices}
    if len(degs) != 1:
        raise InvalidInput("graph must be regular")
    return degs.pop()


def complete_bipartite_count(delta, q):
    """Proper q-colorings of K_{delta,delta}: pick the color set S of one side."""
    total = 0
    for k in range(1, q + 1):
        surj = sum((-1) ** j * math.comb(k, j) * (k - j) ** delta for j in range(k + 1))
        total += math.comb(q, k) * surj * (q - k) ** delta
    return total


def shearer_bound(G, q):
    """log-count bound (|V| / 2 Delta) log #col(K_{Delta,Delta})."""
    delta = _regular_bipartite_degree(G)
    return G.n / (2 * delta) * math.log(complete_bipartite_count(delta, q))


def shearer_check(G, q):
    """Exact comparison N^{2 Delta} <= K^{|V|} with integers."""
    delta = _regular_bipartite_degree(G)
    K = complete_bipartite_count(delta, q)
    N = count_colorings(G, q)
    holds = N ** (2 * delta) <= K ** G.n
    equal = N ** (2 * delta) == K ** G.n
    return BoundReport(N, K, holds, {"q": q, "delta": delta, "n": G.n},
                       label="shearer", flags={"equality": equal,
                                               "log_count": math.log(N) if N else -math.inf,
                                               "log_bound": shearer_bound(G, q)})


def cycle(n):
    return explicit([(i, (i + 1) % n) for i in range(n)], n)


def prism(n):
    """C_n x K_2: 3-regular, bipartite for even n."""
    edges = [(i, (i + 1) % n) for i in range(n)]
    edges += [(n + i, n + (i + 1) % n) for i in range(n)]
    edges += [(i, n + i) for i in range(n)]
    return explicit(edges, 2 * n)


# ---------------------------------------------------------------- droplets

def droplet_lists(G, q, P0, P, U):
    """Allowed colors: U^+ in the P-pattern and (V \\ U)^+ in the P0-pattern."""
    Up = plus(U, G)
    Rp = plus(set(G.vertices) - set(U), G)
    out = []
    for v in G.vertices:
        s = set(range(1, q + 1))
        par = G.parity(v)
        if v in Up:
            s &= P.allowed(par)
        if v in Rp:
            s &= P0.allowed(par)
        out.append(s)
    return out


def droplet_count(G, q, P0, P, U):
    """n(U); adjacent vertices always share a pattern, so it is a product."""
    return math.prod(len(s) for s in droplet_lists(G, q, P0, P, U))


def droplet_ratio(G, q, P0, P, U):
    """n(U)/n(empty) against the single-droplet bound, with equality flags.

    P0 may be any dominant pattern (the usual choice has |A0| = floor(q/2))
    and must differ from P.
    """
    P0 = P0 if isinstance(P0, Pattern) else Pattern(*P0)
    P = P if isinstance(P, Pattern) else Pattern(*P)
    if not (P0.is_dominant(q) and P.is_dominant(q)):
        raise InvalidInput("patterns must be dominant")
    if P == P0:
        raise InvalidInput("the droplet pattern must differ from the boundary pattern")
    U = set(U)
    if any(v in G.rim or len(G.adj[v]) != 2 * G.d for v in U):
        raise InvalidInput("U^+ must lie inside the window")
    n0 = droplet_count(G, q, P0, P, set())
    lhs = Fraction(droplet_count(G, q, P0, P, U), n0)
    cut = boundaries(U, G)
    flags = {"even_set": cut.is_even, "odd_set": cut.is_odd}
    if q % 2 == 0:
        expo = len(cut.joint)
        rhs = Fraction(q - 2, q) ** expo
        holds = lhs <= rhs
        equal = lhs == rhs
        flags["condition"] = len(P0.A ^ P.A) == 2
    else:
        ell = len(cut.edge_boundary)
        base = Fraction(q - 1, q + 1)
        k = 2 * G.d
        holds = lhs ** k <= base ** ell
        equal = lhs ** k == base ** ell
        rhs = float(base) ** (ell / k)
        flags["condition"] = (cut.is_odd and P0.A <= P.A) or (cut.is_even and P0.B <= P.B)
    flags["equality"] = equal
    return BoundReport(lhs, rhs, holds, {"q": q, "P0": str(P0), "P": str(P),
                                         "U": sorted(U)}, label="droplet", flags=flags)


# ---------------------------------------------------------------- regions

@dataclass
class RegionDecomposition:
    Z: dict
    overlap: set
    bad: set
    star: set
    pure: list
    coloring: tuple


def _in_pattern(colors_by_parity, P):
    return all(c in P.allowed(par) for par, c in colors_by_parity)


def classify_regions(f, G, q, p0=None):
    """Ordered regions Z_P, overlap, bad set and Z_* of a proper coloring.

    A vertex is placed by the colors of its neighbours.  Neighbours missing
    at the window edge are ignored, or, when ``p0`` is given, treated as
    colored in that boundary pattern.
    """
    if q < 3:
        raise InvalidInput("regions need q >= 3")
    if p0 is not None and not isinstance(p0, Pattern):
        p0 = Pattern(*p0)
    full = 2 * G.d
    Z = {}
    pats = dominant_patterns(q)
    for P in pats:
        peven = P.even_parity
        core = set()
        for v in G.vertices:
            par = G.parity(v)
            if par == peven:
                continue
            if not _in_pattern([(1 - par, f[w]) for w in G.adj[v]], P):
                continue
            if p0 is not None and len(G.adj[v]) < full and \
                    not p0.allowed(1 - par) <= P.allowed(1 - par):
                continue
            core.add(v)
        Z[P] = plus(core, G)
    overlap = set()
    for P, Q in itertools.combinations(pats, 2):
        overlap |= Z[P] & Z[Q]
    covered = set().union(*Z.values())
    bad = set(G.vertices) - covered
    star = overlap | bad
    for P in pats:
        star |= set(boundaries(Z[P], G).joint)
    pure = [P for P in pats
            if all(f[v] in P.allowed(G.parity(v)) for v in G.vertices)]
    return RegionDecomposition(Z, overlap, bad, star, pure, tuple(f))


def region_invariants(dec, G):
    """Check the structural claims; returns a dict of booleans."""
    out = {}
    ok_even, ok_reg = True, True
    for P, zone in dec.Z.items():
        if not zone:
            continue
        cut = boundaries(zone, G)
        peven_ok = cut.is_even if P.even_parity == 0 else cut.is_odd
        ok_even &= peven_ok
        # regularity inside the window: no isolated vertex of Z_P, and no
        # vertex outside with all its window neighbours inside
        ok_reg &= not any(all(w not in zone for w in G.adj[v]) for v in zone)
        ok_reg &= not any(all(w in zone for w in G.adj[v])
                          for v in G.vertices if v not in zone)
    out["P_even"] = ok_even
    out["regular"] = ok_reg
    out["star_empty_implies_pure"] = bool(dec.star) or bool(dec.pure)
    pats = list(dec.Z)
    inter = set()
    for P, Q in itertools.combinations(pats, 2):
        inter |= dec.Z[P] & dec.Z[Q]
    out["overlap_def"] = inter == dec.overlap
    out["bad_def"] = dec.bad == set(G.vertices) - set().union(*dec.Z.values())
    return out


# ---------------------------------------------------------------- regimes

def dobrushin_regime_report(d, q, beta=None):
    """Which published regime (d, q) falls in; informational only."""
    delta = 2 * d
    inputs = {"d": d, "q": q, "beta": beta}
    if q > 2 * delta:
        label = "Dobrushin: q > 4d, SSM certified constructively"
    elif q == 2:
        label = "long-range order: chessboard, two ground states"
    elif d == 2 and q == 3:
        label = "critical regime (3-colorings of Z^2 are height functions)"
    elif d == 2 and q in (4, 5):
        label = "open/believed SSM"
    elif d == 2:
        label = "SSM proved on Z^2 for q >= 6"
    else:
        label = "long-range order once d >= C q^10 log^3 q (C unspecified); otherwise open"
    if beta is not None:
        label += "; Potts: Dobrushin also applies when beta <= C_q / Delta (C_q symbolic)"
    return BoundReport(q, 2 * delta, q > 2 * delta, inputs, label=label)
