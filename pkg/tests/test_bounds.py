import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from chroma import lattice
from chroma.bounds import (box_census, classify_regions, complete_bipartite_count,
                           cycle, dobrushin_regime_report, droplet_count, droplet_lists,
                           droplet_ratio, ising_minus_polynomials, peierls_check,
                           peierls_parts, peierls_sum, prism, region_invariants,
                           shearer_bound, shearer_check)
from chroma.cutsets import enumerate_contours
from chroma.errors import InvalidInput
from chroma.exact import count_colorings, sample_colorings

import oracles


# ---------------------------------------------------------------- Peierls

def test_peierls_partial_sum_by_hand():
    cen = enumerate_contours(8)
    partial, tail = peierls_parts(2, 1.0, 8, cen, C=None)
    want = 1 * math.exp(-8) + 4 * math.exp(-12) + 22 * math.exp(-16)
    assert partial == pytest.approx(want, rel=1e-12)
    assert tail == 0.0


def test_peierls_tail():
    assert peierls_parts(2, 1.0, 12)[1] == math.inf
    partial, tail = peierls_parts(2, 3.0, 12)
    r = math.exp(5 * math.log(2) - 6)
    assert tail == pytest.approx(r ** 13 / (1 - r))
    assert peierls_sum(2, 3.0, 12) == pytest.approx(partial + tail)
    with pytest.raises(InvalidInput):
        peierls_parts(2, -1, 8)


def _ising_brute(side):
    G = lattice.box((side, side), origin=(0, 0), rimmed=True)
    mid = G.index((side // 2, side // 2))
    free = G.interior
    A, Z = {}, {}
    for spins in itertools.product((-1, 1), repeat=len(free)):
        s = {v: 1 for v in G.rim}
        s.update(zip(free, spins))
        k = sum(s[u] != s[v] for u, v in G.edges)
        Z[k] = Z.get(k, 0) + 1
        if s[mid] == -1:
            A[k] = A.get(k, 0) + 1
    return A, Z


@pytest.mark.parametrize("side", [3, 4, 5])
def test_ising_polynomials_match_spin_enumeration(side):
    A, Z, _ = ising_minus_polynomials(side)
    assert (A, Z) == _ising_brute(side)


def test_box_census_is_the_interior_census():
    _, _, G = ising_minus_polynomials(5)
    assert box_census(G) == {4: 1, 6: 4, 8: 18, 10: 44, 12: 68, 14: 24, 16: 2}


def test_peierls_check_is_certified():
    r = peierls_check(2)
    assert r.holds and r.lhs <= r.rhs and r.flags["certified_margin"] > 0


# ---------------------------------------------------------------- Shearer

def test_complete_bipartite_count_matches_brute_force():
    for delta in (1, 2, 3):
        K = lattice.explicit([(i, delta + j) for i in range(delta) for j in range(delta)])
        for q in (2, 3, 4):
            assert complete_bipartite_count(delta, q) == count_colorings(K, q)
    assert complete_bipartite_count(2, 3) == 18
    assert complete_bipartite_count(3, 3) == 42


def test_shearer_cycles():
    r = shearer_check(cycle(4), 3)
    assert r.holds and r.flags["equality"]
    r = shearer_check(cycle(6), 3)
    assert r.lhs == 66 and r.holds and not r.flags["equality"]
    assert r.flags["log_bound"] == pytest.approx(1.5 * math.log(18))
    assert shearer_bound(cycle(6), 3) > math.log(66)


def test_shearer_equality_on_disjoint_union():
    two = lattice.explicit([(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4)])
    assert shearer_check(two, 3).flags["equality"]


def test_shearer_q2_and_prism():
    r = shearer_check(cycle(8), 2)
    assert r.lhs == 2 and r.rhs == 2 and r.holds
    r = shearer_check(prism(4), 3)
    assert r.holds and r.lhs == oracles.bipartite_count(prism(4), 3)


def test_shearer_rejects_irregular_or_odd():
    with pytest.raises(InvalidInput):
        shearer_check(lattice.box((3,)), 3)
    with pytest.raises(InvalidInput):
        shearer_check(cycle(5), 3)


# ---------------------------------------------------------------- droplets

def _pat(A, B):
    return lattice.Pattern(frozenset(A), frozenset(B))


def test_droplet_count_is_list_coloring_count():
    G = lattice.box((4, 4), origin=(0, 0), rimmed=True)
    P0, P = _pat({1, 2}, {3, 4}), _pat({1, 3}, {2, 4})
    for U in ([], [G.interior[0]], G.interior[:2], G.interior):
        lists = droplet_lists(G, 4, P0, P, U)
        assert droplet_count(G, 4, P0, P, U) == count_colorings(G, 4, lists=lists)


def test_droplet_singleton_even_q():
    G = lattice.box((4, 4), origin=(0, 0), rimmed=True)
    P0, P = _pat({1, 2}, {3, 4}), _pat({1, 3}, {2, 4})
    r = droplet_ratio(G, 4, P0, P, [G.interior[0]])
    assert r.holds and r.flags["condition"]
    # one vertex and its 4 neighbours: each loses half of its colours
    assert r.lhs == Fraction(1, 2) ** 5 == r.rhs and r.flags["equality"]


def test_droplet_rejects_bad_input():
    G = lattice.box((4, 4), origin=(0, 0), rimmed=True)
    P = _pat({1, 2}, {3, 4})
    with pytest.raises(InvalidInput):
        droplet_ratio(G, 4, P, P, [G.interior[0]])
    with pytest.raises(InvalidInput):
        droplet_ratio(G, 4, P, _pat({1, 3}, {2, 4}), [0])
    with pytest.raises(InvalidInput):
        droplet_ratio(G, 4, P, _pat({1}, {2, 3, 4}), [G.interior[0]])


# ---------------------------------------------------------------- regions

def test_pure_pattern_coloring():
    G = lattice.window(2, 6)
    f = [1 + (c[0] % 2) if sum(c) % 2 == 0 else 3 + (c[1] % 2) for c in G.coords]
    dec = classify_regions(f, G, 4)
    P = _pat({1, 2}, {3, 4})
    assert dec.pure == [P]
    assert not dec.bad
    assert all(region_invariants(dec, G).values())


def test_diagonal_stripes_are_all_bad():
    G = lattice.window(2, 6)
    f = [(c[0] + c[1]) % 3 + 1 for c in G.coords]
    dec = classify_regions(f, G, 3)
    # only window corners, whose two neighbours agree, get classified
    assert set(G.interior) <= dec.bad and not dec.pure
    with pytest.raises(InvalidInput):
        classify_regions([1 + sum(c) % 2 for c in G.coords], G, 2)


def test_region_invariants_on_random_colorings():
    G = lattice.box((6, 6), origin=(0, 0))
    S = sample_colorings(G, 4, {}, 25, np.random.default_rng(2))
    for row in S:
        dec = classify_regions([int(x) for x in row], G, 4)
        inv = region_invariants(dec, G)
        assert inv["overlap_def"] and inv["bad_def"] and inv["star_empty_implies_pure"]
        assert inv["P_even"]


# ---------------------------------------------------------------- regimes

def test_regime_labels():
    assert dobrushin_regime_report(2, 9).label.startswith("Dobrushin: q > 4d")
    assert dobrushin_regime_report(2, 9).holds
    assert dobrushin_regime_report(2, 3).label.startswith("critical regime")
    assert dobrushin_regime_report(2, 4).label == "open/believed SSM"
    assert dobrushin_regime_report(2, 5).label == "open/believed SSM"
    assert "q >= 6" in dobrushin_regime_report(2, 7).label
    assert "beta" in dobrushin_regime_report(3, 4, beta=0.1).label
