from fractions import Fraction

import pytest

from chroma import lattice
from chroma.errors import InvalidInput
from chroma.fkg import (DREIDEL_SITES, color_one_family, conditional_ratios,
                        correlation, counterexample_search, dreidel_graph,
                        equal_pairs_family, fkg_lattice_check, kempe_single_set_check,
                        positive_association_check, product_family, upsets)

import oracles


@pytest.fixture(scope="module")
def dreidel_colorings():
    return oracles.all_colorings(dreidel_graph(), 3)


def _cond(cols, event, given):
    sel = [f for f in cols if given(f)]
    return Fraction(sum(event(f) for f in sel), len(sel))


def test_dreidel_ratios_match_enumeration(dreidel_colorings):
    G = dreidel_graph()
    u, v, w = DREIDEL_SITES["u"], DREIDEL_SITES["v"], DREIDEL_SITES["w"]
    assert G.is_bipartite and G.is_connected()
    a = _cond(dreidel_colorings, lambda f: f[u] == 1, lambda f: f[v] == 1)
    b = _cond(dreidel_colorings, lambda f: f[u] == 1, lambda f: f[v] == 1 == f[w])
    assert (a, b) == (Fraction(23, 56), Fraction(9, 22))
    assert conditional_ratios(G, 3, u, v, w) == (a, b)


def test_dreidel_lattice_condition_fails(dreidel_colorings):
    G = dreidel_graph()
    fam = color_one_family(G, 3, range(5))
    law = oracles.marginal([tuple(int(f[i] == 1) for i in range(5)) for f in dreidel_colorings],
                           range(5))
    assert fam.law == law
    v = fkg_lattice_check(fam)
    assert not v.holds
    x, y = v.witness
    join = tuple(map(max, x, y))
    meet = tuple(map(min, x, y))
    assert law.get(join, 0) * law.get(meet, 0) < law.get(x, 0) * law.get(y, 0)


def test_dreidel_color_one_family_is_positively_associated():
    fam = color_one_family(dreidel_graph(), 3, range(5))
    v = positive_association_check(fam)
    assert v.holds and v.mode == "exhaustive"


def test_equal_pairs_correlation(dreidel_colorings):
    G = dreidel_graph()
    pairs = [(4, 0), (0, 1)]
    fam = equal_pairs_family(G, 3, pairs)
    n = len(dreidel_colorings)
    e1 = Fraction(sum(f[4] == f[0] for f in dreidel_colorings), n)
    e2 = Fraction(sum(f[0] == f[1] for f in dreidel_colorings), n)
    e12 = Fraction(sum(f[4] == f[0] and f[0] == f[1] for f in dreidel_colorings), n)
    assert correlation(fam, 0, 1) == e12 - e1 * e2 == Fraction(-1, 784)
    assert not positive_association_check(fam).holds


def test_product_family_is_fkg():
    fam = product_family([Fraction(1, 3), Fraction(1, 2), Fraction(1, 5)])
    assert fkg_lattice_check(fam).holds
    assert positive_association_check(fam).holds
    assert correlation(fam, 0, 2) == 0


def test_single_site_always_holds():
    fam = color_one_family(lattice.box((3,)), 3, [1])
    assert fkg_lattice_check(fam).holds
    assert positive_association_check(fam).holds


def test_upset_counts_are_dedekind_numbers():
    assert [len(upsets(k)) for k in range(6)] == [2, 3, 6, 20, 168, 7581]


def test_positive_association_falls_back_beyond_cap():
    fam = product_family([Fraction(1, 2)] * 6)
    v = positive_association_check(fam, cap=5)
    assert v.holds and v.mode != "exhaustive"


def test_kempe_single_set(dreidel_colorings):
    G = dreidel_graph()
    p_us, rhs, ok = kempe_single_set_check(G, 3, 4, [0, 1, 2])
    n = len(dreidel_colorings)
    want = Fraction(sum(f[4] == f[0] == f[1] == f[2] == 1 for f in dreidel_colorings), n)
    assert p_us == want and ok
    p_s = Fraction(sum(f[0] == f[1] == f[2] == 1 for f in dreidel_colorings), n)
    assert rhs == p_s / 3
    with pytest.raises(InvalidInput):
        kempe_single_set_check(G, 3, 4, [5])
    with pytest.raises(InvalidInput):
        kempe_single_set_check(G, 3, 4, [4])


def test_search_small_budget_finds_nothing():
    r = counterexample_search(3, q=3, target=None)
    assert not r.found and r.examined > 0


def test_search_two_colors_finds_nothing():
    r = counterexample_search(7, q=2, target=None)
    assert not r.found


def test_search_finds_a_lattice_violation():
    r = counterexample_search(9, q=3, target=None)
    assert r.found and r.lattice_violation
    G = lattice.explicit(r.edges, r.n)
    fam = color_one_family(G, 3, r.side_a)
    assert not fkg_lattice_check(fam).holds
