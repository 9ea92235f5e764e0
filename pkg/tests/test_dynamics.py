import itertools
from fractions import Fraction

import numpy as np
import pytest

from chroma import lattice
from chroma.dynamics import (HAVE_NUMBA, ChainState, cftp_heights, cluster_swap,
                             glauber_sweep, height_extremes, kempe_flip,
                             maximal_coupling_step, scan_coupling)
from chroma.errors import InvalidInput
from chroma.exact import find_extension
from chroma.heights import height_window

import oracles


def test_glauber_keeps_proper_and_frozen():
    G = lattice.box((5, 5), rimmed=True)
    tau = {v: 1 + G.parity(v) for v in G.rim}
    f = find_extension(G, 5, tau)
    st = ChainState(tuple(f), frozenset(tau), seed=3)
    for _ in range(20):
        st = glauber_sweep(st, G, 5)
        assert lattice.is_proper(st.config, G, 5)
    assert all(st.config[v] == c for v, c in tau.items())
    assert st.step_count == 20
    again = ChainState(tuple(f), frozenset(tau), seed=3)
    for _ in range(20):
        again = glauber_sweep(again, G, 5)
    assert again.config == st.config
    with pytest.raises(InvalidInput):
        glauber_sweep(st, G, 5, order="zigzag")


def test_kempe_flip_is_proper_involution():
    G = lattice.box((4, 4))
    f = find_extension(G, 4, {}, rng=np.random.default_rng(1))
    for v in G.vertices:
        for a, b in itertools.combinations(range(1, 5), 2):
            g = kempe_flip(f, G, v, a, b)
            assert lattice.is_proper(g, G, 4)
            assert kempe_flip(g, G, v, a, b) == tuple(f)


def _law(mask, q):
    cols = [c for c in range(1, q + 1) if mask >> c & 1]
    return {c: Fraction(1, len(cols)) for c in cols}


def test_maximal_coupling_step_exhaustive():
    q = 4
    masks = [sum(1 << c for c in S) for k in range(1, q + 1)
             for S in itertools.combinations(range(1, q + 1), k)]
    for af, ag in itertools.product(masks, repeat=2):
        nf, ng = bin(af).count("1"), bin(ag).count("1")
        u = np.arange(nf * ng)
        cf, cg = maximal_coupling_step(np.full(len(u), af), np.full(len(u), ag), u, q)
        tot = len(u)
        pf = {c: Fraction(int(np.sum(cf == c)), tot) for c in set(cf.tolist())}
        pg = {c: Fraction(int(np.sum(cg == c)), tot) for c in set(cg.tolist())}
        assert pf == _law(af, q) and pg == _law(ag, q)
        assert Fraction(int(np.sum(cf != cg)), tot) == oracles.tv(_law(af, q), _law(ag, q))


def test_scan_coupling_identical_boundaries_never_disagree():
    G = lattice.box((4, 4), rimmed=True)
    tau = {v: 1 + G.parity(v) for v in G.rim}
    f = np.tile(find_extension(G, 7, tau), (200, 1))
    res = scan_coupling(G, 7, tau, dict(tau), 3, 200, seed=1, init=(f, f))
    # the maximal coupling of two equal laws is the diagonal
    assert res.disagreement.max() == 0
    assert not np.array_equal(res.f, f)


def test_scan_coupling_disagreement_is_local():
    G = lattice.box((6, 6), origin=(0, 0), rimmed=True)
    tau1 = {v: 1 + sum(G.coords[v]) % 2 for v in G.rim}
    tau2 = dict(tau1)
    tau2[G.index((0, 2))] = 3
    res = scan_coupling(G, 9, tau1, tau2, 6, 2000, seed=2)
    near, far = G.index((1, 2)), G.index((4, 4))
    assert res.disagreement[near] > res.disagreement[far]
    assert res.f.shape == (2000, G.n)


def test_height_extremes_are_height_functions():
    G, fixed = height_window(3)
    top, bot = height_extremes(G, fixed)
    assert lattice.is_height_function(top, G)
    assert lattice.is_height_function(bot, G)
    assert all(top[v] == 0 == bot[v] for v in fixed)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_cftp_compiled_matches_numpy():
    G, fixed = height_window(4)
    a = cftp_heights(G, fixed, 17, 64, compiled=True)
    b = cftp_heights(G, fixed, 17, 64, compiled=False)
    assert np.array_equal(a, b)


def test_cftp_replicas_are_independent_of_batching():
    G, fixed = height_window(3)
    whole = cftp_heights(G, fixed, 5, 10)
    part = cftp_heights(G, fixed, 5, 4, first_rep=6)
    assert np.array_equal(whole[6:], part)


def test_cftp_law_matches_enumeration():
    G, fixed = height_window(2)
    support = oracles.all_heights(G, fixed, 3)
    idx = {h: i for i, h in enumerate(support)}
    S = cftp_heights(G, fixed, 99, 30000)
    counts = np.bincount([idx[tuple(int(x) for x in row)] for row in S],
                         minlength=len(support))
    assert all(lattice.is_height_function(row, G) for row in S[:50])
    expect = len(S) / len(support)
    chi2 = float(((counts - expect) ** 2 / expect).sum())
    k = len(support) - 1
    assert chi2 < k + 6 * np.sqrt(2 * k)


def test_cluster_swap_involution_on_colorings():
    G = lattice.box((4, 4), rimmed=True)
    tau = {v: 1 + G.parity(v) for v in G.rim}
    rng = np.random.default_rng(0)
    for _ in range(30):
        f = find_extension(G, 4, tau, rng=rng)
        g = find_extension(G, 4, tau, rng=rng)
        f2, g2 = cluster_swap(f, g, G, G.rim)
        assert lattice.is_proper(f2, G) and lattice.is_proper(g2, G)
        assert cluster_swap(f2, g2, G, G.rim) == (tuple(f), tuple(g))
