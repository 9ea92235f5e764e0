from fractions import Fraction

import numpy as np
import pytest

from chroma import lattice
from chroma.dynamics import cftp_heights
from chroma.errors import InvalidInput
from chroma.exact import find_extension
from chroma.heights import (center, center_statistics, coloring_to_height,
                            enumerate_heights, exact_height_marginal, height_ball,
                            height_to_coloring, height_window, log_concavity_check,
                            max_mod3_deviation, mod3_profile)

import oracles


def test_window_convention():
    G, fixed = height_window(3)
    assert G.n == 25
    assert all(G.parity(v) == 0 for v in fixed)
    assert len(fixed) == 8
    c = center(G)
    assert G.parity(c) == 1
    H, pinned = height_window(1)
    assert all(w in pinned for w in H.adj[center(H)])


def test_lift_round_trip_on_box():
    G = lattice.box((4, 5))
    for seed in range(10):
        f = find_extension(G, 3, {}, rng=np.random.default_rng(seed))
        h = coloring_to_height(f, G)
        assert lattice.is_height_function(h, G)
        assert height_to_coloring(h) == tuple(f)


def test_lift_of_a_height_function_recovers_it():
    G, fixed = height_window(2)
    for h in oracles.all_heights(G, fixed, 3)[::7]:
        a = min(fixed)
        assert coloring_to_height(height_to_coloring(h), G, a, h[a]) == h


def test_lift_detects_winding():
    T = lattice.torus(2, 6)
    f = [(c[0] + c[1]) % 3 + 1 for c in T.coords]
    with pytest.raises(InvalidInput):
        coloring_to_height(f, T)
    G = lattice.box((2, 2))
    with pytest.raises(InvalidInput):
        coloring_to_height([1, 1, 2, 3], G)


def test_ball_two_exact():
    G, fixed = height_ball(2)
    v = G.index((0, 0))
    m = exact_height_marginal(G, fixed, v)
    assert m.count == 18
    assert m.values == {-2: Fraction(1, 18), 0: Fraction(8, 9), 2: Fraction(1, 18)}
    with pytest.raises(InvalidInput):
        height_ball(3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_transfer_marginal_matches_enumeration(n):
    G, fixed = height_window(n)
    v = center(G)
    hs = enumerate_heights(G, fixed)
    if n <= 2:
        # every vertex is within distance 3 of a pinned zero
        assert sorted(hs) == sorted(oracles.all_heights(G, fixed, 3))
    want = {k[0]: p for k, p in oracles.marginal(hs, [v]).items()}
    assert exact_height_marginal(G, fixed, v).values == want


def test_ball_four_matches_enumeration():
    G, fixed = height_ball(4)
    v = G.index((0, 0))
    hs = enumerate_heights(G, fixed)
    want = {k[0]: p for k, p in oracles.marginal(hs, [v]).items()}
    assert exact_height_marginal(G, fixed, v).values == want


def test_log_concavity_report():
    G, fixed = height_window(4)
    rep = log_concavity_check(G, fixed, center(G))
    assert rep.holds and rep.monotone and rep.symmetric and rep.checked > 0
    P = rep.marginal.values
    assert sum(mod3_profile(P)) == 1


def test_log_concavity_flags_a_bad_law():
    bad = {-2: Fraction(1, 3), 0: Fraction(1, 6), 2: Fraction(1, 2)}
    from chroma.heights import MarginalTable
    rep = log_concavity_check(None, None, 0, MarginalTable(0, bad, "given"))
    assert not rep.holds and not rep.symmetric


def test_rao_blackwell_estimates_agree_with_exact():
    G, fixed = height_ball(4)
    v = G.index((0, 0))
    exact = exact_height_marginal(G, fixed, v).values
    var = float(sum(p * x * x for x, p in exact.items()))
    p3 = [float(p) for p in mod3_profile(exact)]
    h = cftp_heights(G, fixed, 4, 8000)
    row = center_statistics(h[:, v], h[:, list(G.adj[v])], 4)
    assert abs(row.var - var) < 4 * row.var_stderr
    for r in range(3):
        assert abs(row.p_mod3[r] - p3[r]) < 4 * row.p_mod3_stderr[r]
    assert max_mod3_deviation((1 / 3, 1 / 3, 1 / 3)) == 0


def test_rao_blackwell_reduces_spread():
    G, fixed = height_ball(4)
    v = G.index((0, 0))
    h = cftp_heights(G, fixed, 8, 4000)
    x = h[:, v].astype(float)
    raw_se = np.std(x ** 2, ddof=1) / np.sqrt(len(x))
    row = center_statistics(h[:, v], h[:, list(G.adj[v])], 4)
    assert row.var_stderr < raw_se
