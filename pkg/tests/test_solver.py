import time

import mpmath
import numpy as np
import pytest

from knotvol.knot_diagram import reduce_diagram
from knotvol.potential import build_potential
from knotvol.solver import (NotFound, competitor_scan, critical_points, initial_guess, newton, newton_solve,
                            select_geometric, solve_knot)

from conftest import FIG8, FIVE2, FIVE2_B, SEVEN3, SIX2

# regular ideal tetrahedra: the figure-eight complement is two of them
VOL_41_ORACLE = float(2 * mpmath.clsin(2, mpmath.pi / 3))


def _five2_oracle():
    # the three tetrahedra of the 5_2 complement share one shape, the root
    # of x^3 - x^2 + 1 in the upper half plane
    with mpmath.workdps(30):
        w = mpmath.findroot(lambda x: x ** 3 - x ** 2 + 1, mpmath.mpc(0.9, 0.7))
        D = mpmath.im(mpmath.polylog(2, w)) + mpmath.log(abs(w)) * mpmath.arg(1 - w)
        return float(3 * D)


VOL_52_ORACLE = _five2_oracle()
# census volumes of 6_2 and 7_3
VOL_62 = 4.400832516123045
VOL_73 = 4.592125697027062


def solve(word, **kw):
    V = build_potential(reduce_diagram(word)[2])
    t = time.perf_counter()
    sol = newton_solve(V, **kw)
    return V, sol, time.perf_counter() - t


def test_oracles_are_what_we_think():
    assert VOL_41_ORACLE == pytest.approx(2.029883212819307, abs=1e-14)
    assert VOL_52_ORACLE == pytest.approx(2.828122088330783, abs=1e-12)


@pytest.mark.parametrize("word,expected,tol", [
    (FIG8, VOL_41_ORACLE, 1e-9),
    (FIVE2, VOL_52_ORACLE, 1e-9),
    (FIVE2_B, VOL_52_ORACLE, 1e-9),
    (SIX2, VOL_62, 1e-9),
    (SEVEN3, VOL_73, 1e-9),
])
def test_volumes(word, expected, tol):
    V, sol, dt = solve(word)
    assert abs(sol.volume - expected) < tol
    assert abs(sol.im_v - expected) < 1e-9
    assert sol.residual_norm < 1e-10
    assert dt < 5


@pytest.mark.parametrize("word", [FIG8, FIVE2, SIX2])
def test_critical_point_identity_and_edge_relations(word):
    V, sol, _ = solve(word)
    v, dsum, corr = V.im_decomposition(sol.z0)
    assert abs(v - dsum) < 1e-9
    assert abs(corr) < 1e-9
    for p in V.edge_relations(sol.z0).values():
        assert abs(p - 1) < 1e-9
    # z dV0/dz vanishes exactly on the chosen branch
    assert np.max(np.abs(V.log_gradient(sol.z0))) < 1e-9


def test_solution_is_a_fixed_point():
    V, sol, _ = solve(FIVE2)
    out = newton(V, np.log(sol.z0))
    assert out is not None and out[2] == 0


def test_deterministic():
    a = solve(FIVE2)[1]
    b = solve(FIVE2)[1]
    assert np.array_equal(a.z0, b.z0)
    assert a.volume == b.volume


def test_seed_independence():
    vols = [solve(FIG8, seed=s, restarts=1024)[1].volume for s in (1, 2, 3)]
    assert max(vols) - min(vols) < 1e-10


def test_threads_do_not_change_result():
    a = solve(SIX2)[1]
    b = solve(SIX2, threads=4)[1]
    assert np.allclose(a.z0, b.z0, atol=1e-12)


def test_conjugate_point_has_negative_volume():
    V = build_potential(reduce_diagram(FIVE2)[2])
    pts = critical_points(V, restarts=2048)
    good = [p for p in pts if p.nondegenerate]
    vols = sorted(round(p.volume, 8) for p in good)
    assert round(VOL_52_ORACLE, 8) in vols and -round(VOL_52_ORACLE, 8) in vols


def test_flat_points_have_no_volume():
    V = build_potential(reduce_diagram(FIVE2)[2])
    for p in critical_points(V, restarts=1024):
        if p.nondegenerate and p.flat:
            assert abs(p.volume) < 1e-9


def test_not_found_with_no_seeds_that_converge():
    V = build_potential(reduce_diagram(FIVE2)[2])
    with pytest.raises(NotFound) as e:
        newton_solve(V, restarts=4, max_iter=1)
    assert e.value.reason == "not_found"
    assert select_geometric([]) is None


def test_initial_guess_is_near_regular_shapes():
    V = build_potential(reduce_diagram(FIG8)[2])
    u = initial_guess(V)
    assert u.shape == (V.n_unknowns,)
    assert np.all(np.isfinite(u))


def test_competitor_scan_on_figure_eight():
    V = build_potential(reduce_diagram(FIG8)[2])
    sol = newton_solve(V)
    scan = competitor_scan(V, samples=200)
    good = [c for c in scan if c["nondegenerate"]]
    assert good
    assert max(c["im_v"] for c in good) <= sol.volume + 1e-6


def test_serialization():
    V, sol, _ = solve(FIVE2)
    out = sol.to_dict()
    assert out["volume"] == sol.volume
    assert len(out["shapes"]) == len(V.terms)
    assert all(set(s) == {"nu", "mu", "re", "im"} for s in out["shapes"])


@pytest.mark.parametrize("word,expected", [
    # the first admissible diagram has no geometric critical point; a later braid does
    ("s1 s1 s1 -s2 s1 -s2", VOL_62),
    ([1, 2, 1, 2, 1, -2, 1, -2], VOL_52_ORACLE),
])
def test_solve_knot_tries_other_presentations(word, expected):
    d, bp, g, V, sol, info = solve_knot(word)
    assert abs(sol.volume - expected) < 1e-9
    assert info["presentations_tried"] > 1
    with pytest.raises(NotFound):
        solve_knot(word, max_presentations=1)


def test_solve_knot_without_rewrite_uses_the_word():
    d, bp, g, V, sol, info = solve_knot(FIVE2, rewrite=False)
    assert info is None and list(d.word) == FIVE2
