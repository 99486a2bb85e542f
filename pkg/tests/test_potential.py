import math

import numpy as np
import pytest

from knotvol.dilog import bloch_wigner
from knotvol.knot_diagram import reduce_diagram
from knotvol.potential import PotentialError, SingularityError, build_potential, wrap

from conftest import FIG8, FIVE2, FIVE2_B, SEVEN3, SIX2

WORDS = [FIG8, FIVE2, FIVE2_B, SIX2, SEVEN3]


def potential(word):
    return build_potential(reduce_diagram(word)[2])


def away_from_cuts(V, rng, count):
    """Random points whose ratios and z avoid branch cuts, so finite differences are meaningful."""
    out = []
    while len(out) < count:
        z = np.exp(rng.uniform(-0.7, 0.7, V.n_unknowns) + 1j * rng.uniform(-3, 3, V.n_unknowns))
        W = V._W(z)
        if np.any((np.abs(z.imag) < 1e-2 * np.abs(z)) & (z.real < 0)):
            continue
        if np.any((W.real > 1) & (np.abs(W.imag) < 1e-2)) or np.any(np.abs(1 - W) < 1e-2):
            continue
        out.append(z)
    return out


@pytest.mark.parametrize("word", WORDS)
def test_term_count_and_unknowns(word):
    g = reduce_diagram(word)[2]
    V = build_potential(g)
    assert V.n_unknowns == len(g.free_edges)
    assert len(V.terms) == len(g.census)
    assert set(V.terms[0].__dict__) >= {"phi", "psi", "eps"}


@pytest.mark.parametrize("word", WORDS)
def test_residuals_agree_with_log_gradient(word):
    V = potential(word)
    rng = np.random.default_rng(1)
    for z in away_from_cuts(V, rng, 100):
        g = V.log_gradient(z)
        r = V.residual_system(z)
        assert np.max(np.abs(wrap(r - g))) < 1e-8
        # the printed orientation is the same relation up to inversion
        p = V.residual_system(z, printed=True)
        flip = np.array([V.graph.edge_class[phi] == -1 for phi in V.free])
        assert np.max(np.abs(wrap(np.where(flip, -p, p) - g))) < 1e-8


@pytest.mark.parametrize("word", [FIG8, FIVE2, SIX2])
def test_gradient_matches_central_differences(word):
    V = potential(word)
    rng = np.random.default_rng(2)
    h = 1e-5
    for z in away_from_cuts(V, rng, 100):
        grad = V.gradient(z)
        for i in range(V.n_unknowns):
            e = np.zeros(V.n_unknowns, dtype=complex)
            e[i] = h * z[i]
            fd = (V.value(z + e) - V.value(z - e)) / (2 * e[i])
            assert abs(fd - grad[i]) < 1e-6 * max(1, abs(grad[i]))


def test_log_hessian_by_differences():
    V = potential(FIVE2)
    rng = np.random.default_rng(3)
    h = 1e-6
    for z in away_from_cuts(V, rng, 20):
        H = V.log_hessian(z)
        for i in range(V.n_unknowns):
            e = np.zeros(V.n_unknowns)
            e[i] = h
            fd = (V.log_gradient(z * np.exp(e)) - V.log_gradient(z * np.exp(-e))) / (2 * h)
            assert np.max(np.abs(wrap(fd - H[:, i]))) < 1e-5


def test_batched_forms_agree():
    V = potential(SIX2)
    rng = np.random.default_rng(4)
    zs = away_from_cuts(V, rng, 10)
    U = np.log(np.array(zs))
    g, W = V.batch_log_gradient(U)
    H = V.batch_log_hessian(W)
    for k, z in enumerate(zs):
        assert np.allclose(g[k], V.log_gradient(z))
        assert np.allclose(H[k], V.log_hessian(z))


@pytest.mark.parametrize("word", [FIG8, FIVE2, SEVEN3])
def test_imaginary_part_decomposition(word):
    # Im V0 = sum D(shapes) + sum log|z| Im(z dV0/dz) holds at every point
    V = potential(word)
    rng = np.random.default_rng(5)
    for z in away_from_cuts(V, rng, 30):
        v, dsum, corr = V.im_decomposition(z)
        assert abs(v - dsum - corr) < 1e-9
        assert dsum == pytest.approx(math.fsum(bloch_wigner(s) for s in V.ratios(z)))


def test_branch_offsets_kill_the_2pi_part():
    V = potential(FIVE2)
    z = away_from_cuts(V, np.random.default_rng(6), 1)[0]
    V.set_branch(z)
    assert np.max(np.abs(V.log_gradient(z).imag)) <= math.pi + 1e-12
    V.offsets = {}


def test_singular_points_raise():
    V = potential(FIVE2)
    with pytest.raises(SingularityError) as e:
        V.value(np.ones(V.n_unknowns))
    assert e.value.reason == "singular"
    z = np.full(V.n_unknowns, 2.0 + 1j)
    z[0] = 0
    with pytest.raises(SingularityError):
        V.log_gradient(z)


def test_empty_census_rejected():
    g = reduce_diagram(FIVE2)[2]

    class Empty:
        census = []
    with pytest.raises(PotentialError):
        build_potential(Empty())
    assert build_potential(g).terms


def test_serialization():
    V = potential(FIVE2)
    out = V.to_dict()
    assert out["schema"] == "knotvol.potential/1"
    assert len(out["terms"]) == len(V.terms)
    assert out["unknowns"] == list(V.free)
    assert all("Li2" in t["expr"] for t in out["terms"])
