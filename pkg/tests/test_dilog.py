import cmath
import math

import mpmath
import numpy as np
import pytest

from knotvol.dilog import BranchedLog, bloch_wigner, li2, li2_derivative

CATALAN = float(mpmath.catalan)
CL2_PI_3 = float(mpmath.clsin(2, mpmath.pi / 3))


def random_points(n, seed=7, scale=3.0):
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(-math.log(scale), math.log(scale), n))
    th = rng.uniform(-math.pi, math.pi, n)
    return r * np.exp(1j * th)


def mp_li2(w):
    return complex(mpmath.polylog(2, mpmath.mpc(w.real, w.imag)))


def test_matches_mpmath():
    for w in random_points(400):
        ref = mp_li2(w)
        assert abs(li2(w) - ref) < 1e-13 * max(1, abs(ref))


@pytest.mark.parametrize("w", [0.5, -1, 1j, -1j, 0.5 + 0.5j, 0.5 - 0.8660254j, 2, 1.5 - 1e-300j, -5 + 0j, 1e-8 + 1e-8j])
def test_special_points(w):
    assert abs(li2(w) - mp_li2(complex(w))) < 1e-13


def test_closed_forms():
    assert li2(1) == pytest.approx(math.pi ** 2 / 6, abs=1e-15)
    assert li2(-1) == pytest.approx(-math.pi ** 2 / 12, abs=1e-15)
    assert li2(0.5) == pytest.approx(math.pi ** 2 / 12 - math.log(2) ** 2 / 2, abs=1e-15)


def test_branch_cut_from_below():
    # on (1, oo) we take the limit Im w -> 0-
    for x in (1.5, 2.0, 10.0):
        below = mp_li2(complex(x, -1e-14))
        assert abs(li2(x) - below) < 1e-10
        assert li2(x).imag < 0


def test_bloch_wigner_constants():
    assert abs(bloch_wigner(1j) - 0.9159655941772190) < 1e-12
    assert abs(bloch_wigner(1j) - CATALAN) < 1e-12
    assert abs(bloch_wigner(cmath.exp(1j * math.pi / 3)) - 1.0149416064096537) < 1e-12
    assert abs(bloch_wigner(cmath.exp(1j * math.pi / 3)) - CL2_PI_3) < 1e-12


def test_bloch_wigner_symmetries():
    for w in random_points(1000, seed=11):
        d = bloch_wigner(w)
        assert abs(bloch_wigner(w.conjugate()) + d) < 1e-11
        assert abs(bloch_wigner(1 / w) + d) < 1e-11
        assert abs(bloch_wigner(1 - w) + d) < 1e-11


def test_bloch_wigner_vanishes_on_real_axis():
    for x in (-3.0, -0.5, 0.0, 0.3, 1.0, 2.5):
        assert bloch_wigner(x) == 0.0
    assert bloch_wigner(complex("inf")) == 0.0


def test_five_term_relation():
    for x, y in zip(random_points(50, seed=3, scale=2), random_points(50, seed=4, scale=2)):
        terms = [x, y, (1 - x) / (1 - x * y), 1 - x * y, (1 - y) / (1 - x * y)]
        assert abs(sum(bloch_wigner(t) for t in terms)) < 1e-11


def test_bloch_wigner_maximum_is_regular_tetrahedron():
    best = max(bloch_wigner(w) for w in random_points(2000, seed=5, scale=2))
    assert best <= CL2_PI_3 + 1e-12


def test_derivative_by_differences():
    h = 1e-6
    for w in 0.9 * random_points(50, seed=9, scale=1.0001):
        fd = (li2(w + h) - li2(w - h)) / (2 * h)
        assert abs(li2_derivative(w) - fd) < 1e-7
    assert li2_derivative(0) == 1


def test_branched_log():
    b = BranchedLog(-1 + 1e-12j, 0)
    assert abs(b.value - 1j * math.pi) < 1e-9
    c = BranchedLog.nearest(-1 - 1e-12j, b.value)
    assert c.k == 1
    assert abs(c.value - b.value) < 1e-9
