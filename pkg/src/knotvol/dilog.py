"""Complex dilogarithm and the Bloch-Wigner function.

Li2 uses the Maclaurin series on |w| <= 1/2 and the Bernoulli series in
u = -log(1-w) on the rest of the closed unit disc with Re w <= 1/2;
everything else is mapped there by w -> 1/w and w -> 1-w.
The branch cut is [1, oo).  On the cut we return the limit from below
(Im w -> 0-), matching mpmath.polylog.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

PI2_6 = math.pi ** 2 / 6


def _bernoulli(n):
    B = [Fraction(0)] * (n + 1)
    B[0] = Fraction(1)
    for m in range(1, n + 1):
        B[m] = -sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1)
    return B


# coefficients B_n / (n+1)! for the series Li2(w) = sum B_n u^{n+1}/(n+1)!
_B = _bernoulli(40)
_BCOEF = [float(_B[n] / math.factorial(n + 1)) for n in range(41)]


def _li2_maclaurin(w: complex) -> complex:
    s, p, k = 0j, w, 1
    while True:
        t = p / (k * k)
        s += t
        if abs(t) < 1e-17 * max(abs(s), 1e-300) or k > 200:
            return s
        k += 1
        p *= w


def _li2_bernoulli(w: complex) -> complex:
    u = -cmath.log(1 - w)
    u2 = u * u
    s = u - u2 / 4
    p = u
    for n in range(2, 41, 2):
        p *= u2
        t = _BCOEF[n] * p
        s += t
        if abs(t) < 1e-17 * abs(s):
            break
    return s


def _li2_disc(w: complex) -> complex:
    """|w| <= 1 and Re w <= 1/2."""
    if abs(w) <= 0.5:
        return _li2_maclaurin(w)
    return _li2_bernoulli(w)


def li2(w) -> complex:
    """Principal branch of Euler's dilogarithm."""
    w = complex(w)
    if w == 0:
        return 0j
    if w == 1:
        return complex(PI2_6)
    cut = w.imag == 0 and w.real > 1
    if cut:
        w = complex(w.real, -0.0)
    if abs(w) > 1:
        # Li2(w) = -pi^2/6 - log(-w)^2/2 - Li2(1/w)
        lw = cmath.log(-w)
        v = -PI2_6 - 0.5 * lw * lw - li2(1 / w)
        if cut:
            # the inversion puts 1/w on (0,1); pick the side matching Im w -> 0-
            v = complex(v.real, -math.pi * math.log(w.real))
        return v
    if w.real > 0.5:
        # Li2(w) = pi^2/6 - log(w) log(1-w) - Li2(1-w)
        return PI2_6 - cmath.log(w) * cmath.log(1 - w) - _li2_disc(1 - w)
    return _li2_disc(w)


def li2_derivative(w) -> complex:
    """d/dw Li2(w) = -log(1-w)/w."""
    w = complex(w)
    if w == 0:
        return 1 + 0j
    return -cmath.log(1 - w) / w


def bloch_wigner(w) -> float:
    """D(w) = Im Li2(w) + log|w| arg(1-w); zero at 0, 1 and infinity."""
    w = complex(w)
    if w == 0 or w == 1 or not cmath.isfinite(w):
        return 0.0
    if abs(w) > 1:
        return -bloch_wigner(1 / w)
    if w.imag == 0:
        return 0.0
    return li2(w).imag + math.log(abs(w)) * cmath.phase(1 - w)


@dataclass(frozen=True)
class BranchedLog:
    """log with an explicit 2 pi i offset: value = Log(arg) + 2 pi i k."""
    arg: complex
    k: int = 0

    @property
    def value(self) -> complex:
        return cmath.log(self.arg) + 2j * math.pi * self.k

    @classmethod
    def nearest(cls, arg: complex, target: complex) -> "BranchedLog":
        """Branch closest to a previous value (continuation along a path)."""
        base = cmath.log(arg)
        k = round((target.imag - base.imag) / (2 * math.pi))
        return cls(arg, int(k))
