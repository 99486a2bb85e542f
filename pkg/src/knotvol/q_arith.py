"""Arithmetic at q = exp(2 pi i / N).

Everything is table driven: powers of q and the two q-factorials are
precomputed once per N, so no value is ever obtained by repeated
multiplication of q.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

PRECISIONS = ("std", "dd")


def residue(h: int, N: int) -> int:
    """[h] in {0..N-1}."""
    return h % N


@dataclass(frozen=True)
class RootContext:
    N: int
    precision: str = "std"
    q: complex = field(init=False)
    q_half: complex = field(init=False)
    qpow: np.ndarray = field(init=False, repr=False)
    fq: np.ndarray = field(init=False, repr=False)
    fqb: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.precision not in PRECISIONS:
            raise ValueError(f"unknown precision mode {self.precision!r}")
        N = self.N
        # exact angles, no accumulated drift
        qpow = np.array([complex(math.cos(2 * math.pi * k / N), math.sin(2 * math.pi * k / N)) for k in range(N)])
        fq = np.ones(N, dtype=complex)
        fqb = np.ones(N, dtype=complex)
        for h in range(1, N):
            fq[h] = fq[h - 1] * (1 - qpow[h])
            fqb[h] = fqb[h - 1] * (1 - qpow[(-h) % N])
        object.__setattr__(self, "q", qpow[1 % N])
        object.__setattr__(self, "q_half", complex(math.cos(math.pi / N), math.sin(math.pi / N)))
        object.__setattr__(self, "qpow", qpow)
        object.__setattr__(self, "fq", fq)
        object.__setattr__(self, "fqb", fqb)

    def qp(self, h) -> complex:
        """q**h for integer h (array friendly)."""
        return self.qpow[np.mod(h, self.N)]

    def fac(self, sign: int, h):
        """(q^sign)_{[h]}."""
        t = self.fq if sign > 0 else self.fqb
        return t[np.mod(h, self.N)]


def q_factorial(omega: complex, h: int) -> complex:
    """(omega)_h = (1-omega)(1-omega^2)...(1-omega^h); empty product is 1."""
    out = 1 + 0j
    w = 1 + 0j
    for _ in range(h):
        w *= omega
        out *= 1 - w
    return out


def theta(i: int, j: int, k: int, l: int, N: int) -> int:
    r = lambda h: h % N
    return int(r(i - j) + r(j - l) + r(l - k - 1) + r(k - i) == N - 1)


def in_interval(k: int, i: int, j: int, N: int) -> bool:
    """Cyclic interval membership: k in {i, i-1, ..., j} (mod N), read downwards from i."""
    return (i - k) % N + (k - j) % N == (i - j) % N


def r_matrix(i, j, k, l, ctx: RootContext) -> complex:
    N = ctx.N
    if not theta(i, j, k, l, N):
        return 0j
    num = N * ctx.qp(-1 - (k - j) * (i - l + 1))
    den = ctx.fac(-1, i - j) * ctx.fac(1, j - l) * ctx.fac(-1, l - k - 1) * ctx.fac(1, k - i)
    return complex(num / den)


def rbar_matrix(i, j, k, l, ctx: RootContext) -> complex:
    N = ctx.N
    if not theta(i, j, k, l, N):
        return 0j
    num = N * ctx.qp(1 + (i - l) * (k - j + 1))
    den = ctx.fac(1, i - j) * ctx.fac(-1, j - l) * ctx.fac(1, l - k - 1) * ctx.fac(-1, k - i)
    return complex(num / den)


_TENSORS: dict = {}


def r_tensors(ctx: RootContext):
    """Full (N,N,N,N) arrays R[i,j,k,l], Rbar[i,j,k,l]; (i,j) on top, (k,l) below."""
    key = ctx.N
    if key not in _TENSORS:
        N = ctx.N
        i, j, k, l = np.meshgrid(*(np.arange(N),) * 4, indexing="ij")
        th = ((i - j) % N + (j - l) % N + (l - k - 1) % N + (k - i) % N) == N - 1
        R = N * ctx.qp(-1 - (k - j) * (i - l + 1)) / (
            ctx.fac(-1, i - j) * ctx.fac(1, j - l) * ctx.fac(-1, l - k - 1) * ctx.fac(1, k - i))
        Rb = N * ctx.qp(1 + (i - l) * (k - j + 1)) / (
            ctx.fac(1, i - j) * ctx.fac(-1, j - l) * ctx.fac(1, l - k - 1) * ctx.fac(-1, k - i))
        _TENSORS[key] = (np.where(th, R, 0), np.where(th, Rb, 0))
    return _TENSORS[key]


def conversion_sign(h: int, ctx: RootContext) -> int:
    """s with (q)_h = s (-1)^h q^{h(h+1)/2} (qbar)_h, found by direct evaluation."""
    lhs = ctx.fac(1, h)
    rhs = (-1) ** h * ctx.qp(h * (h + 1) // 2) * ctx.fac(-1, h)
    ratio = lhs / rhs
    if abs(ratio - 1) < 1e-8:
        return 1
    if abs(ratio + 1) < 1e-8:
        return -1
    raise ArithmeticError(f"conversion ratio {ratio} is not a sign")


def summation_identities(ctx: RootContext) -> dict:
    """Evaluate the eight summation identities over all free indices.

    Returns {"max_dev": float, "per_identity": [8 floats]}.  The first
    four are the delta identities, the last four the closed forms.
    """
    N = ctx.N
    R, Rb = r_tensors(ctx)
    q = ctx.qp
    ivl = lambda k, a, b: in_interval(k, a, b, N)
    delta = lambda a, b: 1.0 if (a - b) % N == 0 else 0.0
    fits = lambda a, b: 1.0 if (a % N) + (b % N) <= N - 1 else 0.0
    fq, fqb = (lambda h: ctx.fac(1, h)), (lambda h: ctx.fac(-1, h))
    dev = [0.0] * 8
    for a, b, c in itertools.product(range(N), repeat=3):
        # summing over the first index i
        j, k, l = a, b, c
        idx = [i for i in range(N) if ivl(i, k, j)]
        s = sum(q(-i) * Rb[i, j, k, l] for i in idx)
        dev[0] = max(dev[0], abs(s - delta(j, k) * q(1 - l)))
        s = sum(q(-i) * R[i, j, k, l] for i in idx)
        rhs = N * q(-1 - k) / (fqb(j - l) * fq(l - k - 1)) * fits(j - l, l - k - 1)
        dev[4] = max(dev[4], abs(s - rhs))
        # over j
        i, k, l = a, b, c
        idx = [j for j in range(N) if ivl(j, i, l)]
        s = sum(q(-j) * R[i, j, k, l] for j in idx)
        dev[1] = max(dev[1], abs(s - delta(i, l) * q(-1 - k)))
        s = sum(q(-j) * Rb[i, j, k, l] for j in idx)
        rhs = N * q(1 - l) / (fqb(l - k - 1) * fq(k - i)) * fits(l - k - 1, k - i)
        dev[5] = max(dev[5], abs(s - rhs))
        # over k
        i, j, l = a, b, c
        idx = [k for k in range(N) if ivl(k, l - 1, i)]
        s = sum(q(k) * Rb[i, j, k, l] for k in idx)
        dev[2] = max(dev[2], abs(s - delta(i + 1, l) * q(j)))
        s = sum(q(k) * R[i, j, k, l] for k in idx)
        rhs = N * q(-1 + i) / (fq(i - j) * fqb(j - l)) * fits(i - j, j - l)
        dev[6] = max(dev[6], abs(s - rhs))
        # over l
        i, j, k = a, b, c
        idx = [l for l in range(N) if ivl(l, j, k + 1)]
        s = sum(q(l) * R[i, j, k, l] for l in idx)
        dev[3] = max(dev[3], abs(s - delta(j, k + 1) * q(i)))
        s = sum(q(l) * Rb[i, j, k, l] for l in idx)
        rhs = N * q(1 + j) / (fqb(i - j) * fq(k - i)) * fits(i - j, k - i)
        dev[7] = max(dev[7], abs(s - rhs))
    return {"N": N, "max_dev": max(dev), "per_identity": dev}


def csum(values) -> complex:
    """Compensated complex sum (exactly rounded per component)."""
    vals = list(values)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
