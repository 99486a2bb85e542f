"""Kashaev's invariant as a state sum.

Two evaluations are provided: the full sum over all edge labellings
(the oracle) and the reduced sum over simple states on the graph G.
Each has a literal backtracking enumerator and a tensor-contraction
path that computes the same sum by einsum.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .knot_diagram import CORNER_ROLES, KnotDiagram, ReducedGraph
from .q_arith import RootContext, r_tensors

DEFAULT_BUDGET = 5 * 10**8


class BudgetError(RuntimeError):
    """Requested evaluation exceeds the cost budget."""

    reason = "budget"


class PrecisionError(RuntimeError):
    """Result lost too much precision to be trusted."""

    reason = "precision"


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


# ---------------------------------------------------------------- weights

def _slot_value(d: KnotDiagram, labels, c, role, N):
    return (labels[d.roles[c][role]] + d.label_offset(c, role)) % N


def bracket_weight(d: KnotDiagram, c: int, labels, ctx: RootContext) -> complex:
    """<D|sigma>_c: the R (positive) or Rbar (negative) entry at crossing c."""
    R, Rb = r_tensors(ctx)
    v = {r: _slot_value(d, labels, c, r, ctx.N) for r in ("alpha", "beta", "gamma", "delta")}
    if d.sign[c] > 0:
        return complex(R[v["alpha"], v["beta"], v["gamma"], v["delta"]])
    return complex(Rb[v["beta"], v["alpha"], v["delta"], v["gamma"]])


def corner_values(d: KnotDiagram, c: int, labels, N: int) -> dict:
    """sigma(c, mu) for the four corners, keyed by corner name."""
    e = d.sign[c]
    a, b, g, dd = (_slot_value(d, labels, c, r, N) for r in ("alpha", "beta", "gamma", "delta"))
    return {"top": (e * (a - b)) % N, "bot": (e * (dd - g) - 1) % N,
            "bd": (e * (b - dd)) % N, "ga": (e * (g - a)) % N}


def boundary_prune(d: KnotDiagram, partial: dict, N: int) -> bool:
    """False when a partial labelling already violates the row/column sums."""
    n = d.n
    face_sum = [0] * (n + 2)
    face_known = [0] * (n + 2)
    for c in range(n):
        if not all(d.roles[c][r] in partial for r in CORNER_ROLES["top"] + CORNER_ROLES["bot"]):
            continue
        vals = corner_values(d, c, partial, N)
        if sum(vals.values()) != N - 1:
            return False
        for name, h in vals.items():
            f = d.corner_face(c, name)
            if f in (0, n + 1) and h != 0:
                return False
            face_sum[f] += h
            face_known[f] += 1
    corners = [0] * (n + 2)
    for c in range(n):
        for name in CORNER_ROLES:
            corners[d.corner_face(c, name)] += 1
    for f in range(1, n + 1):
        if face_sum[f] > N - 1:
            return False
        if face_known[f] == corners[f] and face_sum[f] != N - 1:
            return False
    return True


# ---------------------------------------------------------------- normalization

@dataclass(frozen=True)
class InvariantNormalization:
    writhe_phase: complex       # q^{w/2}
    framing_sign: int           # (-1)^w
    closure_factor: complex     # (-q^{1/2})^{s-1}
    scalar: float = 1.0         # 1/N on the reduced side
    maxima_correction: complex = 1.0
    bridge_phase: complex = 1.0

    @property
    def value(self) -> complex:
        return (self.writhe_phase * self.framing_sign * self.closure_factor * self.scalar
                * self.maxima_correction * self.bridge_phase)


def full_normalization(d: KnotDiagram, ctx: RootContext) -> InvariantNormalization:
    w = d.writhe
    return InvariantNormalization(ctx.q_half ** w, (-1) ** (w % 2), (-ctx.q_half) ** (d.strands - 1))


def reduced_normalization(g: ReducedGraph, ctx: RootContext) -> InvariantNormalization:
    d = g.diagram
    base = full_normalization(d, ctx)
    nmax = sum(1 for e in g.arc_edges if d.edges[e].wrap and d.edges[e].position != 0)
    bridge = complex(np.prod([ctx.qp(-d.sign[c]) for c in g.bp.over_bridge]))
    return InvariantNormalization(base.writhe_phase, base.framing_sign, base.closure_factor,
                                  1.0 / ctx.N, ctx.qp(-nmax), bridge)


# ---------------------------------------------------------------- factor networks

_MAX_INTERMEDIATE = 2 ** 24


def _contract(factors, nvars, N, threads=1, budget=DEFAULT_BUDGET):
    """Sum over all variable values of the product of factor tables.

    factors: list of (vars tuple, ndarray with one axis of length N per var).
    """
    if nvars > len(_LETTERS):
        raise BudgetError("too many summation variables for contraction")
    used = sorted({v for vs, _ in factors for v in vs})
    free = [v for v in range(nvars) if v not in used]
    scale = float(N) ** len(free)
    if not used:
        out = complex(np.prod([t for _, t in factors])) if factors else 1.0
        return out * scale
    ops, subs = [], []
    for vs, t in factors:
        ops.append(np.asarray(t, dtype=complex))
        subs.append("".join(_LETTERS[v] for v in vs))
    expr = ",".join(subs) + "->"
    # numpy caps intermediates at the largest input by default, which forces
    # a brute force sum on most diagrams
    path, info = np.einsum_path(expr, *ops, optimize=("greedy", _MAX_INTERMEDIATE))
    flops = float(info.split("Optimized FLOP count:")[1].split("\n")[0])
    if flops > budget:
        raise BudgetError(f"contraction needs about {flops:.3g} operations (budget {budget:.3g})")
    if threads <= 1:
        return complex(np.einsum(expr, *ops, optimize=path)) * scale
    # split on the first used variable; combine in fixed order
    v0 = _LETTERS[used[0]]

    def part(k):
        sl_ops, sl_subs = [], []
        for s_, op in zip(subs, ops):
            if v0 in s_:
                idx = tuple(k if ch == v0 else slice(None) for ch in s_)
                sl_ops.append(op[idx])
                sl_subs.append(s_.replace(v0, ""))
            else:
                sl_ops.append(op)
                sl_subs.append(s_)
        return complex(np.einsum(",".join(sl_subs) + "->", *sl_ops, optimize=("greedy", _MAX_INTERMEDIATE)))

    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(part, range(N)))
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts)) * scale


def _enumerate(factors, nvars, N, budget=DEFAULT_BUDGET, exact=False):
    """Backtracking over variables; each factor is checked once its last variable is set."""
    used = sorted({v for vs, _ in factors for v in vs})
    if float(N) ** len(used) > budget:
        raise BudgetError(f"enumeration needs up to {N}^{len(used)} states (budget {budget:.3g})")
    pos = {v: i for i, v in enumerate(used)}
    buckets = [[] for _ in used]
    const = 1.0 + 0j
    for vs, t in factors:
        if not vs:
            const *= complex(t)
            continue
        buckets[max(pos[v] for v in vs)].append((vs, t))
    vals = [0] * nvars
    if exact:
        import mpmath
        acc = [mpmath.mpc(0)]
    else:
        acc = [[], []]
    visited = [0]

    def rec(i, w):
        if i == len(used):
            if exact:
                acc[0] += w
            else:
                acc[0].append(w.real)
                acc[1].append(w.imag)
            return
        v = used[i]
        for x in range(N):
            vals[v] = x
            ww = w
            for vs, t in buckets[i]:
                f = t[tuple(vals[u] for u in vs)]
                if f == 0:
                    ww = 0
                    break
                ww = ww * f
            visited[0] += 1
            if ww != 0:
                rec(i + 1, ww)

    start = (__import__("mpmath").mpc(const) if exact else const)
    if const != 0:
        rec(0, start)
    free = nvars - len(used)
    if exact:
        return complex(acc[0]) * N ** free, visited[0]
    return complex(math.fsum(acc[0]), math.fsum(acc[1])) * N ** free, visited[0]


def _shifted(T, shifts):
    out = T
    for ax, s in enumerate(shifts):
        if s:
            out = np.roll(out, -s, axis=ax)
    return out


def full_factors(d: KnotDiagram, ctx: RootContext, prune: bool = False):
    """Factor tables of the full state sum; variables are diagram edges."""
    N = ctx.N
    R, Rb = r_tensors(ctx)
    factors = []
    for c in range(d.n):
        roles = d.roles[c]
        if d.sign[c] > 0:
            order, T = ("alpha", "beta", "gamma", "delta"), R
        else:
            order, T = ("beta", "alpha", "delta", "gamma"), Rb
        T = _shifted(T, [d.label_offset(c, r) for r in order])
        if prune:
            T = T * _boundary_mask(d, c, N, order)
        factors.append((tuple(roles[r] for r in order), T))
    base = np.zeros(N)
    base[0] = 1.0
    factors.append(((d.base_edge,), base))
    return _merge_repeats(factors, N)


def _boundary_mask(d, c, N, order):
    """1 where corners at faces 0, n+1 vanish (row sums are already in theta)."""
    idx = np.meshgrid(*(np.arange(N),) * 4, indexing="ij")
    lab = dict(zip(order, idx))
    lab = {r: (lab[r] + d.label_offset(c, r)) % N for r in lab}
    e = d.sign[c]
    h = {"top": (e * (lab["alpha"] - lab["beta"])) % N, "bot": (e * (lab["delta"] - lab["gamma"]) - 1) % N,
         "bd": (e * (lab["beta"] - lab["delta"])) % N, "ga": (e * (lab["gamma"] - lab["alpha"])) % N}
    mask = np.ones((N,) * 4)
    for name, hv in h.items():
        if d.corner_face(c, name) in (0, d.n + 1):
            mask = mask * (hv == 0)
    return mask


def _merge_repeats(factors, N):
    """Take diagonals where a factor lists the same variable twice."""
    out = []
    for vs, t in factors:
        while len(set(vs)) < len(vs):
            for i in range(len(vs)):
                for j in range(i + 1, len(vs)):
                    if vs[i] == vs[j]:
                        t = np.diagonal(t, axis1=i, axis2=j)
                        t = np.moveaxis(t, -1, 0)
                        vs = (vs[i],) + tuple(v for k, v in enumerate(vs) if k not in (i, j))
                        break
                else:
                    continue
                break
        out.append((vs, t))
    return out


def full_invariant(d: KnotDiagram, N: int, method: str = "contract", threads: int = 1,
                   budget: float = DEFAULT_BUDGET, prune: bool = True) -> complex:
    """<K>_N by the full state sum over all edge labellings."""
    ctx = RootContext(N)
    if N == 1:
        return 1.0 + 0j
    norm = full_normalization(d, ctx).value
    if method == "contract":
        s = _contract(full_factors(d, ctx), len(d.edges), N, threads, budget)
    elif method == "enumerate":
        s, _ = _enumerate(full_factors(d, ctx, prune=prune), len(d.edges), N, budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    return norm * s


# ---------------------------------------------------------------- reduced sum

def reduced_factors(g: ReducedGraph, ctx: RootContext, prune_boundary: bool = True, exact: bool = False):
    """Factor tables of the simple-state sum; variables are G-edges."""
    d, N = g.diagram, ctx.N
    arc = set(g.arc_edges)
    bp = g.bp
    if exact:
        import mpmath
        mp_q = lambda h: mpmath.expjpi(mpmath.mpf(2 * (h % N)) / N)

        def mp_fac(sign, h):
            out = mpmath.mpc(1)
            for t in range(1, h % N + 1):
                out *= 1 - mp_q(sign * t)
            return out
    factors = []
    for c in range(d.n):
        if c in bp.bridge_set:
            continue
        e = d.sign[c]
        keep = ("bot", "bd") if c == bp.x else ("top", "bd") if c == bp.y else ("top", "bot", "bd", "ga")
        zero = [k for k in keep if d.corner_face(c, k) in (0, d.n + 1)] if prune_boundary else []
        # each role: (variable or None, constant shift)
        slot_map = {}
        for r, de in d.roles[c].items():
            if de in arc:
                slot_map[r] = (None, 0)
            else:
                slot_map[r] = (_class_of(g, de), g.offsets[de] + d.label_offset(c, r))
        vars_ = tuple(sorted({v for v, _ in slot_map.values() if v is not None}))
        grids = np.meshgrid(*(np.arange(N),) * len(vars_), indexing="ij") if vars_ else []
        gv = dict(zip(vars_, grids))
        lab = {r: (gv[v] + s if v is not None else np.asarray(s)) for r, (v, s) in slot_map.items()}
        a, b, gg, dd = lab["alpha"], lab["beta"], lab["gamma"], lab["delta"]
        h = {"top": (e * (a - b)) % N, "bot": (e * (dd - gg) - 1) % N,
             "bd": (e * (b - dd)) % N, "ga": (e * (gg - a)) % N}
        es = {"top": e, "bot": e, "bd": -e, "ga": -e}
        tot = sum(h[k] for k in keep)
        ok = (tot == N - 1) if len(keep) == 4 else (tot <= N - 1)
        for k in zero:
            ok = ok & (h[k] == 0)
        if exact:
            shape = np.broadcast(*[np.asarray(x) for x in h.values()], np.asarray(a)).shape
            T = np.empty(shape, dtype=object)
            for ix in np.ndindex(*shape) if shape else [()]:
                if not np.asarray(ok)[ix] if np.ndim(ok) else not ok:
                    T[ix] = mpmath.mpc(0)
                    continue
                pick = lambda x: int(np.asarray(x)[ix]) if np.ndim(x) else int(x)
                den = mpmath.mpc(1)
                for k in keep:
                    den *= mp_fac(es[k], pick(h[k]))
                T[ix] = N * mp_q(pick(a) - pick(gg) - e) / den
        else:
            den = np.ones(np.shape(ok), dtype=complex)
            for k in keep:
                den = den * ctx.fac(es[k], h[k])
            T = np.where(ok, N * ctx.qp(a - gg - e) / den, 0)
        factors.append((vars_, T))
    return factors


def _class_of(g: ReducedGraph, de: int) -> int:
    if not hasattr(g, "_gid"):
        g._gid = {e: k for k, es in enumerate(g.edge_classes) for e in es}
    return g._gid[de]


def reduced_invariant(g: ReducedGraph, N: int, method: str = "contract", prune_boundary: bool = True,
                      threads: int = 1, budget: float = DEFAULT_BUDGET, precision: str = "std") -> complex:
    """<K>_N from the simple-state sum on G."""
    if N == 1:
        return 1.0 + 0j
    ctx = RootContext(N, precision)
    norm = reduced_normalization(g, ctx).value
    if precision == "dd":
        f = reduced_factors(g, ctx, prune_boundary, exact=True)
        s, _ = _enumerate(f, g.n_edges, N, budget, exact=True)
        return norm * s
    f = reduced_factors(g, ctx, prune_boundary)
    if method == "contract":
        s = _contract(f, g.n_edges, N, threads, budget)
    elif method == "enumerate":
        s, _ = _enumerate(f, g.n_edges, N, budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    return norm * s


def enumeration_size(g: ReducedGraph, N: int, prune_boundary: bool = True) -> int:
    """Number of partial assignments visited by the backtracking enumerator."""
    _, visited = _enumerate(reduced_factors(g, RootContext(N), prune_boundary), g.n_edges, N)
    return visited


def q_factor_census(g: ReducedGraph) -> dict:
    """Number of q-factorials per crossing in the reduced summand."""
    bp, d = g.bp, g.diagram
    out = {}
    for c in range(d.n):
        if c in bp.bridge_set:
            out[c] = 0
            continue
        keep = ("bot", "bd") if c == bp.x else ("top", "bd") if c == bp.y else ("top", "bot", "bd", "ga")
        # factorials at faces 0, n+1 are forced to (q)_0 = 1 and drop out
        out[c] = sum(1 for k in keep if d.corner_face(c, k) not in (0, d.n + 1))
    return out


def figure_eight_oracle(N: int) -> complex:
    """sum_k |(q)_k|^2 at q = exp(2 pi i/N)."""
    tot, p = [], 1.0
    for k in range(N):
        if k:
            p *= abs(2 * math.sin(math.pi * k / N))
        tot.append(p * p)
    return complex(math.fsum(tot), 0.0)
