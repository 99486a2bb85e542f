"""Critical points of the potential and selection of the geometric one.

Newton iteration runs in u = log z on the relations z dV/dz = 0 taken
modulo 2 pi i, so it never has to track branches.  Once converged the
branch offsets of V are fixed so that z dV0/dz vanishes exactly, and
Im V0 then equals the sum of Bloch-Wigner values of the shapes.

All seeds are iterated together as one stacked array; a run that stalls
or drifts towards a degenerate limit simply drops out.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .knot_diagram import reduce_diagram, valid_presentations
from .potential import PotentialFunction, build_potential, wrap

SEED = 20240607
RESTARTS = 4096

# a critical point is nondegenerate when every shape stays this far from 0, 1, oo
DEGENERACY_TOL = 1e-6


class NotFound(RuntimeError):
    """No nondegenerate critical point with positive volume was reached."""

    reason = "not_found"

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


@dataclass
class CriticalPoint:
    z: np.ndarray
    shapes: np.ndarray
    im_v: float
    volume: float
    residual_norm: float
    iterations: int
    offsets: dict = field(default_factory=dict)
    hits: int = 1

    @property
    def nondegenerate(self) -> bool:
        s = self.shapes
        a = np.abs(s)
        return bool(np.all(a > DEGENERACY_TOL) and np.all(a < 1 / DEGENERACY_TOL)
                    and np.all(np.abs(1 - s) > DEGENERACY_TOL))

    @property
    def flat(self) -> bool:
        return bool(np.all(np.abs(self.shapes.imag) <= 1e-10))

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.shapes.imag > 1e-10))

    @property
    def all_positive(self) -> bool:
        return self.n_positive == len(self.shapes)

    def key(self):
        # degenerate limits differ only in how far out they stopped
        s = np.round(self.shapes, 6)
        a = np.abs(self.shapes)
        s = np.where(a > 1 / DEGENERACY_TOL, np.inf, np.where(a < DEGENERACY_TOL, 0, s))
        return tuple(s)

    def summary(self) -> dict:
        return {"im_v": self.im_v, "volume": self.volume, "nondegenerate": self.nondegenerate,
                "flat": self.flat, "positive_shapes": self.n_positive, "n_shapes": len(self.shapes),
                "residual_norm": self.residual_norm, "hits": self.hits}


@dataclass
class GeometricSolution:
    z0: np.ndarray
    shapes: list           # (nu, mu, shape)
    volume: float
    im_v: float
    residual_norm: float
    iterations: int
    all_positive: bool
    offsets: dict
    seeds_used: int = 0
    competitors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "volume": self.volume,
            "im_v0": self.im_v,
            "residual_norm": self.residual_norm,
            "newton_iterations": self.iterations,
            "all_shapes_positive": self.all_positive,
            "seeds_used": self.seeds_used,
            "z0": [[c.real, c.imag] for c in self.z0],
            "shapes": [{"nu": nu, "mu": mu, "re": s.real, "im": s.imag} for nu, mu, s in self.shapes],
            "branch_offsets": {str(k): v for k, v in sorted(self.offsets.items())},
        }


def _residual(V: PotentialFunction, U):
    g, W = V.batch_log_gradient(U)
    return wrap(g), W


def batch_newton(V: PotentialFunction, U0, tol=1e-12, max_iter=100, far=60.0):
    """Damped Newton on every row of U0 (log z seeds) at once.

    Returns (U, residual norms, iterations, converged mask).  A row stops
    when the halving line search fails, when it hits a singular ratio, or
    when |Re u| exceeds `far` (heading for a degenerate limit).
    """
    U = np.array(U0, dtype=complex, ndmin=2)
    S = U.shape[0]
    r, W = _residual(V, U)
    nr = np.linalg.norm(r, axis=1)
    nr[~np.isfinite(nr)] = np.inf
    active = np.isfinite(nr)
    done = np.zeros(S, dtype=bool)
    its = np.zeros(S, dtype=int)
    for _ in range(max_iter):
        conv = active & (nr < tol)
        done |= conv
        active &= ~conv
        if not active.any():
            break
        idx = np.flatnonzero(active)
        H = V.batch_log_hessian(W[idx])
        try:
            step = -np.linalg.solve(H, r[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = -np.einsum("skl,sl->sk", np.linalg.pinv(H), r[idx])
        lam = np.ones(len(idx))
        acc = np.zeros(len(idx), dtype=bool)
        Un, rn, Wn, nn = U[idx].copy(), r[idx].copy(), W[idx].copy(), nr[idx].copy()
        for _ in range(14):
            todo = np.flatnonzero(~acc)
            if len(todo) == 0:
                break
            cand = U[idx[todo]] + lam[todo, None] * step[todo]
            rc, Wc = _residual(V, cand)
            nc = np.linalg.norm(rc, axis=1)
            ok = np.isfinite(nc) & (nc < nr[idx[todo]] * (1 - 1e-4 * lam[todo]))
            a = todo[ok]
            Un[a], rn[a], Wn[a], nn[a] = cand[ok], rc[ok], Wc[ok], nc[ok]
            acc[a] = True
            lam[todo[~ok]] /= 2
        U[idx], r[idx], W[idx], nr[idx] = Un, rn, Wn, nn
        its[idx] += 1
        active[idx[~acc | (np.max(np.abs(Un.real), axis=1) > far)]] = False
    done |= active & (nr < tol)
    return U, nr, its, done


def newton(V: PotentialFunction, u0, tol=1e-12, max_iter=100, far=60.0):
    """Single seed.  Returns (u, residual norm, iterations) or None."""
    U, nr, its, done = batch_newton(V, [u0], tol, max_iter, far)
    return (U[0], float(nr[0]), int(its[0])) if done[0] else None


def fit_shapes(V: PotentialFunction, log_targets) -> np.ndarray:
    """Least squares log z with log(z(phi)/z(psi)) close to the targets."""
    # _inc holds +1 at phi and -1 at psi, so A u = log of the shapes
    return np.linalg.lstsq(V._inc.astype(complex), np.asarray(log_targets, dtype=complex), rcond=None)[0]


def initial_guess(V: PotentialFunction) -> np.ndarray:
    """Every shape close to exp(i pi/3)."""
    return fit_shapes(V, np.full(len(V.terms), 1j * math.pi / 3))


def random_guess(V: PotentialFunction, rng) -> np.ndarray:
    """Uniform on the annulus 0.5 < |z| < 2 with uniform phase."""
    n = V.n_unknowns
    r = rng.uniform(math.log(0.5), math.log(2.0), n)
    th = rng.uniform(-math.pi, math.pi, n)
    return r + 1j * th


def random_fit_guess(V: PotentialFunction, rng) -> np.ndarray:
    """Fit to random target shapes in the upper half plane."""
    T = len(V.terms)
    return fit_shapes(V, rng.normal(0, 0.5, T) + 1j * rng.uniform(0, math.pi, T))


def seeds(V: PotentialFunction, count: int, seed=SEED) -> np.ndarray:
    """The prefit seed, then annulus and upper-half-plane fits alternately."""
    rng = np.random.default_rng(seed)
    rows = [initial_guess(V)]
    for i in range(count - 1):
        rows.append(random_guess(V, rng) if i % 2 == 0 else random_fit_guess(V, rng))
    return np.array(rows[:max(count, 0)], dtype=complex).reshape(-1, V.n_unknowns)


def finish(V: PotentialFunction, u, nr, its) -> CriticalPoint:
    z = np.exp(u)
    offsets = V.set_branch(z)
    shapes = V.ratios(z)
    im_v = V.value(z).imag
    vol = math.fsum(V.volume_terms(z))
    return CriticalPoint(z=z, shapes=shapes, im_v=im_v, volume=vol, residual_norm=float(nr),
                         iterations=int(its), offsets=offsets)


def critical_points(V: PotentialFunction, restarts=RESTARTS, seed=SEED, tol=1e-12, max_iter=100,
                    far=60.0, threads=1) -> list:
    """Distinct converged points from `restarts` seeds, largest Im V0 first.

    Degenerate limits are included (nondegenerate=False).
    """
    U0 = seeds(V, restarts, seed)
    chunks = np.array_split(U0, max(1, min(threads, len(U0)))) if len(U0) else []
    run = lambda c: batch_newton(V, c, tol, max_iter, far)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    found: dict = {}
    saved = dict(V.offsets)
    for U, nr, its, done in results:
        for i in np.flatnonzero(done):
            cp = finish(V, U[i], nr[i], its[i])
            k = cp.key()
            if k in found:
                found[k].hits += 1
            else:
                found[k] = cp
    V.offsets = saved
    return sorted(found.values(), key=lambda c: -c.im_v)


def select_geometric(points) -> CriticalPoint | None:
    """Nondegenerate critical point with the largest Im V0."""
    good = [p for p in points if p.nondegenerate and p.volume > 1e-9]
    return max(good, key=lambda p: p.im_v) if good else None


def newton_solve(V: PotentialFunction, restarts=RESTARTS, seed=SEED, tol=1e-12, max_iter=100,
                 far=6.0, threads=1) -> GeometricSolution:
    """Geometric critical point: nondegenerate with the largest Im V0.

    Leaves V on the branch (offsets) of the returned point.
    """
    pts = critical_points(V, restarts, seed, tol, max_iter, far, threads)
    best = select_geometric(pts)
    if best is None:
        raise NotFound(f"no nondegenerate critical point with positive volume from {restarts} seeds",
                       candidates=[p.summary() for p in pts])
    V.set_branch(best.z)
    shapes = [(t.nu, t.mu, complex(s)) for t, s in zip(V.terms, best.shapes)]
    return GeometricSolution(z0=best.z, shapes=shapes, volume=best.volume, im_v=best.im_v,
                             residual_norm=best.residual_norm, iterations=best.iterations,
                             all_positive=best.all_positive, offsets=dict(best.offsets),
                             seeds_used=restarts, competitors=[p.summary() for p in pts if p is not best])


def solve_knot(word, rewrite=True, max_presentations=32, **kw):
    """Geometric solution for the closure of a braid word.

    On some diagrams the potential has no nondegenerate critical point of
    positive volume.  With rewrite=True, equivalent presentations are then
    tried in search order, at most `max_presentations` of them.  Returns
    (d, bp, g, V, solution, info); info is None when the given word was
    used as is, else it records the rewrite and the number of words tried.
    """
    d, bp, g, info = reduce_diagram(word, rewrite=rewrite)
    V = build_potential(g)
    try:
        return d, bp, g, V, newton_solve(V, **kw), info
    except NotFound as err:
        if not rewrite:
            raise
        first = err
    tried = {tuple(d.word)}
    for w, winfo in valid_presentations(d.word if info is None else word):
        if len(tried) >= max_presentations:
            break
        if tuple(w) in tried:
            continue
        tried.add(tuple(w))
        d, bp, g, _ = reduce_diagram(w)
        V = build_potential(g)
        try:
            sol = newton_solve(V, **kw)
        except NotFound:
            continue
        return d, bp, g, V, sol, winfo | {"presentations_tried": len(tried)}
    raise NotFound(f"{first} on any of {len(tried)} equivalent presentations", first.candidates)


def competitor_scan(V: PotentialFunction, samples=200, seed=SEED + 1, tol=1e-12, threads=1) -> list:
    """Distinct critical points from many random starts, largest Im V0 first.

    Degenerate limits (a shape at 0, 1 or infinity) are kept and flagged
    with nondegenerate=False; they are not critical points of V proper.
    """
    pts = critical_points(V, restarts=samples, seed=seed, tol=tol, threads=threads)
    return [p.summary() | {"shapes": [[s.real, s.imag] for s in p.shapes]} for p in pts]
