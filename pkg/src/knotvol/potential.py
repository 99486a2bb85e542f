"""The dilogarithm potential V(z) on the edges of G.

Unknowns are z(phi) for phi in E \\ F (z = 1 on F).  Internally the solver
works in u = log z, where z dV/dz is the natural gradient.

    V(z) = sum_t eps_t (Li2((z_phi/z_psi)^eps_t) - pi^2/6)
           - 2 pi i sum_phi eps(phi) log z(phi)
           + 2 pi i sum_phi k_phi log z(phi)        (branch offsets)
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .dilog import bloch_wigner, li2
from .knot_diagram import ReducedGraph

TWO_PI_I = 2j * math.pi


class SingularityError(ValueError):
    """A ratio hit 0, 1 or infinity."""

    reason = "singular"

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class PotentialError(ValueError):
    reason = "potential"


@dataclass(frozen=True)
class DilogTerm:
    nu: int
    mu: int
    phi: int
    psi: int
    eps: int


def wrap(x):
    """Reduce imaginary parts into [-pi, pi)."""
    x = np.asarray(x, dtype=complex)
    return x.real + 1j * ((x.imag + math.pi) % (2 * math.pi) - math.pi)


@dataclass
class PotentialFunction:
    graph: ReducedGraph
    terms: list
    free: list                     # G-edge ids of E \ F, in unknown order
    linear: dict                   # phi -> coefficient of log z(phi)
    offsets: dict = field(default_factory=dict)   # phi -> integer k

    def __post_init__(self):
        self._idx = {g: i for i, g in enumerate(self.free)}
        self._phi = np.array([t.phi for t in self.terms])
        self._psi = np.array([t.psi for t in self.terms])
        self._eps = np.array([t.eps for t in self.terms])
        nf = len(self.free)
        # incidence: +1 where the term's phi is unknown i, -1 for psi
        inc = np.zeros((len(self.terms), nf))
        for k, t in enumerate(self.terms):
            if t.phi in self._idx:
                inc[k, self._idx[t.phi]] += 1
            if t.psi in self._idx:
                inc[k, self._idx[t.psi]] -= 1
        self._inc = inc
        self._lin = np.array([self.linear.get(g, 0) for g in self.free], dtype=complex)

    # --- assignments ---------------------------------------------------
    @property
    def n_unknowns(self) -> int:
        return len(self.free)

    def full_z(self, z) -> np.ndarray:
        """Extend z on E \\ F to all of E with the value 1 on F."""
        z = np.asarray(z, dtype=complex)
        out = np.ones(self.graph.n_edges, dtype=complex)
        out[self.free] = z
        return out

    def ratios(self, z) -> np.ndarray:
        """Shapes z(phi)/z(psi), one per term."""
        zf = self.full_z(z)
        return zf[self._phi] / zf[self._psi]

    def _W(self, z):
        r = self.ratios(z)
        return np.where(self._eps > 0, r, 1 / r)

    def shapes(self, z) -> list:
        return [(t.nu, t.mu, complex(w)) for t, w in zip(self.terms, self.ratios(z))]

    def _check(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0) or not np.all(np.isfinite(z)):
            raise SingularityError("edge variable is zero or not finite")
        W = self._W(z)
        for t, w in zip(self.terms, W):
            if w == 1 or w == 0 or not cmath.isfinite(w):
                raise SingularityError(f"singular ratio at term (nu={t.nu}, mu={t.mu})", term=t)
        return W

    def _k(self):
        return np.array([self.offsets.get(g, 0) for g in self.free], dtype=float)

    # --- value and derivatives ----------------------------------------
    def value(self, z) -> complex:
        W = self._check(z)
        z = np.asarray(z, dtype=complex)
        v = sum(t.eps * (li2(w) - math.pi ** 2 / 6) for t, w in zip(self.terms, W))
        logs = np.log(z)
        v += np.sum((self._lin + TWO_PI_I * self._k()) * logs)
        return complex(v)

    def log_gradient(self, z) -> np.ndarray:
        """z(phi) dV/dz(phi) for phi in E \\ F."""
        W = self._check(z)
        g = -(np.log(1 - W)) @ self._inc
        return g + self._lin + TWO_PI_I * self._k()

    def gradient(self, z) -> np.ndarray:
        """dV/dz(phi) for phi in E \\ F."""
        return self.log_gradient(z) / np.asarray(z, dtype=complex)

    def log_hessian(self, z) -> np.ndarray:
        """d(z dV/dz)/d(log z)."""
        W = self._check(z)
        h = self._eps * W / (1 - W)
        return (self._inc * h[:, None]).T @ self._inc

    # --- batched forms for the solver -------------------------------------
    def batch_ratios(self, U) -> np.ndarray:
        """W = (z_phi/z_psi)^eps for a stack of log z rows, shape (S, terms)."""
        U = np.asarray(U, dtype=complex)
        Zf = np.ones((U.shape[0], self.graph.n_edges), dtype=complex)
        with np.errstate(all="ignore"):
            Zf[:, self.free] = np.exp(U)
            R = Zf[:, self._phi] / Zf[:, self._psi]
            return np.where(self._eps > 0, R, 1 / R)

    def batch_log_gradient(self, U):
        """(z dV/dz with offsets, W) per row; singular rows come back non-finite."""
        W = self.batch_ratios(U)
        with np.errstate(all="ignore"):
            g = -np.log(1 - W) @ self._inc
        return g + self._lin + TWO_PI_I * self._k(), W

    def batch_log_hessian(self, W) -> np.ndarray:
        with np.errstate(all="ignore"):
            h = self._eps * W / (1 - W)
        return np.einsum("tk,st,tl->skl", self._inc, h, self._inc)

    # --- relations -----------------------------------------------------
    def residual_system(self, z, printed: bool = False) -> np.ndarray:
        """log of the edge / cusp relation attached to each phi in E \\ F.

        Factors are 1 - z(e)/z(phi) where phi is over and 1 - z(phi)/z(e)
        where phi is under; the transversal edge on the left at the tail
        and on the right at the head go in the numerator.  Empty slots
        are deleted.  This orientation agrees with z dV/dz mod 2 pi i.
        With printed=True the relations of edges under at both ends are
        inverted (same equation, reciprocal ratio).
        """
        zf = self.graph_z(z)
        g = self.graph
        out = []
        for phi in self.free:
            zp = zf[phi]
            r = 0j
            for end, num_side in ((g.tails[phi], "left"), (g.heads[phi], "right")):
                for side in ("left", "right"):
                    e = getattr(end, side)
                    if e is None:
                        continue
                    x = zf[e] / zp if end.over else zp / zf[e]
                    if x == 1:
                        raise SingularityError(f"singular factor on edge {phi}")
                    r += (1 if side == num_side else -1) * cmath.log(1 - x)
            out.append(-r if printed and g.edge_class[phi] == -1 else r)
        return np.array(out)

    def graph_z(self, z):
        return self.full_z(z)

    def edge_relations(self, z) -> dict:
        """prod over surviving corners of each crossing of z(phi)/z(psi); should be 1."""
        bp = self.graph.bp
        prod = {}
        for t, w in zip(self.terms, self.ratios(z)):
            if t.nu in bp.bridge_set or t.nu in (bp.x, bp.y):
                continue
            prod[t.nu] = prod.get(t.nu, 1) * w
        return prod

    def face_relations(self, z) -> dict:
        """prod over faces in M_lambda of the corner shapes (diagnostic)."""
        r = self.ratios(z)
        out = {}
        for lam, faces in enumerate(self.graph.face_partition):
            fs = set(faces)
            p = 1 + 0j
            for t, w in zip(self.terms, r):
                if t.mu in fs:
                    p *= w
            out[lam] = p
        return out

    # --- branches and volume -------------------------------------------
    def set_branch(self, z):
        """Choose offsets k so that z dV0/dz has no 2 pi i part at z."""
        self.offsets = {}
        g = self.log_gradient(z)
        self.offsets = {phi: -int(round(g[i].imag / (2 * math.pi))) for i, phi in enumerate(self.free)}
        return dict(self.offsets)

    def volume_terms(self, z) -> list:
        return [bloch_wigner(w) for w in self.ratios(z)]

    def im_decomposition(self, z):
        """(Im V0, sum D(shapes), sum log|z| Im(z dV0/dz)); the first equals the sum of the others."""
        z = np.asarray(z, dtype=complex)
        v = self.value(z).imag
        dsum = math.fsum(self.volume_terms(z))
        corr = float(np.sum(np.log(np.abs(z)) * self.log_gradient(z).imag))
        return v, dsum, corr

    def to_dict(self) -> dict:
        return {
            "schema": "knotvol.potential/1",
            "unknowns": list(self.free),
            "fixed_to_one": sorted(self.graph.boundary_edges),
            "terms": [{"nu": t.nu, "mu": t.mu, "phi": t.phi, "psi": t.psi, "eps": t.eps,
                       "expr": f"{t.eps:+d}*(Li2((z{t.phi}/z{t.psi})^{t.eps:+d}) - pi^2/6)"} for t in self.terms],
            "linear": [{"phi": g, "coefficient_over_2pi_i": int(round((self.linear.get(g, 0) / TWO_PI_I).real))}
                       for g in self.free],
            "branch_offsets": {str(k): v for k, v in sorted(self.offsets.items())},
        }


def build_potential(g: ReducedGraph) -> PotentialFunction:
    if not g.census:
        raise PotentialError("empty census: no dilogarithm terms")
    terms = [DilogTerm(t.nu, t.mu, t.phi, t.psi, t.eps) for t in g.census]
    free = g.free_edges
    linear = {phi: -TWO_PI_I * g.edge_class[phi] for phi in free}
    housed = {t.phi for t in terms} | {t.psi for t in terms}
    for phi in free:
        if phi not in housed and g.edge_class[phi] == 0:
            raise PotentialError(f"edge {phi} appears in no term")
    return PotentialFunction(graph=g, terms=terms, free=free, linear=linear)
