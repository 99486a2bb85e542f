"""Invariant sequences and their exponential growth rate.

log |<K>_N| is fitted as a N + c, or a N + b log N + c, and 2 pi a is
compared with the hyperbolic volume.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .knot_diagram import KnotDiagram, ReducedGraph
from .state_sum import BudgetError, figure_eight_oracle, full_invariant, reduced_invariant

log = logging.getLogger(__name__)

MODELS = ("linear", "log-corrected")
METHODS = ("oracle", "reduced", "full")


class FitError(ValueError):
    reason = "fit_error"


@dataclass
class Sample:
    N: int
    value: complex

    @property
    def log_abs(self) -> float:
        return math.log(abs(self.value))


@dataclass
class Series:
    samples: list
    method: str
    truncated: bool = False
    note: str = ""

    @property
    def Ns(self):
        return [s.N for s in self.samples]

    def rows(self):
        """(N, re, im, log|.|) tuples for CSV output."""
        return [(s.N, s.value.real, s.value.imag, s.log_abs) for s in self.samples]


@dataclass
class GrowthFit:
    samples: list          # (N, log|<K>_N|) actually used
    model: str
    slope: float
    coefficients: list     # [a, c] or [a, b, c]
    residuals: list
    stderr: float          # standard error of 2 pi a
    window: tuple

    @property
    def vol_estimate(self) -> float:
        return 2 * math.pi * self.slope

    @property
    def confidence_width(self) -> float:
        """Two standard errors of the volume estimate."""
        return 2 * self.stderr

    @property
    def log_exponent(self):
        return self.coefficients[1] if self.model == "log-corrected" else None

    def to_dict(self) -> dict:
        return {"model": self.model, "slope": self.slope, "vol_estimate": self.vol_estimate,
                "confidence_width": self.confidence_width, "log_exponent": self.log_exponent,
                "coefficients": list(self.coefficients), "window": list(self.window),
                "max_abs_residual": max((abs(r) for r in self.residuals), default=0.0),
                "n_samples": len(self.samples)}


def oracle_applies(d: KnotDiagram) -> bool:
    """True when the diagram's own state sum matches the figure-eight oracle at N = 2, 3."""
    try:
        return all(abs(full_invariant(d, N) - figure_eight_oracle(N)) < 1e-8 for N in (2, 3))
    except BudgetError:
        return False


def invariant_series(Ns, method="reduced", d: KnotDiagram | None = None, g: ReducedGraph | None = None,
                     threads=1, budget=None) -> Series:
    """<K>_N for each N in Ns.

    The oracle is the closed form for 4_1; it is refused unless the given
    diagram (if any) matches it at N = 2 and 3.  If a state sum exceeds its
    budget the series stops there and is marked truncated.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    Ns = sorted(set(int(n) for n in Ns))
    if not Ns or Ns[0] < 1:
        raise ValueError("N values must be positive")
    if method == "oracle":
        if d is not None and not oracle_applies(d):
            raise ValueError("the closed-form oracle only applies to the figure-eight knot")
        return Series([Sample(N, figure_eight_oracle(N)) for N in Ns], method)
    kw = {"threads": threads}
    if budget is not None:
        kw["budget"] = budget
    out = []
    for N in Ns:
        try:
            if method == "reduced":
                if g is None:
                    raise ValueError("reduced method needs a reduced graph")
                v = reduced_invariant(g, N, **kw)
            else:
                if d is None:
                    raise ValueError("full method needs a diagram")
                v = full_invariant(d, N, **kw)
        except BudgetError as e:
            log.warning("series truncated at N=%d: %s", N, e)
            return Series(out, method, truncated=True, note=f"budget exceeded at N={N}")
        out.append(Sample(N, complex(v)))
    return Series(out, method)


def fit_growth(samples, model="log-corrected", window=None) -> GrowthFit:
    """Least squares fit of log|<K>_N|.

    `samples` is a Series, a list of Sample, or (N, log|.|) pairs.  The
    default window is the upper half of the available N.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    if isinstance(samples, Series):
        samples = samples.samples
    pts = [(s.N, s.log_abs) if isinstance(s, Sample) else (int(s[0]), float(s[1])) for s in samples]
    pts.sort()
    if any(a[0] >= b[0] for a, b in zip(pts, pts[1:])):
        raise FitError("N values must be strictly increasing")
    if window is None:
        lo = pts[len(pts) // 2][0] if pts else 0
        window = (lo, pts[-1][0] if pts else 0)
    pts = [p for p in pts if window[0] <= p[0] <= window[1]]
    if len(pts) < 4:
        raise FitError(f"need at least 4 samples in the window, have {len(pts)}")
    N = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    cols = [N, np.log(N), np.ones_like(N)] if model == "log-corrected" else [N, np.ones_like(N)]
    X = np.column_stack(cols)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise FitError("rank-deficient design")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ coef
    dof = len(y) - X.shape[1]
    s2 = float(res @ res) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(X.T @ X)
    stderr = 2 * math.pi * math.sqrt(max(cov[0, 0], 0.0))
    return GrowthFit(samples=pts, model=model, slope=float(coef[0]), coefficients=[float(c) for c in coef],
                     residuals=[float(r) for r in res], stderr=stderr, window=tuple(window))
