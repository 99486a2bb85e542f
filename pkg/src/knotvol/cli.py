"""Command line entry point: ``knotvol <subcommand> --input ...``.

Exit codes: 0 success, 2 invalid input, 3 no solution / budget exceeded,
1 failed self test.  Errors are printed to stderr as JSON with a
``reason`` field.
"""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .asymptotics import FitError, MODELS, fit_growth, invariant_series, oracle_applies
from .knot_diagram import (CensusError, DiagramError, KnotDiagram, format_word, parse_braid, parse_pd,
                           pd_to_braid, reduce_diagram)
from .potential import PotentialError, SingularityError, build_potential
from .q_arith import PRECISIONS, RootContext, summation_identities
from .solver import SEED, RESTARTS, NotFound, competitor_scan, solve_knot
from .state_sum import BudgetError, PrecisionError, full_invariant, reduced_invariant

THREADS_ENV = "KNOTVOL_THREADS"
EXIT_INPUT, EXIT_SOLVE = 2, 3


# ---------------------------------------------------------------- output

def _fmt(x) -> str:
    """JSON text with floats at 17 significant digits."""
    if isinstance(x, (bool, np.bool_)) or x is None:
        return json.dumps(bool(x) if x is not None else None)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(x, complex):
        return _fmt({"re": x.real, "im": x.imag})
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj: dict) -> str:
    return _fmt(obj) + "\n"


def _emit(payload: dict, schema: str, output: str | None):
    doc = {"schema": schema, "version": __version__}
    doc.update(payload)
    doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    text = dumps(doc)
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


class Failure(Exception):
    def __init__(self, code, reason, message, extra=None):
        super().__init__(message)
        self.code, self.reason, self.extra = code, reason, extra or {}


def _guard(fn):
    """Map library errors to exit codes with a JSON message on stderr."""
    def wrapper(*a, **kw):
        try:
            return fn(*a, **kw)
        except Failure as f:
            err = {"reason": f.reason, "message": str(f)} | f.extra
        except (DiagramError, FitError, PotentialError, ValueError) as e:
            err = {"reason": getattr(e, "reason", "invalid"), "message": str(e)}
            f = Failure(EXIT_INPUT, "", "")
        except (NotFound, BudgetError, PrecisionError, CensusError, SingularityError) as e:
            err = {"reason": getattr(e, "reason", "solve"), "message": str(e)}
            if isinstance(e, NotFound):
                err["candidates"] = e.candidates[:20]
            f = Failure(EXIT_SOLVE, "", "")
        click.echo(dumps({"schema": "knotvol.error/1", "error": err}), err=True, nl=False)
        sys.exit(f.code)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------- input

def read_input(text: str) -> tuple[list[int], str]:
    """Braid word from a word, a PD code, or a file containing either (or diagram JSON)."""
    kind = "braid"
    p = Path(text)
    if len(text) < 4096 and p.is_file():
        text = p.read_text()
    t = text.strip()
    if t.startswith("{"):
        d = KnotDiagram.from_json(t)
        return list(d.word), "diagram-json"
    if t.upper().startswith(("PD", "X[")) or t.startswith(("[[", "[(")):
        return pd_to_braid(parse_pd(t)), "pd"
    d = parse_braid(t)
    return list(d.word), kind


def _meta(word, d, bp, info):
    meta = {"word": format_word(d.word), "base_point": bp.to_dict()}
    if info:
        meta["rewritten_from"] = format_word(word)
        meta["rewrite"] = {k: (format_word(v) if k.endswith("word") or k == "conjugator" else v)
                           for k, v in info.items()}
    return meta


def _reduced(word, rewrite):
    d, bp, g, info = reduce_diagram(word, rewrite=rewrite)
    return d, bp, g, _meta(word, d, bp, info)


def _n_values(N, n_range):
    if N is not None and n_range:
        raise click.BadParameter("give either --N or --N-range")
    if n_range:
        try:
            a, b = (int(x) for x in n_range.replace("..", ":").split(":"))
        except ValueError:
            raise click.BadParameter("--N-range must look like 2..10") from None
        if a < 1 or b < a:
            raise click.BadParameter("--N-range must be increasing and positive")
        return list(range(a, b + 1))
    if N is None:
        raise click.BadParameter("--N or --N-range is required")
    if N < 1:
        raise click.BadParameter("--N must be positive")
    return [N]


def _threads_default():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


_input = click.option("--input", "input_", required=True, help="Braid word (e.g. 's1 -s2 s1 -s2'), PD code, or a file.")
_output = click.option("--output", "-o", default=None, help="Write JSON here instead of stdout.")
_threads = click.option("--threads", type=click.IntRange(1), default=_threads_default, show_default=f"${THREADS_ENV} or 1")
_rewrite = click.option("--rewrite/--no-rewrite", default=True, show_default=True,
                        help="Search equivalent braids when the word has no admissible base point.")
_seed = click.option("--seed", type=int, default=SEED, show_default=True)
_restarts = click.option("--restarts", type=click.IntRange(1), default=RESTARTS, show_default=True)
_tol = click.option("--tol", type=float, default=1e-12, show_default=True)
_presentations = click.option("--max-presentations", type=click.IntRange(1), default=32, show_default=True,
                              help="With --rewrite, equivalent braids to try when a diagram has no geometric point.")


# ---------------------------------------------------------------- commands

@click.group()
@click.version_option(__version__)
def main():
    """Quantum invariants, potential functions and hyperbolic volumes of knots."""


@main.command()
@_input
@click.option("--N", "N", type=int, default=None)
@click.option("--N-range", "n_range", default=None, help="Inclusive range such as 2..10.")
@click.option("--method", type=click.Choice(["reduced", "full", "oracle"]), default="reduced", show_default=True)
@click.option("--engine", type=click.Choice(["contract", "enumerate"]), default="contract", show_default=True)
@click.option("--precision", type=click.Choice(PRECISIONS), default="std", show_default=True)
@_rewrite
@_threads
@_output
@_guard
def invariant(input_, N, n_range, method, engine, precision, rewrite, threads, output):
    """<K>_N at q = exp(2 pi i / N)."""
    Ns = _n_values(N, n_range)
    word, kind = read_input(input_)
    meta = {"input": input_, "input_kind": kind, "method": method}
    rows = []
    if method == "reduced":
        d, bp, g, m = _reduced(word, rewrite)
        meta.update(m)
        for n in Ns:
            t = time.perf_counter()
            v = reduced_invariant(g, n, method=engine, threads=threads, precision=precision)
            rows.append((n, v, time.perf_counter() - t))
    else:
        d = parse_braid(word)
        d.validate()
        meta["word"] = format_word(d.word)
        if method == "oracle" and not oracle_applies(d):
            raise ValueError("the closed-form oracle only applies to the figure-eight knot")
        for n in Ns:
            t = time.perf_counter()
            if method == "full":
                v = full_invariant(d, n, method=engine, threads=threads)
            else:
                v = invariant_series([n], "oracle").samples[0].value
            rows.append((n, v, time.perf_counter() - t))
    meta["values"] = [{"N": n, "re": v.real, "im": v.imag, "abs": abs(v)} for n, v, _ in rows]
    if len(rows) == 1:
        meta["value"] = rows[0][1].real if abs(rows[0][1].imag) < 1e-9 * max(1, abs(rows[0][1])) else rows[0][1]
    _emit(meta, "knotvol.invariant/1", output)


def _solve(input_, rewrite, restarts, seed, tol, threads, max_presentations):
    word, kind = read_input(input_)
    d, bp, g, V, sol, info = solve_knot(word, rewrite=rewrite, max_presentations=max_presentations,
                                        restarts=restarts, seed=seed, tol=tol, threads=threads)
    meta = {"input": input_, "input_kind": kind} | _meta(word, d, bp, info)
    return d, g, V, sol, meta


@main.command()
@_input
@_tol
@_restarts
@_seed
@click.option("--scan", type=click.IntRange(0), default=0, help="Extra competitor scan with this many seeds.")
@_rewrite
@_presentations
@_threads
@_output
@_guard
def volume(input_, tol, restarts, seed, scan, rewrite, max_presentations, threads, output):
    """Hyperbolic volume from the geometric critical point."""
    _, _, V, sol, meta = _solve(input_, rewrite, restarts, seed, tol, threads, max_presentations)
    meta.update({"volume": sol.volume, "im_v0": sol.im_v, "residual": sol.residual_norm,
                 "newton_iterations": sol.iterations, "all_shapes_positive": sol.all_positive,
                 "shapes": [{"nu": nu, "mu": mu, "re": s.real, "im": s.imag} for nu, mu, s in sol.shapes],
                 "competitors": sol.competitors[:20]})
    if scan:
        meta["scan"] = [{k: v for k, v in c.items() if k != "shapes"} for c in competitor_scan(V, scan, threads=threads)]
    _emit(meta, "knotvol.volume/1", output)


@main.command()
@_input
@_tol
@_restarts
@_seed
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@_rewrite
@_presentations
@_threads
@_output
@_guard
def shapes(input_, tol, restarts, seed, fmt, rewrite, max_presentations, threads, output):
    """Shape parameters z(phi)/z(psi) at the geometric point."""
    _, _, V, sol, meta = _solve(input_, rewrite, restarts, seed, tol, threads, max_presentations)
    terms = V.terms
    rows = [{"nu": t.nu, "mu": t.mu, "phi": t.phi, "psi": t.psi, "eps": t.eps, "re": s.real, "im": s.imag}
            for t, (_, _, s) in zip(terms, sol.shapes)]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nu", "mu", "phi", "psi", "eps", "re", "im"])
        for r in rows:
            w.writerow([r["nu"], r["mu"], r["phi"], r["psi"], r["eps"], format(r["re"], ".17g"), format(r["im"], ".17g")])
        if output:
            Path(output).write_text(buf.getvalue())
        else:
            click.echo(buf.getvalue(), nl=False)
        return
    meta.update({"volume": sol.volume, "shapes": rows,
                 "z0": [{"phi": phi, "re": z.real, "im": z.imag} for phi, z in zip(V.free, sol.z0)]})
    _emit(meta, "knotvol.shapes/1", output)


@main.command("emit-potential")
@_input
@_rewrite
@_output
@_guard
def emit_potential(input_, rewrite, output):
    """Term list of the potential function."""
    word, kind = read_input(input_)
    d, bp, g, meta = _reduced(word, rewrite)
    V = build_potential(g)
    meta = {"input": input_, "input_kind": kind} | meta
    meta["graph"] = {"m": g.m, "n_edges": g.n_edges, "boundary_edges": sorted(g.boundary_edges)}
    meta["potential"] = {k: v for k, v in V.to_dict().items() if k != "schema"}
    _emit(meta, "knotvol.potential/1", output)


@main.command()
@_input
@click.option("--n-min", type=click.IntRange(1), default=2, show_default=True)
@click.option("--n-max", type=click.IntRange(2), required=True)
@click.option("--model", type=click.Choice(MODELS), default="log-corrected", show_default=True)
@click.option("--method", type=click.Choice(["auto", "oracle", "reduced", "full"]), default="auto", show_default=True,
              help="auto uses the closed form when the diagram is the figure-eight knot.")
@click.option("--csv", "csv_path", default=None, help="Write the samples here as CSV.")
@_restarts
@_seed
@_rewrite
@_presentations
@_threads
@_output
@_guard
def verify(input_, n_min, n_max, model, method, csv_path, restarts, seed, rewrite, max_presentations, threads, output):
    """Fit the growth of |<K>_N| and compare with the volume."""
    d, g, V, sol, meta = _solve(input_, rewrite, restarts, seed, 1e-12, threads, max_presentations)
    if method == "auto":
        method = "oracle" if oracle_applies(d) else "reduced"
    series = invariant_series(range(n_min, n_max + 1), method, d=d, g=g, threads=threads)
    fit = fit_growth(series, model)
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "re", "im", "log_abs"])
            for n, re_, im_, la in series.rows():
                w.writerow([n, format(re_, ".17g"), format(im_, ".17g"), format(la, ".17g")])
    meta.update({"method": method, "truncated": series.truncated, "fit": fit.to_dict(),
                 "volume": sol.volume, "ratio": fit.vol_estimate / sol.volume,
                 "samples": [{"N": s.N, "log_abs": s.log_abs} for s in series.samples]})
    if series.note:
        meta["note"] = series.note
    _emit(meta, "knotvol.verify/1", output)


@main.command()
@click.option("--n", "n_values", default="2..7", show_default=True, help="Range of N for the summation identities.")
@click.option("--tol", type=float, default=1e-9, show_default=True)
@_output
def selftest(n_values, tol, output):
    """Check the R-matrix summation identities exhaustively."""
    Ns = _n_values(None, n_values)
    t = time.perf_counter()
    res = [summation_identities(RootContext(n)) for n in Ns]
    worst = max(r["max_dev"] for r in res)
    ok = worst < tol
    payload = {"identities": [{"N": r["N"], "max_dev": r["max_dev"], "per_identity": r["per_identity"]} for r in res],
               "max_dev": worst, "tolerance": tol, "passed": ok, "seconds": time.perf_counter() - t}
    _emit(payload, "knotvol.selftest/1", output)
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
