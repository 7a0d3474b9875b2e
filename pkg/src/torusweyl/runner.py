"""Cache-aware spectrum computation and the tables behind the CLI commands."""

from __future__ import annotations

import math

import numpy as np

from . import semiclassics as sc
from .eigensolve import eigendecompose, solver_tag
from .errors import DomainError
from .io import cache_key
from .lattice import LatticeGeometry, make_geometry
from .stats import HistogramSpec, default_bins, dk_estimate, histogram
from .symbols import assemble


def compute_spectrum(geom: LatticeGeometry, symbol="h", route="appendixB", cache=None,
                     want_vectors=True, backend=None):
    """Assemble and diagonalise, consulting ``cache`` (a :class:`SpectrumCache`) when given.

    Returns ``(record, from_cache)``.
    """
    def compute():
        op = assemble(geom, symbol, route)
        return eigendecompose(op, want_vectors=want_vectors, backend=backend, symbol=symbol)

    if cache is None:
        return compute(), False
    key = cache_key(geom, f"{route}/{'vec' if want_vectors else 'val'}", symbol, solver_tag(backend))
    return cache.get_or_compute(key, compute)


def histogram_table(rec, bins=None, e_min=None, e_max=None):
    """Rows ``(bin_center, density, semiclassical_d)`` for an ``op_N(h)`` spectrum."""
    geom = rec.geometry
    lo = -geom.ell_x**2 / 8 if e_min is None else e_min
    hi = geom.ell_xi**2 / 8 if e_max is None else e_max
    spec = HistogramSpec(lo, hi, bins or default_bins(geom.N))
    centers, dens = histogram(rec, spec)
    rows = []
    for c, d in zip(centers, dens):
        if sc.classify_surface(geom, c).orbit_count == 0:
            pred = 0.0
        else:
            pred = sc.local_density(geom, c)
        rows.append((float(c), float(d), float(pred)))
    return rows


def sweep_values(N_min, N_max, step):
    if step < 1 or N_max < N_min:
        raise DomainError(f"bad sweep range {N_min}..{N_max} step {step}")
    return list(range(N_min, N_max + 1, step))


def density_sweep(N_values, K, cache=None, hbar=1.0, backend=None, want_vectors=True, summary_from=500):
    """One row ``(N, E, d_K, mean_density, rel_dev)`` per ``N`` plus summary statistics.

    ``E = pi sqrt(2N) - 2 pi`` and ``ell_x = ell_xi = sqrt(2 pi N)`` (``hbar = 1``).
    """
    if hbar != 1:
        raise DomainError("the density sweep is defined in units with hbar = 1")
    rows = []
    for N in N_values:
        if N < 10 * K:
            raise DomainError(f"N={N} is below 10K={10 * K}")
        geom = make_geometry(N, hbar=hbar)
        rec, _ = compute_spectrum(geom, "h", "appendixB", cache, want_vectors, backend)
        E = sc.energy_of_N(N)
        dk = dk_estimate(rec, E, K)
        dbar = sc.mean_density(E)
        rows.append((N, E, dk, dbar, abs(dk - dbar) / dbar))
    tail = [r[4] for r in rows if r[0] >= summary_from]
    summary = {
        "mean_rel_dev": float(np.mean([r[4] for r in rows])) if rows else math.nan,
        f"mean_rel_dev_N>={summary_from}": float(np.mean(tail)) if tail else math.nan,
    }
    return rows, summary
