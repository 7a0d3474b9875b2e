"""Invariant checks run by ``torusweyl selftest`` at small N."""

from __future__ import annotations

import math

import numpy as np

from . import semiclassics as sc
from .eigensolve import eigendecompose
from .lattice import (
    StateVector,
    dft_matrix,
    fold_symbol,
    make_geometry,
    parity,
    translation_matrix,
    weyl_quantize,
)
from .stats import dk_estimate, local_count, symmetry_defect
from .symbols import (
    a_fourier_coefficients,
    alias_sum_fold,
    analytic_spectrum_a,
    assemble,
    assemble_appendixB,
    assemble_finite_sum,
    folded_gm0,
    operator_bounds,
)


def _max_rel(a, b):
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def check_translations():
    worst = 0.0
    for N in (1, 2, 3, 5, 8):
        geom = make_geometry(N)
        for m in range(-N, N + 1):
            for n in range(-N, N + 1):
                U = translation_matrix(geom, (m, n)).matrix
                worst = max(worst, float(np.max(np.abs(U.conj().T @ U - np.eye(N)))))
                comp = np.exp(1j * np.pi * m * n / N) * (
                    translation_matrix(geom, (m, 0)).matrix @ translation_matrix(geom, (0, n)).matrix)
                worst = max(worst, float(np.max(np.abs(U - comp))))
                for mu in (-1, 1):
                    for nu in (-1, 1):
                        V = translation_matrix(geom, (m + mu * N, n + nu * N)).matrix
                        sign = (-1) ** ((m * nu + n * mu + mu * nu * N) % 2)
                        worst = max(worst, float(np.max(np.abs(V - sign * U))))
    return worst <= 1e-12, f"max defect {worst:.2e}"


def check_dft():
    worst = 0.0
    for N in (1, 2, 3, 4, 7, 8):
        geom = make_geometry(N)
        F = dft_matrix(geom).matrix
        Finv = F.conj().T
        for m in range(N):
            lhs = Finv @ translation_matrix(geom, (m, 0)).matrix @ F
            worst = max(worst, float(np.max(np.abs(lhs - translation_matrix(geom, (0, m)).matrix))))
        psi = StateVector(np.arange(1, N + 1) + 0.5j)
        worst = max(worst, float(np.max(np.abs(F @ F @ psi.entries - parity(psi).entries))))
        a = assemble(geom, "a").matrix
        b = assemble(geom, "b").matrix
        worst = max(worst, _max_rel(Finv @ a @ F, b))
    return worst <= 1e-12, f"max defect {worst:.2e}"


def check_representations(perturb=False):
    worst = 0.0
    for N in range(2, 33):
        geom = make_geometry(N)
        A = assemble_appendixB(geom).matrix.real.copy()
        if perturb and N == 8:
            A[0, 1] *= 1 + 1e-6
            A[1, 0] = A[0, 1]
        B = assemble_finite_sum(geom).matrix.real
        worst = max(worst, float(np.max(np.abs(A - B))) / geom.ell_x**2)
    return worst <= 1e-12, f"max |appendixB - finite| / ell^2 = {worst:.2e}"


def check_folding():
    worst = 0.0
    for N in (2, 3, 4, 5, 8, 9):
        g = folded_gm0(N, 1.0)
        direct = np.array([alias_sum_fold(N, 1.0, m) for m in range(N)])
        worst = max(worst, float(np.max(np.abs(g - direct) / np.abs(g))))
    # closed-form fold against a truncated Fourier series, within its certified bound
    geom = make_geometry(6)
    sym = a_fourier_coefficients(geom)
    cutoff = 2000
    gap = float(np.max(np.abs(weyl_quantize(fold_symbol(sym)).matrix
                              - weyl_quantize(sym.truncated(cutoff)).matrix)))
    ok = worst <= 1e-8 and gap <= sym.tail_bound(cutoff)
    return ok, f"closed vs alias sum {worst:.2e}; truncation gap {gap:.2e} <= bound {sym.tail_bound(cutoff):.2e}"


def check_exact_spectra():
    worst = 0.0
    for N in (2, 3, 4, 5, 8, 16):
        geom = make_geometry(N)
        ev = eigendecompose(assemble(geom, "a"), want_vectors=True).eigenvalues
        exact = analytic_spectrum_a(geom).eigenvalues
        worst = max(worst, float(np.max(np.abs(ev - exact))) / float(np.max(exact)))
    return worst <= 1e-10, f"max rel error {worst:.2e}"


def check_symmetry_and_bounds():
    worst_sym = 0.0
    worst_bound = 0.0
    for N, ell_x in ((2, None), (3, None), (8, None), (21, None), (12, 3.0), (9, 11.0)):
        geom = make_geometry(N, ell_x)
        rec = eigendecompose(assemble_appendixB(geom))
        lo, hi = operator_bounds(geom)
        slack = 1e-9 * max(geom.ell_x, geom.ell_xi) ** 2
        worst_bound = max(worst_bound, max(lo - rec.eigenvalues[0], rec.eigenvalues[-1] - hi, 0.0))
        if geom.is_symmetric:
            worst_sym = max(worst_sym, symmetry_defect(rec))
            if N % 2:
                worst_sym = max(worst_sym, float(np.min(np.abs(rec.eigenvalues))) / float(np.max(np.abs(rec.eigenvalues))))
    ok = worst_sym <= 1e-9 and worst_bound <= slack
    return ok, f"symmetry defect {worst_sym:.2e}; bound excess {worst_bound:.2e}"


def check_eigensolver():
    worst = 0.0
    for N in (1, 2, 7, 40):
        rec = eigendecompose(assemble_appendixB(make_geometry(N)))
        worst = max(worst, rec.max_residual / max(rec.norm_estimate, 1e-300))
        if not rec.certificates_ok():
            return False, f"certificate failed at N={N}"
    return True, f"max residual / norm {worst:.2e}"


def fd_period_defect(geom, energies, rel_step=1e-4):
    """Max relative gap between a central difference of the action and the period.

    The step scales with the distance to the nearest singular energy (band edges,
    separatrix, component split) so the difference stays inside one smooth branch.
    """
    top, bot = geom.ell_xi**2 / 8, -geom.ell_x**2 / 8
    split = (geom.ell_xi**2 - geom.ell_x**2) / 8
    worst = 0.0
    for E in energies:
        dist = min(abs(E), top - E, E - bot, abs(E - split) if split else math.inf)
        if dist <= 1e-6 * max(top, -bot):
            continue
        h = rel_step * dist
        fd = (sc.action(geom, E + h) - sc.action(geom, E - h)) / (2 * h)
        t = sc.period(geom, E)
        worst = max(worst, abs(fd - t) / t)
    return worst


def check_semiclassics():
    worst = 0.0
    for geom in (make_geometry(50), make_geometry(12, 3.0), make_geometry(9, 11.0)):
        E = np.linspace(-geom.ell_x**2 / 8, geom.ell_xi**2 / 8, 203)[1:-1]
        worst = max(worst, fd_period_defect(geom, E))
    ident = max(abs(4 * math.asinh((E - 2 * math.pi) / math.sqrt(8 * math.pi * E)) - 2 * math.log(E / (2 * math.pi)))
                for E in np.linspace(2 * math.pi, 1e4, 200))
    return worst <= 1e-6 and ident <= 1e-10, f"derivative {worst:.2e}; identity {ident:.2e}"


def check_statistics():
    lam = np.arange(40) * 0.5
    ok = all(abs(dk_estimate(lam, E, K) - 2.0) < 1e-12 for E in (3.3, 7.0, 12.1) for K in (2, 3, 5))
    counts = [local_count(lam, 10.0, r) for r in (0.1, 0.6, 1.2, 5.0, 100.0)]
    ok = ok and counts == sorted(counts) and counts[-1] == lam.size
    return ok, f"counts {counts}"


CHECKS = {
    "translations": check_translations,
    "dft": check_dft,
    "representations": check_representations,
    "folding": check_folding,
    "exact_spectra": check_exact_spectra,
    "symmetry_bounds": check_symmetry_and_bounds,
    "eigensolver": check_eigensolver,
    "semiclassics": check_semiclassics,
    "statistics": check_statistics,
}


def run_selftest(perturb=False):
    """``[(name, passed, detail), ...]``; ``perturb`` corrupts one matrix entry to exercise failure."""
    results = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn(perturb) if name == "representations" else fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
