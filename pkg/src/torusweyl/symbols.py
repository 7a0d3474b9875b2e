"""The Berry-Keating symbol ``h = (xi^2 - x^2)/2`` on the torus and its parts ``a = xi^2``, ``b = x^2``.

Two independent assemblies of ``op_N(h)`` are provided: the folded
matrix-element form (circulant part plus signed-index diagonal) and the finite
sum of translations valid for ``ell_x == ell_xi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, PreconditionError
from .lattice import (
    REL_TOL,
    AssemblyRoute,
    LatticeGeometry,
    ParabolicSeries,
    QuantumOperator,
    StateVector,
    TorusSymbol,
    canonical_indices,
    weyl_quantize,
)

SYMBOLS = ("h", "a", "b")


# ---------------------------------------------------------------------------
# Fourier coefficients


def h_fourier_coefficients(geom: LatticeGeometry) -> TorusSymbol:
    """``h_{00} = (ell_xi^2 - ell_x^2)/24``; axis terms ``+-ell^2 (-1)^k / (4 pi^2 k^2)``."""
    lxi2, lx2 = geom.ell_xi**2, geom.ell_x**2
    return TorusSymbol(
        geom,
        {(0, 0): (lxi2 - lx2) / 24},
        "h",
        (ParabolicSeries(0, lxi2 / (4 * math.pi**2)), ParabolicSeries(1, -lx2 / (4 * math.pi**2))),
    )


def a_fourier_coefficients(geom: LatticeGeometry) -> TorusSymbol:
    """Periodised ``xi^2``: constant ``ell_xi^2/12`` plus ``ell_xi^2 (-1)^k/(2 pi^2 k^2)`` on ``T^{k,0}``."""
    lxi2 = geom.ell_xi**2
    return TorusSymbol(geom, {(0, 0): lxi2 / 12}, "a", (ParabolicSeries(0, lxi2 / (2 * math.pi**2)),))


def b_fourier_coefficients(geom: LatticeGeometry) -> TorusSymbol:
    """Periodised ``x^2``; mirrors :func:`a_fourier_coefficients` with ``ell_x`` on ``T^{0,k}``."""
    lx2 = geom.ell_x**2
    return TorusSymbol(geom, {(0, 0): lx2 / 12}, "b", (ParabolicSeries(1, lx2 / (2 * math.pi**2)),))


def symbol(geom, name):
    try:
        return {"h": h_fourier_coefficients, "a": a_fourier_coefficients, "b": b_fourier_coefficients}[name](geom)
    except KeyError:
        raise DomainError(f"unknown symbol {name!r}; expected one of {SYMBOLS}") from None


# ---------------------------------------------------------------------------
# folded coefficients


@dataclass(frozen=True, eq=False)
class BKCoefficients:
    """Folded data of ``op_N(h)``.

    ``g_row[m]`` is the coefficient of ``T^{m,0}`` from the ``a/2`` part
    (``g_row[0]`` equals ``g00_a``); ``g00_b`` is the constant of the folded
    ``b/2`` part and ``diagonal`` the signed-index term ``-(k ell_x/N)^2 / 2``.
    """

    geometry: LatticeGeometry
    g_row: np.ndarray
    g00_a: float
    g00_b: float
    diagonal: np.ndarray


def folded_g00(N, ell):
    """``ell^2 (N^2 + 2)/(24 N^2)`` for even ``N``, ``ell^2 (N^2 - 1)/(24 N^2)`` for odd ``N``."""
    return ell**2 * (N * N + 2 if N % 2 == 0 else N * N - 1) / (24 * N * N)


def folded_gm0(N, ell):
    """Length-``N`` array: ``g[m] = ell^2 (-1)^m / (4 N^2 sin^2(pi m/N))``, times ``cos(pi m/N)`` for odd ``N``.

    ``g[0]`` holds :func:`folded_g00`.
    """
    m = np.arange(1, N)
    g = np.empty(N)
    g[0] = folded_g00(N, ell)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    g[1:] = ell**2 * sign / (4 * N * N * np.sin(np.pi * m / N) ** 2)
    if N % 2:
        g[1:] *= np.cos(np.pi * m / N)
    return g


def bk_coefficients(geom: LatticeGeometry) -> BKCoefficients:
    N = geom.N
    g = folded_gm0(N, geom.ell_xi)
    # real symmetric assembly requires g_{N-m} == g_m in both parity branches
    if N > 1:
        mirror = np.abs(g[1:] - g[1:][::-1])
        if np.max(mirror) > REL_TOL * np.max(np.abs(g)):
            raise NumericalError(f"folded row is not mirror symmetric (defect {np.max(mirror):.3e})")
    k = canonical_indices(N)
    return BKCoefficients(
        geometry=geom,
        g_row=g,
        g00_a=float(g[0]),
        g00_b=folded_g00(N, geom.ell_x),
        diagonal=-0.5 * (k * geom.ell_x / N) ** 2,
    )


# ---------------------------------------------------------------------------
# assemblies of op_N(h)


def _circulant(row):
    """``C[p, q] = row[(q - p) mod N]``, i.e. ``sum_m row[m] T^{m,0}``."""
    N = row.size
    idx = (np.arange(N)[None, :] - np.arange(N)[:, None]) % N
    return row[idx]


def assemble_appendixB(geom: LatticeGeometry) -> QuantumOperator:
    """``op_N(h)_{kl} = (g_00 - (k ell_x/N)^2/2) delta_kl + sum_{m>=1} g_{m,0} delta_{k+m,l}``."""
    coeffs = bk_coefficients(geom)
    mat = _circulant(coeffs.g_row)
    mat[np.diag_indices(geom.N)] += coeffs.diagonal
    return QuantumOperator(mat, geom, AssemblyRoute.FOLDED, "h")


def _require_symmetric(geom):
    if not geom.is_symmetric:
        raise PreconditionError(
            f"finite-sum form needs ell_x == ell_xi, got {geom.ell_x!r} and {geom.ell_xi!r}"
        )


def finite_sum_coefficients(geom: LatticeGeometry):
    """``c_m = ell^2/(4 N^2) (-1)^m / sin^2(pi m/N)`` (times ``cos(pi m/N)`` for odd ``N``), ``m = 1..N-1``.

    With ``ell^2 = 2 pi hbar N`` the prefactor is ``pi hbar / (2N)``.
    """
    _require_symmetric(geom)
    N = geom.N
    m = np.arange(1, N)
    c = (math.pi * geom.hbar / (2 * N)) * np.where(m % 2 == 0, 1.0, -1.0) / np.sin(np.pi * m / N) ** 2
    if N % 2:
        c *= np.cos(np.pi * m / N)
    return c


def assemble_finite_sum(geom: LatticeGeometry) -> QuantumOperator:
    """``sum_{m=1}^{N-1} c_m (T^{m,0} - T^{0,m})``; needs ``ell_x == ell_xi``."""
    c = finite_sum_coefficients(geom)
    N = geom.N
    row = np.zeros(N)
    row[1:] = c
    mat = _circulant(row).astype(np.complex128)
    # T^{0,m} is diagonal with entries exp(-2 pi i k m / N)
    k = canonical_indices(N)
    m = np.arange(1, N)
    phases = np.exp(-2j * np.pi * ((np.outer(k, m)) % N) / N)
    mat[np.diag_indices(N)] -= phases @ c
    op = QuantumOperator(mat, geom, AssemblyRoute.FINITE_SUM, "h")
    return QuantumOperator(op.real_symmetric(), geom, AssemblyRoute.FINITE_SUM, "h")


def assemble(geom: LatticeGeometry, name="h", route="appendixB") -> QuantumOperator:
    """Operator for symbol ``h``, ``a`` or ``b`` along the named route.

    Routes: ``appendixB`` (folded matrix elements), ``finite`` (finite sum, ``h``
    only), ``weyl`` (generic quantisation of the Fourier series), ``diagonal``
    (exact diagonal form, ``b`` only).
    """
    if name not in SYMBOLS:
        raise DomainError(f"unknown symbol {name!r}; expected one of {SYMBOLS}")
    if name == "h" and route == "appendixB":
        return assemble_appendixB(geom)
    if name == "h" and route == "finite":
        return assemble_finite_sum(geom)
    if route == "weyl" or (name != "h" and route == "appendixB"):
        op = weyl_quantize(symbol(geom, name))
        return QuantumOperator(op.real_symmetric(), geom, AssemblyRoute.FOLDED, name)
    if name == "b" and route == "diagonal":
        k = canonical_indices(geom.N)
        return QuantumOperator(np.diag((k * geom.ell_x / geom.N) ** 2), geom, AssemblyRoute.ANALYTIC_DIAGONAL, "b")
    raise DomainError(f"route {route!r} is not available for symbol {name!r}")


# ---------------------------------------------------------------------------
# exact spectra of op_N(a), op_N(b)


@dataclass(frozen=True, eq=False)
class AnalyticSpectrum:
    eigenvalues: np.ndarray
    labels: np.ndarray
    geometry: LatticeGeometry
    length: float

    def plane_wave(self, nu) -> StateVector:
        return plane_wave(self.geometry.N, nu)


def plane_wave(N, nu) -> StateVector:
    """``psi_m = exp(2 pi i nu m/N)/sqrt(N)`` on the canonical window (phase 0 at ``m = 0``)."""
    m = canonical_indices(N)
    return StateVector(np.exp(2j * np.pi * ((nu * m) % N) / N) / math.sqrt(N))


def _analytic(geom, length):
    N = geom.N
    nu = canonical_indices(N)
    values = (nu * length / N) ** 2
    order = np.lexsort((nu, values))
    return AnalyticSpectrum(values[order], nu[order], geom, length)


def analytic_spectrum_a(geom: LatticeGeometry) -> AnalyticSpectrum:
    """``E_nu = (nu ell_xi/N)^2`` for ``-N/2 <= nu < N/2``, sorted."""
    return _analytic(geom, geom.ell_xi)


def analytic_spectrum_b(geom: LatticeGeometry) -> AnalyticSpectrum:
    return _analytic(geom, geom.ell_x)


def spectral_support_a(geom: LatticeGeometry):
    """``(inf, sup)`` of the spectrum of ``op_N(a)``."""
    N = geom.N
    top = geom.ell_xi**2 / 4
    if N % 2:
        top *= ((N - 1) / N) ** 2
    return 0.0, top


def spacing_predictions(geom: LatticeGeometry, nu: int) -> float:
    """``s_nu = E_{nu+1} - E_nu = ell_xi^2 (2 nu + 1)/N^2`` for ``0 <= nu < N/2 - 1``.

    The two alternative closed forms are evaluated as a consistency check.
    """
    N = geom.N
    if int(nu) != nu or not 0 <= nu < N / 2 - 1:
        raise DomainError(f"nu must satisfy 0 <= nu < N/2 - 1 = {N / 2 - 1}, got {nu!r}")
    s = geom.ell_xi**2 * (2 * nu + 1) / N**2
    alt1 = (2 * math.pi * geom.hbar / geom.ell_x) ** 2 * (2 * nu + 1)
    alt2 = 2 * math.pi * geom.hbar * geom.ell_xi / geom.ell_x * (2 * nu + 1) / N
    if max(abs(alt1 - s), abs(alt2 - s)) > 1e-12 * s:
        raise NumericalError(f"spacing forms disagree: {s!r}, {alt1!r}, {alt2!r}")
    return s


def operator_bounds(geom: LatticeGeometry):
    """Closed interval ``[-ell_x^2/8, ell_xi^2/8]`` containing the spectrum of ``op_N(h)``."""
    return -geom.ell_x**2 / 8, geom.ell_xi**2 / 8


def alias_sum_fold(N, ell, m, terms=200_000):
    """Direct evaluation of ``ell^2/(4 pi^2) sum_{mu} (-1)^{m+mu N}/(m+mu N)^2`` (the ``a/2`` fold).

    Truncated at ``|mu| <= terms`` with an integral estimate of the remainder,
    independent of the closed forms. ``m = 0`` adds the constant ``ell^2/24``.
    """
    return ell**2 / (4 * math.pi**2) * _alias_sum(N, m, terms) + (ell**2 / 24 if m % N == 0 else 0.0)


def _alias_sum(N, m, terms):
    mu = np.arange(-terms, terms + 1, dtype=np.int64)
    k = m + mu * N
    k = k[k != 0]
    kf = k.astype(float)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    head = float(np.sum(sign / kf**2))
    # remainder over |mu| > terms, summed as two monotone sub-series when signs alternate
    tail = 0.0
    for side in (1, -1):
        start = m + side * (terms + 1) * N
        if N % 2 == 0:
            s = 1.0 if start % 2 == 0 else -1.0
            # sum_{j>=0} 1/(start + side*j*N)^2 ~ integral from j=-1/2
            tail += s / (N * (abs(start) - N / 2))
        else:
            for parity_start in (start, start + side * N):
                s = 1.0 if parity_start % 2 == 0 else -1.0
                tail += s / (2 * N * (abs(parity_start) - N))
    return head + tail
