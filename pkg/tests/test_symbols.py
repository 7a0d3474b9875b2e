import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusweyl.errors import DomainError, PreconditionError
from torusweyl.lattice import canonical_indices, make_geometry, parabolic_fold_coefficients, translation_matrix
from torusweyl.symbols import (
    a_fourier_coefficients,
    alias_sum_fold,
    analytic_spectrum_a,
    analytic_spectrum_b,
    assemble,
    assemble_appendixB,
    assemble_finite_sum,
    b_fourier_coefficients,
    bk_coefficients,
    finite_sum_coefficients,
    folded_g00,
    folded_gm0,
    h_fourier_coefficients,
    plane_wave,
    spacing_predictions,
    spectral_support_a,
)

mpmath.mp.dps = 30


def nsum_fold(N, r):
    """sum_{k = r mod N, k != 0} (-1)^k / k^2 via mpmath."""
    def term(j):
        k = r + j * N
        return mpmath.mpf(0) if k == 0 else mpmath.mpf(-1) ** int(k) / mpmath.mpf(k) ** 2
    # split signs for odd N so each sub-series is monotone
    if N % 2 == 0:
        return mpmath.nsum(term, [-mpmath.inf, mpmath.inf])
    return (mpmath.nsum(lambda j: term(2 * j), [-mpmath.inf, mpmath.inf])
            + mpmath.nsum(lambda j: term(2 * j + 1), [-mpmath.inf, mpmath.inf]))


def x_parabola_fourier(x, ell, terms=4000):
    """Truncated Fourier series of ell^2/12 + ell^2/(2 pi^2) sum (-1)^k/k^2 e^{2 pi i k x/ell}."""
    k = np.arange(1, terms + 1)
    return ell**2 / 12 + ell**2 / np.pi**2 * np.sum((-1.0) ** k / k**2 * np.cos(2 * np.pi * k * x / ell))


# --- Fourier data ---------------------------------------------------------------


@pytest.mark.parametrize("x", [0.0, 0.3, -1.1, 2.0])
def test_a_series_reproduces_parabola(x):
    ell, terms = 4.0, 4000
    # tail of sum 1/k^2 past the cutoff bounds the error, sharp at the kink x = ell/2
    bound = ell**2 / (math.pi**2 * terms)
    assert abs(x_parabola_fourier(x, ell, terms) - x**2) <= bound


def test_symbol_coefficients():
    g = make_geometry(8, 3.0)
    h, a, b = h_fourier_coefficients(g), a_fourier_coefficients(g), b_fourier_coefficients(g)
    assert h.coefficient(0, 0) == pytest.approx((g.ell_xi**2 - g.ell_x**2) / 24)
    assert a.coefficient(0, 0) == pytest.approx(g.ell_xi**2 / 12)
    assert a.coefficient(3, 0) == pytest.approx(-g.ell_xi**2 / (2 * math.pi**2 * 9))
    assert b.coefficient(0, -2) == pytest.approx(g.ell_x**2 / (2 * math.pi**2 * 4))
    assert h.coefficient(2, 0) == pytest.approx(0.5 * a.coefficient(2, 0))
    assert h.coefficient(0, 2) == pytest.approx(-0.5 * b.coefficient(0, 2))
    assert h.coefficient(1, 1) == 0


# --- folding closed forms against mpmath ------------------------------------------------


@pytest.mark.parametrize("N", [2, 3, 4, 5, 6, 8, 9, 16, 17])
def test_parabolic_fold_matches_nsum(N):
    g = parabolic_fold_coefficients(N)
    for r in range(N):
        assert g[r] == pytest.approx(float(nsum_fold(N, r)), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("N", [2, 3, 4, 5, 8, 9])
def test_folded_row_matches_nsum(N):
    ell = 2.7
    g = folded_gm0(N, ell)
    for m in range(N):
        expected = ell**2 / (4 * math.pi**2) * float(nsum_fold(N, m)) + (ell**2 / 24 if m == 0 else 0)
        assert g[m] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("N", range(2, 20))
def test_library_alias_sum_agrees_with_closed_form(N):
    g = folded_gm0(N, 1.0)
    for m in range(N):
        assert alias_sum_fold(N, 1.0, m) == pytest.approx(g[m], rel=1e-10)


def test_n2_values():
    ell = 3.3
    g = folded_gm0(2, ell)
    assert g[0] == pytest.approx(ell**2 / 16, rel=1e-15)
    assert g[1] == pytest.approx(-(ell**2) / 16, rel=1e-15)


@given(st.integers(2, 200))
def test_folded_row_mirror_symmetric(N):
    g = folded_gm0(N, 1.0)
    np.testing.assert_allclose(g[1:], g[1:][::-1], rtol=1e-12, atol=0)


def test_g00_parity_forms():
    assert folded_g00(4, 1.0) == pytest.approx(18 / (24 * 16))
    assert folded_g00(5, 1.0) == pytest.approx(24 / (24 * 25))


# --- assemblies -------------------------------------------------------------------------


def test_n2_matrix():
    A = assemble_appendixB(make_geometry(2)).matrix.real
    np.testing.assert_allclose(A, math.pi / 4 * np.array([[-1, -1], [-1, 1]]), rtol=1e-14)


def test_n1_matrix_is_zero():
    assert assemble_appendixB(make_geometry(1)).matrix.shape == (1, 1)
    assert abs(assemble_appendixB(make_geometry(1)).matrix[0, 0]) < 1e-15


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5, 8, 9, 16, 33])
def test_three_routes_agree(N):
    g = make_geometry(N)
    A = assemble(g, "h", "appendixB").matrix
    B = assemble(g, "h", "finite").matrix
    C = assemble(g, "h", "weyl").matrix
    tol = 1e-12 * g.ell_x**2
    assert np.max(np.abs(A - B)) <= tol
    assert np.max(np.abs(A - C)) <= tol


@pytest.mark.parametrize("N,ell_x", [(6, 2.0), (9, 7.5), (12, 1.3)])
def test_asymmetric_routes_agree(N, ell_x):
    g = make_geometry(N, ell_x)
    A = assemble(g, "h").matrix
    C = assemble(g, "h", "weyl").matrix
    assert np.max(np.abs(A - C)) <= 1e-12 * max(g.ell_x, g.ell_xi) ** 2


def test_finite_sum_requires_symmetric_geometry():
    with pytest.raises(PreconditionError):
        assemble_finite_sum(make_geometry(6, 2.0))


def test_finite_sum_prefactor():
    g = make_geometry(6)
    c = finite_sum_coefficients(g)
    assert c[0] == pytest.approx(-math.pi / 12 / math.sin(math.pi / 6) ** 2)


def test_finite_sum_equals_translation_sum():
    N = 7
    g = make_geometry(N)
    c = finite_sum_coefficients(g)
    M = sum(c[m - 1] * (translation_matrix(g, (m, 0)).matrix - translation_matrix(g, (0, m)).matrix)
            for m in range(1, N))
    np.testing.assert_allclose(assemble_finite_sum(g).matrix, M, atol=1e-13)


def test_h_matrix_structure():
    g = make_geometry(10, 4.0)
    A = assemble_appendixB(g).matrix.real
    coeffs = bk_coefficients(g)
    k = canonical_indices(10)
    np.testing.assert_allclose(np.diag(A), coeffs.g00_a - 0.5 * (k * g.ell_x / 10) ** 2)
    np.testing.assert_allclose(A, A.T)


def test_unknown_symbol_and_route():
    g = make_geometry(4)
    with pytest.raises(DomainError):
        assemble(g, "q")
    with pytest.raises(DomainError):
        assemble(g, "a", "finite")


# --- exact spectra --------------------------------------------------------------------------


@pytest.mark.parametrize("N", [2, 3, 4, 7, 16])
def test_plane_waves_are_eigenvectors_of_a(N):
    g = make_geometry(N)
    A = assemble(g, "a").matrix
    for nu in canonical_indices(N):
        psi = plane_wave(N, nu).entries
        np.testing.assert_allclose(A @ psi, (nu * g.ell_xi / N) ** 2 * psi, atol=1e-12 * g.ell_xi**2)


@pytest.mark.parametrize("N", [3, 8])
def test_b_diagonal_route(N):
    g = make_geometry(N, 1.7)
    np.testing.assert_allclose(assemble(g, "b").matrix, assemble(g, "b", "diagonal").matrix, atol=1e-12)
    np.testing.assert_allclose(np.sort(np.diag(assemble(g, "b", "diagonal").matrix).real),
                               analytic_spectrum_b(g).eigenvalues)


def test_analytic_spectrum_sorted_with_labels():
    s = analytic_spectrum_a(make_geometry(6))
    assert np.all(np.diff(s.eigenvalues) >= 0)
    assert sorted(s.labels.tolist()) == [-3, -2, -1, 0, 1, 2]


def test_support_endpoints():
    for N in (6, 7):
        g = make_geometry(N)
        lo, hi = spectral_support_a(g)
        ev = analytic_spectrum_a(g).eigenvalues
        assert ev[0] == lo and ev[-1] == pytest.approx(hi, rel=1e-14)


def test_spacing_predictions():
    g = make_geometry(50)
    exact = analytic_spectrum_a(g)
    lookup = dict(zip(exact.labels.tolist(), exact.eigenvalues.tolist()))
    for nu in range(0, 23):
        assert spacing_predictions(g, nu) == pytest.approx(lookup[nu + 1] - lookup[nu], rel=1e-12)
    with pytest.raises(DomainError):
        spacing_predictions(g, 24)
