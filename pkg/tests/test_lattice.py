import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusweyl.errors import ConvergenceError, DomainError, NumericalError
from torusweyl.lattice import (
    LatticeGeometry,
    QuantumOperator,
    StateVector,
    TorusSymbol,
    canonical_indices,
    constant_symbol,
    dft,
    dft_matrix,
    fold_symbol,
    idft,
    make_geometry,
    parity,
    translate_x,
    translate_xi,
    translation_matrix,
    weyl_quantize,
)


def brute_translation(N, m, n):
    """Direct definition (T psi)_k = e^{-i pi n m/N} e^{-2 pi i k n/N} psi_{k+m}, k in the window."""
    k = canonical_indices(N)
    T = np.zeros((N, N), dtype=complex)
    for p, kk in enumerate(k):
        q = (kk + m + N // 2) % N
        T[p, q] = cmath.exp(-1j * math.pi * n * m / N) * cmath.exp(-2j * math.pi * kk * n / N)
    # psi_{k+m} with k+m outside the window picks up no phase: psi is periodic
    return T


# --- geometry -------------------------------------------------------------


def test_default_geometry_is_symmetric():
    g = make_geometry(10)
    assert g.ell_x == g.ell_xi == math.sqrt(20 * math.pi)
    assert g.is_symmetric


def test_explicit_ell_x_solves_quantisation():
    g = make_geometry(7, 2.5, hbar=0.3)
    assert g.ell_x * g.ell_xi == pytest.approx(2 * math.pi * 0.3 * 7, rel=1e-14)
    assert not g.is_symmetric


@pytest.mark.parametrize("N", [0, -3, 2.5, True])
def test_rejects_bad_N(N):
    with pytest.raises(DomainError):
        make_geometry(N)


def test_rejects_quantisation_violation():
    with pytest.raises(DomainError):
        LatticeGeometry(4, 1.0, 1.0)


def test_indices_window():
    assert list(canonical_indices(4)) == [-2, -1, 0, 1]
    assert list(canonical_indices(5)) == [-2, -1, 0, 1, 2]
    assert list(make_geometry(1).indices) == [0]


# --- state vectors -----------------------------------------------------------


@given(st.integers(1, 12), st.integers(-40, 40))
def test_state_vector_periodic(N, l):
    psi = StateVector(np.arange(N) + 1j)
    assert psi[l] == psi[l + N] == psi[l - 3 * N]


def test_mod_order_round_trip():
    vals = np.array([10, 11, 12, 13, 14], dtype=complex)
    psi = StateVector.from_mod_order(vals)
    assert psi[0] == 10 and psi[-1] == 14 and psi[2] == 12
    np.testing.assert_array_equal(psi.mod_order(), vals)


def test_state_vector_is_read_only():
    psi = StateVector([1, 2, 3])
    with pytest.raises(ValueError):
        psi.entries[0] = 5


# --- translations ------------------------------------------------------------


@given(st.integers(1, 9), st.integers(-25, 25), st.integers(-25, 25))
def test_translation_matches_definition(N, m, n):
    T = translation_matrix(make_geometry(N), (m, n)).matrix
    np.testing.assert_allclose(T, brute_translation(N, m, n), atol=1e-12)


@given(st.integers(1, 9), st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9))
def test_weyl_relation(N, m1, n1, m2, n2):
    g = make_geometry(N)
    A = translation_matrix(g, (m1, n1)).matrix
    B = translation_matrix(g, (m2, n2)).matrix
    C = translation_matrix(g, (m1 + m2, n1 + n2)).matrix
    phase = cmath.exp(-1j * math.pi * (m1 * n2 - n1 * m2) / N)
    np.testing.assert_allclose(A @ B, phase * C, atol=1e-11)


@given(st.integers(1, 8), st.integers(-8, 8), st.integers(-8, 8), st.integers(-2, 2), st.integers(-2, 2))
def test_periodicity_sign(N, m, n, mu, nu):
    g = make_geometry(N)
    U = translation_matrix(g, (m, n)).matrix
    V = translation_matrix(g, (m + mu * N, n + nu * N)).matrix
    np.testing.assert_allclose(V, (-1) ** ((m * nu + n * mu + mu * nu * N) % 2) * U, atol=1e-12)


def test_translation_adjoint():
    g = make_geometry(6)
    U = translation_matrix(g, (2, 5)).matrix
    np.testing.assert_allclose(U.conj().T, translation_matrix(g, (-2, -5)).matrix, atol=1e-13)


def test_state_translations_match_matrices():
    g = make_geometry(7)
    psi = StateVector(np.linspace(0, 1, 7) + 0.3j * np.arange(7))
    assert translate_x(psi, 3).allclose(translation_matrix(g, (3, 0)).matrix @ psi.entries)
    assert translate_xi(psi, -2).allclose(translation_matrix(g, (0, -2)).matrix @ psi.entries)


# --- DFT -----------------------------------------------------------------------


@pytest.mark.parametrize("N", [1, 2, 3, 4, 6, 9, 16])
def test_dft_unitary_and_conjugation(N):
    g = make_geometry(N)
    F = dft_matrix(g).matrix
    np.testing.assert_allclose(F.conj().T @ F, np.eye(N), atol=1e-12)
    for m in range(-N, N + 1):
        lhs = F.conj().T @ translation_matrix(g, (m, 0)).matrix @ F
        np.testing.assert_allclose(lhs, translation_matrix(g, (0, m)).matrix, atol=1e-12)


@given(st.integers(1, 20), st.data())
def test_fast_dft_matches_matrix_and_squares_to_parity(N, data):
    re = data.draw(st.lists(st.floats(-5, 5), min_size=N, max_size=N))
    psi = StateVector(np.array(re) + 0.5j)
    F = dft_matrix(N).matrix
    assert dft(psi).allclose(F @ psi.entries, atol=1e-11)
    assert idft(dft(psi)).allclose(psi.entries, atol=1e-11)
    assert dft(dft(psi)).allclose(parity(psi).entries, atol=1e-11)


# --- symbols, folding, quantisation ----------------------------------------------


def test_constant_symbol_quantises_to_multiple_of_identity():
    g = make_geometry(5)
    np.testing.assert_allclose(weyl_quantize(constant_symbol(g, 2.5)).matrix, 2.5 * np.eye(5))


@given(st.integers(1, 7), st.dictionaries(st.tuples(st.integers(-20, 20), st.integers(-20, 20)),
                                          st.complex_numbers(max_magnitude=3), max_size=6))
def test_fold_then_quantise_equals_direct_sum(N, coeffs):
    g = make_geometry(N)
    sym = TorusSymbol(g, coeffs)
    expected = sum((c * brute_translation(N, m, n) for (m, n), c in coeffs.items()),
                   np.zeros((N, N), dtype=complex))
    folded = fold_symbol(sym)
    assert folded.is_folded
    np.testing.assert_allclose(weyl_quantize(folded).matrix, expected, atol=1e-11)


def test_real_symbol_gives_hermitian_operator():
    g = make_geometry(6)
    sym = TorusSymbol(g, {(1, 2): 1 + 2j, (-1, -2): 1 - 2j, (0, 3): 0.5, (0, -3): 0.5})
    assert sym.is_real_valued()
    op = weyl_quantize(sym)
    assert op.hermiticity_defect < 1e-14


def test_truncate_fold_is_refused_at_tight_tolerance():
    from torusweyl.symbols import a_fourier_coefficients

    sym = a_fourier_coefficients(make_geometry(4))
    with pytest.raises(ConvergenceError) as info:
        fold_symbol(sym, method="truncate", rel_tol=1e-10)
    assert info.value.diagnostics["cutoff"] > 10**7


def test_truncate_fold_within_bound_at_loose_tolerance():
    from torusweyl.symbols import a_fourier_coefficients

    sym = a_fourier_coefficients(make_geometry(4))
    closed = weyl_quantize(fold_symbol(sym)).matrix
    approx = weyl_quantize(fold_symbol(sym, method="truncate", rel_tol=1e-4)).matrix
    scale = max(abs(c) for c in sym.coefficients.values())
    assert np.max(np.abs(closed - approx)) <= 1e-4 * scale


def test_unknown_fold_method():
    from torusweyl.symbols import a_fourier_coefficients

    with pytest.raises(DomainError):
        fold_symbol(a_fourier_coefficients(make_geometry(3)), method="bogus")


def test_real_symmetric_rejects_complex_operator():
    g = make_geometry(3)
    op = QuantumOperator(np.diag([1j, 0, 0]), g)
    with pytest.raises(NumericalError):
        op.real_symmetric()
