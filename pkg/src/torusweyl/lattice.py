"""Torus phase space: geometry, state vectors, translations, DFT and Weyl quantisation.

Vectors and matrices are stored with position ``p`` holding the signed lattice
index ``l = p - N // 2``, i.e. the window ``-N//2 <= l < N - N//2`` in ascending
order. All index arithmetic is modulo ``N``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np

from . import _kernels
from .errors import ConvergenceError, DomainError

# Entrywise matrix comparisons are made relative to the largest absolute entry.
REL_TOL = 1e-12


@dataclass(frozen=True)
class LatticeGeometry:
    """Lattice size ``N`` and torus lengths, tied by ``2*pi*hbar*N = ell_x*ell_xi``."""

    N: int
    ell_x: float
    ell_xi: float
    hbar: float = 1.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("ell_x", "ell_xi", "hbar"):
            value = float(getattr(self, name))
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)
        area = 2 * math.pi * self.hbar * self.N
        if abs(self.ell_x * self.ell_xi - area) > 1e-12 * area:
            raise DomainError(
                f"quantisation condition violated: ell_x*ell_xi={self.ell_x * self.ell_xi!r}, "
                f"2*pi*hbar*N={area!r}"
            )

    @property
    def is_symmetric(self):
        return abs(self.ell_x - self.ell_xi) <= 1e-12 * max(self.ell_x, self.ell_xi)

    @property
    def indices(self):
        return canonical_indices(self.N)

    @property
    def lattice_points(self):
        """Positions ``x_n = n*ell_x/N`` on the canonical window."""
        return self.indices * (self.ell_x / self.N)

    def as_dict(self):
        return {"N": self.N, "ell_x": self.ell_x, "ell_xi": self.ell_xi, "hbar": self.hbar}


def make_geometry(N, ell_x=None, hbar=1.0):
    """Build a geometry, solving the quantisation condition for ``ell_xi``.

    With ``ell_x`` omitted the symmetric choice ``ell_x = ell_xi = sqrt(2*pi*hbar*N)`` is used.
    """
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    if not hbar > 0:
        raise DomainError(f"hbar must be positive, got {hbar!r}")
    if ell_x is None:
        ell = math.sqrt(2 * math.pi * hbar * N)
        return LatticeGeometry(int(N), ell, ell, float(hbar))
    if not ell_x > 0:
        raise DomainError(f"ell_x must be positive, got {ell_x!r}")
    ell_xi = 2 * math.pi * hbar * N / ell_x
    return LatticeGeometry(int(N), float(ell_x), ell_xi, float(hbar))


def canonical_indices(N):
    return np.arange(N) - N // 2


def position(l, N):
    """Storage position of the (arbitrary integer) lattice index ``l``."""
    return (np.asarray(l) + N // 2) % N


class StateVector:
    """A vector in C^N with periodic indexing ``psi[l + N] == psi[l]``."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = np.array(entries, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("a state vector needs a non-empty 1-d array")
        arr.setflags(write=False)
        self.entries = arr

    @classmethod
    def from_mod_order(cls, values):
        """Build from values listed for ``l = 0, 1, ..., N-1``."""
        values = np.asarray(values, dtype=np.complex128)
        N = values.size
        return cls(values[canonical_indices(N) % N])

    def mod_order(self):
        """Entries listed for ``l = 0, 1, ..., N-1``."""
        return self.entries[position(np.arange(self.N), self.N)]

    @property
    def N(self):
        return self.entries.size

    def __getitem__(self, l):
        return self.entries[position(l, self.N)]

    def __len__(self):
        return self.N

    def __repr__(self):
        return f"StateVector({self.entries!r})"

    def allclose(self, other, atol=1e-12):
        other = other.entries if isinstance(other, StateVector) else np.asarray(other)
        return np.allclose(self.entries, other, rtol=0, atol=atol)


class TranslationIndex(NamedTuple):
    m: int
    n: int


def _phase_table(N):
    """``e^{-i*pi*j/N}`` for ``j = 0 .. 2N-1``; integer exponents are reduced exactly."""
    return np.exp(-1j * np.pi * np.arange(2 * N) / N)


def translate_x(psi: StateVector, m: int) -> StateVector:
    """``(T^{m,0} psi)_l = psi_{l+m}``."""
    return StateVector(np.roll(psi.entries, -int(m)))


def translate_xi(psi: StateVector, n: int) -> StateVector:
    """``(T^{0,n} psi)_l = exp(-2*pi*i*l*n/N) psi_l``."""
    N = psi.N
    j = (canonical_indices(N) * int(n)) % N
    return StateVector(_phase_table(N)[2 * j] * psi.entries)


def parity(psi: StateVector) -> StateVector:
    """``psi_l -> psi_{-l}``."""
    return StateVector(psi.entries[position(-canonical_indices(psi.N), psi.N)])


class AssemblyRoute(str, enum.Enum):
    FOLDED = "FoldedCoefficients"
    FINITE_SUM = "FiniteSumForm"
    ANALYTIC_DIAGONAL = "AnalyticDiagonal"


@dataclass(frozen=True, eq=False)
class QuantumOperator:
    matrix: np.ndarray
    geometry: LatticeGeometry
    assembly_route: AssemblyRoute | None = None
    label: str = ""
    hermiticity_defect: float = field(init=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128)
        N = self.geometry.N
        if mat.shape != (N, N):
            raise DomainError(f"matrix shape {mat.shape} does not match N={N}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        defect = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
        object.__setattr__(self, "hermiticity_defect", defect)

    @property
    def N(self):
        return self.geometry.N

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.matrix)))

    def imag_defect(self):
        return float(np.max(np.abs(self.matrix.imag)))

    def is_real_symmetric(self, rtol=REL_TOL):
        scale = self.max_abs
        return self.imag_defect() <= rtol * scale and self.hermiticity_defect <= rtol * scale

    def real_symmetric(self, rtol=REL_TOL):
        """The real part, after checking that imaginary part and asymmetry are negligible."""
        from .errors import NumericalError

        if not self.is_real_symmetric(rtol):
            raise NumericalError(
                f"operator {self.label!r} is not real symmetric: imag defect "
                f"{self.imag_defect():.3e}, hermiticity defect {self.hermiticity_defect:.3e}, "
                f"scale {self.max_abs:.3e}"
            )
        return np.ascontiguousarray(self.matrix.real)

    def apply(self, psi: StateVector) -> StateVector:
        return StateVector(self.matrix @ psi.entries)

    def with_matrix(self, matrix, label=None):
        return QuantumOperator(matrix, self.geometry, self.assembly_route, label or self.label)


def translation_matrix(geom: LatticeGeometry, idx) -> QuantumOperator:
    """Dense matrix of ``T^{m,n}``: ``exp(-i pi n m/N) exp(-2 pi i k n/N) delta_{k+m,l}``."""
    m, n = (int(v) for v in idx)
    N = geom.N
    out = np.zeros((N, N), dtype=np.complex128)
    _kernels.scatter_translations(
        np.array([m], dtype=np.int64), np.array([n], dtype=np.int64),
        np.array([1.0 + 0j]), N, out,
    )
    return QuantumOperator(out, geom, AssemblyRoute.FOLDED, f"T^({m},{n})")


def dft_matrix(geom) -> QuantumOperator:
    """Unitary DFT ``F_{k,l} = exp(-2 pi i k l/N)/sqrt(N)`` on the canonical window."""
    if not isinstance(geom, LatticeGeometry):
        geom = make_geometry(int(geom))
    N = geom.N
    k = canonical_indices(N)
    j = np.outer(k, k) % N
    F = _phase_table(N)[2 * j] / math.sqrt(N)
    return QuantumOperator(F, geom, None, "DFT")


def dft(psi: StateVector) -> StateVector:
    return StateVector.from_mod_order(np.fft.fft(psi.mod_order(), norm="ortho"))


def idft(psi: StateVector) -> StateVector:
    return StateVector.from_mod_order(np.fft.ifft(psi.mod_order(), norm="ortho"))


# ---------------------------------------------------------------------------
# symbols


class ParabolicSeries(NamedTuple):
    """``amplitude * sum_{k != 0} (-1)^k / k^2 * T(k)`` along one index axis.

    ``axis == 0`` places the terms at ``(k, 0)``, ``axis == 1`` at ``(0, k)``.
    This is the Fourier tail of a periodised parabola; it decays like ``1/k^2``.
    """

    axis: int
    amplitude: float


@dataclass(frozen=True, eq=False)
class TorusSymbol:
    """Fourier coefficients ``f_{m,n}`` of a periodic phase-space function.

    ``coefficients`` is the finitely supported part; ``series`` holds infinite
    ``1/k^2`` tails that folding resums in closed form.
    """

    geometry: LatticeGeometry
    coefficients: Mapping[tuple[int, int], complex]
    label: str = ""
    series: tuple[ParabolicSeries, ...] = ()

    def __post_init__(self):
        coeffs = {(int(m), int(n)): complex(c) for (m, n), c in dict(self.coefficients).items()}
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "series", tuple(ParabolicSeries(*s) for s in self.series))

    @property
    def is_finite(self):
        return not self.series

    @property
    def is_folded(self):
        N = self.geometry.N
        return self.is_finite and all(0 <= m < N and 0 <= n < N for m, n in self.coefficients)

    def coefficient(self, m, n):
        """The full Fourier coefficient ``f_{m,n}``, tails included."""
        value = self.coefficients.get((m, n), 0j)
        for s in self.series:
            k, other = (m, n) if s.axis == 0 else (n, m)
            if other == 0 and k != 0:
                value += s.amplitude * (-1) ** (k % 2) / k**2
        return value

    def is_real_valued(self, tol=1e-14):
        """Checks ``f_{-m,-n} == conj(f_{m,n})`` on the finite part (tails are real and even)."""
        scale = max([abs(c) for c in self.coefficients.values()] + [1e-300])
        for (m, n), c in self.coefficients.items():
            if abs(self.coefficients.get((-m, -n), 0j) - c.conjugate()) > tol * scale:
                return False
        return True

    def truncated(self, cutoff):
        """Finite symbol keeping tail terms with ``1 <= |k| <= cutoff``."""
        coeffs = dict(self.coefficients)
        for s in self.series:
            for k in range(1, cutoff + 1):
                c = s.amplitude * (-1) ** (k % 2) / k**2
                for kk in (k, -k):
                    key = (kk, 0) if s.axis == 0 else (0, kk)
                    coeffs[key] = coeffs.get(key, 0j) + c
        return TorusSymbol(self.geometry, coeffs, f"{self.label}|trunc{cutoff}")

    def tail_bound(self, cutoff):
        """Upper bound on the coefficient mass dropped by ``truncated(cutoff)``.

        Uses ``sum_{k > M} 1/k^2 < 1/M``; this also bounds every matrix entry of
        the quantised remainder since translation matrices have unimodular entries.
        """
        if not self.series:
            return 0.0
        return sum(2 * abs(s.amplitude) for s in self.series) / max(cutoff, 1)


def _alias_sign(m, n, mu, nu, N):
    return -1 if (m * nu + n * mu + mu * nu * N) % 2 else 1


def _fold_finite(coefficients, N):
    folded: dict[tuple[int, int], complex] = {}
    for (m, n), c in coefficients.items():
        mm, nn = m % N, n % N
        mu, nu = (m - mm) // N, (n - nn) // N
        key = (mm, nn)
        folded[key] = folded.get(key, 0j) + _alias_sign(mm, nn, mu, nu, N) * c
    return folded


def parabolic_fold_coefficients(N, amplitude=1.0):
    """Closed-form fold of ``amplitude * sum_{k != 0} (-1)^k/k^2`` onto residues ``0..N-1``.

    Returns the length-``N`` array ``g`` with ``g[r] = amplitude * sum_{k = r mod N, k != 0} (-1)^k / k^2``.
    """
    r = np.arange(1, N)
    s = np.sin(np.pi * r / N)
    g = np.empty(N)
    sign = np.where(r % 2 == 0, 1.0, -1.0)
    if N % 2 == 0:
        g[1:] = np.pi**2 * sign / (N**2 * s**2)
        g[0] = 2 * (np.pi**2 / 6) / N**2
    else:
        g[1:] = np.pi**2 * sign * np.cos(np.pi * r / N) / (N**2 * s**2)
        g[0] = -2 * (np.pi**2 / 12) / N**2
    return amplitude * g


def _fold_series_truncated(amplitude, N, cutoff):
    k = np.arange(1, cutoff + 1, dtype=np.int64)
    terms = amplitude * np.where(k % 2 == 0, 1.0, -1.0) / k.astype(float) ** 2
    g = np.bincount(k % N, weights=terms, minlength=N)
    g += np.bincount((-k) % N, weights=terms, minlength=N)
    return g


def fold_symbol(sym: TorusSymbol, method="closed", rel_tol=1e-10, max_terms=10**7) -> TorusSymbol:
    """Equivalent finitely supported symbol on ``0 <= m, n < N``.

    Finite parts are folded exactly with the sign rule for ``T^{m+mu N, n+nu N}``.
    Parabolic tails are resummed in closed form (``method="closed"``) or, with
    ``method="truncate"``, summed up to a cutoff whose certified tail bound is
    below ``rel_tol`` times the largest coefficient; a cutoff beyond
    ``max_terms`` raises :class:`ConvergenceError`.
    """
    N = sym.geometry.N
    folded = _fold_finite(sym.coefficients, N)
    if sym.series:
        if method == "truncate":
            scale = max([abs(c) for c in sym.coefficients.values()]
                        + [abs(s.amplitude) for s in sym.series])
            mass = sum(2 * abs(s.amplitude) for s in sym.series)
            cutoff = math.ceil(mass / (rel_tol * scale))
            if cutoff > max_terms:
                raise ConvergenceError(
                    f"truncated fold needs {cutoff} terms for rel_tol={rel_tol:g} "
                    f"(budget {max_terms})",
                    {"cutoff": cutoff, "tail_bound_at_budget": mass / max_terms},
                )
        elif method != "closed":
            raise DomainError(f"unknown fold method {method!r}")
        for s in sym.series:
            if method == "closed":
                g = parabolic_fold_coefficients(N, s.amplitude)
            else:
                g = _fold_series_truncated(s.amplitude, N, cutoff)
            for r in range(N):
                key = (r, 0) if s.axis == 0 else (0, r)
                folded[key] = folded.get(key, 0j) + g[r]
    return TorusSymbol(sym.geometry, folded, f"{sym.label}|folded")


def weyl_quantize(sym: TorusSymbol, route=AssemblyRoute.FOLDED) -> QuantumOperator:
    """``op_N(f) = sum_{m,n} f_{m,n} T^{m,n}`` as a dense matrix (folding first if needed)."""
    folded = sym if sym.is_folded else fold_symbol(sym)
    N = sym.geometry.N
    items = sorted(folded.coefficients.items())
    out = np.zeros((N, N), dtype=np.complex128)
    if items:
        m = np.array([k[0] for k, _ in items], dtype=np.int64)
        n = np.array([k[1] for k, _ in items], dtype=np.int64)
        c = np.array([v for _, v in items], dtype=np.complex128)
        _kernels.scatter_translations(m, n, c, N, out)
    return QuantumOperator(out, sym.geometry, route, f"op_N({sym.label})")


def constant_symbol(geom, c):
    return TorusSymbol(geom, {(0, 0): c}, f"const({c})")
