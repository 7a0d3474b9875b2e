"""Residual-certified dense symmetric eigendecomposition."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._accel import backend_name
from .errors import ConvergenceError, NumericalError, PreconditionError
from .lattice import REL_TOL, AssemblyRoute, LatticeGeometry, QuantumOperator, make_geometry

SOLVER_VERSION = "hhql-2"
# certificates are scaled by the norm estimate (residuals) or N*max|A| (trace)
CERT_TOL = 1e-9
MAX_QL_ITER = 60


def solver_tag(backend=None):
    return f"{SOLVER_VERSION}/{backend or backend_name()}"


@dataclass(frozen=True, eq=False)
class SpectrumRecord:
    geometry: LatticeGeometry
    assembly_route: str | None
    eigenvalues: np.ndarray
    max_residual: float | None
    orthogonality_defect: float | None
    norm_estimate: float
    trace_defect: float
    symbol: str = "h"
    solver_metadata: dict = field(default_factory=dict)
    eigenvectors: np.ndarray | None = None

    @property
    def N(self):
        return self.geometry.N

    def to_dict(self):
        return {
            "geometry": self.geometry.as_dict(),
            "symbol": self.symbol,
            "assembly_route": self.assembly_route,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "max_residual": self.max_residual,
            "orthogonality_defect": self.orthogonality_defect,
            "norm_estimate": self.norm_estimate,
            "trace_defect": self.trace_defect,
            # wall time stays in memory only: serialised records must be bit-reproducible
            "solver_metadata": {k: v for k, v in self.solver_metadata.items() if k != "wall_time_s"},
        }

    @classmethod
    def from_dict(cls, data):
        g = data["geometry"]
        geom = LatticeGeometry(g["N"], g["ell_x"], g["ell_xi"], g["hbar"])
        eig = np.array(data["eigenvalues"], dtype=np.float64)
        if eig.shape != (geom.N,) or np.any(np.diff(eig) < 0):
            raise ValueError("stored eigenvalues are not a sorted length-N sequence")
        return cls(
            geometry=geom,
            assembly_route=data["assembly_route"],
            eigenvalues=eig,
            max_residual=data["max_residual"],
            orthogonality_defect=data["orthogonality_defect"],
            norm_estimate=data["norm_estimate"],
            trace_defect=data["trace_defect"],
            symbol=data.get("symbol", "h"),
            solver_metadata=dict(data.get("solver_metadata", {})),
        )

    def certificates_ok(self):
        ok = self.trace_defect <= CERT_TOL * self.N * max(self.solver_metadata.get("max_abs_entry", 0.0), 1e-300)
        if self.max_residual is not None:
            ok = ok and self.max_residual <= CERT_TOL * self.norm_estimate
        return bool(ok)


def spectral_norm_estimate(op) -> float:
    """Upper bound on the spectral norm: ``min(max row sum, Frobenius norm)``.

    Both are upper bounds; for the operators here they lie within a factor of
    two of the true norm.
    """
    a = op.matrix if isinstance(op, QuantumOperator) else np.asarray(op)
    if a.size == 0:
        return 0.0
    row_sum = float(np.max(np.sum(np.abs(a), axis=1)))
    return min(row_sum, float(np.linalg.norm(a)))


def _as_symmetric(op):
    a = op.matrix if isinstance(op, QuantumOperator) else np.asarray(op, dtype=np.complex128)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    herm = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if herm > REL_TOL * max(scale, 1e-300) and herm > 0:
        raise PreconditionError(f"matrix is not Hermitian (defect {herm:.3e}, scale {scale:.3e})")
    if np.iscomplexobj(a) and float(np.max(np.abs(a.imag))) > REL_TOL * max(scale, 1e-300):
        return None, scale
    return np.array(a.real, dtype=np.float64, order="C"), scale


def _real_eigh(a, want_vectors, backend):
    """Eigenpairs of a real symmetric matrix; vectors returned as columns."""
    n = a.shape[0]
    if backend == "lapack":
        if want_vectors:
            w, v = np.linalg.eigh(a)
            return w, v, {"iterations": None}
        return np.linalg.eigvalsh(a), None, {"iterations": None}
    kern = _kernels.NUMBA_KERNELS if backend == "numba" else _kernels.NUMPY_KERNELS
    # exact power-of-two rescale keeps the Householder sums of squares away from under/overflow
    peak = float(np.max(np.abs(a))) if n else 0.0
    shift = math.frexp(peak)[1] if peak > 0 else 0
    work = np.ldexp(a, -shift)
    d, e, refl = kern["tridiagonalize"](work, want_vectors)
    zt = np.eye(n) if want_vectors else np.zeros((1, 1))
    iters, status = kern["tridiagonal_ql"](d, e, zt, want_vectors, MAX_QL_ITER)
    if status:
        raise ConvergenceError(
            f"QL iteration did not converge for eigenvalue {status - 1} of {n}",
            {"iterations": int(iters), "converged": int(status - 1), "partial_eigenvalues": np.sort(d[:status - 1])},
        )
    order = np.argsort(d, kind="stable")
    w = np.ldexp(d[order], shift)
    if not want_vectors:
        return w, None, {"iterations": int(iters)}
    kern["back_transform"](refl, zt)
    return w, np.ascontiguousarray(zt[order].T), {"iterations": int(iters)}


def eigendecompose(op, want_vectors=True, backend=None, check=True, symbol="h") -> SpectrumRecord:
    """Full spectrum of a Hermitian operator with residual and trace certificates.

    ``backend`` is ``"numba"`` or ``"numpy"`` (the in-house Householder/QL
    kernels) or ``"lapack"`` (``numpy.linalg.eigh``); by default the in-house
    kernels selected by the numba switch. Real symmetric input takes the real
    path; genuinely complex Hermitian input is handled by LAPACK.
    With ``check`` a failed certificate raises :class:`NumericalError`.
    """
    backend = backend or backend_name()
    if backend not in ("numba", "numpy", "lapack"):
        raise PreconditionError(f"unknown eigen backend {backend!r}")
    a_real, scale = _as_symmetric(op)
    geom = op.geometry if isinstance(op, QuantumOperator) else None
    route = op.assembly_route if isinstance(op, QuantumOperator) else None
    t0 = time.perf_counter()
    if a_real is None:
        backend = "lapack"
        a = np.asarray(op.matrix if isinstance(op, QuantumOperator) else op)
        if want_vectors:
            w, vecs = np.linalg.eigh(a)
        else:
            w, vecs = np.linalg.eigvalsh(a), None
        info = {"iterations": None}
    else:
        a = a_real
        w, vecs, info = _real_eigh(a, want_vectors, backend)
    elapsed = time.perf_counter() - t0

    n = a.shape[0]
    # certificates on a power-of-two rescaled copy so norms cannot overflow
    shift = math.frexp(scale)[1] if scale > 0 else 0
    if np.iscomplexobj(a):
        a_s = np.ldexp(a.real, -shift) + 1j * np.ldexp(a.imag, -shift)
    else:
        a_s = np.ldexp(a, -shift)
    w_s = np.ldexp(w, -shift)
    norm = math.ldexp(spectral_norm_estimate(a_s), shift)
    trace_defect = math.ldexp(abs(float(np.sum(w_s)) - float(np.real(np.trace(a_s)))), shift)
    max_res = orth = None
    if vecs is not None:
        resid = a_s @ vecs - vecs * w_s[None, :]
        max_res = math.ldexp(float(np.max(np.linalg.norm(resid, axis=0))), shift) if n else 0.0
        orth = float(np.max(np.abs(vecs.conj().T @ vecs - np.eye(n)))) if n else 0.0
    meta = {
        "solver": solver_tag(backend),
        "iterations": info["iterations"],
        "wall_time_s": round(elapsed, 6),
        "max_abs_entry": scale,
    }
    if geom is None:
        geom = make_geometry(max(n, 1))
    rec = SpectrumRecord(
        geometry=geom,
        assembly_route=route.value if isinstance(route, AssemblyRoute) else route,
        eigenvalues=w,
        max_residual=max_res,
        orthogonality_defect=orth,
        norm_estimate=norm,
        trace_defect=trace_defect,
        symbol=symbol,
        solver_metadata=meta,
        eigenvectors=vecs,
    )
    if check:
        problems = []
        if max_res is not None and max_res > CERT_TOL * max(norm, 1e-300) and max_res > 0:
            problems.append(f"max residual {max_res:.3e} > {CERT_TOL:g} * {norm:.3e}")
        if orth is not None and orth > CERT_TOL:
            problems.append(f"orthogonality defect {orth:.3e}")
        if trace_defect > CERT_TOL * n * max(scale, 1e-300) and trace_defect > 0:
            problems.append(f"trace defect {trace_defect:.3e}")
        if problems:
            raise NumericalError("eigendecomposition certificate failed: " + "; ".join(problems))
    return rec
