"""Empirical spectral statistics: histograms, the K-nearest density estimator, local counts,
spectral symmetry and the scaling-regime sweep for ``op_N(a)``."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .lattice import make_geometry
from .symbols import analytic_spectrum_a


def _values(spectrum):
    return np.asarray(getattr(spectrum, "eigenvalues", spectrum), dtype=np.float64)


class Normalisation(str, enum.Enum):
    COUNTS = "Counts"
    DENSITY = "Density"


@dataclass(frozen=True)
class HistogramSpec:
    e_min: float
    e_max: float
    bin_count: int
    normalisation: Normalisation = Normalisation.DENSITY

    def __post_init__(self):
        if not self.e_min < self.e_max:
            raise DomainError(f"empty histogram range [{self.e_min}, {self.e_max}]")
        if int(self.bin_count) != self.bin_count or self.bin_count < 1:
            raise DomainError(f"bin_count must be a positive integer, got {self.bin_count!r}")
        object.__setattr__(self, "normalisation", Normalisation(self.normalisation))

    @property
    def edges(self):
        return np.linspace(self.e_min, self.e_max, self.bin_count + 1)

    @property
    def width(self):
        return (self.e_max - self.e_min) / self.bin_count


def default_bins(N):
    return math.ceil(math.sqrt(N))


def histogram(spectrum, spec: HistogramSpec):
    """``(bin_centers, values)``; density mode divides counts by the bin width.

    Eigenvalues equal to ``e_max`` fall into the last bin.
    """
    counts, edges = np.histogram(_values(spectrum), bins=spec.edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    if spec.normalisation is Normalisation.DENSITY:
        return centers, counts / spec.width
    return centers, counts.astype(float)


def nearest_k(spectrum, E, K):
    """The ``K`` eigenvalues closest to ``E``; ties go to the smaller eigenvalue."""
    lam = _values(spectrum)
    if K > lam.size:
        raise DomainError(f"K={K} exceeds the number of eigenvalues {lam.size}")
    order = np.lexsort((lam, np.abs(lam - E)))
    return np.sort(lam[order[:K]])


def dk_estimate(spectrum, E: float, K: int) -> float:
    """``(K - 1) / (E_max^K - E_min^K)`` over the ``K`` eigenvalues nearest ``E``."""
    if int(K) != K or K < 2:
        raise DomainError(f"K must be an integer >= 2, got {K!r}")
    sel = nearest_k(spectrum, E, int(K))
    span = sel[-1] - sel[0]
    if span <= 0:
        raise DomainError(f"degenerate window: the {K} nearest eigenvalues coincide at {sel[0]!r}")
    return (K - 1) / span


def local_count(spectrum, E: float, r: float, hbar: float = 1.0) -> int:
    """``#{n : |E_n - E| <= r hbar}``."""
    if not r > 0:
        raise DomainError(f"r must be positive, got {r!r}")
    lam = _values(spectrum)
    return int(np.count_nonzero(np.abs(lam - E) <= r * hbar))


def symmetry_defect(spectrum) -> float:
    """``max_i |lam_i + lam_{N+1-i}| / max |lam|`` for a spectrum with ``ell_x == ell_xi``."""
    geom = getattr(spectrum, "geometry", None)
    if geom is not None and not geom.is_symmetric:
        raise PreconditionError("spectral symmetry only holds for ell_x == ell_xi")
    lam = np.sort(_values(spectrum))
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(lam + lam[::-1]))) / scale


# ---------------------------------------------------------------------------
# scaling regimes ell_xi = A N^alpha, ell_x = B N^(1-alpha)


@dataclass(frozen=True)
class ScalingRegime:
    alpha: float
    A: float
    hbar: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not (self.A > 0 and self.hbar > 0):
            raise DomainError("A and hbar must be positive")

    @property
    def B(self):
        return 2 * math.pi * self.hbar / self.A

    def geometry(self, N):
        return make_geometry(N, self.B * N ** (1 - self.alpha), self.hbar)


class NuRule(str, enum.Enum):
    FIXED = "fixed"  # nu constant
    RANGE = "range"  # nu ~ N^(1 - alpha): fixed window of the spectrum
    EDGE = "edge"  # nu ~ N: fixed fraction of the spectral edge


def nu_for(rule, regime, N, nu0=1, fraction=0.25):
    rule = NuRule(rule)
    if rule is NuRule.FIXED:
        return int(nu0)
    if rule is NuRule.RANGE:
        return max(1, round(nu0 * N ** (1 - regime.alpha)))
    return max(1, int(fraction * N))


def spacing_exponent(rule, alpha):
    """Exponent ``p`` in ``s ~ N^p`` for the given ``nu`` rule."""
    base = 2 * alpha - 2
    return {NuRule.FIXED: base, NuRule.RANGE: base + (1 - alpha), NuRule.EDGE: base + 1}[NuRule(rule)]


def classify_exponent(p, tol=1e-12):
    if p < -tol:
        return "dense"
    if p > tol:
        return "sparse"
    return "constant"


def regime_sweep(regime: ScalingRegime, N_values, nu_rule="fixed", nu0=1, fraction=0.25):
    """Per-``N`` eigenvalue and spacing predictions, checked against :func:`analytic_spectrum_a`.

    Returns ``(rows, summary)``; ``rows`` are dicts, ``summary`` holds the
    predicted exponent, the fitted log-log slope and the density class.
    """
    rows = []
    for N in N_values:
        geom = regime.geometry(int(N))
        nu = nu_for(nu_rule, regime, N, nu0, fraction)
        if not 0 <= nu < N / 2 - 1:
            raise DomainError(f"nu={nu} is outside 0 <= nu < N/2 - 1 for N={N}")
        scale = regime.A**2 * N ** (2 * regime.alpha - 2)
        e_pred = scale * nu**2
        s_pred = scale * (2 * nu + 1)
        # independent closed form 2 pi hbar (ell_xi/ell_x) nu^2 / N and the exact spectrum
        e_alt = 2 * math.pi * geom.hbar * geom.ell_xi / geom.ell_x * nu**2 / N
        spec = analytic_spectrum_a(geom)
        lookup = dict(zip(spec.labels.tolist(), spec.eigenvalues.tolist()))
        e_exact, e_next = lookup[nu], lookup[nu + 1]
        rows.append({
            "N": int(N),
            "ell_xi": geom.ell_xi,
            "ell_x": geom.ell_x,
            "nu": nu,
            "E_pred": e_pred,
            "s_pred": s_pred,
            "E_exact": e_exact,
            "s_exact": e_next - e_exact,
            "rel_err": max(abs(e_alt - e_pred), abs(e_exact - e_pred)) / max(abs(e_pred), 1e-300),
        })
    p = spacing_exponent(nu_rule, regime.alpha)
    slope = None
    if len(rows) >= 2:
        x = np.log([r["N"] for r in rows])
        y = np.log([r["s_exact"] for r in rows])
        slope = float(np.polyfit(x, y, 1)[0])
    summary = {"alpha": regime.alpha, "nu_rule": NuRule(nu_rule).value, "exponent": p,
               "fitted_slope": slope, "behaviour": classify_exponent(p)}
    return rows, summary
