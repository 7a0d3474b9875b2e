"""Classical orbit data of ``h = (xi^2 - x^2)/2`` on the torus and the leading semiclassical densities.

For ``E > 0`` on a connected energy surface the primitive orbit runs along the
hyperbola ``xi^2 - x^2 = 2E`` between the turning points
``x = +-sqrt(ell_xi^2/4 - 2E)`` on the lines ``xi = +-ell_xi/2``. Negative
energies follow from the swap ``x <-> xi``, ``E -> -E``. On a two-component
surface each component winds once around the torus in ``x`` and the density
counts both orbits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lattice import LatticeGeometry

# Below this z = sqrt(ell^2/(8E) - 1) the action uses its series expansion.
_SERIES_Z = 1e-3
DEFAULT_FLOOR = 1e-8


class Connectivity(str, enum.Enum):
    CONNECTED = "Connected"
    TWO_COMPONENTS = "TwoComponents"
    EMPTY = "Empty"


@dataclass(frozen=True)
class EnergySurfaceClass:
    energy: float
    connectivity: Connectivity
    orbit_count: int


def classify_surface(geom: LatticeGeometry, E: float) -> EnergySurfaceClass:
    lx2, lxi2 = geom.ell_x**2, geom.ell_xi**2
    if E < -lx2 / 8 or E > lxi2 / 8:
        return EnergySurfaceClass(E, Connectivity.EMPTY, 0)
    split = (lxi2 - lx2) / 8
    if (geom.ell_xi > geom.ell_x and 0 < E < split) or (geom.ell_x > geom.ell_xi and split < E < 0):
        return EnergySurfaceClass(E, Connectivity.TWO_COMPONENTS, 2)
    return EnergySurfaceClass(E, Connectivity.CONNECTED, 1)


def _oriented(geom, E, floor):
    """Map to ``E > 0`` (swapping the lengths for negative ``E``) and validate."""
    lx, lxi = geom.ell_x, geom.ell_xi
    if E < 0:
        lx, lxi, E = lxi, lx, -E
    if E > lxi**2 / 8:
        raise DomainError(f"energy {E!r} lies outside the classical range (max {lxi**2 / 8!r})")
    if E <= floor * lxi**2:
        return lx, lxi, E, True
    return lx, lxi, E, False


def _two_components(lx, lxi, E):
    return lxi > lx and E < (lxi**2 - lx**2) / 8


def _turning_z(lxi, E):
    # sqrt(ell_xi^2/(8E) - 1) written without the cancellation near the top of the band
    return math.sqrt(max(lxi**2 - 8 * E, 0.0) / (8 * E))


def action(geom: LatticeGeometry, E: float, floor: float = DEFAULT_FLOOR) -> float:
    """Action ``S_p = oint xi dx`` of one primitive orbit.

    Connected surface: ``4E (arsinh z - z sqrt(1+z^2))`` with ``z = sqrt(ell_xi^2/(8E) - 1)``,
    which is ``4E arsinh z - (ell_xi/2) sqrt(ell_xi^2 - 8E)``. Two components:
    ``(ell_x/2) sqrt(ell_x^2/4 + 2E) + 2E arsinh(ell_x/sqrt(8E))``.
    For ``E < 0`` the swap ``x <-> xi`` reverses orientation, so the sign flips
    and ``dS/dE = t_p`` holds on both sides. ``E = 0`` lies on the separatrix and is rejected.
    """
    if E == 0:
        raise DomainError("the action is undefined on the separatrix E = 0")
    lx, lxi, e, _ = _oriented(geom, E, floor)
    sign = 1.0 if E > 0 else -1.0
    if _two_components(lx, lxi, e):
        return sign * (0.5 * lx * math.sqrt(lx**2 / 4 + 2 * e) + 2 * e * math.asinh(lx / math.sqrt(8 * e)))
    z = _turning_z(lxi, e)
    if z < _SERIES_Z:
        z2 = z * z
        # asinh z - z sqrt(1+z^2) = -2/3 z^3 + 1/5 z^5 - 3/28 z^7 + ...
        return sign * 4 * e * z**3 * (-2.0 / 3 + z2 * (1.0 / 5 - z2 * 3.0 / 28))
    return sign * 4 * e * (math.asinh(z) - z * math.sqrt(1 + z * z))


def period(geom: LatticeGeometry, E: float, floor: float = DEFAULT_FLOOR) -> float:
    """Period ``t_p = dS_p/dE``; ``4 arsinh sqrt(ell_xi^2/(8E) - 1)`` on a connected surface.

    Returns ``math.inf`` when ``|E|`` is below ``floor * ell^2`` (logarithmic separatrix divergence).
    """
    lx, lxi, e, at_floor = _oriented(geom, E, floor)
    if at_floor:
        return math.inf
    if _two_components(lx, lxi, e):
        return 2 * math.asinh(lx / math.sqrt(8 * e))
    return 4 * math.asinh(_turning_z(lxi, e))


def local_density(geom: LatticeGeometry, E: float, floor: float = DEFAULT_FLOOR) -> float:
    """Leading-order density ``(sum over primitive orbits of t_p) / (2 pi hbar)``."""
    t = period(geom, E, floor)
    return classify_surface(geom, E).orbit_count * t / (2 * math.pi * geom.hbar)


def counting_estimate(geom: LatticeGeometry, E: float, r: float, floor: float = DEFAULT_FLOOR) -> float:
    """Expected ``#{n : |E_n - E| <= r hbar}``, i.e. ``(r/pi) t_p`` per primitive orbit."""
    if r < 0:
        raise DomainError(f"window r must be non-negative, got {r!r}")
    return 2 * r * geom.hbar * local_density(geom, E, floor)


# ---------------------------------------------------------------------------
# length-energy link (hbar = 1 units)


def bk_link_length(E: float, hbar: float = 1.0) -> float:
    """``ell_xi = (E + 2 pi)/sqrt(pi)``, stated for ``hbar = 1`` only."""
    if hbar != 1:
        raise DomainError("the length-energy link is only defined in units with hbar = 1")
    length = (E + 2 * math.pi) / math.sqrt(math.pi)
    if not length > 0:
        raise DomainError(f"energy {E!r} gives a non-positive length")
    return length


def energy_of_N(N: int) -> float:
    """Energy at which ``sqrt(2 pi N)`` equals the linked length: ``pi sqrt(2N) - 2 pi``."""
    return math.pi * math.sqrt(2 * N) - 2 * math.pi


def linked_period(E: float) -> float:
    """``t_p(E) = 2 log(E/2pi)`` under the length-energy link, ``E >= 2 pi``."""
    if E < 2 * math.pi:
        raise DomainError(f"linked period needs E >= 2 pi, got {E!r}")
    return 2 * math.log(E / (2 * math.pi))


def linked_action(E: float) -> float:
    """Action of the connected orbit with ``ell_xi`` tied to ``E`` (``hbar = 1``), from the general formula."""
    if not E > 0:
        raise DomainError(f"linked action needs E > 0, got {E!r}")
    z = _turning_z(bk_link_length(E), E)
    return 4 * E * (math.asinh(z) - z * math.sqrt(1 + z * z))


def mean_density(E: float) -> float:
    """``(1/pi) log(E/2pi)`` for ``E >= 2 pi``."""
    return linked_period(E) / (2 * math.pi)


# ---------------------------------------------------------------------------
# bundle


@dataclass(frozen=True)
class SemiclassicalProfile:
    """Vectorised evaluation of the orbit data over an energy grid."""

    geometry: LatticeGeometry | None = None
    floor: float = DEFAULT_FLOOR

    @property
    def linked(self):
        return self.geometry is None

    def _map(self, fn, E):
        return np.array([fn(float(e)) for e in np.atleast_1d(E)])

    def action(self, E):
        if self.linked:
            return self._map(linked_action, E)
        return self._map(lambda e: action(self.geometry, e, self.floor), E)

    def period(self, E):
        if self.linked:
            return self._map(linked_period, E)
        return self._map(lambda e: period(self.geometry, e, self.floor), E)

    def density(self, E):
        if self.linked:
            return self._map(mean_density, E)
        return self._map(lambda e: local_density(self.geometry, e, self.floor), E)

    def connectivity(self, E):
        if self.linked:
            return [Connectivity.CONNECTED] * np.atleast_1d(E).size
        return [classify_surface(self.geometry, float(e)).connectivity for e in np.atleast_1d(E)]
