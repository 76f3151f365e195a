"""Spring-suspended parallel-plate actuator driven by the dispersion force.

The movable plate sits at normalized displacement ``delta``; the gap is
``d = (1 - delta) x0``.  Equilibrium balances the spring against the vacuum
pressure ``f(d)`` (a magnitude):

    K x0 delta = A f((1 - delta) x0)   <=>   Xi = A / K = x0 delta / f((1 - delta) x0)

so the bifurcation curve Xi(delta) is obtained by inverting the balance and its
maximum is the fold (pull-in) point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .lifshitz import (DEFAULT_SETTINGS, PlateConfiguration, casimir_t0_pressure,
                       large_distance_pressure_cc, lifshitz_pressure, pressure_curve,
                       short_distance_pressure)
from .units import C, HBAR, K_B

__all__ = [
    "MIN_GAP", "DeviceConfig", "PotentialProfile", "BifurcationCurve", "FoldError",
    "InterpolationError", "PowerLawForce", "LifshitzForce", "force_law",
    "total_potential", "potential_profile", "equilibria", "bifurcation_curve",
    "critical_delta", "delta0_sweep", "casimir_t0_force", "asymptotic_force",
]

# closest approach allowed; continuum Lifshitz theory is meaningless below it
MIN_GAP = 0.5e-9
SCAN_POINTS = 512


class FoldError(ValueError):
    """Xi(delta) is not single-peaked below contact."""


class InterpolationError(RuntimeError):
    """Tabulated force disagrees with a direct evaluation at a reported root."""


@dataclass(frozen=True)
class PowerLawForce:
    """Pressure magnitude ``coefficient / d**exponent``."""

    coefficient: float
    exponent: float

    def __post_init__(self):
        if not (self.coefficient > 0 and self.exponent > 1):
            raise ValueError("need coefficient > 0 and exponent > 1")

    def pressure(self, d):
        return self.coefficient / np.asarray(d, dtype=float) ** self.exponent

    def energy(self, d):
        d = np.asarray(d, dtype=float)
        return -self.coefficient / ((self.exponent - 1) * d ** (self.exponent - 1))

    def log_slope(self, d):
        return np.full_like(np.asarray(d, dtype=float), -self.exponent)

    def check(self, d, rtol=1e-4):
        pass


class LifshitzForce:
    """Lifshitz pressure and free energy tabulated on a log-spaced grid.

    Both are interpolated with cubic splines in log-log coordinates; ``check``
    compares the interpolant with a direct evaluation.
    """

    def __init__(self, plate_config, d_min=MIN_GAP, d_max=1e-4, points_per_decade=256,
                 settings=DEFAULT_SETTINGS, workers=1):
        if not 0 < d_min < d_max:
            raise ValueError("need 0 < d_min < d_max")
        self.plate_config = plate_config
        self.settings = settings
        self.d_min, self.d_max = float(d_min), float(d_max)
        n = max(int(math.ceil(math.log10(d_max / d_min) * points_per_decade)) + 1, 4)
        self.distances = np.geomspace(d_min, d_max, n)
        results = pressure_curve(plate_config, self.distances, settings, workers=workers)
        self.pressures = np.array([r.pressure for r in results])
        self.energies = np.array([r.free_energy_per_area for r in results])
        if np.any(self.pressures >= 0) or np.any(self.energies >= 0):
            raise ValueError("force table requires a strictly attractive interaction")
        log_d = np.log(self.distances)
        self._log_p = CubicSpline(log_d, np.log(-self.pressures))
        self._log_e = CubicSpline(log_d, np.log(-self.energies))

    def _log_d(self, d):
        d = np.asarray(d, dtype=float)
        # tolerate round-off at the table ends
        if np.any(d < self.d_min * (1 - 1e-12)) or np.any(d > self.d_max * (1 + 1e-12)):
            raise ValueError(f"separation outside tabulated range [{self.d_min:.3e}, "
                             f"{self.d_max:.3e}] m")
        return np.log(np.clip(d, self.d_min, self.d_max))

    def pressure(self, d):
        return np.exp(self._log_p(self._log_d(d)))

    def energy(self, d):
        return -np.exp(self._log_e(self._log_d(d)))

    def log_slope(self, d):
        """d ln f / d ln d of the interpolated pressure magnitude."""
        return self._log_p(self._log_d(d), 1)

    def check(self, d, rtol=1e-4):
        direct = -lifshitz_pressure(self.plate_config, float(d), self.settings).pressure
        interp = float(self.pressure(d))
        if abs(interp - direct) > rtol * direct:
            raise InterpolationError(
                f"interpolated pressure {interp:.6e} vs direct {direct:.6e} at d={d:.6e} m")


@lru_cache(maxsize=32)
def _cached_table(plate_config, d_min, d_max, points_per_decade, settings):
    return LifshitzForce(plate_config, d_min, d_max, points_per_decade, settings)


def force_law(force, d_min=MIN_GAP, d_max=1e-4, points_per_decade=256,
              settings=DEFAULT_SETTINGS):
    """Force-law object for ``force``: tabulates a PlateConfiguration on demand."""
    if isinstance(force, PlateConfiguration):
        return _cached_table(force, float(d_min), float(d_max), points_per_decade, settings)
    return force


def casimir_t0_force():
    """Ideal-metal zero-temperature Casimir law, d^-4."""
    return PowerLawForce(-casimir_t0_pressure(1.0), 4.0)


def asymptotic_force(plate_config, x0):
    """d^-3 law from the small-d (non-retarded) or large-d (thermal) limit.

    The small-d form is used below the thermal wavelength hbar c / kT.
    """
    thermal_wavelength = HBAR * C / (K_B * plate_config.temperature)
    if x0 < thermal_wavelength:
        coeff = -short_distance_pressure(plate_config, 1.0)
    else:
        coeff = -large_distance_pressure_cc(plate_config.temperature, 1.0)
    return PowerLawForce(coeff, 3.0)


@dataclass(frozen=True)
class DeviceConfig:
    spring_k: float
    area: float
    x0: float
    plate_config: PlateConfiguration | None = None

    def __post_init__(self):
        for name in ("spring_k", "area", "x0"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be > 0, got {value}")

    @property
    def xi(self):
        """Area-to-stiffness ratio A/K in m^3/N."""
        return self.area / self.spring_k


@dataclass(frozen=True)
class PotentialProfile:
    deltas: np.ndarray
    energies: np.ndarray
    extrema: tuple[tuple[float, float, str], ...]
    offset: float


@dataclass(frozen=True)
class BifurcationCurve:
    deltas: np.ndarray
    xis: np.ndarray
    fold: tuple[float, float]
    stable_mask: np.ndarray


def _max_delta(x0, min_gap):
    top = 1.0 - min_gap / x0
    if top <= 0:
        raise FoldError(f"x0={x0:.3e} m is below the minimum gap {min_gap:.3e} m")
    return top


def _resolve(config_or_x0, force, min_gap):
    # table spans every gap the plate can reach
    x0 = config_or_x0
    return force_law(force, d_min=min_gap, d_max=x0) if isinstance(
        force, PlateConfiguration) else force


def total_potential(config, delta, force=None, min_gap=MIN_GAP):
    """U(delta) = K (x0 delta)^2 / 2 + A E((1 - delta) x0), in joules."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta >= 1):
        raise ValueError("delta >= 1 means the plates are in contact")
    if np.any(delta < 0):
        raise ValueError("delta must be >= 0")
    law = _resolve(config.x0, force if force is not None else config.plate_config, min_gap)
    d = (1.0 - delta) * config.x0
    out = 0.5 * config.spring_k * (config.x0 * delta) ** 2 + config.area * law.energy(d)
    return out if out.ndim else float(out)


def _balance(config, law):
    k, a, x0 = config.spring_k, config.area, config.x0

    def g(delta):
        return k * x0 * delta - a * law.pressure((1.0 - delta) * x0)
    return g


def equilibria(config, force=None, min_gap=MIN_GAP, check=True):
    """Equilibrium displacements below contact with their stability.

    Returns a list of ``(delta, kind)`` with kind ``"stable"``, ``"unstable"``
    or ``"marginal"`` (tangency at the fold).  An empty list means the plate
    snaps in from every position.
    """
    law = _resolve(config.x0, force if force is not None else config.plate_config, min_gap)
    top = _max_delta(config.x0, min_gap)
    g = _balance(config, law)
    # g = K f (Xi(delta) - A/K): negative outside the window where the curve
    # exceeds the device Xi, so with a single peak the fold brackets both roots
    delta0, xi0 = critical_delta(config.x0, law, min_gap)
    if abs(config.xi / xi0 - 1.0) < 1e-12:
        roots = [(delta0, "marginal")]
    elif config.xi > xi0:
        roots = []
    else:
        roots = [(float(brentq(g, 0.0, delta0, xtol=1e-15, maxiter=200)), "stable")]
        if g(top) < 0:
            roots.append((float(brentq(g, delta0, top, xtol=1e-15, maxiter=200)), "unstable"))
    if check:
        for root, _ in roots:
            law.check((1.0 - root) * config.x0)
    return roots


def potential_profile(config, deltas=None, force=None, min_gap=MIN_GAP):
    """Sampled U(delta) - U(0) with the local extrema below contact."""
    law = _resolve(config.x0, force if force is not None else config.plate_config, min_gap)
    top = _max_delta(config.x0, min_gap)
    if deltas is None:
        deltas = np.linspace(0.0, top, SCAN_POINTS)
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) <= 0):
        raise ValueError("deltas must be strictly increasing")
    offset = total_potential(config, 0.0, law)
    energies = total_potential(config, deltas, law) - offset
    extrema = tuple(
        (delta, total_potential(config, delta, law) - offset,
         "min" if kind == "stable" else "max")
        for delta, kind in equilibria(config, law, min_gap))
    return PotentialProfile(deltas, energies, extrema, offset)


def _xi_of_delta(x0, law):
    def xi(delta):
        return x0 * delta / law.pressure((1.0 - delta) * x0)
    return xi


def critical_delta(x0, force, min_gap=MIN_GAP, scan_points=SCAN_POINTS):
    """Fold point (delta0, Xi0) maximizing Xi(delta) = x0 delta / f((1-delta) x0).

    Raises FoldError if Xi is not single-peaked or peaks at the contact guard.
    """
    if not x0 > 0:
        raise ValueError("x0 must be > 0")
    law = _resolve(x0, force, min_gap)
    top = _max_delta(x0, min_gap)
    xi = _xi_of_delta(x0, law)
    grid = np.linspace(0.0, top, scan_points + 1)[1:]
    values = xi(grid)
    steps = np.sign(np.diff(values))
    steps = steps[steps != 0]
    turns = np.count_nonzero(steps[1:] != steps[:-1])
    i = int(np.argmax(values))
    if turns > 1:
        raise FoldError(f"Xi(delta) has {turns} turning points at x0={x0:.3e} m")
    if i == len(grid) - 1:
        raise FoldError(f"fold lies beyond the minimum gap at x0={x0:.3e} m")
    lo = grid[i - 1] if i > 0 else grid[0] / 2
    hi = grid[i + 1]
    delta0 = _stationary_point(x0, law, lo, hi)
    return delta0, float(xi(delta0))


def _stationary_point(x0, law, lo, hi):
    # d ln Xi / d delta = 0  <=>  (1 - delta) + s delta = 0, s = d ln f / d ln d
    slope = getattr(law, "log_slope", None)
    if slope is None:
        def slope(d, h=1e-6):
            return (math.log(law.pressure(d * (1 + h))) - math.log(law.pressure(d * (1 - h)))) / (
                math.log1p(h) - math.log1p(-h))

    def h(delta):
        return (1.0 - delta) + float(slope((1.0 - delta) * x0)) * delta
    return float(brentq(h, lo, hi, xtol=1e-15, maxiter=200))


def bifurcation_curve(x0, force, delta_grid=None, min_gap=MIN_GAP):
    """Xi(delta) over ``delta_grid`` with the fold and stable-branch mask."""
    law = _resolve(x0, force, min_gap)
    top = _max_delta(x0, min_gap)
    if delta_grid is None:
        delta_grid = np.linspace(0.0, top, SCAN_POINTS + 1)[1:]
    delta_grid = np.asarray(delta_grid, dtype=float)
    if len(delta_grid) < 100:
        raise ValueError("bifurcation grid needs at least 100 points")
    if np.any(delta_grid <= 0) or np.any(delta_grid > top) or np.any(np.diff(delta_grid) <= 0):
        raise ValueError(f"delta grid must be increasing inside (0, {top:.6g}]")
    xis = _xi_of_delta(x0, law)(delta_grid)
    fold = critical_delta(x0, law, min_gap)
    return BifurcationCurve(delta_grid, xis, fold, delta_grid < fold[0])


def delta0_sweep(x0_values, forces, min_gap=MIN_GAP):
    """Critical displacement for every x0 and every named force law.

    ``forces`` maps a column name to a PlateConfiguration, a force-law object,
    or a callable ``x0 -> force law``.  Returns one dict per x0, in input order;
    entries are NaN where the fold is not resolvable below contact.
    """
    x0_values = [float(x) for x in x0_values]
    laws = {}
    for name, force in forces.items():
        if isinstance(force, PlateConfiguration):
            laws[name] = force_law(force, d_min=min_gap, d_max=max(x0_values))
        else:
            laws[name] = force
    rows = []
    for x0 in x0_values:
        row = {"x0": x0}
        for name, law in laws.items():
            if callable(law) and not hasattr(law, "pressure"):
                law = law(x0)
            try:
                row[name] = critical_delta(x0, law, min_gap)[0]
            except FoldError:
                row[name] = math.nan
        rows.append(row)
    return rows
