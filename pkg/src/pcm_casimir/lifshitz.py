"""Finite-temperature Lifshitz pressure and free energy between two half-spaces.

The k-integral of every Matsubara term is done in the variable
``u = 2 * gamma * d`` (gamma the vacuum wave number), for which

    gamma k dk = u^2 du / (8 d^3),        k dk = u du / (4 d^2)

and each polarisation contributes ``R e^{-u} / (1 - R e^{-u})`` (pressure) or
``ln(1 - R e^{-u})`` (free energy), with ``R`` the product of the two Fresnel
coefficients.  Terms are integrated in blocks of Matsubara indices with a
vector-valued adaptive quadrature and summed in index order, so results do not
depend on how the blocks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad_vec

from .dielectric import DIVERGENT, MaterialPhase
from .special import ZETA3, polylog3
from .units import C, HBAR, K_B

__all__ = [
    "PlateConfiguration", "LifshitzSettings", "MatsubaraGrid", "ForceResult",
    "ConvergenceError", "reflection_factors", "lifshitz_pressure",
    "pressure_curve", "short_distance_pressure", "large_distance_pressure_cc",
    "large_distance_pressure_aa", "casimir_t0_pressure", "relative_difference",
]


class ConvergenceError(RuntimeError):
    """Matsubara sum did not converge within ``max_terms``."""

    def __init__(self, separation, n_terms, partial_sum, tail_estimate):
        super().__init__(
            f"Matsubara sum not converged at d={separation:.6e} m after {n_terms} terms "
            f"(partial pressure {partial_sum:.6e} Pa, last block {tail_estimate:.3e} Pa)")
        self.separation = separation
        self.n_terms = n_terms
        self.partial_sum = partial_sum
        self.tail_estimate = tail_estimate


@dataclass(frozen=True)
class PlateConfiguration:
    material_1: MaterialPhase
    material_2: MaterialPhase
    temperature: float = 300.0
    drude_n0_te_zero: bool = True
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not (self.temperature > 0 and math.isfinite(self.temperature)):
            raise ValueError(f"temperature must be > 0 K, got {self.temperature}")

    @property
    def beta(self):
        return 1.0 / (K_B * self.temperature)


@dataclass(frozen=True)
class LifshitzSettings:
    """Numerical knobs.

    ``fixed_terms`` bypasses the adaptive truncation and sums exactly that many
    Matsubara terms (used for convergence studies and consistent finite
    differences).
    """

    quad_rtol: float = 1e-9
    matsubara_rtol: float = 1e-9
    max_terms: int = 20_000
    block_size: int = 64
    fixed_terms: int | None = None


DEFAULT_SETTINGS = LifshitzSettings()


@dataclass(frozen=True)
class MatsubaraGrid:
    temperature: float

    @property
    def spacing(self):
        return 2.0 * math.pi * K_B * self.temperature / HBAR

    def frequencies(self, start, stop):
        return self.spacing * np.arange(start, stop, dtype=float)

    @staticmethod
    def weights(start, stop):
        w = np.ones(stop - start)
        if start == 0 and stop > 0:
            w[0] = 0.5
        return w


@dataclass(frozen=True)
class ForceResult:
    separation: float
    pressure: float
    free_energy_per_area: float
    n_terms_used: int
    per_mode_split: tuple[float, float]

    @property
    def magnitude(self):
        return abs(self.pressure)


def _fresnel(eps, u, a, kappa2, coupling=None):
    """TM and TE reflection coefficients in the scaled variables.

    ``u = 2 gamma d``, ``a = 2 xi d / c``, ``kappa2 = (2 k d)^2``.  Written so
    that eps -> 1 and eps -> infinity are both free of cancellation.
    ``coupling`` overrides ``(2 d xi / c)^2 (eps - 1)`` in the TE wave number.
    """
    inf = np.isinf(eps)
    em1 = np.where(inf, 0.0, eps - 1.0)
    epsf = np.where(inf, 1.0, eps)
    if coupling is None:
        coupling = a * a * em1
    w = np.sqrt(u * u + coupling)
    r_tm = np.where(inf, 1.0, em1 * (epsf * u * u + kappa2) / (epsf * u + w) ** 2)
    r_te = -coupling / (u + w) ** 2
    return r_tm, r_te


def reflection_factors(eps1, eps2, k, xi, d):
    """Q_TM and Q_TE for one wave number ``k`` at imaginary frequency ``xi``.

    Divergent eps (``math.inf``) gives a TM Fresnel ratio of exactly 1; the TE
    ratio of a divergent eps at ``xi = 0`` is taken as 0.
    """
    if not d > 0:
        raise ValueError(f"separation must be > 0, got {d}")
    if k < 0 or xi < 0:
        raise ValueError("k and xi must be >= 0")
    for e in (eps1, eps2):
        if not e >= 1:
            raise ValueError(f"eps(i xi) must be >= 1, got {e}")
    a = 2.0 * xi * d / C
    kappa2 = (2.0 * k * d) ** 2
    u = math.sqrt(kappa2 + a * a)
    eps = np.array([eps1, eps2], dtype=float)
    r_tm, r_te = _fresnel(eps, u, a, kappa2)
    decay = math.exp(-u)
    q_tm = 1.0 - float(r_tm[0] * r_tm[1]) * decay
    q_te = 1.0 - float(r_te[0] * r_te[1]) * decay
    return q_tm, q_te


def _te_n0_coupling(material, d):
    """(2d/c)^2 lim xi^2 eps(i xi): TE coupling of the n = 0 term."""
    return (2.0 * d / C) ** 2 * material.xi2_eps_limit()


def _block_integrals(eps1, eps2, xi, d, n0_couplings, rtol, atol):
    """Integrals over u of the pressure/energy kernels for a block of terms.

    Returns an array (4, n): TM pressure, TE pressure, TM energy, TE energy
    kernels, i.e. int u^2 x/(1-x) du and int u ln(1-x) du with x = R e^{-u}.
    ``n0_couplings`` is given when the block starts at n = 0.
    """
    out_all = np.zeros((4, len(xi)))
    # a plate with eps = 1 reflects nothing; skipping it also spares quad_vec
    # an identically zero integrand, which it cannot bound relatively
    active = np.nonzero((eps1 != 1.0) & (eps2 != 1.0))[0]
    if len(active) == 0:
        return out_all
    with_n0 = n0_couplings is not None and active[0] == 0
    eps1, eps2, xi = eps1[active], eps2[active], xi[active]
    a = 2.0 * xi * d / C
    n = len(xi)

    def integrand(t):
        u = a + t
        kappa2 = t * (t + 2.0 * a)
        r1_tm, r1_te = _fresnel(eps1, u, a, kappa2)
        r2_tm, r2_te = _fresnel(eps2, u, a, kappa2)
        if with_n0:
            # xi = 0: the TE wave number only sees lim xi^2 eps(i xi)
            c1, c2 = n0_couplings
            r1_te[0] = -c1 / (u[0] + math.sqrt(u[0] ** 2 + c1)) ** 2
            r2_te[0] = -c2 / (u[0] + math.sqrt(u[0] ** 2 + c2)) ** 2
        decay = np.exp(-u)
        out = np.empty((4, n))
        for i, (p, q) in enumerate(((r1_tm, r2_tm), (r1_te, r2_te))):
            x = p * q * decay
            out[i] = u * u * x / (1.0 - x)
            out[i + 2] = u * np.log1p(-x)
        return out.ravel()

    val, _ = quad_vec(integrand, 0.0, np.inf, epsrel=rtol, epsabs=atol, norm="max",
                      limit=20_000)
    out_all[:, active] = val.reshape(4, n)
    return out_all


def _sum_terms(config, d, settings):
    m1, m2 = config.material_1, config.material_2
    grid = MatsubaraGrid(config.temperature)
    n0_couplings = (_te_n0_coupling(m1, d), _te_n0_coupling(m2, d))
    metallic = any(np.isinf(m.eps(0.0)[0]) for m in (m1, m2))
    zero_te_n0 = config.drude_n0_te_zero and metallic

    totals = np.zeros(4)
    start = 0
    block = settings.block_size
    fixed = settings.fixed_terms
    while True:
        stop = start + block if fixed is None else min(start + block, fixed)
        xi = grid.frequencies(start, stop)
        atol = 0.0
        if start > 0:
            atol = 1e-2 * settings.quad_rtol * abs(totals[0] + totals[1])
        vals = _block_integrals(m1.eps(xi), m2.eps(xi), xi, d,
                                n0_couplings if start == 0 else None,
                                settings.quad_rtol, atol)
        weighted = vals * grid.weights(start, stop)
        if start == 0 and zero_te_n0:
            weighted[1, 0] = 0.0
            weighted[3, 0] = 0.0
        block_totals = weighted.sum(axis=1)
        totals = totals + block_totals
        start = stop
        if fixed is not None:
            if start >= fixed:
                break
            continue
        last_block = abs(block_totals[0] + block_totals[1])
        running = abs(totals[0] + totals[1])
        if last_block <= settings.matsubara_rtol * running:
            break
        if start >= settings.max_terms:
            scale = K_B * config.temperature / (math.pi * 8.0 * d**3)
            raise ConvergenceError(d, start, -scale * running, scale * last_block)
        block = min(2 * block, 4096)
    return totals, start


def lifshitz_pressure(config, d, settings=DEFAULT_SETTINGS):
    """Lifshitz pressure (Pa, negative = attractive) and free energy per area."""
    if not d > 0:
        raise ValueError(f"separation must be > 0, got {d}")
    totals, n_used = _sum_terms(config, d, settings)
    kT = 1.0 / config.beta
    p_scale = -kT / (math.pi * 8.0 * d**3)
    e_scale = kT / (2.0 * math.pi * 4.0 * d**2)
    p_tm, p_te = p_scale * totals[0], p_scale * totals[1]
    energy = e_scale * (totals[2] + totals[3])
    return ForceResult(separation=float(d), pressure=float(p_tm + p_te),
                       free_energy_per_area=float(energy), n_terms_used=int(n_used),
                       per_mode_split=(float(p_tm), float(p_te)))


def _pressure_task(args):
    config, d, settings = args
    return lifshitz_pressure(config, d, settings)


def pressure_curve(config, distances, settings=DEFAULT_SETTINGS, workers=1):
    """``lifshitz_pressure`` over many separations, results in input order."""
    tasks = [(config, float(d), settings) for d in distances]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_pressure_task, tasks, chunksize=4))
    return [_pressure_task(t) for t in tasks]


def _normal_ratio(eps):
    eps = np.asarray(eps, dtype=float)
    with np.errstate(invalid="ignore"):
        return np.where(np.isinf(eps), 1.0, (eps - 1.0) / (eps + 1.0))


def short_distance_pressure(config, d, rtol=1e-12, max_terms=200_000):
    """Non-retarded limit: -(1/4 pi beta d^3) sum'_n Li3(r1 r2), r = (eps-1)/(eps+1)."""
    if not d > 0:
        raise ValueError(f"separation must be > 0, got {d}")
    grid = MatsubaraGrid(config.temperature)
    total = 0.0
    start, block = 0, 256
    while True:
        xi = grid.frequencies(start, start + block)
        w = grid.weights(start, start + block)
        prod = _normal_ratio(config.material_1.eps(xi)) * _normal_ratio(config.material_2.eps(xi))
        block_sum = float(np.sum(w * polylog3(prod)))
        total += block_sum
        start += block
        if abs(block_sum) <= rtol * abs(total) or start >= max_terms:
            break
    return -total / (4.0 * math.pi * config.beta * d**3)


def large_distance_pressure_cc(temperature, d):
    """Thermal limit between two Drude metals: -zeta(3) kT / (8 pi d^3)."""
    if not (d > 0 and temperature > 0):
        raise ValueError("d and temperature must be > 0")
    return -ZETA3 * K_B * temperature / (8.0 * math.pi * d**3)


def large_distance_pressure_aa(temperature, d, eps_a0):
    """Thermal limit between two dielectrics with static permittivity ``eps_a0``."""
    if not (d > 0 and temperature > 0):
        raise ValueError("d and temperature must be > 0")
    if not eps_a0 >= 1:
        raise ValueError("static permittivity must be >= 1")
    r = float(_normal_ratio(eps_a0))
    return -K_B * temperature * polylog3(r * r) / (8.0 * math.pi * d**3)


def casimir_t0_pressure(d):
    """Zero-temperature ideal-metal Casimir pressure -hbar c pi^2 / (240 d^4)."""
    if not d > 0:
        raise ValueError(f"separation must be > 0, got {d}")
    return -HBAR * C * math.pi**2 / (240.0 * d**4)


def relative_difference(config_ref, config_alt, d, settings=DEFAULT_SETTINGS):
    """(F_alt - F_ref) / F_ref at separation ``d``."""
    if config_ref.temperature != config_alt.temperature:
        raise ValueError("configurations must share the temperature")
    ref = lifshitz_pressure(config_ref, d, settings).pressure
    if config_alt == config_ref:
        return 0.0
    alt = lifshitz_pressure(config_alt, d, settings).pressure
    return (alt - ref) / ref


def with_settings(settings, **changes):
    return replace(settings, **changes)
