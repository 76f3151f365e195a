"""Finite-temperature Lifshitz forces between GeTe phase-change plates and the
stability of a spring-suspended actuator driven by them."""

from .device import (DeviceConfig, LifshitzForce, PowerLawForce, bifurcation_curve,
                     critical_delta, delta0_sweep, equilibria, potential_profile,
                     total_potential)
from .dielectric import (DIVERGENT, ConfigError, MaterialPhase, OscillatorModel, Phase,
                         SpectrumError, TabulatedSpectrum, default_materials,
                         eps_imaginary_axis, load_materials, load_spectrum, london_transform)
from .lifshitz import (ConvergenceError, ForceResult, LifshitzSettings, MatsubaraGrid,
                       PlateConfiguration, casimir_t0_pressure, large_distance_pressure_aa,
                       large_distance_pressure_cc, lifshitz_pressure, pressure_curve,
                       relative_difference, short_distance_pressure)

__version__ = "0.1.0"
