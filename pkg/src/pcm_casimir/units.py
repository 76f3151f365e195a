"""Physical constants and the single eV <-> rad/s conversion boundary."""

from scipy.constants import Boltzmann, c, e, epsilon_0, m_e

__all__ = [
    "HBAR", "C", "K_B", "E_CHARGE", "EPS0", "M_E",
    "EV", "ev_to_rad", "rad_to_ev", "plasma_frequency",
]

# truncated CODATA value, fixed so results are reproducible across scipy releases
HBAR = 1.054571817e-34
C = c
K_B = Boltzmann
E_CHARGE = e
EPS0 = epsilon_0
M_E = m_e

# angular frequency (rad/s) of a photon of energy 1 eV
EV = E_CHARGE / HBAR


def ev_to_rad(energy_ev):
    return energy_ev * EV


def rad_to_ev(omega):
    return omega / EV


def plasma_frequency(carrier_density_cm3, effective_mass=0.3):
    """Free-carrier plasma frequency in rad/s.

    Parameters
    ----------
    carrier_density_cm3 : float
        Carrier density in cm^-3.
    effective_mass : float
        Carrier effective mass in units of the electron mass.
    """
    n = carrier_density_cm3 * 1e6
    return (n * E_CHARGE**2 / (EPS0 * effective_mass * M_E)) ** 0.5
