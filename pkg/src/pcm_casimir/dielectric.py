"""Permittivity models for the two phases of a phase-change coating.

A material is described either by a Drude-Lorentz oscillator model or by a
tabulated absorption spectrum (photon energy in eV, Im eps).  Both are
evaluated on the imaginary frequency axis, where the Lifshitz sum needs them:

    eps(i w) = 1 + (2/pi) * int_0^inf Im[eps(y)] y / (y^2 + w^2) dy

All frequencies inside this module are angular frequencies in rad/s; eV only
appears at the parsing boundary (`load_spectrum`, `material_from_dict`).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .units import EV, ev_to_rad, plasma_frequency

__all__ = [
    "DIVERGENT", "Phase", "LorentzTerm", "OscillatorModel", "TabulatedSpectrum",
    "MaterialPhase", "SpectrumError", "ConfigError", "constant_permittivity", "eval_im_eps",
    "london_transform", "eps_imaginary_axis", "load_spectrum",
    "material_from_dict", "load_materials", "default_materials",
]

# value returned by eps(i*0) for a conductor
DIVERGENT = math.inf

QUAD_RTOL = 1e-8


class SpectrumError(ValueError):
    """Invalid tabulated spectrum (parse error or physical inconsistency)."""


class ConfigError(ValueError):
    """Invalid material/device/run configuration; `key` names the culprit."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class Phase(str, Enum):
    CRYSTALLINE = "crystalline"
    AMORPHOUS = "amorphous"


@dataclass(frozen=True)
class LorentzTerm:
    """One interband oscillator: strength in rad^2/s^2, center and damping in rad/s."""

    strength: float
    center: float
    damping: float

    def __post_init__(self):
        for name in ("strength", "center", "damping"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"Lorentz {name} must be finite and >= 0, got {value}")
        if self.strength > 0 and self.center == 0:
            raise ValueError("Lorentz term with nonzero strength needs a nonzero center")


@dataclass(frozen=True)
class OscillatorModel:
    """Drude term plus a sum of Lorentz oscillators.

    ``plasma_frequency == 0`` switches the free-carrier (Drude) term off.
    """

    plasma_frequency: float = 0.0
    drude_damping: float = 0.0
    lorentz_terms: tuple[LorentzTerm, ...] = ()

    def __post_init__(self):
        for name in ("plasma_frequency", "drude_damping"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        terms = tuple(t if isinstance(t, LorentzTerm) else LorentzTerm(*t)
                      for t in self.lorentz_terms)
        object.__setattr__(self, "lorentz_terms", terms)

    @property
    def has_drude(self):
        return self.plasma_frequency > 0

    def characteristic_frequencies(self):
        """Frequencies where Im eps has structure; used as quadrature breakpoints."""
        nu = []
        if self.has_drude and self.drude_damping > 0:
            nu.append(self.drude_damping)
        for t in self.lorentz_terms:
            if t.strength > 0:
                nu.append(t.center)
                # a narrow peak needs points on its flanks as well
                for width in (0.5, 4.0, 32.0):
                    if 0 < width * t.damping < t.center:
                        nu.extend([t.center - width * t.damping, t.center + width * t.damping])
        return sorted(set(nu))

    def xi2_eps_limit(self):
        """lim_{xi->0} xi^2 eps(i xi); nonzero only for a lossless Drude term."""
        if self.has_drude and self.drude_damping == 0:
            return self.plasma_frequency**2
        return 0.0


@dataclass(frozen=True, eq=False)
class TabulatedSpectrum:
    """Measured Im eps on a photon-energy grid, with tail extrapolation.

    ``low_tail`` is ``"constant"`` or ``"power-law"`` (Im eps ~ w**low_exponent
    below the first point); above the last point Im eps ~ w**high_exponent.
    """

    energies_ev: np.ndarray
    im_eps: np.ndarray
    low_tail: str = "constant"
    low_exponent: float = -1.0
    high_exponent: float = -3.0

    def __post_init__(self):
        energies = np.array(self.energies_ev, dtype=float)
        values = np.array(self.im_eps, dtype=float)
        if energies.ndim != 1 or energies.shape != values.shape:
            raise SpectrumError("energies and im_eps must be 1-d arrays of equal length")
        if len(energies) < 2:
            raise SpectrumError("spectrum needs at least 2 points")
        if not np.all(np.isfinite(energies)) or not np.all(np.isfinite(values)):
            raise SpectrumError("spectrum contains non-finite values")
        if energies[0] <= 0 or np.any(np.diff(energies) <= 0):
            raise SpectrumError("photon energies must be positive and strictly increasing")
        if np.any(values < 0):
            raise SpectrumError("negative Im eps violates passivity")
        if self.low_tail not in ("constant", "power-law"):
            raise SpectrumError(f"unknown low_tail rule {self.low_tail!r}")
        if self.high_exponent >= 0:
            raise SpectrumError("high_exponent must be negative for a convergent transform")
        if self.low_tail == "power-law" and self.low_exponent <= -2:
            raise SpectrumError("low_exponent must be > -2 for a convergent transform")
        energies.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "energies_ev", energies)
        object.__setattr__(self, "im_eps", values)

    @property
    def omegas(self):
        return self.energies_ev * EV

    @property
    def low_exponent_effective(self):
        return 0.0 if self.low_tail == "constant" else self.low_exponent

    def im_eps_at(self, omega):
        """Interpolated/extrapolated Im eps at angular frequency ``omega``."""
        omega = np.asarray(omega, dtype=float)
        w = self.omegas
        out = np.interp(omega, w, self.im_eps)
        lo = omega < w[0]
        hi = omega > w[-1]
        out = np.where(lo, self.im_eps[0] * (np.where(lo, omega, w[0]) / w[0])
                       ** self.low_exponent_effective, out)
        out = np.where(hi, self.im_eps[-1] * (np.where(hi, omega, w[-1]) / w[-1])
                       ** self.high_exponent, out)
        return out

    def diverges_at_zero(self):
        return self.im_eps[0] > 0 and self.low_exponent_effective <= 0

    def xi2_eps_limit(self):
        return 0.0


@dataclass(frozen=True)
class MaterialPhase:
    label: Phase
    model: OscillatorModel | TabulatedSpectrum
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "label", Phase(self.label))
        if not isinstance(self.model, (OscillatorModel, TabulatedSpectrum)):
            raise TypeError("model must be an OscillatorModel or a TabulatedSpectrum")

    def eps(self, xi):
        """eps(i xi) for an array of xi >= 0; DIVERGENT where it blows up."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if isinstance(self.model, OscillatorModel):
            return eps_imaginary_axis(self.model, xi)
        return london_transform(self.model, xi)

    def xi2_eps_limit(self):
        return self.model.xi2_eps_limit()


def constant_permittivity(value, cutoff=1e22):
    """Oscillator model with eps(i xi) = ``value`` for every xi far below ``cutoff``.

    A single Lorentz term at a huge center frequency; used as an ideal-metal
    proxy (value ~ 1e8) without special-casing infinities.
    """
    if value < 1:
        raise ValueError("a passive medium has eps(i xi) >= 1")
    return OscillatorModel(lorentz_terms=(LorentzTerm((value - 1.0) * cutoff**2, cutoff, 0.0),))


def eval_im_eps(model, omega):
    """Im eps(omega) on the real frequency axis for an oscillator model."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("Im eps is evaluated at omega > 0 only")
    out = np.zeros_like(omega)
    if model.has_drude and model.drude_damping > 0:
        g = model.drude_damping
        out = out + model.plasma_frequency**2 * g / (omega * (omega**2 + g**2))
    for t in model.lorentz_terms:
        if t.strength > 0 and t.damping > 0:
            out = out + t.strength * t.damping * omega / (
                (t.center**2 - omega**2) ** 2 + t.damping**2 * omega**2)
    return out if out.ndim else float(out)


def eps_imaginary_axis(model, xi):
    """Closed-form eps(i xi) of an oscillator model.

    Returns DIVERGENT at ``xi == 0`` when the model has a Drude term.
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("xi must be >= 0")
    out = np.ones_like(xi)
    if model.has_drude:
        with np.errstate(divide="ignore"):
            drude = model.plasma_frequency**2 / (xi * (xi + model.drude_damping))
        out = out + np.where(xi == 0, DIVERGENT, drude)
    for t in model.lorentz_terms:
        if t.strength > 0:
            out = out + t.strength / (t.center**2 + xi**2 + t.damping * xi)
    return out if out.ndim else float(out)


def london_transform(spectrum, omega):
    """eps(i omega) from Im eps on the real axis, by numerical quadrature.

    Works on oscillator models (numerical check of the closed form) and on
    tabulated spectra.  Accepts a scalar or an array of ``omega >= 0``.
    """
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr < 0):
        raise ValueError("omega must be >= 0")
    if isinstance(spectrum, OscillatorModel):
        fn = _london_oscillator
    elif isinstance(spectrum, TabulatedSpectrum):
        if np.any(spectrum.im_eps < 0):
            raise SpectrumError("negative Im eps violates passivity")
        fn = _london_tabulated
    else:
        raise TypeError(f"cannot transform {type(spectrum).__name__}")
    out = np.array([fn(spectrum, w) for w in omega_arr.ravel()]).reshape(omega_arr.shape)
    return out if out.ndim else float(out)


def _london_oscillator(model, omega):
    if omega == 0 and model.has_drude:
        return DIVERGENT
    nu = model.characteristic_frequencies()
    scale = omega if omega > 0 else (max(nu) if nu else 1.0)
    w2 = omega * omega

    def lower(s):
        y = scale * s
        return eval_im_eps(model, y) * scale**2 * s / (scale**2 * s * s + w2)

    def upper(s):
        y = scale / s
        return eval_im_eps(model, y) * scale**2 / (s * (scale**2 + w2 * s * s))

    pts_lo = [v / scale for v in nu if 0 < v < scale]
    pts_hi = [scale / v for v in nu if v > scale]
    total = 0.0
    if nu:
        for fn, pts in ((lower, pts_lo), (upper, pts_hi)):
            val, _ = quad(_guard(fn), 0.0, 1.0, points=pts or None,
                          epsrel=QUAD_RTOL, epsabs=0.0, limit=400)
            total += val
    total *= 2.0 / math.pi
    # undamped terms absorb as delta functions; their transform is closed form
    if model.has_drude and model.drude_damping == 0:
        total += model.plasma_frequency**2 / w2
    for t in model.lorentz_terms:
        if t.strength > 0 and t.damping == 0:
            total += t.strength / (t.center**2 + w2)
    return 1.0 + total


def _guard(fn):
    def wrapped(s):
        if s <= 0.0:
            return 0.0
        return fn(s)
    return wrapped


def _london_tabulated(spec, omega):
    y = spec.omegas
    f = spec.im_eps
    if omega == 0 and spec.diverges_at_zero():
        return DIVERGENT
    w2 = omega * omega
    # piecewise-linear interpolant integrated in closed form
    y1, y2 = y[:-1], y[1:]
    slope = np.diff(f) / np.diff(y)
    icpt = f[:-1] - slope * y1
    if omega > 0:
        log_part = 0.5 * np.log1p((y2**2 - y1**2) / (y1**2 + w2))
        atan_diff = np.arctan2((y2 - y1) * omega, w2 + y1 * y2)
        lin_part = (y2 - y1) - omega * atan_diff
    else:
        log_part = np.log(y2 / y1)
        lin_part = y2 - y1
    body = float(np.sum(icpt * log_part + slope * lin_part))

    a = omega / y[0]
    p = spec.low_exponent_effective
    if f[0] == 0:
        low = 0.0
    elif omega == 0:
        low = f[0] / p
    elif p == 0:
        low = 0.5 * f[0] * math.log1p(1.0 / (a * a))
    else:
        val, _ = quad(lambda s: s ** (p + 1) / (s * s + a * a), 0.0, 1.0,
                      points=[a] if a < 1 else None, epsrel=QUAD_RTOL, limit=200)
        low = f[0] * val

    b = omega / y[-1]
    q = spec.high_exponent
    val, _ = quad(lambda s: s ** (-q - 1) / (1.0 + b * b * s * s), 0.0, 1.0,
                  points=[1 / b] if b > 1 else None, epsrel=QUAD_RTOL, limit=200)
    high = f[-1] * val
    return 1.0 + (2.0 / math.pi) * (body + low + high)


def load_spectrum(path, low_tail="constant", low_exponent=-1.0, high_exponent=-3.0):
    """Read a two-column ``energy_eV,im_eps`` CSV into a TabulatedSpectrum.

    ``#`` lines are comments; a single non-numeric header row is allowed.
    Raises SpectrumError naming the offending line.
    """
    path = Path(path)
    energies, values = [], []
    header_seen = False
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if len(row) < 2:
                raise SpectrumError(f"{path}:{lineno}: expected two columns")
            try:
                energy, value = float(row[0]), float(row[1])
            except ValueError:
                if header_seen or energies:
                    raise SpectrumError(f"{path}:{lineno}: non-numeric row {row!r}") from None
                header_seen = True
                continue
            if not (math.isfinite(energy) and math.isfinite(value)):
                raise SpectrumError(f"{path}:{lineno}: non-finite value")
            if energy <= 0:
                raise SpectrumError(f"{path}:{lineno}: photon energy must be positive")
            if value < 0:
                raise SpectrumError(f"{path}:{lineno}: negative Im eps violates passivity")
            if energies and energy == energies[-1]:
                raise SpectrumError(f"{path}:{lineno}: duplicate energy {energy}")
            if energies and energy < energies[-1]:
                raise SpectrumError(f"{path}:{lineno}: energies must be increasing")
            energies.append(energy)
            values.append(value)
    if len(energies) < 4:
        raise SpectrumError(f"{path}: need at least 4 points, found {len(energies)}")
    return TabulatedSpectrum(np.array(energies), np.array(values), low_tail=low_tail,
                             low_exponent=low_exponent, high_exponent=high_exponent)


def _number(d, key, prefix, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"{prefix}.{key}", "missing")
        return default
    value = d[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{prefix}.{key}", f"expected a finite number, got {value!r}")
    if value < 0:
        raise ConfigError(f"{prefix}.{key}", "must be >= 0")
    return float(value)


def material_from_dict(d, name="material", base_dir=None):
    """Build a MaterialPhase from a JSON-style dict (eV units).

    Keys: ``phase``, ``plasma_frequency_eV`` (or ``carrier_density_cm3`` with
    ``effective_mass``), ``drude_damping_eV``, ``lorentz`` (list of
    ``strength_eV2``, ``center_eV``, ``damping_eV``); or ``spectrum`` (CSV path)
    with optional ``low_tail``, ``low_exponent``, ``high_exponent``.
    """
    if not isinstance(d, dict):
        raise ConfigError(name, "material definition must be an object")
    try:
        phase = Phase(str(d.get("phase", "")).lower())
    except ValueError:
        raise ConfigError(f"{name}.phase", f"expected crystalline|amorphous, got {d.get('phase')!r}")

    if "spectrum" in d:
        if any(k in d for k in ("plasma_frequency_eV", "lorentz", "carrier_density_cm3")):
            raise ConfigError(name, "give either oscillator parameters or a spectrum, not both")
        spath = Path(d["spectrum"])
        if base_dir is not None and not spath.is_absolute():
            spath = Path(base_dir) / spath
        if not spath.exists():
            raise FileNotFoundError(f"{name}.spectrum: {spath} does not exist")
        spectrum = load_spectrum(
            spath,
            low_tail=d.get("low_tail", "power-law" if phase is Phase.CRYSTALLINE else "constant"),
            low_exponent=float(d.get("low_exponent", -1.0)),
            high_exponent=float(d.get("high_exponent", -3.0)),
        )
        return MaterialPhase(phase, spectrum, name=name)

    if "plasma_frequency_eV" in d:
        wp = ev_to_rad(_number(d, "plasma_frequency_eV", name))
    elif "carrier_density_cm3" in d:
        wp = plasma_frequency(_number(d, "carrier_density_cm3", name),
                              _number(d, "effective_mass", name, default=0.3))
    else:
        wp = 0.0
    gamma = ev_to_rad(_number(d, "drude_damping_eV", name, default=0.0))
    lorentz = d.get("lorentz", [])
    if not isinstance(lorentz, list):
        raise ConfigError(f"{name}.lorentz", "expected a list")
    terms = []
    for i, term in enumerate(lorentz):
        prefix = f"{name}.lorentz[{i}]"
        if not isinstance(term, dict):
            raise ConfigError(prefix, "expected an object")
        terms.append(LorentzTerm(
            strength=_number(term, "strength_eV2", prefix) * EV**2,
            center=ev_to_rad(_number(term, "center_eV", prefix)),
            damping=ev_to_rad(_number(term, "damping_eV", prefix)),
        ))
    try:
        model = OscillatorModel(wp, gamma, tuple(terms))
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from None
    if phase is Phase.AMORPHOUS and model.has_drude:
        raise ConfigError(f"{name}.plasma_frequency_eV", "amorphous phase has no Drude term")
    if phase is Phase.CRYSTALLINE and not model.has_drude:
        raise ConfigError(f"{name}.plasma_frequency_eV", "crystalline phase needs a Drude term")
    return MaterialPhase(phase, model, name=name)


def load_materials(source, base_dir=None):
    """Materials dict keyed by name from a config dict or a JSON file path.

    Accepts either a whole config document (with a ``materials`` section) or
    the materials section itself.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        with path.open() as fh:
            try:
                source = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(str(path), f"invalid JSON ({exc})") from None
        base_dir = base_dir or path.parent
    section = source.get("materials", source)
    if not isinstance(section, dict) or not section:
        raise ConfigError("materials", "expected a non-empty object")
    return {name: material_from_dict(spec, name=name, base_dir=base_dir)
            for name, spec in section.items()}


def default_materials():
    """The shipped GeTe parameter sets, keyed ``crystalline`` / ``amorphous``."""
    text = resources.files("pcm_casimir").joinpath("data/gete_default.json").read_text()
    return load_materials(json.loads(text))
