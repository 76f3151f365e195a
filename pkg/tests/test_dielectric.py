import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcm_casimir.dielectric import (
    DIVERGENT, ConfigError, LorentzTerm, MaterialPhase, OscillatorModel, Phase,
    SpectrumError, TabulatedSpectrum, constant_permittivity, default_materials,
    eps_imaginary_axis, eval_im_eps, load_materials, load_spectrum, london_transform,
    material_from_dict,
)
from pcm_casimir.lifshitz import MatsubaraGrid
from pcm_casimir.units import EV, plasma_frequency


DRUDE = OscillatorModel(plasma_frequency=1e16, drude_damping=1e14)


def test_vacuum_im_eps_is_zero():
    assert eval_im_eps(OscillatorModel(), 1e15) == 0.0


def test_drude_im_eps_matches_formula():
    wp, g, w = 1e16, 1e14, 1e15
    expected = wp * wp * g / (w * (w * w + g * g))
    assert eval_im_eps(DRUDE, w) == pytest.approx(expected, rel=1e-14)
    # written-out arithmetic: 1e32 * 1e14 / (1e15 * 1.01e30)
    assert expected == pytest.approx(1e46 / 1.01e45, rel=1e-12)


def test_lorentz_resonance_sharpens_as_damping_vanishes():
    w0 = 2e15
    peaks = []
    for g in (1e14, 1e13, 1e12):
        m = OscillatorModel(lorentz_terms=[(1e30, w0, g)])
        grid = np.linspace(0.5 * w0, 1.5 * w0, 20001)
        values = eval_im_eps(m, grid)
        peaks.append((grid[np.argmax(values)], values.max()))
    for (center, _) in peaks:
        assert center == pytest.approx(w0, rel=1e-3)
    heights = [h for _, h in peaks]
    assert heights[0] < heights[1] < heights[2]


def test_im_eps_rejects_nonpositive_frequency():
    with pytest.raises(ValueError):
        eval_im_eps(DRUDE, 0.0)
    with pytest.raises(ValueError):
        eval_im_eps(DRUDE, -1.0)


def test_negative_parameters_rejected():
    with pytest.raises(ValueError):
        OscillatorModel(plasma_frequency=-1.0)
    with pytest.raises(ValueError):
        LorentzTerm(1.0, 1e15, -3.0)


def test_london_transform_of_vacuum_is_one():
    xs = np.array([0.0, 1e13, 1e15, 1e17])
    assert np.all(london_transform(OscillatorModel(), xs) == 1.0)


@pytest.mark.parametrize("xi", [1e13, 3e14, 1e15, 2e16, 1e17])
def test_london_transform_drude_closed_form(xi):
    exact = 1 + 1e32 / (xi * (xi + 1e14))
    assert london_transform(DRUDE, xi) == pytest.approx(exact, rel=1e-3)


@pytest.mark.parametrize("xi", [0.0, 1e14, 1e15, 1e16])
def test_narrow_lorentz_approaches_undamped_limit(xi):
    s, w0 = 4e30, 2e15
    m = OscillatorModel(lorentz_terms=[(s, w0, 1e-4 * w0)])
    assert london_transform(m, xi) == pytest.approx(1 + s / (w0**2 + xi**2), rel=1e-2)


def test_undamped_terms_handled_in_closed_form():
    m = OscillatorModel(plasma_frequency=1e16, lorentz_terms=[(4e30, 2e15, 0.0)])
    xi = 5e15
    assert london_transform(m, xi) == pytest.approx(eps_imaginary_axis(m, xi), rel=1e-12)


def test_eps_imaginary_axis_vacuum_and_static():
    assert eps_imaginary_axis(OscillatorModel(), 1e14) == 1.0
    terms = [(3.0e31, 2.0e15, 1e15), (5.0e31, 4.0e15, 2e15)]
    m = OscillatorModel(lorentz_terms=terms)
    expected = 1 + 3.0e31 / 4.0e30 + 5.0e31 / 16.0e30
    assert eps_imaginary_axis(m, 0.0) == pytest.approx(expected, rel=1e-14)
    assert london_transform(m, 0.0) == pytest.approx(expected, rel=1e-6)


def test_crystalline_static_value_is_divergent():
    mats = default_materials()
    assert eps_imaginary_axis(mats["crystalline"].model, 0.0) == DIVERGENT
    assert london_transform(mats["crystalline"].model, 0.0) == DIVERGENT
    assert math.isfinite(eps_imaginary_axis(mats["amorphous"].model, 0.0))


def test_constant_permittivity_proxy():
    m = constant_permittivity(1e8)
    xs = np.array([0.0, 1e14, 1e17])
    assert np.allclose(eps_imaginary_axis(m, xs), 1e8, rtol=1e-9)


oscillator_models = st.builds(
    OscillatorModel,
    plasma_frequency=st.one_of(st.just(0.0), st.floats(1e14, 3e16)),
    drude_damping=st.floats(1e12, 1e16),
    lorentz_terms=st.lists(
        st.tuples(st.floats(1e28, 1e33), st.floats(1e14, 1e16), st.floats(1e13, 1e16)),
        max_size=3),
)


@settings(max_examples=25, deadline=None)
@given(oscillator_models)
def test_transform_identity_for_any_oscillator_model(model):
    xs = np.geomspace(1e13, 1e17, 9)
    exact = eps_imaginary_axis(model, xs)
    numeric = london_transform(model, xs)
    assert np.all(np.abs(numeric - exact) / exact < 1e-3)


@settings(max_examples=25, deadline=None)
@given(oscillator_models)
def test_eps_is_at_least_one_and_nonincreasing(model):
    xs = np.geomspace(1e12, 1e18, 60)
    values = eps_imaginary_axis(model, xs)
    assert np.all(values >= 1.0)
    assert np.all(np.diff(values) <= 0)


def test_default_crystalline_above_amorphous_at_first_matsubara():
    mats = default_materials()
    xi1 = MatsubaraGrid(300.0).frequencies(1, 2)
    assert mats["crystalline"].eps(xi1)[0] > mats["amorphous"].eps(xi1)[0]


def test_default_models_respect_phase_invariants():
    mats = default_materials()
    assert mats["crystalline"].model.plasma_frequency > 0
    assert mats["amorphous"].model.plasma_frequency == 0
    assert mats["crystalline"].label is Phase.CRYSTALLINE


def test_plasma_frequency_from_carrier_density():
    # n e^2 / (eps0 m*) with n = 5e26 m^-3, m* = 0.3 m_e
    wp = plasma_frequency(5e20, 0.3)
    expected = math.sqrt(5e26 * 1.602176634e-19**2 / (8.8541878128e-12 * 0.3 * 9.1093837015e-31))
    assert wp == pytest.approx(expected, rel=1e-8)


# --- tabulated spectra -----------------------------------------------------

def write_csv(tmp_path, lines, name="spec.csv"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


def test_spectrum_needs_four_points(tmp_path):
    path = write_csv(tmp_path, ["1.0,2.0", "2.0,1.0"])
    with pytest.raises(SpectrumError, match="at least 4"):
        load_spectrum(path)


def test_descending_energies_name_the_line(tmp_path):
    path = write_csv(tmp_path, ["# comment", "energy_eV,im_eps", "1.0,2.0", "2.0,1.0",
                                "1.5,1.0", "3.0,0.5"])
    with pytest.raises(SpectrumError, match=r":5:"):
        load_spectrum(path)


def test_duplicate_and_negative_rows_rejected(tmp_path):
    dup = write_csv(tmp_path, ["1.0,2.0", "2.0,1.0", "2.0,1.0", "3.0,0.5"], "dup.csv")
    with pytest.raises(SpectrumError, match=r":3: duplicate"):
        load_spectrum(dup)
    neg = write_csv(tmp_path, ["1.0,2.0", "2.0,-1.0", "3.0,1.0", "4.0,0.5"], "neg.csv")
    with pytest.raises(SpectrumError, match=r":2: negative"):
        load_spectrum(neg)


def test_negative_spectrum_rejected_at_construction():
    with pytest.raises(SpectrumError):
        TabulatedSpectrum(np.array([1.0, 2.0, 3.0, 4.0]), np.array([1.0, -0.1, 0.0, 0.0]))


def test_vacuum_spectrum_transform_is_one():
    spec = TabulatedSpectrum(np.array([0.1, 1.0, 2.0, 5.0]), np.zeros(4))
    assert np.all(london_transform(spec, np.array([0.0, 1e14, 1e16])) == 1.0)


def synthetic_drude_csv(tmp_path, wp, gamma):
    energies = np.geomspace(0.01, 500.0, 200)
    values = eval_im_eps(OscillatorModel(wp, gamma), energies * EV)
    lines = ["# synthetic Drude spectrum", "energy_eV,im_eps"]
    lines += [f"{e:.17g},{v:.17g}" for e, v in zip(energies, values)]
    return write_csv(tmp_path, lines, "drude.csv")


@pytest.mark.parametrize("xi", [1e14, 1e15, 1e16])
def test_synthetic_drude_spectrum_round_trip(tmp_path, xi):
    # window spans the damping, so both tails follow the Drude asymptotes
    wp, gamma = 1e16, 2e16
    spec = load_spectrum(synthetic_drude_csv(tmp_path, wp, gamma),
                         low_tail="power-law", low_exponent=-1.0)
    assert len(spec.energies_ev) == 200
    exact = 1 + wp**2 / (xi * (xi + gamma))
    assert london_transform(spec, xi) == pytest.approx(exact, rel=1e-2)
    assert london_transform(spec, 0.0) == DIVERGENT


def test_tabulated_transform_is_nonincreasing(tmp_path):
    spec = load_spectrum(synthetic_drude_csv(tmp_path, 1e16, 2e16),
                         low_tail="power-law", low_exponent=-1.0)
    values = london_transform(spec, np.geomspace(1e13, 1e17, 30))
    assert np.all(values >= 1) and np.all(np.diff(values) <= 0)


# --- config parsing ---------------------------------------------------------

def test_material_from_dict_units():
    m = material_from_dict({"phase": "amorphous", "lorentz": [
        {"strength_eV2": 4.0, "center_eV": 2.0, "damping_eV": 0.5}]})
    (term,) = m.model.lorentz_terms
    assert term.strength == pytest.approx(4.0 * EV**2)
    assert term.center == pytest.approx(2.0 * EV)
    assert m.eps(0.0)[0] == pytest.approx(2.0)


@pytest.mark.parametrize("bad, key", [
    ({"phase": "liquid"}, "m.phase"),
    ({"phase": "amorphous", "lorentz": [{"center_eV": 1.0, "damping_eV": 0.1}]},
     "m.lorentz[0].strength_eV2"),
    ({"phase": "amorphous", "plasma_frequency_eV": 1.0}, "m.plasma_frequency_eV"),
    ({"phase": "crystalline", "plasma_frequency_eV": "x"}, "m.plasma_frequency_eV"),
    ({"phase": "crystalline"}, "m.plasma_frequency_eV"),
])
def test_config_errors_name_the_key(bad, key):
    with pytest.raises(ConfigError) as info:
        material_from_dict(bad, name="m")
    assert info.value.key == key


def test_spectrum_material_from_config(tmp_path):
    synthetic_drude_csv(tmp_path, 1e16, 2e16)
    mats = load_materials({"materials": {"c": {"phase": "crystalline", "spectrum": "drude.csv",
                                               "low_tail": "power-law"}}},
                          base_dir=tmp_path)
    assert isinstance(mats["c"].model, TabulatedSpectrum)
    assert mats["c"].eps(0.0)[0] == DIVERGENT


def test_material_phase_requires_model():
    with pytest.raises(TypeError):
        MaterialPhase("amorphous", object())
