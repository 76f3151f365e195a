import io
import json

import numpy as np
import pytest

from pcm_casimir.cli import (EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_IO, build_run_config, main,
                             plate_configs)
from pcm_casimir.dielectric import ConfigError

FAST = {"run": {"table_points_per_decade": 8, "delta_points": 128, "points_per_decade": 2,
                "d_min": 1e-8, "d_max": 1e-6, "x0_min": 1e-8, "x0_max": 1e-6,
                "x0_points": 3, "min_gap": 5e-9}}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def fast_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(FAST))
    return path


def read_csv(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    rows = [l.split(",") for l in lines[1:]]
    return header, rows


def test_validate_passes():
    code, out, _ = run(["validate"])
    assert code == 0
    assert "6/6 checks passed" in out
    assert "FAIL" not in out


def test_force_curve_is_byte_identical(fast_config, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["force-curve", "--config", str(fast_config), "--out", str(a)])[0] == 0
    assert run(["force-curve", "--config", str(fast_config), "--out", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.startswith("# pcm-casimir force-curve\n# config: ")
    record = json.loads(text.splitlines()[1][len("# config: "):])
    assert record["run"]["temperature"] == 300.0
    assert record["run"]["matsubara_rtol"] == 1e-9
    assert "crystalline" in record["materials"]
    header, rows = read_csv(text)
    assert header[:5] == ["d_m", "pressure_cc_Pa", "abs_pressure_cc_Pa", "energy_cc_J_m2",
                          "terms_cc"]
    assert len(rows) == 5
    assert all(float(r[1]) < 0 and float(r[2]) == -float(r[1]) for r in rows)


def test_flags_override_config(fast_config):
    code, out, _ = run(["force-curve", "--config", str(fast_config), "--temperature", "150",
                        "--phases", "cc,aa"])
    assert code == 0
    record = json.loads(out.splitlines()[1][len("# config: "):])
    assert record["run"]["temperature"] == 150.0
    assert record["run"]["phases"] == ["cc", "aa"]
    header, _ = read_csv(out)
    assert not any("_ca_" in h for h in header)


def test_rel_diff_columns(fast_config):
    code, out, _ = run(["rel-diff", "--config", str(fast_config)])
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["d_m", "rel_cc_ca", "rel_cc_aa"]
    for r in rows:
        ca, aa = float(r[1]), float(r[2])
        assert 0 < ca < aa < 1


def test_potential_profile_output(fast_config):
    code, out, _ = run(["potential", "--config", str(fast_config), "--x0", "1e-7",
                        "--phases", "aa"])
    assert code == 0
    assert "# aa min: delta =" in out and "# aa max: delta =" in out
    header, rows = read_csv(out)
    assert header == ["delta", "U_minus_U0_aa_J"]
    assert float(rows[0][0]) == 0.0 and float(rows[0][1]) == 0.0
    assert len(rows) == 128


def test_bifurcation_output(fast_config):
    code, out, _ = run(["bifurcation", "--config", str(fast_config), "--phases", "cc"])
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["delta", "xi_cc_m3_per_N", "stable_cc"]
    stable = [int(r[2]) for r in rows]
    # one contiguous stable branch followed by the unstable one
    assert stable[0] == 1 and stable[-1] == 0
    assert np.count_nonzero(np.diff(stable)) == 1


def test_delta0_sweep_columns(fast_config):
    code, out, _ = run(["delta0-sweep", "--config", str(fast_config)])
    assert code == 0, out
    header, rows = read_csv(out)
    assert header == ["x0_m", "delta0_cc", "delta0_ca", "delta0_aa", "delta0_t0casimir",
                      "delta0_asymptotic"]
    for r in rows:
        assert float(r[4]) == pytest.approx(0.2, abs=1e-6)
        assert float(r[5]) == pytest.approx(0.25, abs=1e-6)
        assert all(0.2 < float(v) < 0.25 for v in r[1:4])


@pytest.mark.parametrize("doc, key", [
    ({"run": {"bogus": 1}}, "run.bogus"),
    ({"device": {"spring_k": -1}}, "device.spring_k"),
    ({"run": {"phases": ["cc", "xx"]}}, "run.phases"),
    ({"run": {"d_min": 1e-6, "d_max": 1e-7}}, "run.d_max"),
    ({"materials": {"c": {"phase": "crystalline"}}}, "c.plasma_frequency_eV"),
])
def test_config_errors_exit_1_and_name_key(tmp_path, doc, key):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    # every case fails while resolving the config, before any evaluation
    code, _, err = run(["force-curve", "--config", str(path)])
    assert code == EXIT_CONFIG
    assert key in err


def test_missing_phase_is_config_error(tmp_path):
    doc = {"materials": {"a": {"phase": "amorphous", "lorentz": []}}}
    with pytest.raises(ConfigError, match="crystalline"):
        plate_configs(build_run_config("force-curve", doc))


def test_invalid_json_is_config_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run(["validate", "--config", str(path)])[0] == EXIT_CONFIG


def test_io_errors_exit_3(tmp_path, fast_config):
    assert run(["force-curve", "--config", str(tmp_path / "none.json")])[0] == EXIT_IO
    out = tmp_path / "missing_dir" / "x.csv"
    assert run(["force-curve", "--config", str(fast_config), "--out", str(out)])[0] == EXIT_IO
    doc = {"materials": {"c": {"phase": "crystalline", "spectrum": "nowhere.csv"},
                         "a": {"phase": "amorphous", "lorentz": []}}}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    assert run(["force-curve", "--config", str(path)])[0] == EXIT_IO


def test_non_convergence_exit_2(tmp_path):
    path = tmp_path / "cap.json"
    path.write_text(json.dumps({"run": {"max_terms": 64}}))
    code, _, err = run(["force-curve", "--config", str(path), "--d-min", "1e-9",
                        "--d-max", "2e-9", "--points-per-decade", "1", "--phases", "cc"])
    assert code == EXIT_CONVERGENCE
    assert "d=1.000000e-09" in err and "64 terms" in err
