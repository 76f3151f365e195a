#!/usr/bin/env python3
"""Random search for GeTe oscillator parameters matching the reported trends.

The published work does not list its fitted Drude-Lorentz parameters, so the
shipped defaults were chosen with this script.  Targets (all at T = 300 K):

  * CC->AA relative force change ~28% at small separation (solved exactly for
    the crystalline Lorentz strength) and ~36% at large separation (fixes the
    amorphous static permittivity),
  * critical displacement close to 0.25 at x0 = 10 nm and inside
    [0.205, 0.225] at x0 = 100 nm,
  * the CC fold Xi0 at x0 = 100 nm as close as possible to the Fig. 4(a)
    device value A/K = 2e-9 m^3/N (drives the CC->AA equilibrium shift).

The crystalline Drude term uses 5e20 cm^-3 carriers.  Usage::

    python scripts/calibrate_defaults.py --samples 400 --seed 7 > search.jsonl
"""

import argparse
import json
import math

import numpy as np
from scipy.optimize import brentq

from pcm_casimir.device import FoldError, LifshitzForce, critical_delta
from pcm_casimir.dielectric import material_from_dict
from pcm_casimir.lifshitz import PlateConfiguration, short_distance_pressure
from pcm_casimir.special import ZETA3, polylog3

TARGET_SMALL = 0.28
TARGET_LARGE = 0.36
DEVICE_XI = 2e-9


def static_eps_for_large_plateau(target=TARGET_LARGE):
    # 1 - Li3(r^2)/zeta(3) = target, r = (eps-1)/(eps+1)
    def gap(eps):
        r = (eps - 1) / (eps + 1)
        return 1 - polylog3(r * r) / ZETA3 - target
    return brentq(gap, 1.0 + 1e-9, 1e6, xtol=1e-12)


def materials(p, eps_static):
    cryst = {
        "phase": "crystalline", "carrier_density_cm3": 5e20,
        "effective_mass": p["m"], "drude_damping_eV": p["gd"],
        "lorentz": [{"strength_eV2": p["sc"], "center_eV": p["wc"], "damping_eV": p["gc"]}],
    }
    chi = eps_static - 1.0
    amor = {
        "phase": "amorphous",
        "lorentz": [
            {"strength_eV2": p["phi"] * chi * p["w1"] ** 2, "center_eV": p["w1"], "damping_eV": p["g1"]},
            {"strength_eV2": (1 - p["phi"]) * chi * p["w2"] ** 2, "center_eV": p["w2"], "damping_eV": p["g2"]},
        ],
    }
    return cryst, amor


def sample(rng, w2_max):
    return {"m": math.exp(rng.uniform(math.log(0.05), math.log(0.5))),
            "gd": rng.uniform(0.02, 0.3), "sc": 0.0,
            "wc": rng.uniform(0.8, 3.0), "gc": rng.uniform(0.5, 3.0),
            "w1": rng.uniform(1.0, 2.0), "g1": rng.uniform(0.3, 1.5),
            "w2": rng.uniform(1.5, w2_max), "g2": rng.uniform(0.5, 3.0),
            "phi": rng.uniform(0.1, 0.9)}


def solve_crystalline_strength(p, eps_static):
    """Lorentz strength giving the target small-distance plateau, or None."""
    _, amor = materials(p, eps_static)
    a = material_from_dict(amor, "a")
    p_aa = short_distance_pressure(PlateConfiguration(a, a), 1e-9)

    def gap(sc):
        cryst, _ = materials(dict(p, sc=sc), eps_static)
        c = material_from_dict(cryst, "c")
        return 1 - p_aa / short_distance_pressure(PlateConfiguration(c, c), 1e-9) - TARGET_SMALL
    try:
        return brentq(gap, 0.0, 600.0, xtol=1e-3)
    except ValueError:
        return None


def evaluate(p, eps_static, gap=4e-9):
    cryst, _ = materials(p, eps_static)
    c = material_from_dict(cryst, "c")
    law = LifshitzForce(PlateConfiguration(c, c), gap, 3e-7, 16)
    d10 = critical_delta(1e-8, law, gap)[0]
    d100, xi0 = critical_delta(1e-7, law, gap)
    return {"d10": d10, "d100": d100, "xi0": xi0}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=400)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--w2-max", type=float, default=3.5,
                    help="upper bound on the second amorphous center (eV)")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    eps_static = static_eps_for_large_plateau()
    for i in range(args.samples):
        p = sample(rng, args.w2_max)
        p["sc"] = solve_crystalline_strength(p, eps_static)
        if p["sc"] is None:
            continue
        try:
            m = evaluate(p, eps_static)
        except FoldError:
            continue
        m["feasible"] = m["d10"] >= 0.245 and 0.205 <= m["d100"] <= 0.225
        m["xi0_over_device"] = m["xi0"] / DEVICE_XI
        print(json.dumps({"i": i, **m, "params": p}), flush=True)


if __name__ == "__main__":
    main()
