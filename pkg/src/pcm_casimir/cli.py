"""Command-line front end producing CSV datasets for the force and device analyses.

Usage::

    pcm-casimir force-curve  --config run.json --out force.csv
    pcm-casimir rel-diff     --d-min 1e-9 --d-max 1e-4 --out reldiff.csv
    pcm-casimir potential    --x0 1e-7 --k 0.1 --area 2e-10 --phases cc aa
    pcm-casimir bifurcation  --x0 1e-7
    pcm-casimir delta0-sweep --x0-min 1e-9 --x0-max 1e-4 --x0-points 40
    pcm-casimir validate

The config file is one JSON document with optional ``materials``, ``device``
and ``run`` sections; command-line flags override it.  Exit codes: 0 success,
1 configuration error, 2 Matsubara sum not converged, 3 I/O error,
4 a ``validate`` check failed.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .device import (MIN_GAP, DeviceConfig, LifshitzForce, PowerLawForce, asymptotic_force,
                     bifurcation_curve, casimir_t0_force, critical_delta, delta0_sweep,
                     potential_profile)
from .dielectric import (ConfigError, MaterialPhase, OscillatorModel, Phase, SpectrumError,
                         eps_imaginary_axis, load_materials, london_transform)
from .lifshitz import (ConvergenceError, LifshitzSettings, PlateConfiguration,
                       casimir_t0_pressure, large_distance_pressure_cc, lifshitz_pressure,
                       pressure_curve)
from .special import ZETA3
from .units import K_B

COMMANDS = ("force-curve", "rel-diff", "potential", "bifurcation", "delta0-sweep", "validate")
PHASES = ("cc", "ca", "aa")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_IO, EXIT_VALIDATION = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters (SI units)."""

    command: str
    materials: dict = field(default_factory=dict)
    base_dir: str = "."
    temperature: float = 300.0
    drude_n0_te_zero: bool = True
    spring_k: float = 0.1
    area: float = 2e-10
    x0: float = 1e-7
    d_min: float = 1e-9
    d_max: float = 1e-4
    points_per_decade: int = 32
    x0_min: float = 1e-9
    x0_max: float = 1e-4
    x0_points: int = 40
    delta_points: int = 512
    min_gap: float = MIN_GAP
    table_points_per_decade: int = 256
    phases: tuple = PHASES
    quad_rtol: float = 1e-9
    matsubara_rtol: float = 1e-9
    max_terms: int = 20_000
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError("run.command", f"unknown command {self.command!r}")
        positive = ("temperature", "spring_k", "area", "x0", "d_min", "d_max", "x0_min",
                    "x0_max", "min_gap", "quad_rtol", "matsubara_rtol")
        for name in positive:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) \
                    or not (value > 0 and math.isfinite(value)):
                raise ConfigError(_key(name), f"must be a positive number, got {value!r}")
        for name in ("points_per_decade", "x0_points", "delta_points",
                     "table_points_per_decade", "max_terms", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(_key(name), f"must be a positive integer, got {value!r}")
        if self.d_min >= self.d_max:
            raise ConfigError("run.d_max", "distance range must be increasing")
        if self.x0_min >= self.x0_max:
            raise ConfigError("run.x0_max", "x0 range must be increasing")
        if self.x0_points < 2:
            raise ConfigError("run.x0_points", "need at least 2 points")
        if self.delta_points < 101:
            raise ConfigError("run.delta_points", "need more than 100 points")
        if not self.phases or any(p not in PHASES for p in self.phases):
            raise ConfigError("run.phases", f"expected a subset of {PHASES}, got {self.phases!r}")

    @property
    def settings(self):
        return LifshitzSettings(quad_rtol=self.quad_rtol, matsubara_rtol=self.matsubara_rtol,
                                max_terms=self.max_terms)

    def resolved(self):
        """JSON-ready provenance record (materials, device and run sections)."""
        run = {k: v for k, v in asdict(self).items()
               if k not in ("materials", "base_dir", "out", "spring_k", "area", "x0",
                            "workers")}
        run["phases"] = list(self.phases)
        return {"materials": self.materials,
                "device": {"spring_k": self.spring_k, "area": self.area, "x0": self.x0},
                "run": run}


DEVICE_KEYS = {"spring_k", "area", "x0"}
RUN_KEYS = {f.name for f in fields(RunConfig)} - DEVICE_KEYS - {"command", "materials",
                                                                   "base_dir", "out"}


def _key(name):
    return f"device.{name}" if name in DEVICE_KEYS else f"run.{name}"


def _default_material_section():
    text = resources.files("pcm_casimir").joinpath("data/gete_default.json").read_text()
    return json.loads(text)


def read_config_file(path):
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(str(path), "top level must be an object")
    unknown = set(doc) - {"materials", "device", "run"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    return doc


def build_run_config(command, doc=None, overrides=None, base_dir="."):
    """Merge a config document with flag overrides into a RunConfig."""
    doc = doc or {}
    values = {}
    for section, allowed in (("device", DEVICE_KEYS), ("run", RUN_KEYS)):
        part = doc.get(section, {})
        if not isinstance(part, dict):
            raise ConfigError(section, "expected an object")
        for key, value in part.items():
            if key not in allowed:
                raise ConfigError(f"{section}.{key}", "unknown key")
            values[key] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    if "phases" in values:
        phases = values["phases"]
        if isinstance(phases, str):
            phases = [phases]
        if not isinstance(phases, (list, tuple)):
            raise ConfigError("run.phases", "expected a list")
        values["phases"] = tuple(str(p).lower() for p in phases)
    materials = doc.get("materials") or _default_material_section()
    return RunConfig(command=command, materials=materials, base_dir=str(base_dir), **values)


def plate_configs(cfg):
    """PlateConfiguration per requested phase pair."""
    mats = load_materials({"materials": cfg.materials}, base_dir=cfg.base_dir)
    by_phase = {}
    for m in mats.values():
        by_phase.setdefault(m.label, m)
    for phase, key in ((Phase.CRYSTALLINE, "crystalline"), (Phase.AMORPHOUS, "amorphous")):
        if phase not in by_phase:
            raise ConfigError("materials", f"no material with phase {key!r}")
    c, a = by_phase[Phase.CRYSTALLINE], by_phase[Phase.AMORPHOUS]
    pairs = {"cc": (c, c), "ca": (c, a), "aa": (a, a)}
    return {p: PlateConfiguration(*pairs[p], temperature=cfg.temperature,
                                  drude_n0_te_zero=cfg.drude_n0_te_zero, label=p)
            for p in cfg.phases}


def distance_grid(lo, hi, per_decade):
    n = max(int(math.ceil(math.log10(hi / lo) * per_decade)) + 1, 2)
    return np.geomspace(lo, hi, n)


def _fmt(value):
    if isinstance(value, str):
        return value
    value = float(value)
    return "nan" if math.isnan(value) else f"{value:.12e}"


def render_csv(cfg, columns, rows, notes=()):
    """CSV text with a ``#`` provenance header; identical inputs give identical bytes."""
    buf = io.StringIO()
    buf.write(f"# pcm-casimir {cfg.command}\n")
    buf.write("# config: " + json.dumps(cfg.resolved(), sort_keys=True, separators=(",", ":"))
              + "\n")
    for note in notes:
        buf.write(f"# {note}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _force_table(cfg, plate, d_max):
    return LifshitzForce(plate, cfg.min_gap, d_max, cfg.table_points_per_decade, cfg.settings,
                         workers=cfg.workers)


def cmd_force_curve(cfg):
    ds = distance_grid(cfg.d_min, cfg.d_max, cfg.points_per_decade)
    columns = ["d_m"]
    data = []
    for phase, plate in plate_configs(cfg).items():
        results = pressure_curve(plate, ds, cfg.settings, workers=cfg.workers)
        columns += [f"pressure_{phase}_Pa", f"abs_pressure_{phase}_Pa",
                    f"energy_{phase}_J_m2", f"terms_{phase}"]
        data.append([(r.pressure, r.magnitude, r.free_energy_per_area, str(r.n_terms_used))
                     for r in results])
    rows = [[d] + [v for block in data for v in block[i]] for i, d in enumerate(ds)]
    return render_csv(cfg, columns, rows)


def cmd_rel_diff(cfg):
    if "cc" not in cfg.phases or len(cfg.phases) < 2:
        raise ConfigError("run.phases", "rel-diff needs cc plus at least one other phase")
    ds = distance_grid(cfg.d_min, cfg.d_max, cfg.points_per_decade)
    plates = plate_configs(cfg)
    pressures = {p: np.array([r.pressure for r in pressure_curve(pc, ds, cfg.settings,
                                                                  workers=cfg.workers)])
                 for p, pc in plates.items()}
    others = [p for p in cfg.phases if p != "cc"]
    columns = ["d_m"] + [f"rel_cc_{p}" for p in others]
    rows = [[d] + [1.0 - pressures[p][i] / pressures["cc"][i] for p in others]
            for i, d in enumerate(ds)]
    return render_csv(cfg, columns, rows,
                      notes=["rel_cc_X = 1 - F_X / F_cc (fractional force reduction)"])


def _delta_grid(cfg, include_zero):
    top = 1.0 - cfg.min_gap / cfg.x0
    if top <= 0:
        raise ConfigError("device.x0", f"x0 must exceed the minimum gap {cfg.min_gap:g} m")
    grid = np.linspace(0.0, top, cfg.delta_points + (0 if include_zero else 1))
    return grid if include_zero else grid[1:]


def cmd_potential(cfg):
    deltas = _delta_grid(cfg, include_zero=True)
    columns, blocks, notes = ["delta"], [], []
    for phase, plate in plate_configs(cfg).items():
        law = _force_table(cfg, plate, cfg.x0)
        device = DeviceConfig(cfg.spring_k, cfg.area, cfg.x0, plate)
        profile = potential_profile(device, deltas, law, cfg.min_gap)
        columns.append(f"U_minus_U0_{phase}_J")
        blocks.append(profile.energies)
        notes.append(f"{phase} U(0) = {profile.offset:.12e} J")
        for delta, energy, kind in profile.extrema:
            notes.append(f"{phase} {kind}: delta = {delta:.12e}, U - U(0) = {energy:.12e} J")
    rows = [[d] + [b[i] for b in blocks] for i, d in enumerate(deltas)]
    return render_csv(cfg, columns, rows, notes)


def cmd_bifurcation(cfg):
    deltas = _delta_grid(cfg, include_zero=False)
    columns, blocks, notes = ["delta"], [], []
    for phase, plate in plate_configs(cfg).items():
        law = _force_table(cfg, plate, cfg.x0)
        curve = bifurcation_curve(cfg.x0, law, deltas, cfg.min_gap)
        columns += [f"xi_{phase}_m3_per_N", f"stable_{phase}"]
        blocks.append((curve.xis, curve.stable_mask))
        notes.append(f"{phase} fold: delta0 = {curve.fold[0]:.12e}, Xi0 = {curve.fold[1]:.12e} m3/N")
    rows = [[d] + [v for xis, mask in blocks for v in (xis[i], str(int(mask[i])))]
            for i, d in enumerate(deltas)]
    return render_csv(cfg, columns, rows, notes)


def cmd_delta0_sweep(cfg):
    x0s = np.geomspace(cfg.x0_min, cfg.x0_max, cfg.x0_points)
    if x0s[0] <= cfg.min_gap:
        raise ConfigError("run.x0_min", f"x0 must exceed the minimum gap {cfg.min_gap:g} m")
    plates = plate_configs(cfg)
    forces = {f"delta0_{p}": _force_table(cfg, pc, x0s[-1]) for p, pc in plates.items()}
    forces["delta0_t0casimir"] = casimir_t0_force()
    reference = next(iter(plates.values()))
    forces["delta0_asymptotic"] = lambda x0: asymptotic_force(reference, x0)
    table = delta0_sweep(x0s, forces, cfg.min_gap)
    columns = ["x0_m"] + list(forces)
    rows = [[r["x0"]] + [r[c] for c in forces] for r in table]
    note = f"delta0_asymptotic uses the d^-3 limiting laws of the {reference.label} pair"
    return render_csv(cfg, columns, rows, notes=[note])


def validation_checks():
    """Built-in oracle suite: (name, measured, expected, tolerance)."""
    vacuum = MaterialPhase("amorphous", OscillatorModel())
    drude = OscillatorModel(plasma_frequency=1e16, drude_damping=1e14)
    xi = np.geomspace(1e13, 1e17, 9)
    drude_err = float(np.max(np.abs(london_transform(drude, xi) / eps_imaginary_axis(drude, xi)
                                    - 1.0)))
    kT = K_B * 300.0
    return [
        ("vacuum plates give zero pressure",
         lifshitz_pressure(PlateConfiguration(vacuum, vacuum), 1e-7).pressure, 0.0, 0.0),
        ("fold of a d^-3 law", critical_delta(1e-7, PowerLawForce(1.0, 3.0))[0], 0.25, 1e-6),
        ("fold of a d^-4 law", critical_delta(1e-7, PowerLawForce(1.0, 4.0))[0], 0.20, 1e-6),
        ("Drude transform identity (max rel. error)", drude_err, 0.0, 1e-3),
        ("T=0 Casimir pressure at 100 nm [Pa]", casimir_t0_pressure(1e-7), -13.0, 0.013),
        ("thermal limit at 5 um, 300 K [Pa]", large_distance_pressure_cc(300.0, 5e-6),
         -ZETA3 * kT / (8 * math.pi * 5e-6**3), 1e-18),
    ]


def cmd_validate(cfg, stream):
    checks = validation_checks()
    width = max(len(name) for name, *_ in checks)
    stream.write(f"{'check'.ljust(width)}  {'measured':>14}  {'expected':>14}  status\n")
    failed = 0
    for name, measured, expected, tol in checks:
        ok = abs(measured - expected) <= tol
        failed += not ok
        stream.write(f"{name.ljust(width)}  {measured:>14.6e}  {expected:>14.6e}  "
                     f"{'PASS' if ok else 'FAIL'}\n")
    stream.write(f"{len(checks) - failed}/{len(checks)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


HANDLERS = {
    "force-curve": cmd_force_curve,
    "rel-diff": cmd_rel_diff,
    "potential": cmd_potential,
    "bifurcation": cmd_bifurcation,
    "delta0-sweep": cmd_delta0_sweep,
}


def _phase_list(values):
    out = []
    for v in values:
        out.extend(p for p in v.replace(",", " ").split() if p)
    return out


def build_parser():
    ap = argparse.ArgumentParser(prog="pcm-casimir", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file with materials/device/run sections")
    ap.add_argument("--out", help="output CSV path (default: stdout)")
    ap.add_argument("--temperature", type=float, help="temperature in K")
    ap.add_argument("--x0", type=float, help="unstretched gap in m")
    ap.add_argument("--k", dest="spring_k", type=float, help="spring constant in N/m")
    ap.add_argument("--area", type=float, help="plate area in m^2")
    ap.add_argument("--phases", nargs="+", help="any of cc ca aa (space or comma separated)")
    ap.add_argument("--d-min", type=float, help="smallest separation in m")
    ap.add_argument("--d-max", type=float, help="largest separation in m")
    ap.add_argument("--points-per-decade", type=int, help="distance grid density")
    ap.add_argument("--x0-min", type=float)
    ap.add_argument("--x0-max", type=float)
    ap.add_argument("--x0-points", type=int)
    ap.add_argument("--delta-points", type=int)
    ap.add_argument("--table-points-per-decade", type=int,
                    help="force-table density for device analyses")
    ap.add_argument("--workers", type=int, help="processes for distance sweeps")
    return ap


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in
                 ("temperature", "x0", "spring_k", "area", "d_min", "d_max",
                  "points_per_decade", "x0_min", "x0_max", "x0_points", "delta_points",
                  "table_points_per_decade", "workers")}
    if args.phases:
        overrides["phases"] = _phase_list(args.phases)
    try:
        doc, base_dir = None, Path(".")
        if args.config:
            doc = read_config_file(args.config)
            base_dir = Path(args.config).parent
        cfg = build_run_config(args.command, doc, overrides, base_dir)
        cfg = replace(cfg, out=args.out)
        if args.command == "validate":
            return cmd_validate(cfg, stdout)
        text = HANDLERS[args.command](cfg)
        if args.out:
            Path(args.out).write_text(text)
        else:
            stdout.write(text)
        return EXIT_OK
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except SpectrumError as exc:
        stderr.write(f"spectrum error: {exc}\n")
        return EXIT_CONFIG
    except ConvergenceError as exc:
        stderr.write(f"not converged: {exc}\n")
        return EXIT_CONVERGENCE
    except OSError as exc:
        stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
