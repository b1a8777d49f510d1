"""Batch experiment runner.

Usage::

    sedpilot run <config> [--out DIR] [--seed N]
    sedpilot list

Config files are UTF-8 ``key = value`` lines with ``#`` comments and an
optional single ``[experiment]`` header. Column layouts of ``result.csv``
are documented in FORMATS.md.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, ResolutionError, SedPilotError, StatisticsError
from .fields import Grid1D

DEFAULT_SEED = 0x5EED  # 24301
EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC, EXIT_STATS = 0, 1, 2, 3, 4

REQUIRED = object()


def _float_list(text):
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return [float(s) for s in items]


def _int(text):
    v = float(text) if re.fullmatch(r"[0-9.]+[eE][+]?[0-9]+", text) else int(text, 0)
    if int(v) != v:
        raise ValueError(f"not an integer: {text}")
    return int(v)


def _choice(*options):
    def conv(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    conv.__name__ = "one of " + "|".join(options)
    return conv


# experiment -> key -> (converter, default)
SCHEMAS = {
    "debroglie": {
        "beta": (float, REQUIRED),
        "mass": (float, 1.0),
        "beat_periods": (_int, 16),
        "samples_per_carrier": (_int, 32),
        "theta1": (float, 0.0),
        "theta2": (float, 0.0),
        "t": (float, 0.0),
    },
    "dispersion": {
        "betas": (_float_list, REQUIRED),
        "mass": (float, 1.0),
    },
    "tise": {
        "potential": (_choice("infinite_well", "harmonic", "free"), REQUIRED),
        "x_min": (float, None),
        "x_max": (float, None),
        "n_points": (_int, 2001),
        "n_states": (_int, 5),
        "mass": (float, 1.0),
        "stiffness": (float, 1.0),
    },
    "kg_limit": {
        "masses": (_float_list, [1.0, 10.0, 100.0]),
        "stiffness": (float, 1.0),
        "x_min": (float, -10.0),
        "x_max": (float, 10.0),
        "n_points": (_int, 2001),
    },
    "double_slit": {
        "beta": (float, 0.5),
        "mass": (float, 1.0),
        "d_over_lambda": (float, 10.0),
        "a_over_lambda": (float, 1.0),
        "l_over_lambda": (float, 1000.0),
        "half_width_over_lambda": (float, 400.0),
        "n_particles": (_int, REQUIRED),
        "n_modes": (_int, 16),
        "angular_spread": (float, 0.0),
        "bins": (_int, 200),
        "detector_points": (_int, 801),
        "aperture_samples": (_int, 64),
        "covered": (_choice("none", "1", "2"), "none"),
    },
}
COMMON_KEYS = {"experiment", "seed", "output_path"}


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict
    seed: int = DEFAULT_SEED
    output_path: str | None = None
    lines: dict = field(default_factory=dict, repr=False)


def parse_config(text: str) -> ExperimentConfig:
    entries = {}
    headers = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[experiment]":
                raise ConfigError(f"line {lineno}: unexpected section {line!r}; only [experiment] is allowed")
            headers += 1
            if headers > 1:
                raise ConfigError(f"line {lineno}: second [experiment] header")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if not re.fullmatch(r"[a-z_][a-z0-9_]*", key):
            raise ConfigError(f"line {lineno}: malformed key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: key {key!r} has no value")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first set on line {entries[key][1]})")
        entries[key] = (value, lineno)

    if "experiment" not in entries:
        raise ConfigError("missing required key 'experiment'")
    name, name_line = entries["experiment"]
    if name not in SCHEMAS:
        raise ConfigError(f"line {name_line}: unknown experiment {name!r}; "
                          f"known: {', '.join(sorted(SCHEMAS))}")
    schema = SCHEMAS[name]
    params = {}
    for key, (value, lineno) in entries.items():
        if key in COMMON_KEYS:
            continue
        if key not in schema:
            raise ConfigError(f"line {lineno}: unknown key {key!r} for experiment {name!r}")
        conv = schema[key][0]
        try:
            params[key] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    for key, (_, default) in schema.items():
        if key not in params:
            if default is REQUIRED:
                raise ConfigError(f"missing required key {key!r} for experiment {name!r}")
            params[key] = default

    seed = DEFAULT_SEED
    if "seed" in entries:
        value, lineno = entries["seed"]
        try:
            seed = _int(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for 'seed': {value!r}") from None
        if not 0 <= seed < 2 ** 64:
            raise ConfigError(f"line {lineno}: seed must be an unsigned 64-bit integer")
    out = entries["output_path"][0] if "output_path" in entries else None
    return ExperimentConfig(name, params, seed, out, {k: v[1] for k, v in entries.items()})


# ---------------------------------------------------------------- experiments

def _exp_debroglie(p, seed):
    from .pilot_wave import PhysicalParticle, de_broglie_wavelength, pilot_wave_params, synthesize_field
    from .spectral import dominant_wavenumbers, measure_de_broglie, recommended_grid

    particle = PhysicalParticle(p["mass"], p["beta"])
    params = pilot_wave_params(particle, p["theta1"], p["theta2"])
    grid = recommended_grid(params, p["beat_periods"], p["samples_per_carrier"])
    f = synthesize_field(params, grid, p["t"])
    measured = measure_de_broglie(f)
    analytic = de_broglie_wavelength(particle)
    k_hi, k_lo = sorted((pk.wavenumber for pk in dominant_wavenumbers(f, 2)), reverse=True)
    rel = abs(measured - analytic) / analytic
    header = ["beta", "mass", "n_points", "k_plus_measured", "k_minus_measured", "lambda_b_measured",
              "lambda_b_analytic", "rel_error"]
    rows = [[p["beta"], p["mass"], grid.n_points, k_hi, k_lo, measured, analytic, rel]]
    values = {"lambda_b_measured": measured, "lambda_b_analytic": analytic, "rel_error": rel,
              "n_points": grid.n_points}
    return header, rows, values, {"rel_error_below_1e-2": rel < 1e-2}


def _exp_dispersion(p, seed):
    from .pilot_wave import PhysicalParticle, doppler_frequencies, pilot_wave_params, wave_numbers

    header = ["beta", "gamma", "omega_plus", "omega_minus", "k_plus", "k_minus", "carrier_velocity",
              "envelope_velocity", "velocity_product", "lambda_b"]
    rows, worst = [], 0.0
    for b in p["betas"]:
        part = PhysicalParticle(p["mass"], b)
        prm = pilot_wave_params(part)
        wp, wm = doppler_frequencies(part)
        kp, km = wave_numbers(part)
        if b != 0:
            prod = prm.carrier_phase_velocity * prm.envelope_velocity
            cv, ev, lam = prm.carrier_phase_velocity, prm.envelope_velocity, prm.lambda_b
            worst = max(worst, abs(prod - 1.0))
        else:
            prod = cv = ev = lam = math.nan
        worst = max(worst, abs(wp * wm / prm.omega_c ** 2 - 1.0), abs(wp / kp - 1.0), abs(wm / km - 1.0))
        rows.append([b, part.gamma, wp, wm, kp, km, cv, ev, prod, lam])
    return header, rows, {"worst_rel_error": worst}, {"identities_below_1e-12": worst < 1e-12}


def _exp_tise(p, seed):
    from .quantum_solver import Potential, solve_tise

    kind = p["potential"]
    if kind == "harmonic":
        lo, hi = p["x_min"] if p["x_min"] is not None else -10.0, p["x_max"] if p["x_max"] is not None else 10.0
    else:
        lo, hi = p["x_min"] if p["x_min"] is not None else 0.0, p["x_max"] if p["x_max"] is not None else 1.0
    grid = Grid1D(lo, hi, p["n_points"])
    m = p["mass"]
    if kind == "harmonic":
        pot = Potential.harmonic(p["stiffness"])
        omega = math.sqrt(p["stiffness"] / m)
        analytic = [(n + 0.5) * omega for n in range(p["n_states"])]
    else:
        pot = Potential.infinite_well(grid.span) if kind == "infinite_well" else Potential.free()
        analytic = [(n * math.pi / grid.span) ** 2 / (2 * m) for n in range(1, p["n_states"] + 1)]
    spec = solve_tise(pot, grid, m, p["n_states"])
    header = ["n", "energy", "analytic", "abs_error", "rel_error"]
    rows = [[n, e, a, abs(e - a), abs(e - a) / a] for n, (e, a) in enumerate(zip(spec.eigenvalues, analytic))]
    if kind == "harmonic":
        checks = {"abs_error_below_1e-3": all(r[3] < 1e-3 for r in rows)}
    else:
        e1 = spec.eigenvalues[0]
        checks = {"e1_rel_error_below_1e-3": rows[0][4] < 1e-3,
                  "level_ratios_within_0.2pct": all(abs(e / e1 / (n + 1) ** 2 - 1) < 2e-3
                                                    for n, e in enumerate(spec.eigenvalues))}
    values = {"e0": float(spec.eigenvalues[0])}
    return header, rows, values, checks


def _exp_kg_limit(p, seed):
    from .quantum_solver import Potential, nonrelativistic_limit_study

    grid = Grid1D(p["x_min"], p["x_max"], p["n_points"])
    table = nonrelativistic_limit_study(Potential.harmonic(p["stiffness"]), grid, p["masses"])
    header = ["mass", "e0", "beta_sq", "residual"]
    rows = [[r.mass, r.e0, r.beta_sq, r.residual] for r in table]
    res = [r.residual for r in table]
    checks = {}
    values = {}
    if len(res) > 1:
        checks["residual_strictly_decreasing"] = all(b < a for a, b in zip(res, res[1:]))
        values["residual_ratio_last_first"] = res[-1] / res[0]
    return header, rows, values, checks


def _exp_double_slit(p, seed):
    from .pilot_wave import PhysicalParticle, de_broglie_wavelength
    from . import slit_sim as ss

    particle = PhysicalParticle(p["mass"], p["beta"])
    lam = de_broglie_wavelength(particle)
    geo = ss.SlitGeometry.in_wavelengths(lam, p["d_over_lambda"], p["a_over_lambda"], p["l_over_lambda"],
                                         p["half_width_over_lambda"],
                                         aperture_samples_per_slit=p["aperture_samples"])
    if p["covered"] != "none":
        geo = geo.covered(int(p["covered"]))
    hist = ss.run_double_slit(geo, particle, p["n_particles"], p["n_modes"], p["angular_spread"], seed,
                              p["bins"], p["detector_points"])
    expected = ss.expected_counts(hist, geo, lam)
    spacing = lam * geo.screen_distance / geo.slit_separation
    vis = ss.fringe_visibility(hist, spacing)
    header = ["bin_left", "bin_right", "count", "expected_far_field"]
    rows = [[lo, hi, int(c), e] for lo, hi, c, e in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts,
                                                        expected)]
    values = {"wavelength": lam, "expected_spacing": spacing, "visibility": vis,
              "fraunhofer": geo.is_fraunhofer(lam), "total": hist.total}
    checks = {}
    if p["angular_spread"] == 0.0:
        if geo.both_open:
            measured = ss.fringe_spacing(hist, spacing, 3, geo.screen_distance)
            chi2 = ss.chi2_per_dof(hist, expected)
            values.update(measured_spacing=measured, chi2_per_dof=chi2)
            checks["visibility_at_least_0.6"] = vis >= 0.6
            checks["spacing_within_5pct"] = abs(measured / spacing - 1) < 0.05
            checks["chi2_per_dof_below_2"] = chi2 < 2.0
        else:
            checks["visibility_at_most_0.2"] = vis <= 0.2
    return header, rows, values, checks


EXPERIMENTS = {
    "debroglie": _exp_debroglie,
    "dispersion": _exp_dispersion,
    "tise": _exp_tise,
    "kg_limit": _exp_kg_limit,
    "double_slit": _exp_double_slit,
}


# ---------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return v


def _atomic_write(path: Path, write):
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_experiment(config: ExperimentConfig, out_dir=None, stderr=None) -> int:
    """Run one experiment, write result.csv and summary.json, return the exit code."""
    stderr = stderr or sys.stderr
    out = Path(out_dir or config.output_path or "out")
    out.mkdir(parents=True, exist_ok=True)
    result_path = out / "result.csv"
    if result_path.exists():
        result_path.unlink()
    t0 = time.perf_counter()
    try:
        header, rows, values, checks = EXPERIMENTS[config.experiment](config.parameters, config.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except StatisticsError as exc:
        print(f"statistics error: {exc}", file=stderr)
        return EXIT_STATS
    except (ResolutionError, DomainError, SedPilotError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=stderr)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - t0

    def write_csv(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])

    passed = all(bool(v) for v in checks.values())
    summary = {"experiment": config.experiment, "seed": config.seed, "version": __version__}
    summary.update({f"param_{k}": _json_value(v) for k, v in sorted(config.parameters.items())})
    summary.update({f"value_{k}": _json_value(v) for k, v in values.items()})
    summary.update({f"check_{k}": bool(v) for k, v in checks.items()})
    summary["checks_passed"] = passed
    summary["wall_clock_seconds"] = elapsed

    _atomic_write(result_path, write_csv)
    _atomic_write(out / "summary.json", lambda fh: fh.write(json.dumps(summary, indent=1) + "\n"))
    if not passed:
        failed = ", ".join(k for k, v in checks.items() if not v)
        print(f"checks failed: {failed}", file=stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _list(stdout):
    for name, schema in SCHEMAS.items():
        req = [k for k, (_, d) in schema.items() if d is REQUIRED]
        opt = [k for k, (_, d) in schema.items() if d is not REQUIRED]
        print(f"{name}: required [{', '.join(req)}] optional [{', '.join(opt)}]", file=stdout)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sedpilot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (overrides output_path)")
    run.add_argument("--seed", type=lambda s: int(s, 0), help="master seed (overrides the config)")
    sub.add_parser("list", help="list experiments and their keys")
    args = parser.parse_args(argv)

    if args.command == "list":
        _list(sys.stdout)
        return EXIT_OK
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            print("config error: seed must be an unsigned 64-bit integer", file=sys.stderr)
            return EXIT_CONFIG
        cfg.seed = args.seed
    return run_experiment(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
