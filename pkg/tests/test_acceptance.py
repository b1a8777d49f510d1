"""Exit criteria. Each test prints one PASS/FAIL line in the terminal summary."""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from sedpilot import Grid1D
from sedpilot.cli import parse_config, run_experiment
from sedpilot.pilot_wave import (PhysicalParticle, de_broglie_wavelength, doppler_frequencies,
                                 pilot_wave_params, pilot_wave_value, synthesize_field, wave_numbers)
from sedpilot.quantum_solver import (Potential, nonrelativistic_limit_study, sign_changes, solve_tise,
                                     wave_equation_residual)
from sedpilot.slit_sim import (SlitGeometry, chi2_per_dof, expected_counts, fringe_spacing,
                               fringe_visibility, run_double_slit)
from sedpilot.spectral import measure_de_broglie, recommended_grid

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
N_RANDOM = 1000


def _oracle_sum(beta, x, t, th1, th2):
    up = np.sqrt((1 + beta) / (1 - beta))
    down = np.sqrt((1 - beta) / (1 + beta))
    return np.cos(up * (t - x) + th1 + th2) + np.cos(down * (t + x) + th1 - th2)


def test_c1_product_sum_identity(record_criterion):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    beta = 0.99 * (1.0 - rng.random(N_RANDOM))  # (0, 0.99]
    x, t = rng.uniform(-20, 20, (2, N_RANDOM))
    th1, th2 = rng.uniform(0, 2 * math.pi, (2, N_RANDOM))
    worst = 0.0
    for i in range(N_RANDOM):
        prm = pilot_wave_params(PhysicalParticle(1.0, beta[i]), th1[i], th2[i])
        err = abs(pilot_wave_value(prm, x[i], t[i]) - _oracle_sum(beta[i], x[i], t[i], th1[i], th2[i]))
        worst = max(worst, err / prm.amplitude)
    dt = time.perf_counter() - t0
    ok = record_criterion("C1 product = component sum", worst < 1e-12 and dt < 1.0,
                          f"max err/amplitude {worst:.2e}, {dt:.2f} s")
    assert ok


def test_c2_doppler_identities(record_criterion):
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    worst = 0.0
    for b in 1.0 - rng.random(N_RANDOM):
        if b >= 1.0:
            continue
        p = PhysicalParticle(1.0, b)
        wp, wm = doppler_frequencies(p)
        kp, km = wave_numbers(p)
        worst = max(worst, abs(wp * wm - 1.0), abs(wp / kp - 1.0), abs(wm / km - 1.0))
    dt = time.perf_counter() - t0
    ok = record_criterion("C2 Doppler identities", worst < 1e-12 and dt < 1.0, f"max rel err {worst:.2e}, {dt:.2f} s")
    assert ok


def test_c3_velocity_factorization(record_criterion):
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    worst = 0.0
    for b in rng.random(N_RANDOM):
        if b == 0.0:
            continue
        prm = pilot_wave_params(PhysicalParticle(1.0, b))
        worst = max(worst, abs(prm.carrier_phase_velocity * prm.envelope_velocity - 1.0))
    dt = time.perf_counter() - t0
    ok = record_criterion("C3 velocity factorization", worst < 1e-12 and dt < 1.0,
                          f"max rel err {worst:.2e}, {dt:.2f} s")
    assert ok


def test_c4_de_broglie_recovery(record_criterion):
    t0 = time.perf_counter()
    errs = {}
    for b in (0.1, 0.3, 0.5, 0.7, 0.9):
        p = PhysicalParticle(1.0, b)
        prm = pilot_wave_params(p, 0.9, 2.4)
        lam = measure_de_broglie(synthesize_field(prm, recommended_grid(prm), 0.0))
        errs[b] = abs(lam / de_broglie_wavelength(p) - 1)
    dt = time.perf_counter() - t0
    worst = max(errs.values())
    ok = record_criterion("C4 de Broglie recovery", worst < 1e-2 and dt < 10.0,
                          f"max rel err {worst:.2e}, {dt:.2f} s")
    assert ok


def test_c5a_light_speed_residual_order(record_criterion):
    t0 = time.perf_counter()
    prm = pilot_wave_params(PhysicalParticle(1.0, 0.5), 0.3, 1.7)
    res = [wave_equation_residual(prm, Grid1D(0.0, 20.0, n), 0.5, 1.0) for n in (401, 801, 1601, 3201)]
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    dt = time.perf_counter() - t0
    ok = record_criterion("C5a wave residual at c is O(h^2)",
                          bool(np.all(np.abs(orders - 2.0) <= 0.3)) and dt < 30.0,
                          f"orders {np.round(orders, 3).tolist()}, {dt:.2f} s")
    assert ok


def test_c5b_phase_velocity_residual_small_beta(record_criterion):
    t0 = time.perf_counter()
    beta = 0.05
    prm = pilot_wave_params(PhysicalParticle(1.0, beta), 0.3, 1.7)
    r = wave_equation_residual(prm, Grid1D(0.0, 20.0, 3201), 0.5, 1.0 / beta)
    dt = time.perf_counter() - t0
    ok = record_criterion("C5b wave residual at c^2/v, beta=0.05, < 0.01", r < 0.01 and dt < 30.0,
                          f"residual {r:.6f} (analytic 1 - beta^2 = {1 - beta ** 2:.6f}), {dt:.2f} s")
    assert ok


def test_c6_schroedinger_solver(record_criterion):
    t0 = time.perf_counter()
    well = solve_tise(Potential.infinite_well(1.0), Grid1D(0.0, 1.0, 2001), 1.0, 5)
    harm = solve_tise(Potential.harmonic(1.0), Grid1D(-10.0, 10.0, 2001), 1.0, 6)
    e1_err = abs(well.eigenvalues[0] / (math.pi ** 2 / 2) - 1)
    harm_err = float(np.max(np.abs(harm.eigenvalues - (np.arange(6) + 0.5))))
    ortho = max(abs(s.inner(i, j) - (i == j)) for s in (well, harm)
                for i in range(len(s.eigenvalues)) for j in range(len(s.eigenvalues)))
    nodes_ok = all(sign_changes(s.eigenfunctions[i][1:-1]) == i for s in (well, harm)
                   for i in range(len(s.eigenvalues)))
    dt = time.perf_counter() - t0
    ok = record_criterion("C6 Schroedinger solver",
                          e1_err < 1e-3 and harm_err < 1e-3 and ortho < 1e-8 and nodes_ok and dt < 30.0,
                          f"E1 rel {e1_err:.1e}, harmonic abs {harm_err:.1e}, ortho {ortho:.1e}, "
                          f"nodes {'exact' if nodes_ok else 'WRONG'}, {dt:.2f} s")
    assert ok


def test_c7_klein_gordon_limit(record_criterion):
    t0 = time.perf_counter()
    rows = nonrelativistic_limit_study(Potential.harmonic(1.0), Grid1D(-10.0, 10.0, 2001), [1.0, 10.0, 100.0])
    res = [r.residual for r in rows]
    ratio = res[-1] / res[0]
    dt = time.perf_counter() - t0
    ok = record_criterion("C7 Klein-Gordon limit",
                          res[0] > res[1] > res[2] and ratio < 0.1 and dt < 60.0,
                          f"residuals {[f'{r:.3e}' for r in res]}, ratio {ratio:.4f}, {dt:.2f} s")
    assert ok


def test_c8_double_slit_statistics(record_criterion):
    t0 = time.perf_counter()
    particle = PhysicalParticle(1.0, 0.5)
    lam = de_broglie_wavelength(particle)
    geo = SlitGeometry.in_wavelengths(lam, d=10.0, a=1.0, L=1000.0)
    hist = run_double_slit(geo, particle, 50_000, n_modes=16, angular_spread=0.0, master_seed=20240601)
    covered = run_double_slit(geo.covered(2), particle, 50_000, n_modes=16, master_seed=20240601)
    expected_spacing = lam * geo.screen_distance / geo.slit_separation
    spacing = fringe_spacing(hist, expected_spacing, 3, geo.screen_distance)
    chi2 = chi2_per_dof(hist, expected_counts(hist, geo, lam))
    vis2 = fringe_visibility(hist, expected_spacing)
    vis1 = fringe_visibility(covered, expected_spacing)
    dt = time.perf_counter() - t0
    spacing_err = abs(spacing / expected_spacing - 1)
    ok = record_criterion("C8 double-slit statistics",
                          spacing_err < 0.05 and chi2 < 2.0 and vis2 >= 0.6 and vis1 <= 0.2 and dt < 300.0,
                          f"spacing err {spacing_err:.2%}, chi2/dof {chi2:.3f}, visibility {vis2:.3f} "
                          f"vs covered {vis1:.3f}, {dt:.1f} s")
    assert ok


def test_c9_reproducibility(record_criterion, tmp_path):
    t0 = time.perf_counter()
    texts = {name: (CONFIGS / f"{name}.cfg").read_text() for name in
             ("debroglie", "dispersion", "tise_well", "tise_harmonic", "kg_limit")}
    texts["double_slit"] = (CONFIGS / "double_slit.cfg").read_text().replace("50000", "12000")
    same = {}
    for name, text in texts.items():
        blobs = []
        for rep in range(2):
            out = tmp_path / f"{name}_{rep}"
            assert run_experiment(parse_config(text), out) == 0
            blobs.append((out / "result.csv").read_bytes())
        same[name] = blobs[0] == blobs[1]
    dt = time.perf_counter() - t0
    ok = record_criterion("C9 byte-identical result.csv", all(same.values()),
                          f"{sum(same.values())}/{len(same)} experiments identical, {dt:.1f} s")
    assert ok
