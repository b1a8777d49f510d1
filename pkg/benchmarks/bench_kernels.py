"""Time the double-slit arrival kernel on the numba and numpy paths.

    python benchmarks/bench_kernels.py [--particles N] [--repeat R]

Both paths run on the same inputs (reference geometry, 16 modes, 801
detector points, 64 samples per slit); the script reports the best of R
timings per path and the largest arrival difference between them.
"""
import argparse
import time

import numpy as np

from sedpilot import kernels
from sedpilot.slit_sim import SlitGeometry


def make_inputs(n_particles, n_modes=16, detector_points=801, seed=0):
    lam = 1.0
    geo = SlitGeometry.in_wavelengths(lam)
    src_y, src_w = geo.sources()
    det = geo.detector_grid(detector_points)
    k = 2 * np.pi / lam
    K = kernels.propagator(src_y, src_w, det.points(), geo.screen_distance, k)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0, 2 * np.pi, (n_particles, n_modes))
    sins = np.sin(rng.uniform(-0.05, 0.05, (n_particles, n_modes)))
    u = rng.random(n_particles)
    return K, src_y, k, phases, sins, u, det.x_min, det.spacing


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--particles", type=int, default=5000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    inputs = make_inputs(args.particles)
    kernels.arrivals_numba(*[a[:2] if isinstance(a, np.ndarray) and a.ndim and a.shape[0] == args.particles
                             else a for a in inputs])  # JIT warm-up
    t_nb, a_nb = best_of(lambda: kernels.arrivals_numba(*inputs), args.repeat)
    t_np, a_np = best_of(lambda: kernels.arrivals_numpy(*inputs), args.repeat)
    n = args.particles
    print(f"particles          {n}")
    print(f"numba   {t_nb:8.3f} s  {1e6 * t_nb / n:8.1f} us/particle")
    print(f"numpy   {t_np:8.3f} s  {1e6 * t_np / n:8.1f} us/particle")
    print(f"speedup {t_np / t_nb:8.2f} x")
    print(f"max |arrival difference| {np.max(np.abs(a_nb - a_np)):.3e}")


if __name__ == "__main__":
    main()
