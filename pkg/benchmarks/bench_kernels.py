#!/usr/bin/env python3
"""Benchmark the hot kernels on both backends (numba JIT vs pure numpy).

Usage:
    python benchmarks/bench_kernels.py [--quick]

Covers the three kernels that dominate runtime: the structured eigensolver's
counting bisection, Lorentzian line accumulation, and the explicit photon
population reconstruction. The numba path is compiled once before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fanocqed import _kernels
from fanocqed.discretize import build_photon_grid
from fanocqed.dynamics import propagate
from fanocqed.eigensolve import eigensolve_structured
from fanocqed.hamiltonian import assemble
from fanocqed.model import CavityModel
from fanocqed.presets import BENZENE_LEVELS, TOLUENE_LEVELS


def timed(fn, repeats=3):
    fn()  # warm caches and JIT compilation outside the timed region
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_eigensolve(n_modes, levels, lam, kappa, use_numba, repeats):
    wc = levels.levels[-1].energy
    span = (n_modes - 1) * 1e-4
    cav = CavityModel(omega_c=wc, lambda_c=(lam, 0.0, 0.0), kappa=kappa,
                      window=(wc - span / 2, wc + span / 2), spacing=1e-4)
    system = assemble(levels, build_photon_grid(cav))
    return timed(lambda: eigensolve_structured(system, use_numba=use_numba), repeats)


def bench_lorentz(n_centers, n_omega, use_numba, repeats):
    rng = np.random.default_rng(0)
    centers = np.sort(rng.uniform(6.0, 7.0, n_centers))
    strengths = rng.uniform(0.0, 1.0, n_centers)
    omega = np.linspace(6.0, 7.0, n_omega)
    return timed(
        lambda: _kernels.lorentz_accumulate(omega, centers, strengths, 1e-3, use_numba=use_numba),
        repeats,
    )


def bench_photon_population(n_modes, n_t, repeats):
    # single BLAS-backed path on both backends; timed for scale reference
    wc = 6.93
    span = (n_modes - 1) * 1e-4
    cav = CavityModel(omega_c=wc, lambda_c=(0.008, 0.0, 0.0), kappa=0.001,
                      window=(wc - span / 2, wc + span / 2), spacing=1e-4)
    system = assemble(BENZENE_LEVELS, build_photon_grid(cav))
    modes = eigensolve_structured(system)
    t = np.linspace(0.0, 500.0, n_t)
    return timed(lambda: propagate(system, "e1", t, modes=modes), repeats)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller sizes, one repeat")
    args = parser.parse_args()
    repeats = 1 if args.quick else 3

    if not _kernels.HAVE_NUMBA:
        print("numba not importable; only the numpy backend will run")

    sizes = {
        "eigensolve M=1": dict(n_modes=1000 if args.quick else 5000,
                               levels=BENZENE_LEVELS, lam=0.008, kappa=0.001),
        "eigensolve M=4": dict(n_modes=500 if args.quick else 2000,
                               levels=TOLUENE_LEVELS, lam=0.05, kappa=0.01),
    }
    rows = []
    for name, kw in sizes.items():
        times = {}
        for backend in (True, False):
            if backend and not _kernels.HAVE_NUMBA:
                continue
            times[backend] = bench_eigensolve(use_numba=backend, repeats=repeats, **kw)
        rows.append((f"{name} (N={kw['n_modes']})", times))

    n_centers = 2000 if args.quick else 36000
    n_omega = 1000 if args.quick else 3000
    times = {}
    for backend in (True, False):
        if backend and not _kernels.HAVE_NUMBA:
            continue
        times[backend] = bench_lorentz(n_centers, n_omega, backend, repeats)
    rows.append((f"lorentz accumulate ({n_centers}x{n_omega})", times))

    width = max(len(r[0]) for r in rows) + 2
    print(f"{'kernel':<{width}}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, times in rows:
        t_nb = times.get(True)
        t_np = times.get(False)
        nb = f"{t_nb:.3f}" if t_nb is not None else "-"
        ratio = f"{t_np / t_nb:.1f}x" if t_nb else "-"
        print(f"{name:<{width}}{nb:>12}{t_np:>12.3f}{ratio:>10}")

    n_modes = 500 if args.quick else 2000
    n_t = 100 if args.quick else 400
    t_pop = bench_photon_population(n_modes, n_t, repeats)
    print(f"\nphoton population (N={n_modes}, T={n_t}): {t_pop:.3f} s "
          f"(chunked BLAS on both backends)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
