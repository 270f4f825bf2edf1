#!/usr/bin/env python3
"""Benchmark: compiled RK4 kernel vs pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [n_steps]
"""

import sys
import time

import numpy as np

from ripsim import RatePair, Theory, build_operators, singlet_initial_state
from ripsim.kernels import HAVE_COMPILED, compiled_kernel, python_kernel
from ripsim.presets import ONE_NUCLEUS_RATES, one_nucleus_system, preset_rates, preset_system


def run(kernel, ops, rates, quantum, dt, n_steps):
    f = np.asfortranarray
    rho = f(singlet_initial_state(ops)).copy(order="F")
    rec_idx = np.zeros(4, dtype=np.int64)
    rec = [np.zeros(4) for _ in range(5)]
    t0 = time.perf_counter()
    kernel.propagate(f(ops.h), f(ops.q_singlet), f(ops.singlet_basis),
                     rates.k_s, rates.k_t, quantum, rho, dt, n_steps, n_steps,
                     -1.0, rec_idx, *rec)
    return time.perf_counter() - t0, rho


def main():
    n_steps = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
    cases = [
        ("one-nucleus d=8", build_operators(one_nucleus_system(10.0)), ONE_NUCLEUS_RATES),
        ("Py-DMA d=16", build_operators(preset_system("Py-h10-DMA-h11", 1.0)),
         preset_rates("Py-h10-DMA-h11")),
    ]
    kernels = [("python", python_kernel)]
    if HAVE_COMPILED:
        kernels.append(("compiled", compiled_kernel))
    else:
        print("compiled kernel not available; benchmarking fallback only")

    print(f"{n_steps} RK4 steps per case")
    print(f"{'case':<18} {'theory':<10} " +
          " ".join(f"{name + ' us/step':>18}" for name, _ in kernels) + "   max|diff|")
    for label, ops, rates in cases:
        dt = 0.02 / max(ops.spectral_radius(), 2 * rates.total)
        for theory, quantum in (("quantum", True), ("phenom", False)):
            times, rhos = [], []
            for _, kernel in kernels:
                elapsed, rho = run(kernel, ops, rates, quantum, dt, n_steps)
                times.append(elapsed / n_steps * 1e6)
                rhos.append(rho)
            diff = np.max(np.abs(rhos[0] - rhos[-1])) if len(rhos) > 1 else 0.0
            print(f"{label:<18} {theory:<10} " +
                  " ".join(f"{t:>18.2f}" for t in times) + f"   {diff:.2e}")
    if HAVE_COMPILED:
        print("\nspeedup = python / compiled per-step time")


if __name__ == "__main__":
    main()
