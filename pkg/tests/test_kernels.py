"""Compiled kernel vs pure-numpy fallback: identical contract, matching output."""

import numpy as np
import pytest

from ripsim import RatePair, build_operators, singlet_initial_state
from ripsim.kernels import HAVE_COMPILED, compiled_kernel, python_kernel
from ripsim.presets import one_nucleus_system, preset_system

pytestmark = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel unavailable")


def _random_density(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / rho.trace()


def _run(kernel, ops, rates, quantum, rho0, dt, n_steps, stride=7, eps=-1.0):
    f = np.asfortranarray
    rho = f(rho0).copy(order="F")
    n_max = n_steps // stride + 3
    rec_idx = np.zeros(n_max, dtype=np.int64)
    rec = [np.zeros(n_max) for _ in range(5)]
    steps, n_rec = kernel.propagate(
        f(ops.h), f(ops.q_singlet), f(ops.singlet_basis), rates.k_s, rates.k_t,
        quantum, rho, dt, n_steps, stride, eps, rec_idx, *rec)
    return steps, n_rec, rho, rec_idx[:n_rec], [a[:n_rec] for a in rec]


@pytest.mark.parametrize("quantum", [True, False])
@pytest.mark.parametrize("case", ["one_nucleus", "pydma"])
def test_kernels_agree(quantum, case):
    if case == "one_nucleus":
        ops = build_operators(one_nucleus_system(10.0))
        rates = RatePair(20.0, 0.5)
    else:
        ops = build_operators(preset_system("Py-h10-DMA-h11", 0.7))
        rates = RatePair(8.5, 4.0)
    dt = 0.02 / max(ops.spectral_radius(), 2 * rates.total)
    rho0 = _random_density(ops.dim, seed=3)

    out_c = _run(compiled_kernel, ops, rates, quantum, rho0, dt, 500)
    out_p = _run(python_kernel, ops, rates, quantum, rho0, dt, 500)

    assert out_c[0] == out_p[0]  # steps
    assert out_c[1] == out_p[1]  # records
    assert np.max(np.abs(out_c[2] - out_p[2])) < 1e-13
    assert np.array_equal(out_c[3], out_p[3])
    for a, b in zip(out_c[4], out_p[4]):
        assert np.max(np.abs(a - b)) < 1e-12


def test_kernels_agree_on_early_termination():
    ops = build_operators(one_nucleus_system(4.0))
    rates = RatePair(20.0, 0.5)
    dt = 0.02 / max(ops.spectral_radius(), 2 * rates.total)
    rho0 = singlet_initial_state(ops)
    out_c = _run(compiled_kernel, ops, rates, True, rho0, dt, 200_000, eps=1e-6)
    out_p = _run(python_kernel, ops, rates, True, rho0, dt, 200_000, eps=1e-6)
    assert out_c[0] == out_p[0] < 200_000  # both stopped early at the same step
    assert np.max(np.abs(out_c[2] - out_p[2])) < 1e-12


def test_kernel_records_final_step():
    ops = build_operators(one_nucleus_system(5.0))
    rates = RatePair(1.0, 1.0)
    dt = 0.02 / max(ops.spectral_radius(), 2 * rates.total)
    steps, n_rec, _, rec_idx, _ = _run(compiled_kernel, ops, rates, True,
                                       singlet_initial_state(ops), dt, 100, stride=7)
    assert rec_idx[0] == 0
    assert rec_idx[-1] == steps == 100
