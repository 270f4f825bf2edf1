"""Propagation laws, trace behavior, and oracle equivalence of the RK4 path."""

import numpy as np
import pytest

from ripsim import (
    DensityState,
    RatePair,
    StepSizeError,
    Theory,
    build_operators,
    evolve,
    evolve_unitary,
    propagate_superoperator,
    singlet_initial_state,
    step_phenomenological,
    step_quantum,
)
from ripsim.presets import ONE_NUCLEUS_RATES, one_nucleus_system, preset_rates, preset_system
from ripsim.spincore import SpinSystem


def electron_only(field=0.0):
    return build_operators(SpinSystem((), field))


def test_phenom_equal_rates_trace_decay():
    # k_S = k_T = k: Q_S + Q_T = 1 makes the loss state-independent, trace = e^{-2kt}
    ops = build_operators(one_nucleus_system(6.0, field_mT=0.3))
    k = 2.0
    rec = evolve(ops, RatePair(k, k), Theory.PHENOMENOLOGICAL, t_max=5 / k,
                 eps_survival=0.0, record_stride=50)
    expected = np.exp(-2 * k * rec.times)
    assert np.max(np.abs(rec.survival / expected - 1)) < 1e-6


def test_quantum_trace_conserved_1e4_steps():
    ops = build_operators(one_nucleus_system(10.0, field_mT=0.05))
    rates = ONE_NUCLEUS_RATES
    dt = 0.02 / max(ops.spectral_radius(), 2 * rates.total)
    rec = evolve(ops, rates, Theory.QUANTUM, t_max=10_000 * dt, dt=dt,
                 eps_survival=0.0, record_stride=100)
    traces = [rec.final_state.rho.trace().real]
    assert abs(traces[-1] - 1.0) < 1e-9


def test_zero_rates_step_is_unitary():
    ops = build_operators(one_nucleus_system(8.0, field_mT=0.1))
    rng = np.random.default_rng(7)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho0 = a @ a.conj().T
    rho0 /= rho0.trace()
    state = DensityState(rho0.copy())
    dt = 0.01 / ops.spectral_radius()
    for _ in range(200):
        state = step_phenomenological(state, ops, RatePair(0.0, 0.0), dt)
    eig0 = np.sort(np.linalg.eigvalsh(rho0))
    eig1 = np.sort(np.linalg.eigvalsh(state.rho))
    assert np.max(np.abs(eig0 - eig1)) < 1e-8


def test_no_coupling_no_mixing():
    # A = 0 and rho0 = singlet (x) mixed nuclei: no S-T mixing mechanism
    ops = build_operators(one_nucleus_system(0.0, field_mT=0.5))
    rates = RatePair(3.0, 1.0)
    rec_p = evolve(ops, rates, Theory.PHENOMENOLOGICAL, t_max=2.0, eps_survival=0.0,
                   record_stride=20)
    # normalized <Q_S> stays 1, no triplet yield
    assert np.max(np.abs(rec_p.q_s_expect / rec_p.survival - 1)) < 1e-9
    assert rec_p.yield_t[-1] < 1e-12

    rec_q = evolve(ops, rates, Theory.QUANTUM, t_max=2.0, eps_survival=0.0,
                   record_stride=20)
    rho0 = singlet_initial_state(ops)
    assert np.max(np.abs(rec_q.final_state.rho - rho0)) < 1e-12
    assert rec_q.yield_t[-1] < 1e-12


def test_dephasing_closed_form():
    # H = 0: singlet-triplet coherence decays at the total measurement rate
    # k_S + k_T (2x2 analytic block), populations frozen.
    ops = electron_only(field=0.0)
    singlet = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    t0 = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    c = 0.3
    rho0 = 0.5 * (np.outer(singlet, singlet.conj()) + np.outer(t0, t0.conj()))
    rho0 += c * (np.outer(singlet, t0.conj()) + np.outer(t0, singlet.conj()))
    rates = RatePair(1.5, 0.5)
    t = 0.8
    rec = evolve(ops, rates, Theory.QUANTUM, rho0=rho0, t_max=t, dt=1e-3,
                 eps_survival=0.0)
    rho_t = rec.final_state.rho
    coh = singlet.conj() @ rho_t @ t0
    assert coh.real == pytest.approx(c * np.exp(-rates.total * t), rel=1e-6)
    assert abs(coh.imag) < 1e-9
    pop = (singlet.conj() @ rho_t @ singlet).real
    assert pop == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("theory", [Theory.QUANTUM, Theory.PHENOMENOLOGICAL])
def test_equal_rates_survival(theory):
    ops = build_operators(one_nucleus_system(12.0, field_mT=0.05))
    k = 4.0
    rec = evolve(ops, RatePair(k, k), theory, t_max=5 / k, eps_survival=0.0,
                 record_stride=10)
    expected = np.exp(-2 * k * rec.times)
    assert np.max(np.abs(rec.survival / expected - 1)) < 1e-6


@pytest.mark.parametrize("theory", [Theory.QUANTUM, Theory.PHENOMENOLOGICAL])
def test_yield_closure_and_state_quality(theory):
    ops = build_operators(one_nucleus_system(10.0, field_mT=0.05))
    rates = ONE_NUCLEUS_RATES
    rec = evolve(ops, rates, theory)
    assert rec.converged
    # exact closure of the auxiliary RK4 bookkeeping
    closure = rec.yield_s + rec.yield_t + rec.survival
    assert np.max(np.abs(closure - 1)) < 1e-6
    assert rec.yield_s[-1] + rec.yield_t[-1] == pytest.approx(1.0, abs=1e-3)
    # survival monotone, yields monotone
    assert np.all(np.diff(rec.survival) <= 1e-12)
    assert np.all(np.diff(rec.yield_s) >= -1e-12)
    assert np.all(np.diff(rec.yield_t) >= -1e-12)
    # final state Hermitian positive
    DensityState(rec.final_state.rho).validate()


@pytest.mark.parametrize("theory", [Theory.QUANTUM, Theory.PHENOMENOLOGICAL])
@pytest.mark.parametrize("model", ["one_nucleus", "pydma"])
def test_oracle_equivalence_checkpoints(theory, model):
    """RK4 matches the matrix-exponential propagator at 10 checkpoints."""
    if model == "one_nucleus":
        ops = build_operators(one_nucleus_system(10.0, field_mT=0.05))
        rates = ONE_NUCLEUS_RATES
    else:
        ops = build_operators(preset_system("Py-h10-DMA-h11", 1.0))
        rates = preset_rates("Py-h10-DMA-h11")
    rho0 = singlet_initial_state(ops)
    dt = 0.02 / max(ops.spectral_radius(), 2 * rates.total)
    t_checks = np.linspace(0.01, 0.1, 10)
    for t in t_checks:
        n = int(round(t / dt))
        rec = evolve(ops, rates, theory, t_max=n * dt, dt=dt, eps_survival=0.0)
        oracle = propagate_superoperator(ops, rates, theory, rho0, n * dt)
        assert np.max(np.abs(rec.final_state.rho - oracle.rho)) < 1e-6


def test_superoperator_identity_and_trace():
    ops = build_operators(one_nucleus_system(5.0, field_mT=0.2))
    rates = RatePair(2.0, 1.0)
    rho0 = singlet_initial_state(ops)
    st0 = propagate_superoperator(ops, rates, Theory.QUANTUM, rho0, 0.0)
    assert np.max(np.abs(st0.rho - rho0)) < 1e-14
    st1 = propagate_superoperator(ops, rates, Theory.QUANTUM, rho0, 1.3)
    assert st1.rho.trace().real == pytest.approx(1.0, abs=1e-10)


def test_step_halving_yield_convergence():
    ops = build_operators(one_nucleus_system(10.0, field_mT=0.05))
    rates = ONE_NUCLEUS_RATES
    dt = 0.02 / max(ops.spectral_radius(), 2 * rates.total)
    y1 = evolve(ops, rates, Theory.QUANTUM, dt=dt).terminal_yields
    y2 = evolve(ops, rates, Theory.QUANTUM, dt=dt / 2).terminal_yields
    assert abs(y1[0] - y2[0]) < 1e-5
    assert abs(y1[1] - y2[1]) < 1e-5


def test_unitary_invariants():
    ops = build_operators(one_nucleus_system(10.0, field_mT=0.0))
    rec = evolve_unitary(ops, t_max=2.0, record_stride=100)
    assert np.all(rec.survival == 1.0)
    assert np.all(rec.yield_s == 0.0)
    eig0 = np.sort(np.linalg.eigvalsh(singlet_initial_state(ops)))
    eig1 = np.sort(np.linalg.eigvalsh(rec.final_state.rho))
    assert np.max(np.abs(eig0 - eig1)) < 1e-8


def test_unitary_qs_against_eigendecomposition():
    """<Q_S>(t) from RK4 vs the dense-diagonalization closed form."""
    a = 9.0
    ops = build_operators(one_nucleus_system(a, field_mT=0.0))
    rho0 = singlet_initial_state(ops)
    rec = evolve_unitary(ops, t_max=3.0, record_stride=1)

    evals, vecs = np.linalg.eigh(ops.h)
    rho0_e = vecs.conj().T @ rho0 @ vecs
    qs_e = vecs.conj().T @ ops.q_singlet @ vecs

    def qs_exact(t):
        phase = np.exp(-1j * evals * t)
        rho_t = (phase[:, None] * rho0_e) * phase.conj()[None, :]
        return np.trace(qs_e @ rho_t).real

    exact = np.array([qs_exact(t) for t in rec.times])
    assert np.max(np.abs(rec.q_s_expect - exact)) < 1e-7
    # time-average and minimum of the oscillation agree with the closed form
    assert rec.q_s_expect.mean() == pytest.approx(exact.mean(), abs=1e-7)
    assert rec.q_s_expect.min() == pytest.approx(exact.min(), abs=1e-7)


def test_unitary_no_coupling_constant_qs():
    ops = build_operators(one_nucleus_system(0.0, field_mT=0.05))
    rec = evolve_unitary(ops, t_max=1.0, dt=1e-3, record_stride=10)
    assert np.max(np.abs(rec.q_s_expect - 1.0)) < 1e-10


def test_zeno_suppression_a4():
    """Strong measurement holds <Q_S> above the free-mixing minimum (A = 4)."""
    ops = build_operators(one_nucleus_system(4.0, field_mT=0.05))
    rates = ONE_NUCLEUS_RATES  # k_S + k_T = 20.5 >> A
    rec = evolve(ops, rates, Theory.QUANTUM, t_max=0.5, eps_survival=0.0,
                 record_stride=5)
    unit = evolve_unitary(ops, t_max=0.5, dt=rec.dt_us, record_stride=5)
    assert rec.q_s_expect.min() > unit.q_s_expect.min()


def test_stability_guard():
    ops = build_operators(one_nucleus_system(10.0, field_mT=0.05))
    rates = RatePair(20.0, 0.5)
    bad_dt = 1.0 / ops.spectral_radius()
    with pytest.raises(StepSizeError):
        step_quantum(DensityState(singlet_initial_state(ops)), ops, rates, bad_dt)
    with pytest.raises(StepSizeError):
        evolve(ops, rates, Theory.QUANTUM, t_max=1.0, dt=bad_dt)


def test_single_steps_match_evolve():
    ops = build_operators(one_nucleus_system(7.0, field_mT=0.1))
    rates = RatePair(5.0, 2.0)
    dt = 1e-3
    state = DensityState(singlet_initial_state(ops))
    for _ in range(10):
        state = step_quantum(state, ops, rates, dt)
    rec = evolve(ops, rates, Theory.QUANTUM, t_max=10 * dt, dt=dt, eps_survival=0.0)
    assert np.max(np.abs(state.rho - rec.final_state.rho)) < 1e-13
    assert state.time_us == pytest.approx(rec.times[-1])


def test_unconverged_run_flagged():
    ops = build_operators(one_nucleus_system(10.0, field_mT=0.05))
    rec = evolve(ops, RatePair(0.1, 0.1), Theory.QUANTUM, t_max=0.5)
    assert not rec.converged
    assert rec.survival[-1] > 1e-6
