"""Density-matrix propagation under either master equation.

Two evolution laws for the radical-pair spin density matrix rho:

* phenomenological:
    d rho/dt = -i[H, rho] - k_S (Q_S rho + rho Q_S) - k_T (Q_T rho + rho Q_T)
  The anti-commutator terms drain trace; survival := trace(rho), and yields
  accumulate as dY_S = 2 k_S tr(Q_S rho) dt.

* quantum measurement:
    d rho/dt = -i[H, rho] - (k_S + k_T) (Q_S rho + rho Q_S - 2 Q_S rho Q_S)
  Trace-preserving dephasing of Q_S at the total measurement rate.  The
  recombination jumps carry probabilities dP_S = 2 k_S <Q_S> dt and
  dP_T = 2 k_T <Q_T> dt, so the surviving fraction obeys
  dp/dt = -2 (k_S <Q_S> + k_T <Q_T>) p and yields dY_S = 2 k_S <Q_S> p dt.

Propagation is fixed-step RK4 (see kernels); the independent matrix-exponential
oracle lives in `superop`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import kernels
from .errors import ModelError, StepSizeError
from .spincore import OperatorSet, SpinSystem, build_operators

__all__ = [
    "Theory",
    "RatePair",
    "DensityState",
    "EvolutionRecord",
    "MonteCarloResult",
    "singlet_initial_state",
    "default_dt",
    "step_phenomenological",
    "step_quantum",
    "evolve",
    "evolve_unitary",
    "monte_carlo_yields",
]

#: survival threshold below which a run counts as complete
EPS_SURVIVAL_DEFAULT = 1e-6


class Theory(enum.Enum):
    QUANTUM = "quantum"
    PHENOMENOLOGICAL = "phenomenological"


@dataclass(frozen=True)
class RatePair:
    """Singlet/triplet recombination rates, 1/us."""

    k_s: float
    k_t: float

    def __post_init__(self):
        for name, k in (("k_s", self.k_s), ("k_t", self.k_t)):
            if not np.isfinite(k) or k < 0:
                raise ModelError(f"{name} must be finite and >= 0, got {k}")

    @property
    def total(self) -> float:
        return self.k_s + self.k_t


@dataclass
class DensityState:
    """Density matrix with its time stamp."""

    rho: NDArray
    time_us: float = 0.0

    def validate(self, herm_tol=1e-10, eig_tol=1e-9, trace_tol=1e-9):
        if np.max(np.abs(self.rho - self.rho.conj().T)) > herm_tol:
            raise ModelError("density matrix is not Hermitian within tolerance")
        eigs = np.linalg.eigvalsh(self.rho)
        if eigs.min() < -eig_tol:
            raise ModelError(f"density matrix not positive semidefinite (min eig {eigs.min():.3e})")
        tr = self.rho.trace().real
        if not -trace_tol <= tr <= 1 + trace_tol:
            raise ModelError(f"trace {tr} outside [0, 1]")
        return self

    def trace(self) -> float:
        return float(self.rho.trace().real)


@dataclass
class EvolutionRecord:
    """Sampled trajectory: <Q_S>(t), survival p(t), accumulated yields."""

    times: NDArray
    q_s_expect: NDArray
    survival: NDArray
    yield_s: NDArray
    yield_t: NDArray
    converged: bool
    theory: Theory
    dt_us: float
    final_state: DensityState = field(repr=False, default=None)

    @property
    def terminal_yields(self) -> tuple[float, float]:
        return float(self.yield_s[-1]), float(self.yield_t[-1])


@dataclass(frozen=True)
class MonteCarloResult:
    yield_s: float
    yield_t: float
    stderr_s: float
    stderr_t: float
    n_trajectories: int
    n_unrecombined: int


def _as_operators(system: SpinSystem | OperatorSet) -> OperatorSet:
    return system if isinstance(system, OperatorSet) else build_operators(system)


def singlet_initial_state(ops: OperatorSet) -> NDArray:
    """Electron singlet, nuclei maximally mixed: rho0 = Q_S / tr(Q_S)."""
    return np.array(ops.q_singlet) / (ops.dim / 4)


def default_dt(ops: OperatorSet, rates: RatePair) -> float:
    """dt = 0.02 / max(spectral radius of H, 2 (k_S + k_T))."""
    denom = max(ops.spectral_radius(), 2.0 * rates.total)
    if denom == 0.0:
        raise ModelError("trivial dynamics (H = 0, rates 0): pass dt explicitly")
    return 0.02 / denom


def _check_step(ops: OperatorSet, rates: RatePair, dt: float):
    if dt <= 0:
        raise StepSizeError(f"dt must be positive, got {dt}")
    guard = dt * (ops.spectral_radius() + 2.0 * rates.total)
    if guard > 0.5:
        raise StepSizeError(
            f"dt * (spectral radius + 2(k_s + k_t)) = {guard:.3g} exceeds the 0.5 stability guard")


def _kernel_inputs(ops: OperatorSet):
    # always copy: the OperatorSet arrays are read-only and the compiled
    # kernel takes plain (non-const) memoryviews
    def f(a):
        return np.array(a, dtype=complex, order="F")

    return f(ops.h), f(ops.q_singlet), f(ops.singlet_basis)


def _single_step(state: DensityState, ops: OperatorSet, rates: RatePair,
                 dt: float, quantum: bool) -> DensityState:
    _check_step(ops, rates, dt)
    h, qs, u = _kernel_inputs(ops)
    rho = np.asfortranarray(state.rho, dtype=complex).copy(order="F")
    rec = [np.zeros(2, dtype=t) for t in (np.int64, float, float, float, float, float)]
    kernels.propagate(h, qs, u, rates.k_s, rates.k_t, quantum, rho, dt, 1, 1, -1.0, *rec)
    return DensityState(rho=rho, time_us=state.time_us + dt)


def step_phenomenological(state: DensityState, ops: OperatorSet, rates: RatePair,
                          dt: float) -> DensityState:
    """One RK4 step of the phenomenological (trace-draining) master equation."""
    return _single_step(state, ops, rates, dt, quantum=False)


def step_quantum(state: DensityState, ops: OperatorSet, rates: RatePair,
                 dt: float) -> DensityState:
    """One RK4 step of the quantum-measurement (trace-preserving) master equation."""
    return _single_step(state, ops, rates, dt, quantum=True)


def evolve(system: SpinSystem | OperatorSet, rates: RatePair, theory: Theory,
           rho0: NDArray | None = None, t_max: float | None = None,
           dt: float | None = None, record_stride: int | None = None,
           eps_survival: float = EPS_SURVIVAL_DEFAULT,
           keep_final_state: bool = True) -> EvolutionRecord:
    """Propagate to t_max or until survival < eps_survival, whichever is first.

    The quantum scheme evolves the normalized (trace-1) state and carries the
    survival probability p(t) and yields as auxiliary RK4 components; the
    phenomenological scheme evolves the unnormalized rho with survival :=
    trace(rho).  A run that still has survival >= eps_survival at t_max is
    returned with converged=False, never silently truncated.
    """
    ops = _as_operators(system)
    if rho0 is None:
        rho0 = singlet_initial_state(ops)
    if t_max is None:
        kmin = min(rates.k_s, rates.k_t)
        if kmin <= 0:
            raise ModelError("t_max is required when either rate is zero")
        t_max = 50.0 / kmin
    if t_max <= 0:
        raise ModelError(f"t_max must be positive, got {t_max}")
    if dt is None:
        dt = default_dt(ops, rates)
    _check_step(ops, rates, dt)

    max_steps = max(1, math.ceil(t_max / dt - 1e-12))
    if record_stride is None:
        record_stride = max(1, max_steps // 2000)
    if record_stride < 1:
        raise ModelError("record_stride must be >= 1")

    h, qs, u = _kernel_inputs(ops)
    rho = np.asfortranarray(rho0, dtype=complex).copy(order="F")
    if rho.shape != (ops.dim, ops.dim):
        raise ModelError(f"rho0 has shape {rho.shape}, expected {(ops.dim, ops.dim)}")

    n_max = max_steps // record_stride + 3
    rec_idx = np.zeros(n_max, dtype=np.int64)
    rec = [np.zeros(n_max) for _ in range(5)]

    quantum = theory is Theory.QUANTUM
    steps_done, n_rec = kernels.propagate(
        h, qs, u, rates.k_s, rates.k_t, quantum, rho, dt,
        max_steps, record_stride, eps_survival, rec_idx, *rec)

    rec_q, rec_tr, rec_p, rec_ys, rec_yt = (a[:n_rec] for a in rec)
    times = rec_idx[:n_rec] * dt
    converged = bool(rec_p[-1] < eps_survival) if rates.total > 0 else True

    return EvolutionRecord(
        times=times,
        q_s_expect=rec_q,
        survival=rec_p,
        yield_s=rec_ys,
        yield_t=rec_yt,
        converged=converged,
        theory=theory,
        dt_us=dt,
        final_state=DensityState(rho, float(times[-1])) if keep_final_state else None,
    )


def evolve_unitary(system: SpinSystem | OperatorSet, rho0: NDArray | None = None,
                   t_max: float = None, dt: float | None = None,
                   record_stride: int | None = None) -> EvolutionRecord:
    """Recombination-free evolution (k_S = k_T = 0): survival 1, yields 0."""
    if t_max is None:
        raise ModelError("t_max is required for a unitary run")
    ops = _as_operators(system)
    if dt is None:
        sr = ops.spectral_radius()
        if sr == 0.0:
            raise ModelError("H = 0: pass dt explicitly")
        dt = 0.02 / sr
    return evolve(ops, RatePair(0.0, 0.0), Theory.QUANTUM, rho0=rho0,
                  t_max=t_max, dt=dt, record_stride=record_stride)


def monte_carlo_yields(system: SpinSystem | OperatorSet, rates: RatePair,
                       rho0: NDArray | None = None, n_trajectories: int = 10_000,
                       seed: int = 0, dt: float | None = None,
                       t_max: float | None = None,
                       eps_survival: float = EPS_SURVIVAL_DEFAULT) -> MonteCarloResult:
    """Quantum-jump ensemble estimate of the recombination yields.

    All trajectories share the deterministic quantum-measurement trajectory;
    each one samples the step in which its recombination jump fires (singlet
    channel with probability dP_S = 2 k_S <Q_S> dt, triplet with
    dP_T = 2 k_T <Q_T> dt, compounded over steps) from a counter-based
    random stream, so trajectory k is reproducible for a fixed seed.
    """
    if n_trajectories < 1:
        raise ModelError("n_trajectories must be >= 1")
    ops = _as_operators(system)
    record = evolve(ops, rates, Theory.QUANTUM, rho0=rho0, t_max=t_max, dt=dt,
                    record_stride=1, eps_survival=eps_survival, keep_final_state=False)

    q = record.q_s_expect
    dt_us = record.dt_us
    dp_step = 2.0 * dt_us * (rates.k_s * q + rates.k_t * (1.0 - q))
    if dp_step.max() > 0.1:
        raise StepSizeError(
            f"per-step jump probability {dp_step.max():.3g} exceeds 0.1; reduce dt")

    # Per-step recombination mass, exactly consistent with the deterministic
    # survival bookkeeping: mass_n = p_n - p_{n+1}, split by channel.
    ds = np.diff(record.yield_s)
    dtr = np.diff(record.yield_t)
    mass = ds + dtr
    cum = np.cumsum(mass)
    total = cum[-1] if len(cum) else 0.0

    rng = np.random.Generator(np.random.Philox(key=seed))
    u_jump = rng.random(n_trajectories)
    u_channel = rng.random(n_trajectories)

    recombined = u_jump < total
    steps = np.searchsorted(cum, u_jump[recombined], side="right")
    frac_s = np.divide(ds[steps], mass[steps], out=np.zeros_like(ds[steps]),
                       where=mass[steps] > 0)
    singlet = u_channel[recombined] < frac_s

    n_s = int(np.count_nonzero(singlet))
    n_t = int(np.count_nonzero(recombined)) - n_s
    n = n_trajectories
    y_s, y_t = n_s / n, n_t / n
    return MonteCarloResult(
        yield_s=y_s, yield_t=y_t,
        stderr_s=math.sqrt(max(y_s * (1 - y_s), 1e-300) / n),
        stderr_t=math.sqrt(max(y_t * (1 - y_t), 1e-300) / n),
        n_trajectories=n, n_unrecombined=n - n_s - n_t,
    )
