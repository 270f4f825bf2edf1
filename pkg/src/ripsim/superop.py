"""Vectorized-Liouvillian propagation: the independent numerical oracle.

The master equations are linear in rho, so each defines a d^2 x d^2
superoperator L acting on the column-stacked vec(rho).  exp(L t) gives the
exact propagator (scaling-and-squaring via scipy), used to cross-validate
the RK4 kernels, and fine-grid quadrature on exp(L dt)-stepped trajectories
pins reference yields.  Nothing here shares code with the RK4 path.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import cumulative_simpson, simpson
from scipy.linalg import expm

from .dynamics import DensityState, RatePair, Theory, singlet_initial_state
from .errors import DimensionError, ModelError
from .spincore import OperatorSet, SpinSystem, build_operators

__all__ = [
    "liouvillian",
    "propagate_superoperator",
    "reference_yields",
    "phenomenological_yields_exact",
]

SUPEROP_DIM_CAP = 65536


def _ops(system) -> OperatorSet:
    return system if isinstance(system, OperatorSet) else build_operators(system)


def liouvillian(ops: OperatorSet, rates: RatePair, theory: Theory) -> NDArray:
    """Superoperator L with d rho/dt = L vec(rho), column-stacking convention."""
    d = ops.dim
    if d * d > SUPEROP_DIM_CAP:
        raise DimensionError(f"superoperator dimension {d * d} exceeds cap {SUPEROP_DIM_CAP}")
    eye = np.eye(d, dtype=complex)
    h, qs, qt = ops.h, ops.q_singlet, ops.q_triplet

    def left(a):      # vec(A rho)
        return np.kron(eye, a)

    def right(a):     # vec(rho A)
        return np.kron(a.T, eye)

    lv = -1j * (left(h) - right(h))
    if theory is Theory.QUANTUM:
        kappa = rates.total
        lv -= kappa * (left(qs) + right(qs) - 2.0 * np.kron(qs.T, qs))
    else:
        lv -= rates.k_s * (left(qs) + right(qs))
        lv -= rates.k_t * (left(qt) + right(qt))
    return lv


def propagate_superoperator(system: SpinSystem | OperatorSet, rates: RatePair,
                            theory: Theory, rho0: NDArray, t: float) -> DensityState:
    """rho(t) = unvec(expm(L t) vec(rho0)); exact up to expm precision."""
    ops = _ops(system)
    lv = liouvillian(ops, rates, theory)
    vec = np.asarray(rho0, dtype=complex).flatten(order="F")
    out = expm(lv * t) @ vec
    return DensityState(rho=out.reshape((ops.dim, ops.dim), order="F"), time_us=t)


def _grid_trajectory(ops, rates, theory, rho0, t_end, n_steps):
    """tr(Q_S rho) and tr(rho) on a uniform grid via repeated exact stepping."""
    lv = liouvillian(ops, rates, theory)
    step = expm(lv * (t_end / n_steps))
    d = ops.dim
    qs_vec = ops.q_singlet.flatten(order="F").conj()
    id_vec = np.eye(d, dtype=complex).flatten(order="F").conj()
    vec = np.asarray(rho0, dtype=complex).flatten(order="F")
    q = np.empty(n_steps + 1)
    tr = np.empty(n_steps + 1)
    for i in range(n_steps + 1):
        q[i] = np.dot(qs_vec, vec).real
        tr[i] = np.dot(id_vec, vec).real
        if i < n_steps:
            vec = step @ vec
    times = np.linspace(0.0, t_end, n_steps + 1)
    return times, q, tr


def reference_yields(system: SpinSystem | OperatorSet, rates: RatePair, theory: Theory,
                     rho0: NDArray | None = None, t_end: float | None = None,
                     n_steps: int | None = None) -> tuple[float, float, float]:
    """(Y_S, Y_T, residual survival) by exact stepping + Simpson quadrature.

    Quantum scheme: q(t) = <Q_S>(t) from the trace-preserving equation,
    survival p(t) = exp(-cumulative integral of 2(k_S q + k_T (1-q))),
    Y_S = integral of 2 k_S q p.  Phenomenological: Y_S = integral of
    2 k_S tr(Q_S rho) on the unnormalized trajectory, residual = tr(rho).
    """
    ops = _ops(system)
    if rho0 is None:
        rho0 = singlet_initial_state(ops)
    if t_end is None:
        kmin = min(rates.k_s, rates.k_t)
        if kmin <= 0:
            raise ModelError("t_end required when either rate is zero")
        t_end = 50.0 / kmin
    if n_steps is None:
        # ~64 grid points per period of the fastest oscillation (eigenvalue
        # differences span up to twice the spectral radius)
        n_steps = int(max(4096, np.ceil(64 * t_end * ops.spectral_radius() / np.pi)))

    times, q, tr = _grid_trajectory(ops, rates, theory, rho0, t_end, n_steps)
    if theory is Theory.QUANTUM:
        rate = 2.0 * (rates.k_s * q + rates.k_t * (tr - q))
        log_p = cumulative_simpson(rate, x=times, initial=0.0)
        p = np.exp(-log_p)
        y_s = simpson(2.0 * rates.k_s * q * p, x=times)
        y_t = simpson(2.0 * rates.k_t * (tr - q) * p, x=times)
        return float(y_s), float(y_t), float(p[-1])
    y_s = simpson(2.0 * rates.k_s * q, x=times)
    y_t = simpson(2.0 * rates.k_t * (tr - q), x=times)
    return float(y_s), float(y_t), float(tr[-1])


def phenomenological_yields_exact(system: SpinSystem | OperatorSet, rates: RatePair,
                                  rho0: NDArray | None = None) -> tuple[float, float]:
    """Closed-form terminal yields of the phenomenological equation.

    integral_0^inf rho dt = -L^{-1} vec(rho0) for a Hurwitz L, hence
    Y_S = -2 k_S <vec(Q_S), L^{-1} vec(rho0)>.  Requires both rates > 0.
    """
    ops = _ops(system)
    if rho0 is None:
        rho0 = singlet_initial_state(ops)
    if min(rates.k_s, rates.k_t) <= 0:
        raise ModelError("exact phenomenological yields need both rates > 0")
    lv = liouvillian(ops, rates, Theory.PHENOMENOLOGICAL)
    vec = np.asarray(rho0, dtype=complex).flatten(order="F")
    integral = np.linalg.solve(lv, -vec)
    y_s = 2.0 * rates.k_s * np.dot(ops.q_singlet.flatten(order="F").conj(), integral).real
    y_t = 2.0 * rates.k_t * np.dot(ops.q_triplet.flatten(order="F").conj(), integral).real
    return float(y_s), float(y_t)
