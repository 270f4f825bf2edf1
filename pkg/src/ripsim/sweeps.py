"""Terminal yields and one-dimensional parameter sweeps.

Sweep points are independent: each one rebuilds its operators, runs the
requested theories to the termination criterion and reports terminal yields
plus a convergence flag.  Results are assembled in axis order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .dynamics import EvolutionRecord, RatePair, Theory, evolve, evolve_unitary
from .dynamics import EPS_SURVIVAL_DEFAULT
from .errors import ModelError
from .spincore import SpinSystem, build_operators

__all__ = ["SweepResult", "terminal_yields", "sweep_field", "sweep_hyperfine", "trace_qs"]

BOTH_THEORIES = (Theory.QUANTUM, Theory.PHENOMENOLOGICAL)


@dataclass
class SweepResult:
    """Per-point terminal yields along one parameter axis.

    Yield arrays for theories that were not requested are NaN-filled.
    """

    axis_name: str  # "field_mT" or "hyperfine_rad_per_us"
    axis_values: NDArray
    yield_s_quantum: NDArray
    yield_t_quantum: NDArray
    yield_s_phenom: NDArray
    yield_t_phenom: NDArray
    converged_quantum: NDArray
    converged_phenom: NDArray
    theories: tuple[Theory, ...] = BOTH_THEORIES

    @property
    def converged(self) -> NDArray:
        """Pointwise AND over the theories that were run."""
        out = np.ones(len(self.axis_values), dtype=bool)
        if Theory.QUANTUM in self.theories:
            out &= self.converged_quantum
        if Theory.PHENOMENOLOGICAL in self.theories:
            out &= self.converged_phenom
        return out


def terminal_yields(system: SpinSystem, rates: RatePair, theory: Theory,
                    rho0: NDArray | None = None, dt: float | None = None,
                    t_max: float | None = None,
                    eps_survival: float = EPS_SURVIVAL_DEFAULT,
                    ) -> tuple[float, float, bool]:
    """(Y_S, Y_T, converged) at the termination criterion.

    Slow kinetics never raise: an unconverged run comes back flagged with
    whatever yields accumulated by t_max.
    """
    if rates.total <= 0:
        raise ModelError("terminal yields need at least one nonzero rate")
    rec = evolve(system, rates, theory, rho0=rho0, t_max=t_max, dt=dt,
                 eps_survival=eps_survival, keep_final_state=False)
    y_s, y_t = rec.terminal_yields
    return y_s, y_t, rec.converged


def _run_points(systems: list[SpinSystem], rates: RatePair, theories, axis_name,
                axis_values, dt=None, eps_survival=EPS_SURVIVAL_DEFAULT) -> SweepResult:
    n = len(systems)
    nan = np.full(n, np.nan)
    out = {
        Theory.QUANTUM: (nan.copy(), nan.copy(), np.zeros(n, dtype=bool)),
        Theory.PHENOMENOLOGICAL: (nan.copy(), nan.copy(), np.zeros(n, dtype=bool)),
    }
    for i, sys_i in enumerate(systems):
        ops = build_operators(sys_i)
        for theory in theories:
            ys, yt, conv = terminal_yields(ops, rates, theory, dt=dt,
                                           eps_survival=eps_survival)
            out[theory][0][i] = ys
            out[theory][1][i] = yt
            out[theory][2][i] = conv
    q, p = out[Theory.QUANTUM], out[Theory.PHENOMENOLOGICAL]
    return SweepResult(
        axis_name=axis_name, axis_values=np.asarray(axis_values, dtype=float),
        yield_s_quantum=q[0], yield_t_quantum=q[1],
        yield_s_phenom=p[0], yield_t_phenom=p[1],
        converged_quantum=q[2], converged_phenom=p[2],
        theories=tuple(theories),
    )


def sweep_field(system_template: SpinSystem, rates: RatePair,
                field_values_mT, theories=BOTH_THEORIES,
                dt: float | None = None,
                eps_survival: float = EPS_SURVIVAL_DEFAULT) -> SweepResult:
    """Terminal yields vs external field, shared initial-state convention."""
    field_values_mT = np.asarray(field_values_mT, dtype=float)
    if field_values_mT.size == 0:
        raise ModelError("field_values_mT must be non-empty")
    if not np.all(np.isfinite(field_values_mT)):
        raise ModelError("field values must be finite")
    systems = [system_template.with_field(b) for b in field_values_mT]
    return _run_points(systems, rates, theories, "field_mT", field_values_mT,
                       dt=dt, eps_survival=eps_survival)


def sweep_hyperfine(one_nucleus_template: SpinSystem, rates: RatePair,
                    a_values_rad_per_us, theories=BOTH_THEORIES,
                    dt: float | None = None,
                    eps_survival: float = EPS_SURVIVAL_DEFAULT) -> SweepResult:
    """Terminal yields vs isotropic hyperfine coupling of the single nucleus."""
    if len(one_nucleus_template.nuclei) != 1:
        raise ModelError("hyperfine sweep expects a one-nucleus template")
    a_values = np.asarray(a_values_rad_per_us, dtype=float)
    if a_values.size == 0:
        raise ModelError("a_values must be non-empty")
    if np.any(a_values < 0) or not np.all(np.isfinite(a_values)):
        raise ModelError("a_values must be finite and >= 0")
    systems = [one_nucleus_template.with_isotropic_coupling(0, a) for a in a_values]
    return _run_points(systems, rates, theories, "hyperfine_rad_per_us", a_values,
                       dt=dt, eps_survival=eps_survival)


def trace_qs(system: SpinSystem, rates: RatePair, a_value: float,
             with_recombination: bool, t_max: float, dt: float | None = None,
             theory: Theory = Theory.QUANTUM,
             record_stride: int | None = None) -> EvolutionRecord:
    """<Q_S>(t) trace for a one-nucleus model at isotropic coupling ``a_value``.

    with_recombination=False gives the recombination-free unitary curve.
    The record always spans the full [0, t_max] window (no early exit on
    survival), since these traces exist for plotting comparisons.
    """
    if len(system.nuclei) != 1:
        raise ModelError("trace_qs expects a one-nucleus template")
    sys_a = system.with_isotropic_coupling(0, a_value)
    if not with_recombination:
        return evolve_unitary(sys_a, t_max=t_max, dt=dt, record_stride=record_stride)
    return evolve(sys_a, rates, theory, t_max=t_max, dt=dt, eps_survival=0.0,
                  record_stride=record_stride, keep_final_state=False)
