"""Parameter recovery from yield curves by derivative-free least squares.

Free parameters are a subset of the per-nucleus isotropic couplings
("A0", "A1", ..., rad/us) and the recombination rates ("k_s", "k_t", 1/us).
The forward model regenerates the target curve (field or hyperfine sweep)
at candidate parameters; the loss is the sum of squared residuals.  The
optimizer is bounded Nelder-Mead with seeded multi-start restarts; the
report's best vertex is the minimum over every objective evaluation, so
monotone acceptance holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize
from scipy.stats import qmc

from .dynamics import RatePair, Theory
from .errors import ModelError
from .sweeps import sweep_field, sweep_hyperfine
from .spincore import SpinSystem

__all__ = ["FitProblem", "FitConfig", "FitReport", "fit"]

_RATE_NAMES = ("k_s", "k_t")


@dataclass(frozen=True)
class FitProblem:
    """A target yield curve and the free parameters to recover it with."""

    template: SpinSystem
    rates: RatePair
    free: tuple[str, ...]                  # e.g. ("A0", "A1") or ("A0", "k_s")
    bounds: dict[str, tuple[float, float]]
    axis_name: str                         # "field_mT" | "hyperfine_rad_per_us"
    axis_values: NDArray
    observed: NDArray
    observable: str = "yield_t"            # "yield_s" | "yield_t"
    theory: Theory = Theory.QUANTUM
    dt: float | None = None                # forward-model step override
    normalize_affine: bool = False         # fit scale+offset in closed form

    def __post_init__(self):
        if not 1 <= len(self.free) <= 6:
            raise ModelError(f"number of free parameters must be 1..6, got {len(self.free)}")
        n_nuc = len(self.template.nuclei)
        for name in self.free:
            if name in _RATE_NAMES:
                continue
            if name.startswith("A") and name[1:].isdigit() and int(name[1:]) < n_nuc:
                continue
            raise ModelError(f"unknown free parameter {name!r}")
        for name in self.free:
            if name not in self.bounds:
                raise ModelError(f"missing bounds for {name!r}")
            lo, hi = self.bounds[name]
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ModelError(f"bounds for {name!r} must be finite with lower < upper")
        if self.observable not in ("yield_s", "yield_t"):
            raise ModelError(f"observable must be yield_s or yield_t, got {self.observable!r}")
        if self.axis_name not in ("field_mT", "hyperfine_rad_per_us"):
            raise ModelError(f"unknown axis {self.axis_name!r}")
        object.__setattr__(self, "axis_values", np.asarray(self.axis_values, dtype=float))
        object.__setattr__(self, "observed", np.asarray(self.observed, dtype=float))
        if self.axis_values.shape != self.observed.shape:
            raise ModelError("axis_values and observed must have equal length")

    def _apply(self, params: NDArray) -> tuple[SpinSystem, RatePair]:
        system, k_s, k_t = self.template, self.rates.k_s, self.rates.k_t
        for name, value in zip(self.free, params):
            if name == "k_s":
                k_s = value
            elif name == "k_t":
                k_t = value
            else:
                system = system.with_isotropic_coupling(int(name[1:]), value)
        return system, RatePair(k_s, k_t)

    def predict(self, params: NDArray) -> NDArray:
        system, rates = self._apply(params)
        if self.axis_name == "field_mT":
            res = sweep_field(system, rates, self.axis_values,
                              theories=(self.theory,), dt=self.dt)
        else:
            res = sweep_hyperfine(system, rates, self.axis_values,
                                  theories=(self.theory,), dt=self.dt)
        suffix = "quantum" if self.theory is Theory.QUANTUM else "phenom"
        return getattr(res, f"{self.observable}_{suffix}")

    def loss(self, params: NDArray) -> float:
        model = self.predict(params)
        if self.normalize_affine:
            # closed-form scale+offset minimizing ||a*model + b - observed||^2
            a_mat = np.stack([model, np.ones_like(model)], axis=1)
            coef, *_ = np.linalg.lstsq(a_mat, self.observed, rcond=None)
            model = a_mat @ coef
        return float(np.sum((model - self.observed) ** 2))


@dataclass(frozen=True)
class FitConfig:
    max_iters: int = 200
    tol: float = 1e-10       # Nelder-Mead fatol on the loss
    xtol: float = 1e-6       # simplex spread tolerance
    restarts: int = 5
    seed: int = 0
    start: dict[str, float] | None = None


@dataclass
class FitReport:
    best_params: dict[str, float]
    best_loss: float
    iterations: int          # total objective evaluations
    converged: bool
    restarts: int
    units: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.units:
            self.units = {name: ("1/us" if name in _RATE_NAMES else "rad/us")
                          for name in self.best_params}


def fit(problem: FitProblem, config: FitConfig = FitConfig()) -> FitReport:
    """Bounded Nelder-Mead with multi-start; deterministic for a fixed seed."""
    names = problem.free
    lo = np.array([problem.bounds[n][0] for n in names])
    hi = np.array([problem.bounds[n][1] for n in names])

    starts = []
    if config.start is not None:
        starts.append(np.array([config.start[n] for n in names], dtype=float))
    else:
        starts.append((lo + hi) / 2)
    if config.restarts > 1:
        sampler = qmc.Sobol(d=len(names), scramble=True, seed=config.seed)
        extra = qmc.scale(sampler.random(config.restarts - 1), lo, hi)
        starts.extend(np.atleast_2d(extra))

    evals: list[tuple[float, NDArray]] = []

    def objective(x: NDArray) -> float:
        x = np.clip(x, lo, hi)
        value = problem.loss(x)
        if not np.isfinite(value):
            # non-finite loss at the (initial or reflected) simplex is an input error
            raise ModelError(f"non-finite loss at {dict(zip(names, x))}")
        evals.append((value, x.copy()))
        return value

    converged = False
    for x0 in starts:
        res = minimize(objective, np.clip(x0, lo, hi), method="Nelder-Mead",
                       bounds=list(zip(lo, hi)),
                       options={"maxiter": config.max_iters, "fatol": config.tol,
                                "xatol": config.xtol, "adaptive": len(names) > 2})
        converged = converged or bool(res.success)

    best_loss, best_x = min(evals, key=lambda e: e[0])
    return FitReport(
        best_params={n: float(v) for n, v in zip(names, best_x)},
        best_loss=best_loss,
        iterations=len(evals),
        converged=converged,
        restarts=len(starts),
    )
