"""ripsim: radical-ion-pair spin dynamics and recombination yields.

Propagates the pair's spin density matrix under either the phenomenological
(trace-draining) master equation or the quantum-measurement (trace-preserving
dephasing + recombination jumps) master equation, computes singlet/triplet
yields, runs field and hyperfine-coupling sweeps, and recovers model
parameters from yield curves.
"""

from .constants import GAMMA_E_RAD_PER_US_PER_MT
from .dynamics import (
    DensityState,
    EvolutionRecord,
    MonteCarloResult,
    RatePair,
    Theory,
    evolve,
    evolve_unitary,
    monte_carlo_yields,
    singlet_initial_state,
    step_phenomenological,
    step_quantum,
)
from .errors import ConfigError, DimensionError, ModelError, RipsimError, StepSizeError
from .kernels import HAVE_COMPILED, USING_COMPILED
from .spincore import (
    HyperfineCoupling,
    NucleusSpec,
    OperatorSet,
    SpinSystem,
    build_operators,
    spin_matrices,
)
from .superop import (
    liouvillian,
    phenomenological_yields_exact,
    propagate_superoperator,
    reference_yields,
)
from .sweeps import SweepResult, sweep_field, sweep_hyperfine, terminal_yields, trace_qs
from .calibration import FitConfig, FitProblem, FitReport, fit
from .presets import PRESETS, one_nucleus_system, preset_rates, preset_system
from .scenario import ScenarioConfig, parse_config, serialize_config

__version__ = "0.1.0"
