"""Terminal yields, field and hyperfine sweeps, pinned oracle regressions."""

import numpy as np
import pytest

from ripsim import ModelError, RatePair, Theory, sweep_field, sweep_hyperfine, terminal_yields, trace_qs
from ripsim.presets import ONE_NUCLEUS_RATES, one_nucleus_system, preset_rates, preset_system
from ripsim.spincore import SpinSystem

from _fixtures import (
    HFC_SWEEP_A_RAD_PER_US,
    HFC_SWEEP_YT_PHENOM,
    HFC_SWEEP_YT_QUANTUM,
    ONE_NUCLEUS_A10_PHENOM,
    ONE_NUCLEUS_A10_QUANTUM,
)


def test_no_coupling_terminal_yields():
    system = one_nucleus_system(0.0)
    for theory in Theory:
        y_s, y_t, converged = terminal_yields(system, RatePair(5.0, 1.0), theory)
        assert converged
        assert y_s == pytest.approx(1.0, abs=1e-5)
        assert y_t == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("theory, expected", [
    (Theory.QUANTUM, ONE_NUCLEUS_A10_QUANTUM),
    (Theory.PHENOMENOLOGICAL, ONE_NUCLEUS_A10_PHENOM),
])
def test_pinned_one_nucleus_yields(theory, expected):
    system = one_nucleus_system(10.0)
    y_s, y_t, converged = terminal_yields(system, ONE_NUCLEUS_RATES, theory)
    assert converged
    assert y_s == pytest.approx(expected[0], abs=1e-5)
    assert y_t == pytest.approx(expected[1], abs=1e-5)


def test_yield_closure():
    system = preset_system("Py-h10-DMA-h11", 2.0)
    rates = preset_rates("Py-h10-DMA-h11")
    for theory in Theory:
        y_s, y_t, converged = terminal_yields(system, rates, theory)
        assert converged
        assert y_s + y_t == pytest.approx(1.0, abs=1e-4)


def test_field_independence_without_nuclei():
    # no hyperfine couplings: the field commutes with everything that matters
    system = SpinSystem((), 0.0)
    res = sweep_field(system, RatePair(3.0, 1.0), np.array([0.0, 1.0, 5.0, 10.0]))
    for ys in (res.yield_s_quantum, res.yield_s_phenom):
        assert np.max(np.abs(ys - ys[0])) < 1e-6
    assert res.converged.all()


def test_field_sweep_preset_varies():
    res = sweep_field(preset_system("Py-h10-DMA-h11", 0.0),
                      preset_rates("Py-h10-DMA-h11"),
                      np.array([0.0, 10.0]))
    assert res.converged.all()
    assert abs(res.yield_s_quantum[1] - res.yield_s_quantum[0]) > 1e-3
    assert abs(res.yield_s_phenom[1] - res.yield_s_phenom[0]) > 1e-3


def test_hfc_sweep_matches_oracle():
    """Hyperfine sweep pinned against superoperator reference values."""
    idx = [0, 4, 9, 19, 29]  # 5 of the 30 oracle points keeps this quick
    axis = HFC_SWEEP_A_RAD_PER_US[idx]
    res = sweep_hyperfine(one_nucleus_system(1.0), ONE_NUCLEUS_RATES, axis)
    assert res.converged.all()
    assert res.axis_name == "hyperfine_rad_per_us"
    np.testing.assert_allclose(res.yield_t_quantum, HFC_SWEEP_YT_QUANTUM[idx], atol=1e-5)
    np.testing.assert_allclose(res.yield_t_phenom, HFC_SWEEP_YT_PHENOM[idx], atol=1e-5)
    # the phenomenological theory mixes far more strongly at these rates
    assert np.all(res.yield_t_phenom > 5 * res.yield_t_quantum)
    # phenomenological triplet yield grows monotonically over this range
    assert np.all(np.diff(res.yield_t_phenom) > 0)


def test_hfc_sweep_requires_one_nucleus():
    with pytest.raises(ModelError):
        sweep_hyperfine(preset_system("Py-h10-DMA-h11", 0.05), ONE_NUCLEUS_RATES,
                        np.array([1.0, 2.0]))


def test_sweep_single_theory_shapes():
    res = sweep_field(one_nucleus_system(10.0), ONE_NUCLEUS_RATES,
                      np.array([0.0, 0.5]), theories=(Theory.QUANTUM,))
    assert res.theories == (Theory.QUANTUM,)
    assert np.all(np.isnan(res.yield_s_phenom))
    assert not np.any(np.isnan(res.yield_s_quantum))
    assert res.converged.all()


def test_field_sweep_midpoint_continuity():
    # yields vary smoothly in B: the midpoint sits near the endpoint mean
    axis = np.array([1.0, 1.05, 1.1])
    res = sweep_field(preset_system("Py-h10-DMA-h11", 0.0),
                      preset_rates("Py-h10-DMA-h11"), axis,
                      theories=(Theory.QUANTUM,))
    mid = 0.5 * (res.yield_s_quantum[0] + res.yield_s_quantum[2])
    assert abs(res.yield_s_quantum[1] - mid) < 0.01


def test_trace_qs_with_and_without_recombination():
    rec_free = trace_qs(one_nucleus_system(1.0), ONE_NUCLEUS_RATES, a_value=9.0,
                        with_recombination=False, t_max=1.0)
    assert np.all(rec_free.survival == 1.0)
    assert rec_free.q_s_expect.min() < 0.6  # free mixing reaches deep minima

    rec_meas = trace_qs(one_nucleus_system(1.0), ONE_NUCLEUS_RATES, a_value=9.0,
                        with_recombination=True, t_max=1.0)
    assert rec_meas.times[-1] == pytest.approx(1.0, abs=rec_meas.dt_us)
    # Zeno effect: measurement keeps the normalized singlet probability higher
    assert rec_meas.q_s_expect.min() > rec_free.q_s_expect.min()
