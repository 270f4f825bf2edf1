"""Strict scenario parsing, canonical serialization, error key paths."""

import numpy as np
import pytest

from ripsim import ConfigError, Theory, parse_config, serialize_config
from ripsim.constants import GAMMA_E_RAD_PER_US_PER_MT
from ripsim.presets import PRESETS

GOOD_EVOLVE = """
model:
  preset: Py-h10-DMA-h11
  field_mT: 1.0
rates:
  k_s_per_us: 6.7
  k_t_per_us: 8.5
theory: both
run:
  kind: evolve
  t_max_us: 2.0
solver:
  record_stride: 100
output:
  path: out.csv
"""

GOOD_CUSTOM = """
model:
  custom:
    field_mT: 0.05
    nuclei:
      - {spin: 0.5, electron: 1, A_mT: 1.9}
      - {spin: 0.5, electron: 2, A_rad_per_us: 12.0}
rates:
  k_s_per_us: 20.0
  k_t_per_us: 0.5
theory: quantum
run:
  kind: sweep-hfc
  a_min_rad_per_us: 1.0
  a_max_rad_per_us: 30.0
  n_points: 30
output:
  path: sweep.csv
"""


def test_parse_evolve():
    cfg = parse_config(GOOD_EVOLVE)
    assert cfg.model.preset == "Py-h10-DMA-h11"
    assert cfg.rates.k_s == 6.7 and cfg.rates.k_t == 8.5
    assert cfg.theories == (Theory.QUANTUM, Theory.PHENOMENOLOGICAL)
    assert cfg.run.kind == "evolve" and cfg.run.t_max_us == 2.0
    assert cfg.solver.record_stride == 100 and cfg.solver.dt_us is None


def test_preset_builds_table_system():
    cfg = parse_config(GOOD_EVOLVE)
    system = cfg.model.build_system()
    assert system.field_mT == 1.0
    assert system.dimension() == 16
    a_vals = sorted(n.hyperfine.tensor[0, 0] for n in system.nuclei)
    expected = sorted(GAMMA_E_RAD_PER_US_PER_MT * a for a in (1.9, 6.7))
    np.testing.assert_allclose(a_vals, expected)


def test_custom_model_units():
    cfg = parse_config(GOOD_CUSTOM)
    system = cfg.model.build_system()
    assert cfg.theories == (Theory.QUANTUM,)
    a0 = system.nuclei[0].hyperfine.tensor[0, 0]
    assert a0 == pytest.approx(1.9 * GAMMA_E_RAD_PER_US_PER_MT)
    assert system.nuclei[1].hyperfine.tensor[1, 1] == pytest.approx(12.0)


def test_round_trip_canonical():
    for text in (GOOD_EVOLVE, GOOD_CUSTOM):
        cfg = parse_config(text)
        out = serialize_config(cfg)
        assert parse_config(out) == cfg
        # canonical form is a fixed point
        assert serialize_config(parse_config(out)) == out


def path_of(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    return exc.value.path


def test_unknown_key_path():
    bad = GOOD_EVOLVE.replace("  t_max_us: 2.0", "  t_max_us: 2.0\n  bogus: 1")
    assert path_of(bad) == "run.bogus"


def test_missing_key_path():
    bad = GOOD_EVOLVE.replace("  k_t_per_us: 8.5\n", "")
    assert path_of(bad) == "rates.k_t_per_us"


def test_both_units_rejected_with_both_paths():
    bad = GOOD_CUSTOM.replace("A_mT: 1.9", "A_mT: 1.9, A_rad_per_us: 3.0")
    path = path_of(bad)
    assert "model.custom.nuclei[0].A_mT" in path
    assert "model.custom.nuclei[0].A_rad_per_us" in path


def test_no_units_rejected():
    bad = GOOD_CUSTOM.replace("{spin: 0.5, electron: 1, A_mT: 1.9}",
                              "{spin: 0.5, electron: 1}")
    assert "A_mT" in path_of(bad)


def test_preset_and_custom_both_rejected():
    bad = GOOD_CUSTOM.replace("model:", "model:\n  preset: Py-h10-DMA-h11")
    assert path_of(bad) == "model"


def test_bad_theory_rejected():
    assert path_of(GOOD_EVOLVE.replace("theory: both", "theory: semiclassical")) == "theory"


def test_bad_kind_rejected():
    assert path_of(GOOD_EVOLVE.replace("kind: evolve", "kind: explode")) == "run.kind"


def test_negative_rate_rejected():
    assert path_of(GOOD_EVOLVE.replace("k_s_per_us: 6.7", "k_s_per_us: -1")) == "rates.k_s_per_us"


def test_all_presets_accepted():
    for name in PRESETS:
        cfg = parse_config(GOOD_EVOLVE.replace("Py-h10-DMA-h11", name))
        assert cfg.model.build_system().dimension() == 16


def test_not_yaml():
    with pytest.raises(ConfigError):
        parse_config("model: [unclosed")
