"""Scenario configuration: strict YAML schema for the CLI.

A scenario file is a key-value tree with sections model / rates / theory /
run / solver / output.  Parsing is strict: unknown keys, missing required
keys and ambiguous units are rejected with the path of the offending key.
Every accepted config re-serializes to a canonical YAML form that parses
back to an equal value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .dynamics import RatePair, Theory
from .errors import ConfigError
from .presets import PRESETS, one_nucleus_system, preset_system
from .spincore import HyperfineCoupling, NucleusSpec, SpinSystem

__all__ = ["ScenarioConfig", "parse_config", "serialize_config"]

RUN_KINDS = ("evolve", "sweep-field", "sweep-hfc", "fit", "trace-qs")
ONE_NUCLEUS_PRESET = "one-nucleus"


class _Section:
    """Mapping wrapper tracking consumed keys; leftovers are an error."""

    def __init__(self, node, path: str):
        if not isinstance(node, dict):
            raise ConfigError(path or "<root>", f"expected a mapping, got {type(node).__name__}")
        self.node = dict(node)
        self.path = path

    def _key(self, key):
        return f"{self.path}.{key}" if self.path else key

    def take(self, key, required=False, default=None):
        if key not in self.node:
            if required:
                raise ConfigError(self._key(key), "required key is missing")
            return default
        return self.node.pop(key)

    def take_number(self, key, required=False, default=None, minimum=None):
        value = self.take(key, required, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(self._key(key), f"expected a number, got {value!r}")
        value = float(value)
        if not np.isfinite(value):
            raise ConfigError(self._key(key), "must be finite")
        if minimum is not None and value < minimum:
            raise ConfigError(self._key(key), f"must be >= {minimum}, got {value}")
        return value

    def take_int(self, key, required=False, default=None, minimum=None):
        value = self.take(key, required, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(self._key(key), f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(self._key(key), f"must be >= {minimum}, got {value}")
        return value

    def take_str(self, key, required=False, default=None, choices=None):
        value = self.take(key, required, default)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ConfigError(self._key(key), f"expected a string, got {value!r}")
        if choices is not None and value not in choices:
            raise ConfigError(self._key(key), f"must be one of {sorted(choices)}, got {value!r}")
        return value

    def take_bool(self, key, required=False, default=None):
        value = self.take(key, required, default)
        if value is None:
            return None
        if not isinstance(value, bool):
            raise ConfigError(self._key(key), f"expected true/false, got {value!r}")
        return value

    def finish(self):
        if self.node:
            key = sorted(self.node)[0]
            raise ConfigError(self._key(key), "unknown key")


@dataclass(frozen=True)
class NucleusConfig:
    spin: float
    electron: int
    a_mT: float | None = None
    a_rad_per_us: float | None = None
    tensor_rad_per_us: tuple[tuple[float, ...], ...] | None = None

    def to_spec(self) -> NucleusSpec:
        if self.tensor_rad_per_us is not None:
            hf = HyperfineCoupling(np.array(self.tensor_rad_per_us, dtype=float))
        elif self.a_rad_per_us is not None:
            hf = HyperfineCoupling.isotropic(self.a_rad_per_us)
        else:
            hf = HyperfineCoupling.isotropic_mT(self.a_mT)
        return NucleusSpec(self.spin, self.electron, hf)


@dataclass(frozen=True)
class ModelConfig:
    preset: str | None = None
    field_mT: float | None = None
    nuclei: tuple[NucleusConfig, ...] | None = None  # set iff custom

    def build_system(self, field_override: float | None = None) -> SpinSystem:
        field = field_override
        if field is None:
            field = self.field_mT if self.field_mT is not None else 0.0
        if self.preset == ONE_NUCLEUS_PRESET:
            if field_override is None and self.field_mT is None:
                field = 0.05
            return one_nucleus_system(10.0, field_mT=field)
        if self.preset is not None:
            return preset_system(self.preset, field_mT=field)
        return SpinSystem(tuple(n.to_spec() for n in self.nuclei), field_mT=field)


@dataclass(frozen=True)
class FreeParamConfig:
    name: str
    lower: float
    upper: float
    start: float | None = None


@dataclass(frozen=True)
class RunConfig:
    kind: str
    # evolve / trace-qs
    t_max_us: float | None = None
    # sweep-field
    field_min_mT: float | None = None
    field_max_mT: float | None = None
    values_mT: tuple[float, ...] | None = None
    # sweep-hfc
    a_min_rad_per_us: float | None = None
    a_max_rad_per_us: float | None = None
    values_rad_per_us: tuple[float, ...] | None = None
    n_points: int | None = None
    # trace-qs
    a_rad_per_us: float | None = None
    with_recombination: bool | None = None
    # fit
    free: tuple[FreeParamConfig, ...] | None = None
    target_csv: str | None = None
    observable: str | None = None
    axis: str | None = None
    max_iters: int | None = None
    tol: float | None = None
    restarts: int | None = None
    seed: int | None = None


@dataclass(frozen=True)
class SolverConfig:
    dt_us: float | None = None
    epsilon_survival: float | None = None
    record_stride: int | None = None


@dataclass(frozen=True)
class OutputConfig:
    path: str
    format: str = "csv"


@dataclass(frozen=True)
class ScenarioConfig:
    model: ModelConfig
    rates: RatePair
    theory: str  # "quantum" | "phenomenological" | "both"
    run: RunConfig
    output: OutputConfig
    solver: SolverConfig = SolverConfig()

    @property
    def theories(self) -> tuple[Theory, ...]:
        if self.theory == "both":
            return (Theory.QUANTUM, Theory.PHENOMENOLOGICAL)
        return (Theory(self.theory),)


def _parse_model(node, path) -> ModelConfig:
    sec = _Section(node, path)
    preset = sec.take_str("preset", choices=set(PRESETS) | {ONE_NUCLEUS_PRESET})
    custom_node = sec.take("custom")
    field_mT = sec.take_number("field_mT", minimum=0.0)
    sec.finish()
    if (preset is None) == (custom_node is None):
        raise ConfigError(path, "exactly one of 'preset' and 'custom' is required")
    if preset is not None:
        return ModelConfig(preset=preset, field_mT=field_mT)

    if field_mT is not None:
        raise ConfigError(f"{path}.field_mT", "place field_mT inside 'custom' for custom models")
    csec = _Section(custom_node, f"{path}.custom")
    field_mT = csec.take_number("field_mT", required=True, minimum=0.0)
    nuclei_node = csec.take("nuclei", required=True)
    csec.finish()
    if not isinstance(nuclei_node, list):
        raise ConfigError(f"{path}.custom.nuclei", "expected a list")
    nuclei = []
    for i, n in enumerate(nuclei_node):
        npath = f"{path}.custom.nuclei[{i}]"
        nsec = _Section(n, npath)
        spin = nsec.take_number("spin", required=True)
        electron = nsec.take_int("electron", required=True)
        a_mT = nsec.take_number("A_mT")
        a_rad = nsec.take_number("A_rad_per_us")
        tensor = nsec.take("tensor_rad_per_us")
        nsec.finish()
        given = [k for k, v in (("A_mT", a_mT), ("A_rad_per_us", a_rad),
                                ("tensor_rad_per_us", tensor)) if v is not None]
        if len(given) != 1:
            keys = " and ".join(f"{npath}.{k}" for k in (given or ["A_mT", "A_rad_per_us"]))
            raise ConfigError(keys, "exactly one hyperfine representation is required")
        if tensor is not None:
            try:
                arr = np.array(tensor, dtype=float)
            except (TypeError, ValueError):
                raise ConfigError(f"{npath}.tensor_rad_per_us", "expected a 3x3 numeric matrix")
            if arr.shape != (3, 3):
                raise ConfigError(f"{npath}.tensor_rad_per_us",
                                  f"expected a 3x3 matrix, got shape {arr.shape}")
            tensor = tuple(tuple(float(x) for x in row) for row in arr)
        nuclei.append(NucleusConfig(spin=spin, electron=electron, a_mT=a_mT,
                                    a_rad_per_us=a_rad, tensor_rad_per_us=tensor))
    return ModelConfig(nuclei=tuple(nuclei))


def _parse_axis_list(sec, key, minimum=None):
    values = sec.take(key)
    if values is None:
        return None
    if not isinstance(values, list) or not values:
        raise ConfigError(sec._key(key), "expected a non-empty list of numbers")
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(float(v)):
            raise ConfigError(f"{sec._key(key)}[{i}]", f"expected a finite number, got {v!r}")
        if minimum is not None and v < minimum:
            raise ConfigError(f"{sec._key(key)}[{i}]", f"must be >= {minimum}")
        out.append(float(v))
    return tuple(out)


def _parse_run(node, path) -> RunConfig:
    sec = _Section(node, path)
    kind = sec.take_str("kind", required=True, choices=RUN_KINDS)
    kw = {"kind": kind}
    if kind == "evolve":
        kw["t_max_us"] = sec.take_number("t_max_us", minimum=0.0)
    elif kind == "sweep-field":
        kw["values_mT"] = _parse_axis_list(sec, "values_mT", minimum=0.0)
        if kw["values_mT"] is None:
            kw["field_min_mT"] = sec.take_number("field_min_mT", default=0.0, minimum=0.0)
            kw["field_max_mT"] = sec.take_number("field_max_mT", default=10.0, minimum=0.0)
            kw["n_points"] = sec.take_int("n_points", default=101, minimum=2)
    elif kind == "sweep-hfc":
        kw["values_rad_per_us"] = _parse_axis_list(sec, "values_rad_per_us", minimum=0.0)
        if kw["values_rad_per_us"] is None:
            kw["a_min_rad_per_us"] = sec.take_number("a_min_rad_per_us", required=True, minimum=0.0)
            kw["a_max_rad_per_us"] = sec.take_number("a_max_rad_per_us", required=True, minimum=0.0)
            kw["n_points"] = sec.take_int("n_points", default=30, minimum=2)
    elif kind == "trace-qs":
        kw["a_rad_per_us"] = sec.take_number("a_rad_per_us", required=True, minimum=0.0)
        kw["with_recombination"] = sec.take_bool("with_recombination", default=True)
        kw["t_max_us"] = sec.take_number("t_max_us", required=True, minimum=0.0)
    elif kind == "fit":
        free_node = sec.take("free", required=True)
        if not isinstance(free_node, list) or not free_node:
            raise ConfigError(f"{path}.free", "expected a non-empty list of free parameters")
        free = []
        for i, f in enumerate(free_node):
            fpath = f"{path}.free[{i}]"
            fsec = _Section(f, fpath)
            free.append(FreeParamConfig(
                name=fsec.take_str("name", required=True),
                lower=fsec.take_number("lower", required=True),
                upper=fsec.take_number("upper", required=True),
                start=fsec.take_number("start"),
            ))
            fsec.finish()
        kw["free"] = tuple(free)
        kw["target_csv"] = sec.take_str("target_csv", required=True)
        kw["observable"] = sec.take_str("observable", default="yield_t",
                                        choices=("yield_s", "yield_t"))
        kw["axis"] = sec.take_str("axis", default="field_mT",
                                  choices=("field_mT", "hyperfine_rad_per_us"))
        kw["max_iters"] = sec.take_int("max_iters", default=200, minimum=1)
        kw["tol"] = sec.take_number("tol", default=1e-10, minimum=0.0)
        kw["restarts"] = sec.take_int("restarts", default=5, minimum=1)
        kw["seed"] = sec.take_int("seed", default=0, minimum=0)
    sec.finish()
    return RunConfig(**kw)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario file; ConfigError carries the key path."""
    try:
        root_node = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"not valid YAML: {exc}")
    root = _Section(root_node, "")

    model = _parse_model(root.take("model", required=True), "model")

    rsec = _Section(root.take("rates", required=True), "rates")
    rates = RatePair(rsec.take_number("k_s_per_us", required=True, minimum=0.0),
                     rsec.take_number("k_t_per_us", required=True, minimum=0.0))
    rsec.finish()

    theory = root.take_str("theory", default="both",
                           choices=("quantum", "phenomenological", "both"))
    run = _parse_run(root.take("run", required=True), "run")

    solver_node = root.take("solver", default={})
    ssec = _Section(solver_node or {}, "solver")
    solver = SolverConfig(
        dt_us=ssec.take_number("dt_us", minimum=0.0),
        epsilon_survival=ssec.take_number("epsilon_survival", minimum=0.0),
        record_stride=ssec.take_int("record_stride", minimum=1),
    )
    ssec.finish()

    osec = _Section(root.take("output", required=True), "output")
    output = OutputConfig(path=osec.take_str("path", required=True),
                          format=osec.take_str("format", default="csv", choices=("csv",)))
    osec.finish()
    root.finish()

    return ScenarioConfig(model=model, rates=rates, theory=theory, run=run,
                          solver=solver, output=output)


def _clean(obj):
    """Nested dict with None-valued keys dropped, for canonical YAML."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def serialize_config(config: ScenarioConfig) -> str:
    """Canonical YAML: parse(serialize(c)) == c."""
    model: dict = {}
    if config.model.preset is not None:
        model["preset"] = config.model.preset
        model["field_mT"] = config.model.field_mT
    else:
        model["custom"] = {
            "field_mT": config.model.field_mT if config.model.field_mT is not None else 0.0,
            "nuclei": [
                {"spin": n.spin, "electron": n.electron, "A_mT": n.a_mT,
                 "A_rad_per_us": n.a_rad_per_us,
                 "tensor_rad_per_us": n.tensor_rad_per_us}
                for n in config.model.nuclei
            ],
        }
    run = {
        "kind": config.run.kind,
        "t_max_us": config.run.t_max_us,
        "field_min_mT": config.run.field_min_mT,
        "field_max_mT": config.run.field_max_mT,
        "values_mT": config.run.values_mT,
        "a_min_rad_per_us": config.run.a_min_rad_per_us,
        "a_max_rad_per_us": config.run.a_max_rad_per_us,
        "values_rad_per_us": config.run.values_rad_per_us,
        "n_points": config.run.n_points,
        "a_rad_per_us": config.run.a_rad_per_us,
        "with_recombination": config.run.with_recombination,
        "target_csv": config.run.target_csv,
        "observable": config.run.observable,
        "axis": config.run.axis,
        "max_iters": config.run.max_iters,
        "tol": config.run.tol,
        "restarts": config.run.restarts,
        "seed": config.run.seed,
    }
    if config.run.free is not None:
        run["free"] = [{"name": f.name, "lower": f.lower, "upper": f.upper, "start": f.start}
                       for f in config.run.free]
    doc = {
        "model": model,
        "rates": {"k_s_per_us": config.rates.k_s, "k_t_per_us": config.rates.k_t},
        "theory": config.theory,
        "run": run,
        "solver": {"dt_us": config.solver.dt_us,
                   "epsilon_survival": config.solver.epsilon_survival,
                   "record_stride": config.solver.record_stride},
        "output": {"path": config.output.path, "format": config.output.format},
    }
    doc = _clean(doc)
    if not doc.get("solver"):
        doc.pop("solver", None)
    return yaml.safe_dump(doc, sort_keys=True, default_flow_style=False)
