"""Command-line front end.

Subcommands mirror the run kinds (`evolve`, `sweep-field`, `sweep-hfc`,
`trace-qs`, `fit`) plus `presets`; all physics parameters come from a
scenario file passed via --config.  Outputs are CSV with a comment header
recording the tool version, resolved solver parameters and seed, so runs
are reproducible byte-for-byte.

Exit codes: 0 success (including flagged non-convergence), 2 config error,
3 runtime/numerics error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import __version__
from .calibration import FitConfig, FitProblem, fit
from .dynamics import Theory, evolve
from .errors import ConfigError, RipsimError
from .presets import PRESETS
from .scenario import ONE_NUCLEUS_PRESET, ScenarioConfig, parse_config
from .sweeps import sweep_field, sweep_hyperfine, trace_qs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _fmt(value) -> str:
    """Fixed-width scientific with 9 significant digits; bools as 0/1."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return f"{float(value):.8e}"


def _write_csv(path: str, comment: str, columns: dict[str, np.ndarray]):
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    names = list(columns)
    n = len(next(iter(columns.values())))
    buf.write(",".join(names) + "\n")
    for i in range(n):
        buf.write(",".join(_fmt(columns[name][i]) for name in names) + "\n")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}")


class _IOFailure(Exception):
    pass


def _header(config: ScenarioConfig, seed=None) -> str:
    parts = [f"ripsim {__version__}", f"kind={config.run.kind}", f"theory={config.theory}"]
    s = config.solver
    parts.append(f"dt_us={'auto' if s.dt_us is None else _fmt(s.dt_us)}")
    parts.append(f"epsilon_survival={1e-6 if s.epsilon_survival is None else s.epsilon_survival:g}")
    parts.append(f"record_stride={'auto' if s.record_stride is None else s.record_stride}")
    if seed is not None:
        parts.append(f"seed={seed}")
    return " ".join(parts)


def _suffix(theory: Theory) -> str:
    return "quantum" if theory is Theory.QUANTUM else "phenom"


def _run_evolve(config: ScenarioConfig):
    system = config.model.build_system()
    s = config.solver
    eps = 1e-6 if s.epsilon_survival is None else s.epsilon_survival
    records = {}
    for theory in config.theories:
        records[theory] = evolve(system, config.rates, theory,
                                 t_max=config.run.t_max_us, dt=s.dt_us,
                                 record_stride=s.record_stride, eps_survival=eps,
                                 keep_final_state=False)
    n = min(len(r.times) for r in records.values())
    columns = {"t_us": next(iter(records.values())).times[:n]}
    for theory, rec in records.items():
        sfx = _suffix(theory)
        columns[f"Q_S_{sfx}"] = rec.q_s_expect[:n]
        columns[f"survival_{sfx}"] = rec.survival[:n]
        columns[f"Y_S_{sfx}"] = rec.yield_s[:n]
        columns[f"Y_T_{sfx}"] = rec.yield_t[:n]
    _write_csv(config.output.path, _header(config), columns)
    summary = "; ".join(
        f"{_suffix(t)}: Y_S={rec.yield_s[-1]:.6g} Y_T={rec.yield_t[-1]:.6g} "
        f"converged={rec.converged}" for t, rec in records.items())
    warn = any(not rec.converged for rec in records.values())
    return ("warning: " if warn else "") + f"evolve {summary}"


def _sweep_columns(config, result):
    axis_col = "B_mT" if result.axis_name == "field_mT" else "A_rad_per_us"
    columns = {axis_col: result.axis_values}
    if Theory.QUANTUM in result.theories:
        columns["Y_S_quantum"] = result.yield_s_quantum
        columns["Y_T_quantum"] = result.yield_t_quantum
    if Theory.PHENOMENOLOGICAL in result.theories:
        columns["Y_S_phenom"] = result.yield_s_phenom
        columns["Y_T_phenom"] = result.yield_t_phenom
    columns["converged"] = result.converged
    return columns


def _run_sweep_field(config: ScenarioConfig):
    system = config.model.build_system()
    run = config.run
    if run.values_mT is not None:
        values = np.array(run.values_mT)
    else:
        values = np.linspace(run.field_min_mT, run.field_max_mT, run.n_points)
    s = config.solver
    result = sweep_field(system, config.rates, values, theories=config.theories,
                         dt=s.dt_us,
                         eps_survival=1e-6 if s.epsilon_survival is None else s.epsilon_survival)
    _write_csv(config.output.path, _header(config), _sweep_columns(config, result))
    n_bad = int(np.count_nonzero(~result.converged))
    prefix = "warning: " if n_bad else ""
    return (f"{prefix}sweep-field {len(values)} points, "
            f"B in [{values.min():g}, {values.max():g}] mT, {n_bad} unconverged")


def _run_sweep_hfc(config: ScenarioConfig):
    system = config.model.build_system()
    run = config.run
    if run.values_rad_per_us is not None:
        values = np.array(run.values_rad_per_us)
    else:
        values = np.linspace(run.a_min_rad_per_us, run.a_max_rad_per_us, run.n_points)
    s = config.solver
    result = sweep_hyperfine(system, config.rates, values, theories=config.theories,
                             dt=s.dt_us,
                             eps_survival=1e-6 if s.epsilon_survival is None else s.epsilon_survival)
    _write_csv(config.output.path, _header(config), _sweep_columns(config, result))
    n_bad = int(np.count_nonzero(~result.converged))
    prefix = "warning: " if n_bad else ""
    return (f"{prefix}sweep-hfc {len(values)} points, "
            f"A in [{values.min():g}, {values.max():g}] rad/us, {n_bad} unconverged")


def _run_trace_qs(config: ScenarioConfig):
    system = config.model.build_system()
    run = config.run
    theory = config.theories[0]
    rec = trace_qs(system, config.rates, run.a_rad_per_us, run.with_recombination,
                   t_max=run.t_max_us, dt=config.solver.dt_us, theory=theory,
                   record_stride=config.solver.record_stride)
    _write_csv(config.output.path, _header(config), {
        "t_us": rec.times, "Q_S_expect": rec.q_s_expect, "survival": rec.survival,
        "Y_S": rec.yield_s, "Y_T": rec.yield_t,
    })
    return (f"trace-qs A={run.a_rad_per_us:g} rad/us recombination="
            f"{'on' if run.with_recombination else 'off'} final <Q_S>={rec.q_s_expect[-1]:.6g}")


def _read_target_csv(path: str):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise _IOFailure(f"cannot read target CSV {path}: {exc}")
    if len(rows) < 2 or len(rows[0]) < 2:
        raise ConfigError("run.target_csv", f"{path} must have a header and >= 2 columns")
    data = np.array([[float(x) for x in row[:2]] for row in rows[1:]])
    return data[:, 0], data[:, 1]


def _run_fit(config: ScenarioConfig):
    run = config.run
    axis_values, observed = _read_target_csv(run.target_csv)
    template = config.model.build_system()
    if config.theory == "both":
        raise ConfigError("theory", "fit requires a single theory, not 'both'")
    problem = FitProblem(
        template=template, rates=config.rates,
        free=tuple(f.name for f in run.free),
        bounds={f.name: (f.lower, f.upper) for f in run.free},
        axis_name=run.axis, axis_values=axis_values, observed=observed,
        observable=run.observable, theory=config.theories[0], dt=config.solver.dt_us,
    )
    start = {f.name: f.start for f in run.free if f.start is not None}
    fit_config = FitConfig(max_iters=run.max_iters, tol=run.tol, restarts=run.restarts,
                           seed=run.seed, start=start if len(start) == len(run.free) else None)
    report = fit(problem, fit_config)
    columns = {
        "parameter_index": np.arange(len(run.free)),
        "value": np.array([report.best_params[f.name] for f in run.free]),
        "lower": np.array([f.lower for f in run.free]),
        "upper": np.array([f.upper for f in run.free]),
        "best_loss": np.full(len(run.free), report.best_loss),
        "converged": np.full(len(run.free), report.converged, dtype=bool),
    }
    _write_csv(config.output.path, _header(config, seed=run.seed) + " params=" +
               ",".join(f.name for f in run.free), columns)
    params = " ".join(f"{k}={v:.6g}" for k, v in report.best_params.items())
    prefix = "" if report.converged else "warning: "
    return (f"{prefix}fit {params} loss={report.best_loss:.6g} "
            f"evals={report.iterations} converged={report.converged}")


_RUNNERS = {
    "evolve": _run_evolve,
    "sweep-field": _run_sweep_field,
    "sweep-hfc": _run_sweep_hfc,
    "trace-qs": _run_trace_qs,
    "fit": _run_fit,
}


def run_scenario(config: ScenarioConfig) -> str:
    """Execute a validated scenario; returns the one-line summary."""
    return _RUNNERS[config.run.kind](config)


def _cmd_presets() -> str:
    lines = ["name A_Py_mT A_DMA_mT k_S_per_us k_T_per_us"]
    for name, p in PRESETS.items():
        lines.append(f"{name} {p.a_py_mT} {p.a_dma_mT} {p.k_s_per_us} {p.k_t_per_us}")
    lines.append(f"{ONE_NUCLEUS_PRESET} (one spin-1/2 nucleus, isotropic A, default B=0.05 mT)")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ripsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"ripsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in _RUNNERS:
        p = sub.add_parser(kind, help=f"run a '{kind}' scenario")
        p.add_argument("--config", required=True, help="scenario YAML file")
    sub.add_parser("presets", help="list the model preset catalog")

    args = parser.parse_args(argv)
    if args.command == "presets":
        print(_cmd_presets())
        return EXIT_OK

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        config = parse_config(text)
        if config.run.kind != args.command:
            raise ConfigError("run.kind",
                              f"config declares {config.run.kind!r} but the "
                              f"{args.command!r} subcommand was invoked")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        summary = run_scenario(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IOFailure as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RipsimError, np.linalg.LinAlgError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
