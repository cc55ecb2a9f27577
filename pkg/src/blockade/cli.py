"""Configuration-driven command line front end.

``blockade <scenario|preset> [--config FILE] [--out PATH] [--check-truncation]
[--threads N]`` parses a YAML scenario document, dispatches to the library,
and writes a CSV (or JSON, for the level diagram) plus a ``.meta.json``
sidecar holding the fully resolved configuration, solver residuals, and the
tool version.  Outputs are byte-deterministic for identical configurations;
numbers are serialized with 12 significant digits.

Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .dressed import build_block, eigensystem
from .errors import BlockadeError, ConfigError
from .hilbert import make_space
from .model import SystemParams, build_hamiltonian, build_liouvillian
from .observables import (
    g2_tau,
    g2_zero,
    g3_tau,
    g3_zero,
    photon_statistics,
    rabi_scan,
    spectrum_scan,
)
from .solvers import PropagationSpec, steady_state, steady_state_residual

__all__ = ["SCENARIOS", "PRESETS", "ScenarioConfig", "parse_config", "run_scenario", "main"]

SCENARIOS = ("spectrum", "rabi_scan", "g2tau", "g3tau", "pnstat", "dressed")
PRESETS = ("fig2b", "fig2c", "fig3a", "fig3b", "fig4b", "fig4c", "fig5a", "fig5b")

_TOP_KEYS = {"scenario", "params", "n_max", "grid", "tau", "output_path", "check_truncation"}
_PARAM_KEYS = {
    "spectrum": {"g", "phi_z", "eta", "gamma", "kappa"},
    "rabi_scan": {"g", "phi_z", "gamma", "kappa"},
    "g2tau": {"g", "phi_z", "eta", "gamma", "kappa", "delta", "delta_a", "delta_cav"},
    "g3tau": {"g", "phi_z", "eta", "gamma", "kappa", "delta", "delta_a", "delta_cav"},
    "pnstat": {"g", "phi_z", "eta", "gamma", "kappa", "delta", "delta_a", "delta_cav"},
    "dressed": {"g", "phi_z"},
}
_REQUIRED_PARAMS = {
    "spectrum": ("g", "phi_z", "eta"),
    "rabi_scan": ("g", "phi_z"),
    "g2tau": ("g", "phi_z", "eta"),
    "g3tau": ("g", "phi_z", "eta"),
    "pnstat": ("g", "phi_z", "eta"),
    "dressed": ("g", "phi_z"),
}
_NEEDS_DETUNING = ("g2tau", "g3tau", "pnstat")
_NEEDS_GRID = ("spectrum", "rabi_scan")
_NEEDS_TAU = ("g2tau", "g3tau")
_NEEDS_THREE_PHOTON = ("rabi_scan", "g3tau")

_DEFAULT_N_MAX = 8
_DEFAULT_GAMMA = 1.0
_DEFAULT_KAPPA = 1.0


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int


@dataclass(frozen=True)
class TauSpec:
    t_max: float
    dt_out: float


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully validated scenario description.

    ``resolved`` is the canonical document (defaults applied, detuning sugar
    expanded) echoed into output metadata; parsing it back yields an equal
    config.
    """

    scenario: str
    params: SystemParams
    n_max: int
    grid: GridSpec | None
    tau: TauSpec | None
    output_path: str
    check_truncation: bool
    resolved: dict

    def with_output_path(self, path: str) -> "ScenarioConfig":
        resolved = dict(self.resolved)
        resolved["output_path"] = path
        return ScenarioConfig(
            scenario=self.scenario, params=self.params, n_max=self.n_max,
            grid=self.grid, tau=self.tau, output_path=path,
            check_truncation=self.check_truncation, resolved=resolved,
        )

    def with_check_truncation(self) -> "ScenarioConfig":
        resolved = dict(self.resolved)
        resolved["check_truncation"] = True
        return ScenarioConfig(
            scenario=self.scenario, params=self.params, n_max=self.n_max,
            grid=self.grid, tau=self.tau, output_path=self.output_path,
            check_truncation=True, resolved=resolved,
        )


def _number(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{key}' must be a number, got {value!r}")
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"key '{key}' must be finite, got {value!r}")
    return float(value)


def _integer(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"key '{key}' must be an integer, got {value!r}")
    return value


def _mapping(value, key: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"key '{key}' must be a mapping, got {type(value).__name__}")
    return value


def parse_config(text: str) -> ScenarioConfig:
    """Validate a YAML scenario document into a :class:`ScenarioConfig`.

    Unknown keys are rejected; every error message names the offending key.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping of keys to values")

    for key in doc:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown key '{key}'")

    if "scenario" not in doc:
        raise ConfigError("missing required key 'scenario'")
    scenario = doc["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"key 'scenario' must be one of {', '.join(SCENARIOS)}; got {scenario!r}"
        )

    params, resolved_params = _parse_params(scenario, doc)
    n_max = _parse_n_max(scenario, doc)
    grid = _parse_grid(scenario, doc)
    tau = _parse_tau(scenario, doc)

    if "output_path" not in doc:
        raise ConfigError("missing required key 'output_path'")
    output_path = doc["output_path"]
    if not isinstance(output_path, str) or not output_path:
        raise ConfigError("key 'output_path' must be a non-empty string")

    check_truncation = doc.get("check_truncation", False)
    if not isinstance(check_truncation, bool):
        raise ConfigError("key 'check_truncation' must be a boolean")
    if check_truncation and scenario == "dressed":
        raise ConfigError("key 'check_truncation' does not apply to scenario 'dressed'")

    resolved = {
        "scenario": scenario,
        "params": resolved_params,
        "n_max": n_max,
        "output_path": output_path,
        "check_truncation": check_truncation,
    }
    if grid is not None:
        resolved["grid"] = {"start": grid.start, "stop": grid.stop, "points": grid.points}
    if tau is not None:
        resolved["tau"] = {"t_max": tau.t_max, "dt_out": tau.dt_out}

    return ScenarioConfig(
        scenario=scenario, params=params, n_max=n_max, grid=grid, tau=tau,
        output_path=output_path, check_truncation=check_truncation, resolved=resolved,
    )


def _parse_params(scenario: str, doc: dict) -> tuple[SystemParams, dict]:
    if "params" not in doc:
        raise ConfigError("missing required key 'params'")
    raw = _mapping(doc["params"], "params")
    allowed = _PARAM_KEYS[scenario]
    for key in raw:
        if key not in allowed:
            if key in {"g", "phi_z", "eta", "gamma", "kappa", "delta", "delta_a", "delta_cav"}:
                raise ConfigError(
                    f"key '{key}' in params is not accepted for scenario '{scenario}'"
                )
            raise ConfigError(f"unknown key '{key}' in params")
    for key in _REQUIRED_PARAMS[scenario]:
        if key not in raw:
            raise ConfigError(f"missing required params key '{key}' for scenario '{scenario}'")

    values = {key: _number(raw[key], f"params.{key}") for key in raw}
    delta_a = delta_cav = 0.0
    if scenario in _NEEDS_DETUNING:
        has_sugar = "delta" in values
        has_split = "delta_a" in values or "delta_cav" in values
        if has_sugar and has_split:
            raise ConfigError("params key 'delta' conflicts with 'delta_a'/'delta_cav'")
        if has_sugar:
            delta_a = delta_cav = values["delta"]
        elif "delta_a" in values and "delta_cav" in values:
            delta_a = values["delta_a"]
            delta_cav = values["delta_cav"]
        else:
            raise ConfigError(
                f"scenario '{scenario}' requires params.delta or both "
                "params.delta_a and params.delta_cav"
            )

    gamma = values.get("gamma", _DEFAULT_GAMMA)
    kappa = values.get("kappa", _DEFAULT_KAPPA)
    try:
        params = SystemParams(
            g=values["g"], phi_z=values.get("phi_z", 0.0), eta=values.get("eta", 0.0),
            delta_a=delta_a, delta_cav=delta_cav, gamma=gamma, kappa=kappa,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid params: {exc}") from exc

    if scenario == "dressed":
        try:
            build_block(1, params.phi_z, params.g)
        except ValueError as exc:
            raise ConfigError(f"invalid params.phi_z for scenario 'dressed': {exc}") from exc

    resolved = {"g": params.g, "phi_z": params.phi_z}
    if "eta" in allowed:
        resolved["eta"] = params.eta
    if scenario in _NEEDS_DETUNING:
        resolved["delta_a"] = params.delta_a
        resolved["delta_cav"] = params.delta_cav
    if "gamma" in allowed:
        resolved["gamma"] = params.gamma
        resolved["kappa"] = params.kappa
    return params, resolved


def _parse_n_max(scenario: str, doc: dict) -> int:
    n_max = _integer(doc.get("n_max", _DEFAULT_N_MAX), "n_max")
    if n_max < 1:
        raise ConfigError(f"key 'n_max' must be >= 1, got {n_max}")
    if scenario in _NEEDS_THREE_PHOTON and n_max < 3:
        raise ConfigError(
            f"key 'n_max' must be >= 3 for scenario '{scenario}' "
            "(third-order correlations need three photon levels)"
        )
    return n_max


def _parse_grid(scenario: str, doc: dict) -> GridSpec | None:
    if scenario not in _NEEDS_GRID:
        if "grid" in doc:
            raise ConfigError(f"key 'grid' is not accepted for scenario '{scenario}'")
        return None
    if "grid" not in doc:
        raise ConfigError(f"missing required key 'grid' for scenario '{scenario}'")
    raw = _mapping(doc["grid"], "grid")
    for key in raw:
        if key not in {"start", "stop", "points"}:
            raise ConfigError(f"unknown key '{key}' in grid")
    for key in ("start", "stop", "points"):
        if key not in raw:
            raise ConfigError(f"missing required grid key '{key}'")
    start = _number(raw["start"], "grid.start")
    stop = _number(raw["stop"], "grid.stop")
    points = _integer(raw["points"], "grid.points")
    if points < 2:
        raise ConfigError(f"key 'grid.points' must be >= 2, got {points}")
    if not stop > start:
        raise ConfigError("key 'grid.stop' must be greater than 'grid.start'")
    return GridSpec(start=start, stop=stop, points=points)


def _parse_tau(scenario: str, doc: dict) -> TauSpec | None:
    if scenario not in _NEEDS_TAU:
        if "tau" in doc:
            raise ConfigError(f"key 'tau' is not accepted for scenario '{scenario}'")
        return None
    if "tau" not in doc:
        raise ConfigError(f"missing required key 'tau' for scenario '{scenario}'")
    raw = _mapping(doc["tau"], "tau")
    for key in raw:
        if key not in {"t_max", "dt_out"}:
            raise ConfigError(f"unknown key '{key}' in tau")
    for key in ("t_max", "dt_out"):
        if key not in raw:
            raise ConfigError(f"missing required tau key '{key}'")
    t_max = _number(raw["t_max"], "tau.t_max")
    dt_out = _number(raw["dt_out"], "tau.dt_out")
    if not dt_out > 0:
        raise ConfigError(f"key 'tau.dt_out' must be > 0, got {dt_out}")
    if not t_max >= dt_out:
        raise ConfigError("key 'tau.t_max' must be >= 'tau.dt_out'")
    return TauSpec(t_max=t_max, dt_out=dt_out)


# ---------------------------------------------------------------------------
# serialization


def _fmt(value) -> str:
    return "%.12g" % float(value)


def _round12(value: float) -> float:
    return float(_fmt(value))


def _csv_text(header, columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _write_outputs(cfg: ScenarioConfig, payload: str, solver_meta, truncation_meta) -> None:
    meta = {
        "tool": "blockade",
        "version": __version__,
        "config": cfg.resolved,
        "solver": solver_meta,
        "truncation": truncation_meta,
    }
    Path(cfg.output_path).write_text(payload, newline="\n")
    meta_text = json.dumps(meta, indent=2, sort_keys=True) + "\n"
    Path(cfg.output_path + ".meta.json").write_text(meta_text, newline="\n")


# ---------------------------------------------------------------------------
# scenario runners


def _steady_scalars(params: SystemParams, n_max: int) -> dict:
    space = make_space(n_max)
    lv = build_liouvillian(build_hamiltonian(space, params), params)
    rho = steady_state(lv)
    stats = photon_statistics(rho)
    scalars = {"mean_n": stats.mean_n}
    if n_max >= 3:
        scalars["g2_0"] = g2_zero(rho)
        scalars["g3_0"] = g3_zero(rho)
    return scalars


def _max_rel_change(old: dict, new: dict) -> float:
    worst = 0.0
    for key, value in old.items():
        other = new[key]
        scale = max(abs(value), 1e-300)
        worst = max(worst, abs(other - value) / scale)
    return worst


def _scan_truncation(cfg, run, result):
    if not cfg.check_truncation:
        return None
    recheck = run(cfg.n_max + 2)
    worst = 0.0
    for name, column in result.columns.items():
        new = recheck.columns[name]
        both = np.isfinite(column) & np.isfinite(new)
        if both.any():
            scale = np.maximum(np.abs(column[both]), 1e-300)
            worst = max(worst, float((np.abs(new[both] - column[both]) / scale).max()))
    return {"n_max": cfg.n_max, "recheck_n_max": cfg.n_max + 2, "max_rel_change": worst}


def _solver_meta_from_sweep(result) -> dict:
    finite = result.residuals[np.isfinite(result.residuals)]
    return {
        "residual_max": float(finite.max()) if finite.size else None,
        "point_errors": [[int(i), msg] for i, msg in result.errors],
    }


def _run_spectrum(cfg: ScenarioConfig, workers: int) -> int:
    grid_over_g = np.linspace(cfg.grid.start, cfg.grid.stop, cfg.grid.points)

    def run(n_max):
        return spectrum_scan(cfg.params, grid_over_g * cfg.params.g, n_max=n_max, workers=workers)

    result = run(cfg.n_max)
    payload = _csv_text(("delta_over_g", "mean_n"), (grid_over_g, result.columns["mean_n"]))
    _write_outputs(cfg, payload, _solver_meta_from_sweep(result), _scan_truncation(cfg, run, result))
    return 2 if len(result.errors) == cfg.grid.points else 0


def _run_rabi(cfg: ScenarioConfig, workers: int) -> int:
    eta_grid = np.linspace(cfg.grid.start, cfg.grid.stop, cfg.grid.points)

    def run(n_max):
        return rabi_scan(cfg.params, eta_grid, n_max=n_max, workers=workers)

    result = run(cfg.n_max)
    payload = _csv_text(
        ("eta_over_kappa", "g2_0", "g3_0"),
        (eta_grid, result.columns["g2_0"], result.columns["g3_0"]),
    )
    _write_outputs(cfg, payload, _solver_meta_from_sweep(result), _scan_truncation(cfg, run, result))
    return 2 if len(result.errors) == cfg.grid.points else 0


def _run_correlation(cfg: ScenarioConfig) -> int:
    params = cfg.params
    space = make_space(cfg.n_max)
    lv = build_liouvillian(build_hamiltonian(space, params), params)
    rho = steady_state(lv)
    spec = PropagationSpec.for_coupling(params.g, cfg.tau.t_max, cfg.tau.dt_out)
    with_g3 = cfg.n_max >= 3
    header = ["kappa_tau"]
    columns = []
    series2 = g2_tau(lv, rho, spec)
    columns.append(series2.tau_grid)
    header.append("g2")
    columns.append(series2.values)
    if with_g3:
        series3 = g3_tau(lv, rho, spec)
        header.append("g3")
        columns.append(series3.values)
    payload = _csv_text(tuple(header), columns)
    solver_meta = {"residual": _round12(steady_state_residual(lv, rho))}
    truncation = None
    if cfg.check_truncation:
        old = _steady_scalars(params, cfg.n_max)
        new = _steady_scalars(params, cfg.n_max + 2)
        truncation = {
            "n_max": cfg.n_max,
            "recheck_n_max": cfg.n_max + 2,
            "max_rel_change": _max_rel_change(old, new),
        }
    _write_outputs(cfg, payload, solver_meta, truncation)
    return 0


def _run_pnstat(cfg: ScenarioConfig) -> int:
    params = cfg.params
    space = make_space(cfg.n_max)
    lv = build_liouvillian(build_hamiltonian(space, params), params)
    rho = steady_state(lv)
    stats = photon_statistics(rho)
    levels = np.arange(cfg.n_max + 1)
    payload = _csv_text(
        ("n", "p_n", "poisson_p_n", "deviation"),
        (levels, stats.p_n, stats.poisson_p_n, stats.deviation),
    )
    solver_meta = {"residual": _round12(steady_state_residual(lv, rho))}
    truncation = None
    if cfg.check_truncation:
        old = _steady_scalars(params, cfg.n_max)
        new = _steady_scalars(params, cfg.n_max + 2)
        truncation = {
            "n_max": cfg.n_max,
            "recheck_n_max": cfg.n_max + 2,
            "max_rel_change": _max_rel_change(old, new),
        }
    _write_outputs(cfg, payload, solver_meta, truncation)
    return 0


def _run_dressed(cfg: ScenarioConfig) -> int:
    records = []
    for n in (1, 2, 3):
        for level in eigensystem(build_block(n, cfg.params.phi_z, cfg.params.g)):
            records.append(
                {
                    "n": n,
                    "energy_over_g": _round12(level.energy_over_g),
                    "amplitudes": [_round12(a) for a in level.amplitudes],
                }
            )
    payload = json.dumps(records, indent=2) + "\n"
    _write_outputs(cfg, payload, {}, None)
    return 0


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> int:
    """Execute a validated config; write the data file and metadata sidecar.

    Returns the process exit code (0, or 2 when every sweep point failed).
    """
    if cfg.scenario == "spectrum":
        return _run_spectrum(cfg, workers)
    if cfg.scenario == "rabi_scan":
        return _run_rabi(cfg, workers)
    if cfg.scenario in ("g2tau", "g3tau"):
        return _run_correlation(cfg)
    if cfg.scenario == "pnstat":
        return _run_pnstat(cfg)
    return _run_dressed(cfg)


# ---------------------------------------------------------------------------
# entry point


def preset_text(name: str) -> str:
    """YAML text of a shipped preset configuration."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}'; available: {', '.join(PRESETS)}")
    return resources.files("blockade").joinpath(f"presets/{name}.yaml").read_text()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="blockade",
        description="Two-atom cavity QED simulator: sweeps, correlations, level diagrams.",
    )
    parser.add_argument(
        "target",
        help=f"scenario ({', '.join(SCENARIOS)}) with --config, or preset ({', '.join(PRESETS)})",
    )
    parser.add_argument("--config", help="path to a YAML scenario configuration")
    parser.add_argument("--out", help="override the configured output path")
    parser.add_argument(
        "--check-truncation", action="store_true",
        help="re-run key observables at n_max+2 and record the change in metadata",
    )
    parser.add_argument("--threads", type=int, default=1, help="sweep workers (default 1)")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.target in PRESETS:
            if args.config is not None:
                raise ConfigError(f"preset '{args.target}' does not take --config")
            text = preset_text(args.target)
        elif args.target in SCENARIOS:
            if args.config is None:
                raise ConfigError(f"scenario '{args.target}' requires --config")
            text = Path(args.config).read_text()
        else:
            raise ConfigError(
                f"unknown target '{args.target}'; expected a scenario "
                f"({', '.join(SCENARIOS)}) or preset ({', '.join(PRESETS)})"
            )
        cfg = parse_config(text)
        if args.target in SCENARIOS and cfg.scenario != args.target:
            raise ConfigError(
                f"config declares scenario '{cfg.scenario}' but '{args.target}' was requested"
            )
        if args.out is not None:
            cfg = cfg.with_output_path(args.out)
        if args.check_truncation and cfg.scenario != "dressed":
            cfg = cfg.with_check_truncation()
        return run_scenario(cfg, workers=args.threads)
    except ConfigError as exc:
        print(f"blockade: config error: {exc}", file=sys.stderr)
        return 1
    except (BlockadeError, ArithmeticError) as exc:
        print(f"blockade: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"blockade: i/o failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
