"""Scenario configuration: a single versioned JSON document per experiment.

The schema is deliberately flat and machine-diffable so the sweep engine can
materialize variants by rewriting one dotted path.  Validation reports the
offending field by its dotted name.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .asymptotics import Tolerances
from .errors import ConfigError
from .nonlinearity import (
    DEFAULT_WINDOW,
    Nonlinearity,
    PRESET_COEFFICIENTS,
    extend_far_field,
    from_polynomial,
)
from .pde import InitialData, SolverConfig
from .sturm import default_lambdas

SCHEMA_VERSION = 1

INITIAL_KINDS = {
    "compact_bump",
    "step_front",
    "tanh_profile",
    "decaying_oscillation",
    "explicit_samples",
}


@dataclass
class Scenario:
    name: str
    config: dict
    f: Nonlinearity
    satellites: list
    solver: SolverConfig
    lambdas: list[float]
    track_u_minus_beta: bool
    track_ux: bool
    pair_initial_data: InitialData | None
    steady_profiles: list[InitialData]
    verdict_plan: str
    probe_window: float
    tail_fraction: float
    tolerances: Tolerances
    output_dir: str


def _get(cfg: dict, path: str, default=None, required: bool = False):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(path, "is required")
            return default
        node = node[part]
    return node


def _require_number(cfg: dict, path: str, default=None, positive: bool = False):
    val = _get(cfg, path, default, required=default is None)
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(path, f"must be a number, got {val!r}")
    if positive and val <= 0:
        raise ConfigError(path, "must be positive")
    return float(val)


def build_nonlinearity(cfg: dict) -> tuple[Nonlinearity, list]:
    spec = _get(cfg, "nonlinearity", required=True)
    if not isinstance(spec, dict):
        raise ConfigError("nonlinearity", "must be an object")
    window = _get(cfg, "window", list(DEFAULT_WINDOW))
    if (
        not isinstance(window, (list, tuple))
        or len(window) != 2
        or not window[0] < window[1]
    ):
        raise ConfigError("window", "must be [lo, hi] with lo < hi")
    window = (float(window[0]), float(window[1]))

    if "preset" in spec:
        name = spec["preset"]
        if name not in PRESET_COEFFICIENTS:
            raise ConfigError(
                "nonlinearity.preset",
                f"unknown preset {name!r}; options: {sorted(PRESET_COEFFICIENTS)}",
            )
        f = from_polynomial(PRESET_COEFFICIENTS[name], window, name=name)
    elif "coefficients" in spec:
        coeffs = spec["coefficients"]
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError("nonlinearity.coefficients", "must be a nonempty list")
        f = from_polynomial(coeffs, window)
    else:
        raise ConfigError("nonlinearity", "needs 'preset' or 'coefficients'")

    satellites: list = []
    mf = _get(cfg, "mf")
    if mf is not None:
        kappa = _require_number(cfg, "mf.kappa", positive=True)
        blend = _require_number(cfg, "mf.blend_width", 0.25, positive=True)
        if kappa >= max(abs(window[0]), abs(window[1])):
            raise ConfigError("mf.kappa", "must sit inside the analysis window")
        f, satellites = extend_far_field(f, kappa, blend)
    return f, satellites


def _build_initial(cfg_node: dict, path: str) -> InitialData:
    if not isinstance(cfg_node, dict) or "kind" not in cfg_node:
        raise ConfigError(path, "must be an object with a 'kind'")
    kind = cfg_node["kind"]
    if kind not in INITIAL_KINDS:
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}; options: {sorted(INITIAL_KINDS)}")
    params = {k: v for k, v in cfg_node.items() if k != "kind"}
    return InitialData(kind, params)


def _snapshot_times(cfg: dict, t_end: float) -> tuple[float, ...]:
    node = _get(cfg, "solver.snapshot_times")
    if node is None:
        count = 17
        return tuple(t_end * k / (count - 1) for k in range(1, count))
    if isinstance(node, dict) and "count" in node:
        count = int(node["count"])
        if count < 2:
            raise ConfigError("solver.snapshot_times.count", "must be >= 2")
        return tuple(t_end * k / count for k in range(1, count + 1))
    if isinstance(node, list):
        times = []
        for t in node:
            if not isinstance(t, (int, float)):
                raise ConfigError("solver.snapshot_times", f"non-numeric entry {t!r}")
            times.append(float(t))
        return tuple(sorted(times))
    raise ConfigError("solver.snapshot_times", "must be a list or {'count': n}")


def load_scenario(cfg: dict) -> Scenario:
    """Validate a parsed config document and assemble the runnable pieces."""
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    schema = _get(cfg, "schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError("schema", f"unsupported schema version {schema!r}")
    name = _get(cfg, "name", "scenario")
    if not isinstance(name, str) or not name:
        raise ConfigError("name", "must be a nonempty string")

    f, satellites = build_nonlinearity(cfg)

    L = _require_number(cfg, "solver.L", 60.0, positive=True)
    dx = _require_number(cfg, "solver.dx", 0.01, positive=True)
    dt = _require_number(cfg, "solver.dt", 0.005, positive=True)
    t_end = _require_number(cfg, "solver.t_end", 80.0)
    boundary_mode = _get(cfg, "solver.boundary_mode", "ode_driven")
    u0 = _build_initial(_get(cfg, "initial_data", required=True), "initial_data")
    solver = SolverConfig(
        half_width=L,
        dx=dx,
        dt=dt,
        t_end=t_end,
        snapshot_times=_snapshot_times(cfg, t_end),
        boundary_mode=boundary_mode,
        u0=u0,
    )
    solver.validate(f)

    lam_node = _get(cfg, "audit.lambdas", "default")
    if lam_node == "default":
        lambdas = default_lambdas(L)
    elif isinstance(lam_node, list):
        lambdas = []
        for lam in lam_node:
            if not isinstance(lam, (int, float)):
                raise ConfigError("audit.lambdas", f"non-numeric entry {lam!r}")
            if abs(lam) > L - dx:
                raise ConfigError("audit.lambdas", f"lambda {lam!r} outside the grid (-L, L)")
            lambdas.append(float(lam))
    else:
        raise ConfigError("audit.lambdas", "must be 'default' or a list of numbers")

    pair_node = _get(cfg, "audit.pair_initial_data")
    pair = _build_initial(pair_node, "audit.pair_initial_data") if pair_node else None
    steady_nodes = _get(cfg, "audit.steady_profiles", [])
    if not isinstance(steady_nodes, list):
        raise ConfigError("audit.steady_profiles", "must be a list")
    steady = [
        _build_initial(nd, f"audit.steady_profiles[{i}]") for i, nd in enumerate(steady_nodes)
    ]

    plan = _get(cfg, "verdict.plan", "quasiconvergence")
    if plan not in ("quasiconvergence", "connection", "both", "none"):
        raise ConfigError("verdict.plan", f"unknown plan {plan!r}")
    tols = Tolerances(
        chain_tol=_require_number(cfg, "verdict.chain_tol", 5e-2, positive=True),
        ut_tol=_require_number(cfg, "verdict.ut_tol", 1e-3, positive=True),
        steady_tol=_require_number(cfg, "verdict.steady_tol", 1e-4, positive=True),
        early_tol=_require_number(cfg, "verdict.early_tol", 1e-2, positive=True),
    )
    probe_window = _require_number(cfg, "verdict.probe_window", 20.0, positive=True)
    if probe_window > L:
        raise ConfigError("verdict.probe_window", "must not exceed the half width L")
    tail_fraction = _require_number(cfg, "verdict.tail_fraction", 0.25, positive=True)

    out_dir = _get(cfg, "output_dir", f"out/{name}")
    if not isinstance(out_dir, str):
        raise ConfigError("output_dir", "must be a string path")

    return Scenario(
        name=name,
        config=copy.deepcopy(cfg),
        f=f,
        satellites=satellites,
        solver=solver,
        lambdas=lambdas,
        track_u_minus_beta=bool(_get(cfg, "audit.u_minus_beta", True)),
        track_ux=bool(_get(cfg, "audit.ux", True)),
        pair_initial_data=pair,
        steady_profiles=steady,
        verdict_plan=plan,
        probe_window=probe_window,
        tail_fraction=tail_fraction,
        tolerances=tols,
        output_dir=out_dir,
    )


def load_scenario_file(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    return load_scenario(cfg)


def preset_config(name: str) -> dict:
    """Load a shipped scenario preset by name."""
    ref = resources.files("chainscope").joinpath(f"presets/{name}.json")
    if not ref.is_file():
        available = sorted(
            p.name[: -len(".json")]
            for p in resources.files("chainscope").joinpath("presets").iterdir()
            if p.name.endswith(".json")
        )
        raise ConfigError("preset", f"unknown preset {name!r}; shipped: {available}")
    return json.loads(ref.read_text())


def resolve_config(path_or_name: str) -> dict:
    """A config path on disk, or the name of a shipped preset."""
    p = Path(path_or_name)
    if p.is_file():
        text = p.read_text()
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(
                "<file>", f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
            )
    return preset_config(path_or_name)


def set_by_path(cfg: dict, dotted: str, value) -> dict:
    """Return a copy of cfg with the dotted path set to value."""
    out = copy.deepcopy(cfg)
    node = out
    parts = dotted.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value
    return out
