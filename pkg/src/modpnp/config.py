"""
Configuration files: strict ``key = value`` lines grouped in ``[section]``s.

Example::

    # biased-left preset with explicit initial data
    [run]
    preset = fig41-left
    model = both

    [initial]
    c_n = 1 + 0.5*cos(pi*x)
    c_p = 1 + 0.5*cos(pi*x)

Unknown sections or keys, duplicate keys and malformed lines are
:class:`ConfigParseError` (with line and column); values that fail type or
range checks are :class:`ConfigValidationError` naming the field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .errors import ConfigParseError, ConfigValidationError
from .expressions import ExpressionError, evaluate
from .mesh_linalg import Mesh1D, build_mesh
from .nernst_planck import AVERAGES, PhysicalParams
from .poisson import PoissonBC
from .time_integrator import SolverControls

DEFAULT_INITIAL = "1 + 0.5*cos(pi*x)"
RUN_MODELS = ("classical", "modified", "both")

_FLOAT, _INT, _STR, _EXPR = "float", "int", "str", "expr"

# section -> key -> kind
SCHEMA: Dict[str, Dict[str, str]] = {
    "mesh": {"x_left": _FLOAT, "x_right": _FLOAT, "n_cells": _INT},
    "physics": {"D_n": _FLOAT, "D_p": _FLOAT, "z_n": _FLOAT, "z_p": _FLOAT, "q": _FLOAT,
                "kB_T": _FLOAT, "epsilon": _FLOAT, "drag_average": _STR,
                "D_np_override": _FLOAT},
    "poisson": {"kind": _STR, "left": _FLOAT, "right": _FLOAT, "alpha": _FLOAT},
    "solver": {"dt": _FLOAT, "sub_tol": _FLOAT, "max_sub_iters": _INT,
               "steady_tol": _FLOAT, "max_steps": _INT},
    "run": {"model": _STR, "preset": _STR, "output_dir": _STR, "snapshot_stride": _INT},
    "initial": {"c_n": _EXPR, "c_p": _EXPR},
}

DIFFUSION_SCHEMA: Dict[str, Dict[str, str]] = {
    "mesh": SCHEMA["mesh"],
    "diffusion": {"a": _EXPR, "b": _EXPR, "f0": _EXPR, "dt": _FLOAT,
                  "steady_tol": _FLOAT, "max_steps": _INT, "output_dir": _STR},
}


@dataclass(frozen=True)
class SimulationConfig:
    x_left: float = -1.0
    x_right: float = 1.0
    n_cells: int = 256
    physics: PhysicalParams = field(default_factory=PhysicalParams)
    bc: PoissonBC = field(default_factory=PoissonBC)
    controls: SolverControls = field(default_factory=SolverControls)
    model: str = "modified"
    c_n0: str = DEFAULT_INITIAL
    c_p0: str = DEFAULT_INITIAL
    output_dir: str = "pnp_out"
    snapshot_stride: int = 1000
    preset: Optional[str] = None

    def mesh(self) -> Mesh1D:
        return build_mesh(self.x_left, self.x_right, self.n_cells)

    def models(self) -> Tuple[str, ...]:
        return ("classical", "modified") if self.model == "both" else (self.model,)

    def initial_data(self, mesh: Optional[Mesh1D] = None):
        mesh = mesh or self.mesh()
        return evaluate(self.c_n0, mesh.nodes), evaluate(self.c_p0, mesh.nodes)


@dataclass(frozen=True)
class DiffusionConfig:
    x_left: float = -1.0
    x_right: float = 1.0
    n_cells: int = 256
    a: str = "1"
    b: str = "1"
    f0: str = DEFAULT_INITIAL
    dt: float = 1e-3
    steady_tol: float = 1e-10
    max_steps: int = 100_000
    output_dir: str = "diffusion_out"

    def mesh(self) -> Mesh1D:
        return build_mesh(self.x_left, self.x_right, self.n_cells)


_BASE: Dict[str, object] = {
    "mesh.x_left": -1.0, "mesh.x_right": 1.0, "mesh.n_cells": 256,
    "physics.D_n": 1.0, "physics.D_p": 1.0, "physics.z_n": -1.0, "physics.z_p": 1.0,
    "physics.q": 1.0, "physics.kB_T": 1.0, "physics.epsilon": 1.0,
    "physics.drag_average": "arithmetic", "physics.D_np_override": None,
    "poisson.kind": "dirichlet", "poisson.left": 0.0, "poisson.right": 0.0,
    "poisson.alpha": 0.0,
    "solver.dt": 1e-3, "solver.sub_tol": 1e-10, "solver.max_sub_iters": 100,
    "solver.steady_tol": 1e-8, "solver.max_steps": 100_000,
    "run.model": "modified", "run.preset": None, "run.output_dir": "pnp_out",
    "run.snapshot_stride": 1000,
    "initial.c_n": DEFAULT_INITIAL, "initial.c_p": DEFAULT_INITIAL,
}

PRESETS: Dict[str, Dict[str, object]] = {
    "fig41-left": {"mesh.x_left": -1.0, "mesh.x_right": 1.0, "mesh.n_cells": 256,
                   "solver.dt": 1e-3, "physics.z_n": -1.0, "physics.z_p": 1.0,
                   "poisson.kind": "dirichlet", "poisson.left": 0.05, "poisson.right": 0.0,
                   "run.model": "both"},
    "fig41-right": {"mesh.x_left": -1.0, "mesh.x_right": 1.0, "mesh.n_cells": 256,
                    "solver.dt": 1e-3, "physics.z_n": -1.0, "physics.z_p": 1.0,
                    "poisson.kind": "dirichlet", "poisson.left": 0.0, "poisson.right": 0.05,
                    "run.model": "both"},
}


def _tokenize(text: str, schema) -> Dict[str, Tuple[str, int, int]]:
    """Map ``section.key`` to ``(raw value, line, column)``."""
    entries: Dict[str, Tuple[str, int, int]] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigParseError("unterminated section header", lineno, indent)
            name = stripped[1:-1].strip()
            if name not in schema:
                raise ConfigParseError(f"unknown section [{name}]", lineno, indent)
            section = name
            continue
        if "=" not in stripped:
            raise ConfigParseError("expected 'key = value'", lineno, indent)
        if section is None:
            raise ConfigParseError("key outside of any [section]", lineno, indent)
        key, value = stripped.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key not in schema[section]:
            raise ConfigParseError(f"unknown key {key!r} in [{section}]", lineno, indent)
        if value == "":
            col = line.index("=") + 2
            raise ConfigParseError(f"missing value for {key!r}", lineno, col)
        name = f"{section}.{key}"
        if name in entries:
            raise ConfigParseError(f"duplicate key {key!r} in [{section}]", lineno, indent)
        entries[name] = (value, lineno, line.index("=") + 2)
    return entries


def _convert(name: str, kind: str, raw: str):
    if kind == _FLOAT:
        try:
            value = float(raw)
        except ValueError:
            raise ConfigValidationError(name, f"expected a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigValidationError(name, "must be finite")
        return value
    if kind == _INT:
        try:
            return int(raw)
        except ValueError:
            raise ConfigValidationError(name, f"expected an integer, got {raw!r}") from None
    return raw


def _typed(entries, schema) -> Dict[str, object]:
    out = {}
    for name, (raw, _, _) in entries.items():
        section, key = name.split(".")
        out[name] = _convert(name, schema[section][key], raw)
    return out


def _require(cond: bool, name: str, reason: str):
    if not cond:
        raise ConfigValidationError(name, reason)


def parse_config(text: str) -> SimulationConfig:
    """Parse and validate a simulation config; defaults fill unspecified keys."""
    given = _typed(_tokenize(text, SCHEMA), SCHEMA)
    values = dict(_BASE)
    preset = given.get("run.preset")
    if preset is not None:
        _require(preset in PRESETS, "run.preset",
                 f"unknown preset {preset!r} (known: {', '.join(sorted(PRESETS))})")
        values.update(PRESETS[preset])
    values.update(given)
    if values["poisson.kind"] == "robin":
        _require("poisson.alpha" in given, "poisson.alpha",
                 "required for robin boundary conditions (no default)")
    return config_from_values(values)


def config_from_values(values: Dict[str, object]) -> SimulationConfig:
    v = values
    _require(v["mesh.n_cells"] >= 2, "mesh.n_cells", f"must be >= 2, got {v['mesh.n_cells']}")
    _require(v["mesh.x_right"] > v["mesh.x_left"], "mesh.x_right", "must exceed mesh.x_left")
    for key in ("D_n", "D_p", "q", "kB_T", "epsilon"):
        _require(v[f"physics.{key}"] > 0, f"physics.{key}", "must be positive")
    _require(v["physics.drag_average"] in AVERAGES, "physics.drag_average",
             f"must be one of {', '.join(AVERAGES)}")
    override = v["physics.D_np_override"]
    _require(override is None or override > 0, "physics.D_np_override", "must be positive")
    _require(v["poisson.kind"] in ("dirichlet", "robin"), "poisson.kind",
             "must be dirichlet or robin")
    _require(v["poisson.alpha"] >= 0, "poisson.alpha", "must be nonnegative")
    for key in ("dt", "sub_tol", "steady_tol"):
        _require(v[f"solver.{key}"] > 0, f"solver.{key}", "must be positive")
    for key in ("max_sub_iters", "max_steps"):
        _require(v[f"solver.{key}"] >= 1, f"solver.{key}", "must be >= 1")
    _require(v["run.model"] in RUN_MODELS, "run.model", f"must be one of {', '.join(RUN_MODELS)}")
    _require(v["run.snapshot_stride"] >= 0, "run.snapshot_stride", "must be >= 0")

    cfg = SimulationConfig(
        x_left=v["mesh.x_left"], x_right=v["mesh.x_right"], n_cells=v["mesh.n_cells"],
        physics=PhysicalParams(
            D_n=v["physics.D_n"], D_p=v["physics.D_p"], z_n=v["physics.z_n"],
            z_p=v["physics.z_p"], q=v["physics.q"], kB_T=v["physics.kB_T"],
            epsilon=v["physics.epsilon"], drag_average=v["physics.drag_average"],
            D_np_override=override),
        bc=PoissonBC(v["poisson.kind"], v["poisson.left"], v["poisson.right"],
                     v["poisson.alpha"]),
        controls=SolverControls(dt=v["solver.dt"], sub_tol=v["solver.sub_tol"],
                                max_sub_iters=v["solver.max_sub_iters"],
                                steady_tol=v["solver.steady_tol"],
                                max_steps=v["solver.max_steps"]),
        model=v["run.model"], c_n0=v["initial.c_n"], c_p0=v["initial.c_p"],
        output_dir=v["run.output_dir"], snapshot_stride=v["run.snapshot_stride"],
        preset=v["run.preset"],
    )
    mesh = cfg.mesh()
    for name, expr in (("initial.c_n", cfg.c_n0), ("initial.c_p", cfg.c_p0)):
        try:
            values_at_nodes = evaluate(expr, mesh.nodes)
        except ExpressionError as exc:
            raise ConfigValidationError(name, str(exc)) from None
        _require(values_at_nodes.min() >= 0, name, "initial concentration must be nonnegative")
    return cfg


def config_values(cfg: SimulationConfig) -> Dict[str, object]:
    p, bc, c = cfg.physics, cfg.bc, cfg.controls
    return {
        "mesh.x_left": cfg.x_left, "mesh.x_right": cfg.x_right, "mesh.n_cells": cfg.n_cells,
        "physics.D_n": p.D_n, "physics.D_p": p.D_p, "physics.z_n": p.z_n, "physics.z_p": p.z_p,
        "physics.q": p.q, "physics.kB_T": p.kB_T, "physics.epsilon": p.epsilon,
        "physics.drag_average": p.drag_average, "physics.D_np_override": p.D_np_override,
        "poisson.kind": bc.kind, "poisson.left": bc.left_value, "poisson.right": bc.right_value,
        "poisson.alpha": bc.alpha,
        "solver.dt": c.dt, "solver.sub_tol": c.sub_tol, "solver.max_sub_iters": c.max_sub_iters,
        "solver.steady_tol": c.steady_tol, "solver.max_steps": c.max_steps,
        "run.model": cfg.model, "run.preset": cfg.preset, "run.output_dir": cfg.output_dir,
        "run.snapshot_stride": cfg.snapshot_stride,
        "initial.c_n": cfg.c_n0, "initial.c_p": cfg.c_p0,
    }


def _render(values: Dict[str, object], schema) -> str:
    lines = []
    for section, keys in schema.items():
        lines.append(f"[{section}]")
        for key in keys:
            value = values.get(f"{section}.{key}")
            if value is None:
                continue
            lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def render_config(cfg: SimulationConfig) -> str:
    """Inverse of :func:`parse_config`: every field written explicitly."""
    return _render(config_values(cfg), SCHEMA)


def parse_diffusion_config(text: str) -> DiffusionConfig:
    given = _typed(_tokenize(text, DIFFUSION_SCHEMA), DIFFUSION_SCHEMA)
    base = DiffusionConfig()
    kw = {}
    for name, value in given.items():
        kw[name.split(".")[1]] = value
    cfg = DiffusionConfig(**{**base.__dict__, **kw})
    _require(cfg.n_cells >= 2, "mesh.n_cells", f"must be >= 2, got {cfg.n_cells}")
    _require(cfg.x_right > cfg.x_left, "mesh.x_right", "must exceed mesh.x_left")
    _require(cfg.dt > 0, "diffusion.dt", "must be positive")
    _require(cfg.steady_tol > 0, "diffusion.steady_tol", "must be positive")
    _require(cfg.max_steps >= 1, "diffusion.max_steps", "must be >= 1")
    mesh = cfg.mesh()
    for key, positive in (("a", True), ("b", True), ("f0", False)):
        try:
            vals = evaluate(getattr(cfg, key), mesh.nodes)
        except ExpressionError as exc:
            raise ConfigValidationError(f"diffusion.{key}", str(exc)) from None
        if positive:
            _require(vals.min() > 0, f"diffusion.{key}", "must be strictly positive")
        else:
            _require(vals.min() >= 0, f"diffusion.{key}", "must be nonnegative")
    return cfg


def render_diffusion_config(cfg: DiffusionConfig) -> str:
    values = {}
    for section, keys in DIFFUSION_SCHEMA.items():
        for key in keys:
            values[f"{section}.{key}"] = getattr(cfg, key)
    return _render(values, DIFFUSION_SCHEMA)


def preset_config(name: str) -> SimulationConfig:
    return parse_config(f"[run]\npreset = {name}\n")

