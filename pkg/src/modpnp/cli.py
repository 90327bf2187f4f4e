"""
Command-line driver: run a configured simulation and write CSV output.

Usage::

    modpnp --preset fig41-left --model both --out out/
    modpnp --config run.cfg --quiet
    modpnp diffusion --config diffusion.cfg --out out/

Exit status is 0 when every run reached a steady state, 2 when some run hit
``max_steps`` first, 1 on errors and 64 on bad command-line usage.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import tempfile
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import (DiffusionConfig, SimulationConfig, parse_config, parse_diffusion_config,
                     preset_config, render_config, render_diffusion_config)
from .errors import ConfigError, PNPError
from .expressions import evaluate
from .general_diffusion import DiffusionProblem, equilibrium_of, run_general_diffusion
from .time_integrator import IonState, Trajectory, run_to_steady

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_NOT_STEADY, EXIT_USAGE = 0, 1, 2, 64

TIMESERIES_HEADER = "t,mass_n,mass_p,energy,diss_classical,diss_modified,sub_iters,increment"
SNAPSHOT_HEADER = "x,c_n,c_p,phi"
COMPARISON_HEADER = ("x,c_n_classical,c_n_modified,c_p_classical,c_p_modified,"
                     "phi_classical,phi_modified")
DIFFUSION_HEADER = "t,mass,energy,increment"
DIFFUSION_FINAL_HEADER = "x,f,f_equilibrium"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


def _csv(header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def ensure_writable(directory: str) -> None:
    """Create ``directory`` if needed and verify a file can be created in it."""
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".probe-", dir=directory)
    os.close(fd)
    os.unlink(tmp)


@dataclasses.dataclass
class RunResult:
    model: str
    trajectory: Trajectory
    final: IonState

    @property
    def steady(self) -> bool:
        return self.trajectory.steady


def timeseries_csv(trajectory: Trajectory) -> str:
    rows = ((r.t, r.mass_n, r.mass_p, r.energy, r.diss_classical, r.diss_modified,
             r.sub_iterations, r.increment) for r in trajectory.reports)
    return _csv(TIMESERIES_HEADER, rows)


def snapshot_csv(state: IonState) -> str:
    return _csv(SNAPSHOT_HEADER, zip(state.mesh.nodes, state.c_n, state.c_p, state.phi))


def comparison_csv(classical: IonState, modified: IonState) -> Tuple[str, Dict[str, float]]:
    diffs = {
        "linf_c_n": float(np.max(np.abs(classical.c_n - modified.c_n))),
        "linf_c_p": float(np.max(np.abs(classical.c_p - modified.c_p))),
        "linf_phi": float(np.max(np.abs(classical.phi - modified.phi))),
    }
    text = _csv(COMPARISON_HEADER, zip(classical.mesh.nodes, classical.c_n, modified.c_n,
                                       classical.c_p, modified.c_p, classical.phi,
                                       modified.phi))
    text += "# " + ",".join(f"{k}={_fmt(v)}" for k, v in diffs.items()) + "\n"
    return text, diffs


def simulate(config: SimulationConfig, model: str) -> RunResult:
    """Run one model of ``config`` from its initial data; no files are written."""
    mesh = config.mesh()
    params = config.physics.with_model(model)
    c_n0, c_p0 = config.initial_data(mesh)
    state0 = IonState.from_concentrations(mesh, c_n0, c_p0, params, config.bc)
    trajectory, final = run_to_steady(state0, params, config.bc, config.controls,
                                      snapshot_stride=config.snapshot_stride)
    return RunResult(model, trajectory, final)


def write_run(result: RunResult, directory: str) -> None:
    write_atomic(os.path.join(directory, "timeseries.csv"), timeseries_csv(result.trajectory))
    snapshots = result.trajectory.snapshots or [(result.trajectory.steps, result.final)]
    for k, state in snapshots:
        write_atomic(os.path.join(directory, f"snap_{k}.csv"), snapshot_csv(state))


def run(config: SimulationConfig, out_dir: Optional[str] = None) -> Tuple[int, List[RunResult]]:
    """
    Run every model requested by ``config`` and write the CSV outputs.

    A single model writes into ``out_dir``; ``model = both`` writes
    ``classical/`` and ``modified/`` subdirectories plus ``comparison.csv``.
    Returns ``(exit_status, results)``; errors propagate to the caller.
    """
    out_dir = out_dir or config.output_dir
    models = config.models()
    dirs = {m: (os.path.join(out_dir, m) if len(models) > 1 else out_dir) for m in models}
    ensure_writable(out_dir)
    for d in dirs.values():
        ensure_writable(d)
    write_atomic(os.path.join(out_dir, "config.cfg"), render_config(config))

    results = []
    for m in models:
        logger.info("running %s model", m)
        res = simulate(config, m)
        write_run(res, dirs[m])
        results.append(res)
    if len(results) == 2:
        text, _ = comparison_csv(results[0].final, results[1].final)
        write_atomic(os.path.join(out_dir, "comparison.csv"), text)
    status = EXIT_OK if all(r.steady for r in results) else EXIT_NOT_STEADY
    return status, results


def run_diffusion(config: DiffusionConfig, out_dir: Optional[str] = None):
    """Solve the configured inhomogeneous diffusion problem; returns ``(status, run, f)``."""
    out_dir = out_dir or config.output_dir
    ensure_writable(out_dir)
    mesh = config.mesh()
    x = mesh.nodes
    problem = DiffusionProblem(mesh, evaluate(config.a, x), evaluate(config.b, x),
                               evaluate(config.f0, x))
    result, f = run_general_diffusion(problem, config.dt, config.steady_tol, config.max_steps)
    write_atomic(os.path.join(out_dir, "diffusion.cfg"), render_diffusion_config(config))
    write_atomic(os.path.join(out_dir, "diffusion_timeseries.csv"),
                 _csv(DIFFUSION_HEADER, ((r.t, r.mass, r.energy, r.increment)
                                         for r in result.records)))
    write_atomic(os.path.join(out_dir, "diffusion_final.csv"),
                 _csv(DIFFUSION_FINAL_HEADER, zip(x, f, equilibrium_of(problem))))
    return (EXIT_OK if result.steady else EXIT_NOT_STEADY), result, f


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _main_parser() -> _Parser:
    p = _Parser(prog="modpnp",
                description="Classical and drag-modified PNP solver. "
                            "Use 'modpnp diffusion --help' for the diffusion solver.")
    p.add_argument("--config", help="configuration file")
    p.add_argument("--preset", help="named preset (fig41-left, fig41-right)")
    p.add_argument("--model", choices=("classical", "modified", "both"),
                   help="override the configured model")
    p.add_argument("--out", help="output directory (overrides run.output_dir)")
    p.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return p


def _diffusion_parser() -> _Parser:
    p = _Parser(prog="modpnp diffusion", description="Inhomogeneous diffusion solver.")
    p.add_argument("--config", required=True, help="diffusion configuration file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--quiet", action="store_true")
    return p


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _fail(message: str) -> int:
    print(f"modpnp: error: {message}", file=sys.stderr)
    return EXIT_ERROR


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "diffusion":
        return _diffusion_main(argv[1:])
    args = _main_parser().parse_args(argv)
    if args.config is None and args.preset is None:
        _main_parser().error("one of --config or --preset is required")
    try:
        if args.config is not None:
            text = _read(args.config)
            if args.preset is not None:
                text = f"[run]\npreset = {args.preset}\n" + text
            config = parse_config(text)
        else:
            config = preset_config(args.preset)
        if args.model is not None:
            config = dataclasses.replace(config, model=args.model)
        status, results = run(config, args.out)
    except FileNotFoundError as exc:
        return _fail(f"file not found: {exc.filename}")
    except (ConfigError, PNPError, ValueError, OSError) as exc:
        return _fail(str(exc))
    if not args.quiet:
        print("; ".join(f"{r.model}: steps={r.trajectory.steps} steady={r.steady} "
                        f"mass_n={r.trajectory.reports[-1].mass_n:.12g} "
                        f"mass_p={r.trajectory.reports[-1].mass_p:.12g}" for r in results))
    return status


def _diffusion_main(argv: List[str]) -> int:
    args = _diffusion_parser().parse_args(argv)
    try:
        config = parse_diffusion_config(_read(args.config))
        status, result, _ = run_diffusion(config, args.out)
    except FileNotFoundError as exc:
        return _fail(f"file not found: {exc.filename}")
    except (ConfigError, PNPError, ValueError, OSError) as exc:
        return _fail(str(exc))
    if not args.quiet:
        print(f"diffusion: steps={result.steps} steady={result.steady} "
              f"mass={result.records[-1].mass:.12g}")
    return status


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(cli_main())
