"""
Backward-Euler time stepping with a sub-updating fixed-point loop.

Within one time step the coupling coefficients and the potential are
frozen at sub-iterate ``m``; each species is advanced by a linear solve with
its partner's cross flux moved to the right-hand side, then the potential is
recomputed from the new concentrations. The loop runs until the
concentration increment drops below ``sub_tol``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import SubIterationDivergenceError
from .functionals import FunctionalReport, functional_report
from .mesh_linalg import Mesh1D, check_field, integrate, thomas_solve
from .nernst_planck import (PhysicalParams, apply_stencil, bernoulli_weights,
                            coupling_coefficients, edge_stencil)
from .poisson import PoissonBC, poisson_residual, solve_poisson

logger = logging.getLogger(__name__)


@dataclass
class IonState:
    mesh: Mesh1D
    c_n: np.ndarray
    c_p: np.ndarray
    phi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.c_n = check_field(self.mesh, self.c_n, "c_n")
        self.c_p = check_field(self.mesh, self.c_p, "c_p")
        self.phi = check_field(self.mesh, self.phi, "phi")

    @classmethod
    def from_concentrations(cls, mesh, c_n, c_p, params, bc, t=0.0) -> "IonState":
        """Build a state whose potential solves the Poisson problem for ``c_n, c_p``."""
        phi = solve_poisson(mesh, c_n, c_p, params, bc)
        return cls(mesh, c_n, c_p, phi, t)

    def copy(self) -> "IonState":
        return IonState(self.mesh, self.c_n.copy(), self.c_p.copy(), self.phi.copy(), self.t)

    def poisson_consistent(self, params, bc, tol: float = 1e-10) -> bool:
        return poisson_residual(self.mesh, self.phi, self.c_n, self.c_p, params, bc) <= tol


@dataclass(frozen=True)
class SolverControls:
    dt: float = 1e-3
    sub_tol: float = 1e-10
    max_sub_iters: int = 100
    steady_tol: float = 1e-8
    max_steps: int = 100_000

    def __post_init__(self):
        for name in ("dt", "sub_tol", "steady_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_sub_iters < 1 or self.max_steps < 1:
            raise ValueError("max_sub_iters and max_steps must be >= 1")


@dataclass
class StepReport:
    sub_iterations: int
    final_increment: float
    mass_n: float
    mass_p: float
    converged: bool
    # increment after each sub-iteration, for contraction diagnostics
    increments: List[float] = field(default_factory=list, repr=False)


@dataclass
class BoundReport:
    min_c_n: float
    min_c_p: float
    max_sum: float
    bound: float
    holds: bool


@dataclass
class Trajectory:
    reports: List[FunctionalReport]
    step_reports: List[StepReport]
    steady: bool
    steps: int
    # (step index, state) pairs
    snapshots: List[Tuple[int, IonState]] = field(default_factory=list)


def step(state: IonState, params: PhysicalParams, bc: PoissonBC,
         controls: SolverControls):
    """
    Advance one backward-Euler step of size ``controls.dt``.

    Returns ``(new_state, StepReport)``. Raises
    :class:`SubIterationDivergenceError` when ``max_sub_iters`` is reached with
    an increment above ``100 * sub_tol``.
    """
    mesh = state.mesh
    dt = controls.dt
    mass = mesh.lumped_mass()
    rhs_n0 = mass * state.c_n
    rhs_p0 = mass * state.c_p
    cn_m, cp_m, phi_m = state.c_n, state.c_p, state.phi
    increments = []
    converged = False

    for _ in range(controls.max_sub_iters):
        coeffs = coupling_coefficients(cn_m, cp_m, params)
        w_n = bernoulli_weights(mesh, params.z_n, phi_m, params)
        w_p = bernoulli_weights(mesh, params.z_p, phi_m, params)
        rhs_n = rhs_n0
        rhs_p = rhs_p0
        if params.has_drag:
            # cross terms carry the partner's drift group, frozen at iterate m
            rhs_n = rhs_n0 - dt * apply_stencil(*edge_stencil(coeffs.D_np, w_p), cp_m)
            rhs_p = rhs_p0 - dt * apply_stencil(*edge_stencil(coeffs.D_pn, w_n), cn_m)
        cn_new = _implicit_solve(mass, dt, edge_stencil(coeffs.D_nn, w_n), rhs_n)
        cp_new = _implicit_solve(mass, dt, edge_stencil(coeffs.D_pp, w_p), rhs_p)
        phi_new = solve_poisson(mesh, cn_new, cp_new, params, bc)

        inc = max(np.max(np.abs(cn_new - cn_m)), np.max(np.abs(cp_new - cp_m)))
        increments.append(float(inc))
        cn_m, cp_m, phi_m = cn_new, cp_new, phi_new
        if inc <= controls.sub_tol:
            converged = True
            break

    final = increments[-1]
    if not converged and final > 100 * controls.sub_tol:
        raise SubIterationDivergenceError(
            f"sub-iteration increment {final:.3e} after {len(increments)} iterations "
            f"at t={state.t + dt:.6g}")
    new_state = IonState(mesh, cn_m, cp_m, phi_m, state.t + dt)
    report = StepReport(
        sub_iterations=len(increments), final_increment=final,
        mass_n=integrate(mesh, cn_m), mass_p=integrate(mesh, cp_m),
        converged=converged, increments=increments)
    return new_state, report


def _implicit_solve(mass, dt, stencil, rhs) -> np.ndarray:
    """Solve ``(M + dt K) c = rhs`` for the operator ``K`` given by an edge stencil."""
    bp, bm = stencil
    diag = mass.copy()
    diag[:-1] += dt * bp
    diag[1:] += dt * bm
    return thomas_solve(-dt * bp, diag, -dt * bm, rhs)


def run_to_steady(state0: IonState, params: PhysicalParams, bc: PoissonBC,
                  controls: SolverControls, snapshot_stride: int = 0,
                  callback=None):
    """
    Step until ``max|c^{k+1} - c^k| / dt <= steady_tol`` or ``max_steps``.

    Returns ``(Trajectory, final_state)``. A :class:`FunctionalReport` is
    recorded after every step; with ``snapshot_stride > 0`` every
    ``snapshot_stride``-th state (and the final one) is kept.
    Non-convergence is not an error: ``Trajectory.steady`` is False.
    """
    state = state0
    reports, step_reports, snapshots = [], [], []
    steady = False
    k = 0
    for k in range(1, controls.max_steps + 1):
        new, rep = step(state, params, bc, controls)
        change = max(np.max(np.abs(new.c_n - state.c_n)),
                     np.max(np.abs(new.c_p - state.c_p))) / controls.dt
        state = new
        step_reports.append(rep)
        reports.append(functional_report(state, params, rep.sub_iterations,
                                         rep.final_increment))
        if callback is not None:
            callback(k, state, rep)
        steady = change <= controls.steady_tol
        if snapshot_stride and (k % snapshot_stride == 0 or steady):
            snapshots.append((k, state))
        if steady:
            break
    if snapshot_stride and (not snapshots or snapshots[-1][0] != k):
        snapshots.append((k, state))
    if not steady:
        logger.warning("no steady state after %d steps", controls.max_steps)
    return Trajectory(reports, step_reports, steady, k, snapshots), state


def initial_bound(c_n0, c_p0) -> float:
    """``max(|c_n0|_inf, |c_p0|_inf, 1)``, the reference level for :func:`monitor_bounds`."""
    return float(max(np.max(np.abs(c_n0)), np.max(np.abs(c_p0)), 1.0))


def monitor_bounds(state: IonState, M0: float, tol: float = 1e-10) -> BoundReport:
    """Check ``c_n, c_p >= 0`` (up to ``-tol``) and ``c_n + c_p <= 5 M0``."""
    min_n = float(state.c_n.min())
    min_p = float(state.c_p.min())
    max_sum = float((state.c_n + state.c_p).max())
    bound = 5.0 * M0
    holds = min_n >= -tol and min_p >= -tol and max_sum <= bound
    return BoundReport(min_n, min_p, max_sum, bound, holds)
