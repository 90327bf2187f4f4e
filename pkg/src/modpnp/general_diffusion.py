"""
Inhomogeneous diffusion ``f_t = (b (a f)')'`` with no-flux ends.

``a`` sets the equilibrium (``a f = const``) and ``b`` only the rate. The
scheme is assembled in ``g = a f``, so a constant ``g`` is an exact discrete
equilibrium whatever ``b`` is.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.special import xlogy

from .mesh_linalg import Mesh1D, check_field, harmonic_mean, integrate, thomas_solve


@dataclass
class DiffusionProblem:
    mesh: Mesh1D
    a: np.ndarray
    b: np.ndarray
    f0: np.ndarray

    def __post_init__(self):
        self.a = check_field(self.mesh, self.a, "a")
        self.b = check_field(self.mesh, self.b, "b")
        self.f0 = check_field(self.mesh, self.f0, "f0")
        if self.a.min() <= 0 or self.b.min() <= 0:
            raise ValueError("a and b must be strictly positive")
        if self.f0.min() < 0:
            raise ValueError("f0 must be nonnegative")


@dataclass
class DiffusionRecord:
    t: float
    mass: float
    energy: float
    increment: float


@dataclass
class DiffusionRun:
    records: List[DiffusionRecord] = field(default_factory=list)
    steady: bool = False
    steps: int = 0


def step_general_diffusion(problem: DiffusionProblem, f, dt: float) -> np.ndarray:
    """One backward-Euler step; conserves the trapezoidal mass of ``f``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    mesh = problem.mesh
    f = check_field(mesh, f, "f")
    a = problem.a
    w = dt * harmonic_mean(problem.b[:-1], problem.b[1:]) / mesh.h
    diag = mesh.lumped_mass()
    diag[:-1] += w * a[:-1]
    diag[1:] += w * a[1:]
    return thomas_solve(-w * a[:-1], diag, -w * a[1:], mesh.lumped_mass() * f)


def equilibrium_of(problem: DiffusionProblem) -> np.ndarray:
    """No-flux steady state ``C / a`` carrying the (trapezoidal) mass of ``f0``."""
    inv_a = 1.0 / problem.a
    C = integrate(problem.mesh, problem.f0) / integrate(problem.mesh, inv_a)
    return C * inv_a


def diffusion_energy(problem: DiffusionProblem, f) -> float:
    """``int f log(a f)``."""
    f = np.maximum(f, 0.0)
    return integrate(problem.mesh, xlogy(f, problem.a * f))


def run_general_diffusion(problem: DiffusionProblem, dt: float, steady_tol: float = 1e-10,
                          max_steps: int = 100_000):
    """Step from ``f0`` until ``max|f^{k+1} - f^k| / dt <= steady_tol``; returns ``(DiffusionRun, f)``."""
    f = problem.f0.copy()
    run = DiffusionRun()
    for k in range(1, max_steps + 1):
        f_new = step_general_diffusion(problem, f, dt)
        inc = float(np.max(np.abs(f_new - f))) / dt
        f = f_new
        run.records.append(DiffusionRecord(k * dt, integrate(problem.mesh, f),
                                           diffusion_energy(problem, f), inc))
        run.steps = k
        if inc <= steady_tol:
            run.steady = True
            break
    return run, f
