import math

import numpy as np
import pytest

from modpnp.general_diffusion import (DiffusionProblem, diffusion_energy, equilibrium_of,
                                      run_general_diffusion, step_general_diffusion)
from modpnp.mesh_linalg import build_mesh, integrate

MESH = build_mesh(-1, 1, 256)
X = MESH.nodes
ONES = np.ones_like(X)


def test_uniform_unchanged():
    p = DiffusionProblem(MESH, ONES, ONES, ONES)
    np.testing.assert_allclose(step_general_diffusion(p, ONES, 1e-2), 1.0, atol=1e-14)


def test_heat_mode_decay_rate():
    # cos(pi x) is the first no-flux mode on [-1, 1], eigenvalue pi^2
    dt = 1e-4
    f = 1 + 0.5 * np.cos(np.pi * X)
    p = DiffusionProblem(MESH, ONES, ONES, f)
    mode = np.cos(np.pi * X)
    amp = lambda g: integrate(MESH, (g - 1) * mode)
    a0 = amp(f)
    for _ in range(10):
        f = step_general_diffusion(p, f, dt)
    rate = -math.log(amp(f) / a0) / (10 * dt)
    assert rate == pytest.approx(np.pi ** 2, rel=0.05)


def test_exponential_a_closed_form():
    a = np.exp(X)
    f0 = 1 + 0.5 * np.cos(np.pi * X)
    p = DiffusionProblem(MESH, a, ONES, f0)
    run, f = run_general_diffusion(p, dt=1e-2)
    assert run.steady
    m = integrate(MESH, f0)
    exact = m * np.exp(-X) / (math.e - 1 / math.e)
    # trapezoidal normalization is second order; the discrete equilibrium is C/a exactly
    assert np.max(np.abs(f - equilibrium_of(p))) <= 1e-6
    assert np.max(np.abs(f - exact)) <= 2e-5


def test_equilibrium_examples():
    p = DiffusionProblem(MESH, ONES, ONES, ONES)
    np.testing.assert_allclose(equilibrium_of(p), 1.0, rtol=1e-14)
    f0 = ONES / integrate(MESH, ONES)
    p = DiffusionProblem(MESH, np.exp(X), ONES, f0)
    np.testing.assert_allclose(equilibrium_of(p), np.exp(-X) / (math.e - 1 / math.e), rtol=2e-5)
    assert integrate(MESH, equilibrium_of(p)) == pytest.approx(1.0, rel=1e-14)


def test_b_independence():
    a = np.exp(X)
    f0 = 1 + 0.5 * np.cos(np.pi * X)
    p1 = DiffusionProblem(MESH, a, ONES, f0)
    p2 = DiffusionProblem(MESH, a, 2 + np.sin(np.pi * X), f0)
    np.testing.assert_array_equal(equilibrium_of(p1), equilibrium_of(p2))
    _, f1 = run_general_diffusion(p1, dt=1e-2)
    _, f2 = run_general_diffusion(p2, dt=1e-2)
    assert np.max(np.abs(f1 - f2)) <= 1e-6


def test_mass_and_nonnegativity_per_step():
    rng = np.random.default_rng(0)
    a = rng.uniform(0.2, 5, X.size)
    b = rng.uniform(0.2, 5, X.size)
    f = np.where(rng.random(X.size) < 0.5, 0.0, rng.uniform(0, 3, X.size))
    p = DiffusionProblem(MESH, a, b, f)
    m0 = integrate(MESH, f)
    for _ in range(200):
        f = step_general_diffusion(p, f, 1e-3)
        assert abs(integrate(MESH, f) - m0) <= 1e-10 * m0
        assert f.min() >= -1e-10


def test_energy_decreases():
    p = DiffusionProblem(MESH, np.exp(X), 2 + np.sin(np.pi * X), 1 + 0.5 * np.cos(np.pi * X))
    run, _ = run_general_diffusion(p, dt=1e-2, max_steps=300)
    E = np.array([r.energy for r in run.records])
    assert np.all(np.diff(E) <= 1e-13)
    assert diffusion_energy(p, equilibrium_of(p)) <= E[-1] + 1e-12


def test_validation():
    with pytest.raises(ValueError):
        DiffusionProblem(MESH, -ONES, ONES, ONES)
    with pytest.raises(ValueError):
        DiffusionProblem(MESH, ONES, ONES, -ONES)
    with pytest.raises(ValueError):
        step_general_diffusion(DiffusionProblem(MESH, ONES, ONES, ONES), ONES, 0.0)
