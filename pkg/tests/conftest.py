"""Shared, cached long runs at the fig41 preset settings."""
from dataclasses import dataclass, field, replace
from typing import List

import pytest

from modpnp.config import preset_config
from modpnp.functionals import boundary_work, total_energy
from modpnp.time_integrator import IonState, initial_bound, monitor_bounds, run_to_steady


@dataclass
class Fig41Run:
    preset: str
    model: str
    params: object
    bc: object
    controls: object
    state0: IonState
    trajectory: object
    final: IonState
    M0: float
    bounds: List = field(default_factory=list)
    # boundary work after each step
    work: List[float] = field(default_factory=list)

    @property
    def energy0(self) -> float:
        return total_energy(self.state0, self.params)

    @property
    def work0(self) -> float:
        return boundary_work(self.state0, self.params)


def fig41_run(preset: str, model: str, dt: float = None, max_steps: int = None) -> Fig41Run:
    cfg = preset_config(preset)
    controls = cfg.controls
    if dt is not None:
        controls = replace(controls, dt=dt)
    if max_steps is not None:
        controls = replace(controls, max_steps=max_steps)
    mesh = cfg.mesh()
    params = cfg.physics.with_model(model)
    c_n0, c_p0 = cfg.initial_data(mesh)
    state0 = IonState.from_concentrations(mesh, c_n0, c_p0, params, cfg.bc)
    M0 = initial_bound(c_n0, c_p0)
    bounds, work = [], []

    def record(k, s, rep):
        bounds.append(monitor_bounds(s, M0))
        work.append(boundary_work(s, params))

    traj, final = run_to_steady(state0, params, cfg.bc, controls, callback=record)
    return Fig41Run(preset, model, params, cfg.bc, controls, state0, traj, final, M0,
                    bounds, work)


_CACHE = {}


@pytest.fixture(scope="session")
def fig41():
    """``fig41(preset, model)`` returns a cached steady run at the preset settings."""
    def get(preset, model):
        key = (preset, model)
        if key not in _CACHE:
            _CACHE[key] = fig41_run(preset, model)
        return _CACHE[key]
    return get


@pytest.fixture(scope="session")
def fig41_fine():
    """Runs at dt = 1e-4 truncated to a 5000-step window."""
    cache = {}

    def get(preset, model):
        key = (preset, model)
        if key not in cache:
            cache[key] = fig41_run(preset, model, dt=1e-4, max_steps=5000)
        return cache[key]
    return get


ACCEPTANCE_LINES: List[str] = []


@pytest.fixture
def acceptance():
    """``acceptance(n, title, passed, detail)`` records and prints one verdict line."""
    def record(number, title, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
