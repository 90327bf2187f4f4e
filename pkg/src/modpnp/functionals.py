"""
Free energy, dissipation functionals and effective velocities on a state.

Edge quantities use the logarithmic mean of the adjacent nodal
concentrations, so the discrete ``grad(ln c)`` is exact on exponential
profiles and both dissipations vanish exactly on discrete Boltzmann states.

All evaluators accept any object with ``mesh``, ``c_n``, ``c_p``, ``phi``
(and optionally ``t``) attributes, normally an
:class:`~modpnp.time_integrator.IonState`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .mesh_linalg import Mesh1D, log_mean
from .nernst_planck import PhysicalParams, clamp_concentration, edge_fluxes
from .poisson import charge_density

#: floor applied to the edge concentration where it divides
CONCENTRATION_FLOOR = 1e-14


@dataclass
class FunctionalReport:
    t: float
    mass_n: float
    mass_p: float
    energy: float
    diss_classical: float
    diss_modified: float
    sub_iterations: int = 0
    increment: float = 0.0


def _trapz(mesh: Mesh1D, f) -> float:
    return float(mesh.h * (0.5 * (f[0] + f[-1]) + f[1:-1].sum()))


def edge_concentrations(state):
    """Logarithmic means of ``c_n`` and ``c_p`` on every edge."""
    c_n = clamp_concentration(state.c_n, "c_n")
    c_p = clamp_concentration(state.c_p, "c_p")
    return log_mean(c_n[:-1], c_n[1:]), log_mean(c_p[:-1], c_p[1:])


def total_energy(state, params: PhysicalParams) -> float:
    """Entropy ``kT (c_n ln c_n + c_p ln c_p)`` plus field energy ``eps/2 |phi'|^2``."""
    mesh = state.mesh
    c_n = clamp_concentration(state.c_n, "c_n")
    c_p = clamp_concentration(state.c_p, "c_p")
    entropy = _trapz(mesh, params.kB_T * (xlogy(c_n, c_n) + xlogy(c_p, c_p)))
    field = 0.5 * params.epsilon * np.sum(np.diff(state.phi) ** 2) / mesh.h
    return entropy + float(field)


def boundary_work(state, params: PhysicalParams) -> float:
    """
    Discrete ``eps [phi dphi/dnu]`` summed over the two ends.

    The normal field at each end is the reaction of the Neumann-assembled
    Poisson row there. With fixed nonzero boundary potentials the field
    energy exchanges work with the boundary, and
    ``total_energy - boundary_work`` is the quantity whose rate of decrease
    equals the dissipation.
    """
    mesh = state.mesh
    phi = state.phi
    rho = charge_density(state.c_n, state.c_p, params)
    k = params.epsilon / mesh.h
    flux_left = k * (phi[0] - phi[1]) - 0.5 * mesh.h * rho[0]
    flux_right = k * (phi[-1] - phi[-2]) - 0.5 * mesh.h * rho[-1]
    return float(phi[0] * flux_left + phi[-1] * flux_right)


def entropy_flux_groups(state, params: PhysicalParams):
    """
    Per-edge ``grad(c)/c + (z q/kT) grad(phi)`` for both species.

    Returns ``(g_n, g_p)``, each of length ``n_cells``.
    """
    h = state.mesh.h
    ce_n, ce_p = edge_concentrations(state)
    dphi = np.diff(state.phi) / h
    c_n = clamp_concentration(state.c_n)
    c_p = clamp_concentration(state.c_p)
    g_n = np.diff(c_n) / (h * np.maximum(ce_n, CONCENTRATION_FLOOR)) + params.drift_factor(params.z_n) * dphi
    g_p = np.diff(c_p) / (h * np.maximum(ce_p, CONCENTRATION_FLOOR)) + params.drift_factor(params.z_p) * dphi
    return g_n, g_p


def dissipation_classical(state, params: PhysicalParams) -> float:
    h = state.mesh.h
    ce_n, ce_p = edge_concentrations(state)
    g_n, g_p = entropy_flux_groups(state, params)
    return float(params.kB_T * h * np.sum(params.D_n * ce_n * g_n ** 2
                                          + params.D_p * ce_p * g_p ** 2))


def dissipation_modified(state, params: PhysicalParams) -> float:
    """
    Dissipation including the inter-species drag.

    For ``D_n == D_p`` the closed form in the flux groups is used; other
    cases go through :func:`effective_velocities`. With
    ``drag_average="off"`` this is the classical dissipation.
    """
    if params.drag_average == "off":
        return dissipation_classical(state, params)
    if params.D_n != params.D_p or params.D_np_override is not None:
        return dissipation_from_velocities(state, params, *effective_velocities(state, params))
    h = state.mesh.h
    ce_n, ce_p = edge_concentrations(state)
    g_n, g_p = entropy_flux_groups(state, params)
    s = 1.0 + ce_n + ce_p
    w_nn = ((1.0 + ce_n) * g_n + ce_p * g_p) / s
    w_pp = ((1.0 + ce_p) * g_p + ce_n * g_n) / s
    w_x = (g_n - g_p) / s
    integrand = ce_n * w_nn ** 2 + ce_p * w_pp ** 2 + ce_n * ce_p * w_x ** 2
    return float(params.kB_T * params.D_n * h * np.sum(integrand))


def effective_velocities(state, params: PhysicalParams):
    """
    Per-edge species velocities ``(u_n*, u_p*)`` of the drag-coupled model.

    The single-species fluxes ``-D (c' + (zq/kT) c phi')`` are evaluated with
    the exponential-fitting stencil, then mixed by the drag weights. Edges
    with concentration below the floor get velocity 0.
    """
    mesh = state.mesh
    ce_n, ce_p = edge_concentrations(state)
    J_n = edge_fluxes(mesh, np.full(mesh.n_nodes, params.D_n), params.z_n, state.phi,
                      clamp_concentration(state.c_n), params)
    J_p = edge_fluxes(mesh, np.full(mesh.n_nodes, params.D_p), params.z_p, state.phi,
                      clamp_concentration(state.c_p), params)
    if params.drag_average != "off":
        Dn, Dp, Dnp = params.D_n, params.D_p, params.D_np_avg
        W = Dnp + Dn * ce_p + Dp * ce_n
        J_n, J_p = (((Dnp + Dp * ce_n) * J_n + Dn * ce_n * J_p) / W,
                    ((Dnp + Dn * ce_p) * J_p + Dp * ce_p * J_n) / W)
    u_n = np.where(ce_n > CONCENTRATION_FLOOR, J_n / np.maximum(ce_n, CONCENTRATION_FLOOR), 0.0)
    u_p = np.where(ce_p > CONCENTRATION_FLOOR, J_p / np.maximum(ce_p, CONCENTRATION_FLOOR), 0.0)
    return u_n, u_p


def dissipation_from_velocities(state, params: PhysicalParams, u_n, u_p) -> float:
    """Velocity form ``kT int(c_n u_n^2/D_n + c_p u_p^2/D_p + c_n c_p |u_n-u_p|^2/D_np)``."""
    h = state.mesh.h
    ce_n, ce_p = edge_concentrations(state)
    integrand = ce_n * u_n ** 2 / params.D_n + ce_p * u_p ** 2 / params.D_p
    if params.drag_average != "off":
        integrand = integrand + ce_n * ce_p * (u_n - u_p) ** 2 / params.D_np_avg
    return float(params.kB_T * h * np.sum(integrand))


def free_energy_nonlocal(mesh: Mesh1D, c_n, c_p, kernel, kB_T: float = 1.0) -> float:
    """
    Entropy plus ``1/2 iint G(x-y) rho(x) rho(y)`` with ``rho = c_n - c_p``.

    ``kernel`` maps an array of separations ``x - y`` to kernel values; the
    double integral is a double trapezoidal sum.
    """
    c_n = clamp_concentration(c_n, "c_n")
    c_p = clamp_concentration(c_p, "c_p")
    entropy = _trapz(mesh, kB_T * (xlogy(c_n, c_n) + xlogy(c_p, c_p)))
    w = mesh.lumped_mass() * (c_n - c_p)
    x = mesh.nodes
    G = np.asarray(kernel(x[:, None] - x[None, :]), dtype=float)
    return entropy + 0.5 * float(w @ G @ w)


def functional_report(state, params: PhysicalParams, sub_iterations: int = 0,
                      increment: float = 0.0) -> FunctionalReport:
    mesh = state.mesh
    return FunctionalReport(
        t=float(getattr(state, "t", 0.0)),
        mass_n=_trapz(mesh, state.c_n),
        mass_p=_trapz(mesh, state.c_p),
        energy=total_energy(state, params),
        diss_classical=dissipation_classical(state, params),
        diss_modified=dissipation_modified(state, params),
        sub_iterations=sub_iterations,
        increment=increment,
    )
