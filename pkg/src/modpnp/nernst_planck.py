"""
Nernst-Planck coefficients and exponential-fitting (edge-averaged) assembly.

The modified model adds a drag between the two species. Solving the
resulting force balance for the fluxes gives, with
``W = D_np + D_n c_p + D_p c_n`` and ``D_np`` a mobility average,

    J_n = -[(D_np + D_p c_n) D_n F_n + D_n D_p c_n F_p] / W
    J_p = -[(D_np + D_n c_p) D_p F_p + D_p D_n c_p F_n] / W

where ``F = grad c + (z q / kT) c grad phi``. The four bracket factors
(over ``W``) are the coupling coefficients D_nn, D_np, D_pp, D_pn.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import NegativeCoefficientError, NegativeConcentrationError
from .mesh_linalg import Mesh1D, TridiagonalMatrix, bernoulli, check_field, harmonic_mean

AVERAGES = ("arithmetic", "harmonic", "geometric", "off")
MODELS = ("classical", "modified")

#: concentrations in [-CLAMP_TOL, 0) are read as 0 inside coefficient evaluation
CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class PhysicalParams:
    D_n: float = 1.0
    D_p: float = 1.0
    z_n: float = -1.0
    z_p: float = 1.0
    q: float = 1.0
    kB_T: float = 1.0
    epsilon: float = 1.0
    drag_average: str = "arithmetic"
    model: str = "modified"
    # replaces the mobility average when set (used to probe the D_np -> inf limit)
    D_np_override: Optional[float] = None

    def __post_init__(self):
        for name in ("D_n", "D_p", "q", "kB_T", "epsilon"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        for name in ("z_n", "z_p"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.drag_average not in AVERAGES:
            raise ValueError(f"drag_average must be one of {AVERAGES}, got {self.drag_average!r}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.D_np_override is not None and not self.D_np_override > 0:
            raise ValueError("D_np_override must be positive")

    @property
    def has_drag(self) -> bool:
        """True when the species drag enters the dynamics."""
        return self.model == "modified" and self.drag_average != "off"

    @property
    def D_np_avg(self) -> float:
        if self.D_np_override is not None:
            return float(self.D_np_override)
        kind = "arithmetic" if self.drag_average == "off" else self.drag_average
        return mobility_average(self.D_n, self.D_p, kind)

    def drift_factor(self, z: float) -> float:
        return z * self.q / self.kB_T

    def with_model(self, model: str) -> "PhysicalParams":
        return replace(self, model=model)


@dataclass
class CouplingCoefficients:
    D_nn: np.ndarray
    D_np: np.ndarray
    D_pp: np.ndarray
    D_pn: np.ndarray


def mobility_average(D_n: float, D_p: float, kind: str) -> float:
    """Arithmetic, harmonic or geometric mean of the two diffusivities."""
    if kind == "arithmetic":
        return 0.5 * (D_n + D_p)
    if kind == "harmonic":
        return 2.0 * D_n * D_p / (D_n + D_p)
    if kind == "geometric":
        return float(np.sqrt(D_n * D_p))
    raise ValueError(f"unknown mobility average {kind!r}")


def clamp_concentration(c, name: str = "concentration") -> np.ndarray:
    """Zero out round-off negatives; raise on anything below ``-CLAMP_TOL``."""
    c = np.asarray(c, dtype=float)
    if c.size and c.min() < -CLAMP_TOL:
        raise NegativeConcentrationError(f"{name} reaches {c.min():.3e} < -{CLAMP_TOL:g}")
    return np.maximum(c, 0.0)


def coupling_coefficients(c_n, c_p, params: PhysicalParams) -> CouplingCoefficients:
    c_n = clamp_concentration(c_n, "c_n")
    c_p = clamp_concentration(c_p, "c_p")
    if not params.has_drag:
        return CouplingCoefficients(
            D_nn=np.full_like(c_n, params.D_n), D_np=np.zeros_like(c_n),
            D_pp=np.full_like(c_p, params.D_p), D_pn=np.zeros_like(c_p))
    Dn, Dp, Dnp = params.D_n, params.D_p, params.D_np_avg
    W = Dnp + Dn * c_p + Dp * c_n
    return CouplingCoefficients(
        D_nn=(Dnp + Dp * c_n) * Dn / W,
        D_np=Dn * Dp * c_n / W,
        D_pp=(Dnp + Dn * c_p) * Dp / W,
        D_pn=Dp * Dn * c_p / W,
    )


def bernoulli_weights(mesh: Mesh1D, z: float, phi, params: PhysicalParams):
    """Per-edge ``(B(d)/h, B(-d)/h)`` with ``d = (z q/kT)(phi_{i+1} - phi_i)``."""
    delta = params.drift_factor(z) * np.diff(phi)
    return bernoulli(delta) / mesh.h, bernoulli(-delta) / mesh.h


def assemble_np_operator(mesh: Mesh1D, omega, z: float, phi,
                         params: PhysicalParams, weights=None) -> TridiagonalMatrix:
    """
    Stiffness matrix of ``-(omega (c' + (z q/kT) c phi'))'`` with no-flux ends.

    Edge ``(i, i+1)`` carries the Scharfetter-Gummel flux
    ``omega_e/h * (B(d) c_i - B(-d) c_{i+1})`` with
    ``d = (z q/kT)(phi_{i+1} - phi_i)`` and ``omega_e`` the harmonic mean of
    the nodal coefficients. ``weights`` may carry precomputed
    :func:`bernoulli_weights` for the same ``z`` and ``phi``.
    """
    omega = check_field(mesh, omega, "omega")
    phi = check_field(mesh, phi, "phi")
    if omega.min() < -1e-14:
        raise NegativeCoefficientError(f"coefficient reaches {omega.min():.3e}")
    if weights is None:
        weights = bernoulli_weights(mesh, z, phi, params)
    bp, bm = edge_stencil(np.maximum(omega, 0.0), weights)
    diag = np.zeros(mesh.n_nodes)
    diag[:-1] += bp
    diag[1:] += bm
    return TridiagonalMatrix(lower=-bp, diag=diag, upper=-bm)


def edge_stencil(omega, weights):
    """
    Edge flux coefficients ``(omega_e B(d)/h, omega_e B(-d)/h)``.

    The flux on edge ``i`` is ``bp[i] c[i] - bm[i] c[i+1]``. No validation;
    ``omega`` must already be nonnegative.
    """
    w = harmonic_mean(omega[:-1], omega[1:])
    return w * weights[0], w * weights[1]


def apply_stencil(bp, bm, c) -> np.ndarray:
    """Divergence of the edge fluxes ``bp c_i - bm c_{i+1}``, i.e. the operator applied to ``c``."""
    flux = bp * c[:-1] - bm * c[1:]
    out = np.zeros(c.shape[0])
    out[:-1] += flux
    out[1:] -= flux
    return out


def edge_fluxes(mesh: Mesh1D, omega, z: float, phi, c, params: PhysicalParams) -> np.ndarray:
    """Per-edge flux ``-omega (c' + (zq/kT) c phi')`` in the exponential-fitting form."""
    omega = np.maximum(np.asarray(omega, dtype=float), 0.0)
    bp, bm = edge_stencil(omega, bernoulli_weights(mesh, z, phi, params))
    return bp * c[:-1] - bm * c[1:]


def friction_matrix(c_n: float, c_p: float, params: PhysicalParams) -> np.ndarray:
    """
    Local 2x2 friction matrix relating species velocities to driving forces.

    Symmetric by construction: the same array element feeds both
    off-diagonal slots.
    """
    kT = params.kB_T
    drag = 0.0 if params.drag_average == "off" else kT * c_n * c_p / params.D_np_avg
    cross = -drag
    return np.array([[kT * c_n / params.D_n + drag, cross],
                     [cross, kT * c_p / params.D_p + drag]])
