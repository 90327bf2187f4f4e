"""P1 finite-element Poisson solve for the electrostatic potential."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularPivotError, SingularSystemError
from .mesh_linalg import Mesh1D, TridiagonalMatrix, check_field


@dataclass(frozen=True)
class PoissonBC:
    """
    Boundary data for the potential.

    For ``kind="robin"`` the condition is ``phi + alpha * dphi/dnu = phi0``
    at each end, with ``phi0`` equal to ``left_value`` / ``right_value``.
    ``alpha = 0`` reduces to Dirichlet.
    """

    kind: str = "dirichlet"
    left_value: float = 0.0
    right_value: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "robin"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if not self.alpha >= 0.0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")

    @property
    def is_dirichlet(self) -> bool:
        return self.kind == "dirichlet" or self.alpha == 0.0


def laplace_stiffness(mesh: Mesh1D, coeff: float = 1.0) -> TridiagonalMatrix:
    """``coeff/h * tridiag(-1, 2, -1)`` with natural (Neumann) end rows."""
    n = mesh.n_nodes
    k = coeff / mesh.h
    diag = np.full(n, 2.0 * k)
    diag[0] = diag[-1] = k
    off = np.full(n - 1, -k)
    return TridiagonalMatrix(off, diag, off.copy())


def charge_density(c_n, c_p, params) -> np.ndarray:
    """Nodal charge ``q (z_n c_n + z_p c_p)``."""
    return params.q * (params.z_n * np.asarray(c_n) + params.z_p * np.asarray(c_p))


def solve_poisson(mesh: Mesh1D, c_n, c_p, params, bc: PoissonBC) -> np.ndarray:
    """
    Solve ``eps phi'' = -(z_n q c_n + z_p q c_p)`` with P1 elements.

    The load is lumped (trapezoidal). Dirichlet values are imposed by row
    replacement; Robin conditions enter as the natural boundary term with
    coefficient ``eps/alpha``.
    """
    c_n = check_field(mesh, c_n, "c_n")
    c_p = check_field(mesh, c_p, "c_p")
    A = laplace_stiffness(mesh, params.epsilon)
    rhs = mesh.lumped_mass() * charge_density(c_n, c_p, params)

    if bc.is_dirichlet:
        A.diag[0] = 1.0
        A.upper[0] = 0.0
        A.diag[-1] = 1.0
        A.lower[-1] = 0.0
        rhs[0] = bc.left_value
        rhs[-1] = bc.right_value
    else:
        robin = params.epsilon / bc.alpha
        A.diag[0] += robin
        A.diag[-1] += robin
        rhs[0] += robin * bc.left_value
        rhs[-1] += robin * bc.right_value

    try:
        phi = A.solve(rhs)
    except SingularPivotError as exc:
        raise SingularSystemError(f"Poisson system is singular: {exc}") from exc
    if not np.all(np.isfinite(phi)):
        raise SingularSystemError("Poisson solve produced non-finite values")
    return phi


def poisson_residual(mesh: Mesh1D, phi, c_n, c_p, params, bc: PoissonBC) -> float:
    """Max-norm residual of the discrete Poisson equations at ``phi``."""
    A = laplace_stiffness(mesh, params.epsilon)
    r = A.matvec(phi) - mesh.lumped_mass() * charge_density(c_n, c_p, params)
    if bc.is_dirichlet:
        r[0] = phi[0] - bc.left_value
        r[-1] = phi[-1] - bc.right_value
    else:
        robin = params.epsilon / bc.alpha
        r[0] += robin * (phi[0] - bc.left_value)
        r[-1] += robin * (phi[-1] - bc.right_value)
    return float(np.max(np.abs(r)))
