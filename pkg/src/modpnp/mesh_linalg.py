"""
Uniform 1D meshes, nodal quadrature, the Bernoulli function and a
tridiagonal direct solver.

Every other module works on numpy arrays of nodal values (one value per
mesh node); :func:`check_field` is the common validation entry point.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidExtentError, SingularPivotError, TooFewCellsError

#: below this magnitude the series branch of :func:`bernoulli` is used
BERNOULLI_SERIES_THRESHOLD = 1e-5

#: pivots smaller than this (in magnitude) are treated as singular
PIVOT_FLOOR = 1e-300


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of ``[x_left, x_right]`` into ``n_cells`` cells."""

    x_left: float
    x_right: float
    n_cells: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.x_right > self.x_left:
            raise InvalidExtentError(
                f"x_right ({self.x_right}) must exceed x_left ({self.x_left})")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise TooFewCellsError(f"n_cells must be an integer >= 2, got {self.n_cells}")
        h = (self.x_right - self.x_left) / self.n_cells
        nodes = self.x_left + h * np.arange(self.n_cells + 1)
        nodes.setflags(write=False)
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    def lumped_mass(self) -> np.ndarray:
        """Diagonal of the lumped (trapezoidal) P1 mass matrix."""
        w = np.full(self.n_nodes, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func`` at the mesh nodes."""
        values = np.asarray(func(self.nodes), dtype=float)
        return np.broadcast_to(values, self.nodes.shape).copy()


def build_mesh(x_left: float, x_right: float, n_cells: int) -> Mesh1D:
    return Mesh1D(float(x_left), float(x_right), n_cells)


def check_field(mesh: Mesh1D, values, name: str = "field") -> np.ndarray:
    """Return ``values`` as a float array after checking length and finiteness."""
    arr = np.asarray(values, dtype=float)
    if arr.shape != (mesh.n_nodes,):
        raise ValueError(f"{name} has shape {arr.shape}, mesh has {mesh.n_nodes} nodes")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def integrate(mesh: Mesh1D, values) -> float:
    """Trapezoidal rule ``h (f_0/2 + f_1 + ... + f_{N-1} + f_N/2)``."""
    f = check_field(mesh, values)
    return float(mesh.h * (0.5 * (f[0] + f[-1]) + f[1:-1].sum()))


def bernoulli(t):
    """
    Bernoulli function ``B(t) = t / (exp(t) - 1)``.

    Uses the series ``1 - t/2 + t**2/12`` for ``|t| < 1e-5``. Saturates to 0
    for large positive ``t`` and to ``-t`` for large negative ``t``.
    Accepts scalars or arrays; returns the same shape.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = np.atleast_1d(t / np.expm1(t))
    small = np.atleast_1d(np.abs(t) < BERNOULLI_SERIES_THRESHOLD)
    if small.any():
        ts = np.atleast_1d(t)[small]
        out[small] = 1.0 - 0.5 * ts + ts * ts / 12.0
    if t.ndim == 0:
        return float(out[0])
    return out


def log_mean(a, b, floor: float = 0.0):
    """
    Logarithmic mean ``(a - b) / (ln a - ln b)`` of nonnegative arrays.

    Equal arguments give ``a``; a zero argument gives 0. The result is
    clipped from below at ``floor``.
    """
    a = np.maximum(np.asarray(a, dtype=float), 0.0)
    b = np.maximum(np.asarray(b, dtype=float), 0.0)
    s = a + b
    out = np.zeros(np.broadcast(a, b).shape)
    pos = (a > 0) & (b > 0)
    u = np.zeros_like(out)
    u[pos] = (a - b)[pos] / s[pos]
    near = pos & (np.abs(u) < 1e-3)
    far = pos & ~near
    # m / (1 + u^2/3 + u^4/5 + ...) with m the arithmetic mean
    un = u[near]
    out[near] = 0.5 * s[near] * (1.0 - un * un / 3.0 - 4.0 * un ** 4 / 45.0)
    out[far] = (a - b)[far] / (np.log(a[far]) - np.log(b[far]))
    out = np.maximum(out, floor)
    if out.ndim == 0:
        return float(out)
    return out


def harmonic_mean(a, b):
    """Elementwise ``2ab/(a+b)``, defined as 0 where ``a + b == 0``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = a + b
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(s > 0, 2.0 * a * b / s, 0.0)


@dataclass
class TridiagonalMatrix:
    """
    Tridiagonal matrix stored by diagonals.

    ``lower[i]`` is entry ``(i+1, i)``, ``upper[i]`` is entry ``(i, i+1)``.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        n = self.diag.shape[0]
        if self.diag.ndim != 1 or self.lower.shape != (n - 1,) or self.upper.shape != (n - 1,):
            raise ValueError(
                f"inconsistent diagonals: lower {self.lower.shape}, "
                f"diag {self.diag.shape}, upper {self.upper.shape}")

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "TridiagonalMatrix":
        return cls(np.zeros(n - 1), np.zeros(n), np.zeros(n - 1))

    def copy(self) -> "TridiagonalMatrix":
        return TridiagonalMatrix(self.lower.copy(), self.diag.copy(), self.upper.copy())

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[:-1] += self.upper * x[1:]
        y[1:] += self.lower * x[:-1]
        return y

    def column_sums(self) -> np.ndarray:
        s = self.diag.copy()
        s[:-1] += self.lower
        s[1:] += self.upper
        return s

    def scaled(self, factor: float) -> "TridiagonalMatrix":
        return TridiagonalMatrix(factor * self.lower, factor * self.diag, factor * self.upper)

    def add_diagonal(self, d) -> "TridiagonalMatrix":
        return TridiagonalMatrix(self.lower.copy(), self.diag + d, self.upper.copy())

    def __add__(self, other: "TridiagonalMatrix") -> "TridiagonalMatrix":
        return TridiagonalMatrix(self.lower + other.lower, self.diag + other.diag,
                                 self.upper + other.upper)

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1))

    def solve(self, rhs) -> np.ndarray:
        return solve_tridiagonal(TridiagonalSystem(self, rhs))


@dataclass
class TridiagonalSystem:
    matrix: TridiagonalMatrix
    rhs: np.ndarray

    def __post_init__(self):
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.rhs.shape != (self.matrix.size,):
            raise ValueError(f"rhs has shape {self.rhs.shape}, matrix size {self.matrix.size}")

    def residual(self, x) -> np.ndarray:
        return self.matrix.matvec(x) - self.rhs


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """
    Thomas algorithm, no pivoting.

    All matrices assembled in this package are diagonally dominant
    M-matrices, so pivoting is unnecessary; a vanishing pivot still raises
    :class:`SingularPivotError` rather than producing Inf/NaN.
    """
    m = system.matrix
    return thomas_solve(m.lower, m.diag, m.upper, system.rhs)


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """:func:`solve_tridiagonal` on raw float64 diagonals, without shape checks."""
    x = np.empty(diag.shape[0])
    row = _thomas(lower, diag, upper, rhs, x)
    if row >= 0:
        raise SingularPivotError(f"pivot below {PIVOT_FLOOR:g} at row {row}")
    return x


@numba.njit(cache=True)
def _thomas(a, b, c, d, x):
    # returns -1 on success, else the row index of the failing pivot
    n = b.shape[0]
    cp = np.empty(n)
    piv = b[0]
    if not abs(piv) >= PIVOT_FLOOR:
        return 0
    if n > 1:
        cp[0] = c[0] / piv
    x[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i - 1] * cp[i - 1]
        if not abs(piv) >= PIVOT_FLOOR:
            return i
        if i < n - 1:
            cp[i] = c[i] / piv
        x[i] = (d[i] - a[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return -1
