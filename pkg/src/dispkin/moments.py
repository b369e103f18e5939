"""Macroscopic moments, Maxwellians and diagnostics of grid distributions.

All integrals use the rectangle rule on the periodic grid, which is
spectrally accurate for smooth, effectively compactly supported data.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDensityError, InvalidStateError
from .grid import CartesianGrid, restrict

__all__ = [
    "MacroState",
    "moments",
    "second_moment_tensor",
    "maxwellian",
    "relative_entropy",
    "rel_l2",
    "double_peak",
    "DENSITY_FLOOR",
    "ENTROPY_FLOOR",
]

DENSITY_FLOOR = 1e-12
ENTROPY_FLOOR = 1e-14


@dataclass(frozen=True)
class MacroState:
    """Density, mean velocity and temperature of one species (2-D velocity)."""

    n: float
    u: tuple[float, float]
    T: float

    def __post_init__(self):
        object.__setattr__(self, "u", (float(self.u[0]), float(self.u[1])))
        vals = (self.n, self.T, *self.u)
        if not all(np.isfinite(vals)):
            raise InvalidStateError(f"non-finite macroscopic state {self}")

    @property
    def u_vec(self) -> np.ndarray:
        return np.array(self.u)

    @property
    def energy(self) -> float:
        """``int |v|^2 f dv = n (2T + |u|^2)`` in two dimensions."""
        return self.n * (2.0 * self.T + self.u[0] ** 2 + self.u[1] ** 2)


def moments(f: np.ndarray, grid: CartesianGrid, floor: float = DENSITY_FLOOR) -> MacroState:
    """Compute ``(n, u, T)`` of a grid distribution.

    ``T = (1/(2n)) int f |v - u|^2 dv`` (two velocity dimensions).  A slightly
    negative temperature caused by round-off is clamped to zero with a
    warning.
    """
    f = np.asarray(f, dtype=float)
    V1, V2 = grid.mesh
    dA = grid.cell_area
    n = f.sum() * dA
    if not np.isfinite(n) or n < floor:
        raise DegenerateDensityError(f"density {n!r} below floor {floor}")
    u1 = (f * V1).sum() * dA / n
    u2 = (f * V2).sum() * dA / n
    T = (f * ((V1 - u1) ** 2 + (V2 - u2) ** 2)).sum() * dA / (2.0 * n)
    if T < 0:
        warnings.warn(f"negative temperature {T:.3e} clamped to 0", RuntimeWarning, stacklevel=2)
        T = 0.0
    return MacroState(n, (u1, u2), T)


def second_moment_tensor(f: np.ndarray, grid: CartesianGrid) -> np.ndarray:
    """``int v (x) v f dv`` as a symmetric 2x2 array."""
    V1, V2 = grid.mesh
    dA = grid.cell_area
    p11 = (f * V1 * V1).sum() * dA
    p12 = (f * V1 * V2).sum() * dA
    p22 = (f * V2 * V2).sum() * dA
    return np.array([[p11, p12], [p12, p22]])


def maxwellian(U: MacroState, grid: CartesianGrid) -> np.ndarray:
    """Sample ``n/(2 pi T) exp(-|v-u|^2/(2T))`` on the grid."""
    if not (U.n > 0 and U.T > 0):
        raise InvalidStateError(f"Maxwellian needs n > 0 and T > 0, got n={U.n}, T={U.T}")
    V1, V2 = grid.mesh
    r2 = (V1 - U.u[0]) ** 2 + (V2 - U.u[1]) ** 2
    return U.n / (2 * np.pi * U.T) * np.exp(-r2 / (2 * U.T))


def relative_entropy(f: np.ndarray, ref: np.ndarray, grid: CartesianGrid,
                     floor: float = ENTROPY_FLOOR) -> float:
    """Quadrature of ``int f log(f/ref) dv``; nodes with ``f <= floor`` are skipped."""
    f = np.asarray(f, dtype=float)
    ref = np.asarray(ref, dtype=float)
    mask = f > floor
    if np.any(ref[mask] <= 0):
        raise InvalidStateError("reference vanishes where the distribution is positive")
    fm = f[mask]
    return float(np.sum(fm * np.log(fm / ref[mask])) * grid.cell_area)


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    """``||a - b|| / ||a||`` over shared nodes.

    If ``a`` lives on a finer nested grid than ``b`` it is restricted first.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        a = restrict(a, b.shape[0])
    na = np.linalg.norm(a)
    if na == 0:
        raise DegenerateDensityError("reference field has zero norm")
    return float(np.linalg.norm(a - b) / na)


def double_peak(grid: CartesianGrid, n: float, T: float, u1, u2) -> np.ndarray:
    """Equal-weight sum of two Maxwellians with common ``n``, ``T``."""
    return 0.5 * maxwellian(MacroState(n, u1, T), grid) + 0.5 * maxwellian(MacroState(n, u2, T), grid)
