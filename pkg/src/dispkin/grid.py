"""Cartesian and polar velocity grids.

The Cartesian grid is periodic on ``[-L, L)^2`` and carries the distribution
functions.  The polar grid is a staggered (r, theta) lattice on the inscribed
disc, used to evaluate angular averages of the light species.  Bilinear
interpolation maps fields between the two.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "CartesianGrid",
    "PolarGrid",
    "build_cartesian",
    "build_polar",
    "interp_cart_to_polar",
    "interp_polar_to_cart",
    "angular_moment",
    "radial_derivative",
    "restrict",
    "ANGULAR_WEIGHTS",
]


def _check_even(n: int, name: str = "n_v") -> None:
    if int(n) != n or n % 2 or n < 4:
        raise ValueError(f"{name} must be an even integer >= 4, got {n!r}")


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform periodic grid on ``[-L, L)^2``.

    Parameters
    ----------
    n : int
        Points per axis (even).
    half_width : float
        Half width ``L`` of the velocity box.
    """

    n: int
    half_width: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        """1-D node coordinates ``-L + i*dv``."""
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(V1, V2)`` with ``indexing='ij'``."""
        return tuple(np.meshgrid(self.nodes, self.nodes, indexing="ij"))

    @property
    def origin_index(self) -> int:
        return self.n // 2

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    def zeros(self) -> np.ndarray:
        return np.zeros((self.n, self.n))


@dataclass(frozen=True)
class PolarGrid:
    """Staggered polar grid with ``n_r = n_v/2`` radii and ``n_theta = n_v`` angles.

    Radii are ``r_j = (j - 1/2) dr`` for ``j = 1..n_r`` so the origin is never a
    node; angles are ``theta_i = (i - 1) 2 pi / n_theta``.
    """

    n_v: int
    max_radius: float

    @property
    def n_r(self) -> int:
        return self.n_v // 2

    @property
    def n_theta(self) -> int:
        return self.n_v

    @property
    def dr(self) -> float:
        return self.max_radius / self.n_r

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @cached_property
    def r(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.dr

    @cached_property
    def theta(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.dtheta

    @cached_property
    def cos(self) -> np.ndarray:
        return np.cos(self.theta)

    @cached_property
    def sin(self) -> np.ndarray:
        return np.sin(self.theta)

    @cached_property
    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Cartesian coordinates of the nodes, each of shape ``(n_r, n_theta)``."""
        return self.r[:, None] * self.cos[None, :], self.r[:, None] * self.sin[None, :]


def build_cartesian(n_v: int, half_width: float) -> CartesianGrid:
    """Construct the periodic Cartesian grid; the origin is node ``n_v // 2``."""
    _check_even(n_v)
    if not half_width > 0:
        raise ValueError(f"half_width must be positive, got {half_width!r}")
    return CartesianGrid(int(n_v), float(half_width))


def build_polar(n_v: int, v_max: float) -> PolarGrid:
    """Construct the polar grid paired with an ``n_v``-point Cartesian grid."""
    _check_even(n_v)
    if not v_max > 0:
        raise ValueError(f"v_max must be positive, got {v_max!r}")
    return PolarGrid(int(n_v), float(v_max))


# --------------------------------------------------------------------------
# interpolation
# --------------------------------------------------------------------------
@lru_cache(maxsize=32)
def _c2p_stencil(cg: CartesianGrid, pg: PolarGrid):
    x, y = pg.points
    L, dv, n = cg.half_width, cg.spacing, cg.n
    inside = (np.abs(x) <= L) & (np.abs(y) <= L)
    sx = (x + L) / dv
    sy = (y + L) / dv
    i0 = np.floor(sx).astype(int)
    j0 = np.floor(sy).astype(int)
    tx = sx - i0
    ty = sy - j0
    # periodic neighbours: the right edge of the box is the image of -L
    i0 %= n
    j0 %= n
    i1 = (i0 + 1) % n
    j1 = (j0 + 1) % n
    w = np.stack([(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty])
    w *= inside
    idx = np.stack([i0 * n + j0, i1 * n + j0, i0 * n + j1, i1 * n + j1])
    return idx, w


def interp_cart_to_polar(f: np.ndarray, cg: CartesianGrid, pg: PolarGrid) -> np.ndarray:
    """Bilinear resampling of a Cartesian field onto the polar nodes.

    Polar nodes outside the Cartesian box receive zero.  The result has shape
    ``(n_r, n_theta)``.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (cg.n, cg.n):
        raise ValueError(f"field shape {f.shape} does not match grid {cg.n}x{cg.n}")
    idx, w = _c2p_stencil(cg, pg)
    flat = f.ravel()
    return np.einsum("k...,k...->...", w, flat[idx])


@lru_cache(maxsize=32)
def _p2c_stencil(cg: CartesianGrid, pg: PolarGrid):
    V1, V2 = cg.mesh
    rad = np.hypot(V1, V2)
    ang = np.mod(np.arctan2(V2, V1), 2 * np.pi)
    n_r, n_t = pg.n_r, pg.n_theta
    sr = rad / pg.dr - 0.5
    st = ang / pg.dtheta
    # nodes inside the first ring (|v| < r_1) are extrapolated from the two
    # innermost radii; only the origin falls there on matched grids and it is
    # overwritten by the callers
    i0 = np.clip(np.floor(sr).astype(int), 0, n_r - 2)
    tr = sr - i0
    tr = np.where(sr < 0, 0.0, tr)
    j0 = np.floor(st).astype(int) % n_t
    j1 = (j0 + 1) % n_t
    tt = st - np.floor(st)
    keep = rad <= pg.r[-1] * (1 + 1e-12)
    w = np.stack([(1 - tr) * (1 - tt), tr * (1 - tt), (1 - tr) * tt, tr * tt]) * keep
    idx = np.stack([i0 * n_t + j0, (i0 + 1) * n_t + j0, i0 * n_t + j1, (i0 + 1) * n_t + j1])
    return idx, w


def interp_polar_to_cart(q: np.ndarray, pg: PolarGrid, cg: CartesianGrid) -> np.ndarray:
    """Bilinear interpolation in ``(r, theta)`` back onto the Cartesian nodes.

    Nodes with ``|v| > r_{n_r}`` are set to zero.  The origin is left to the
    caller, who overwrites it with the analytic origin value.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (pg.n_r, pg.n_theta):
        raise ValueError(f"polar field shape {q.shape} does not match {pg.n_r}x{pg.n_theta}")
    idx, w = _p2c_stencil(cg, pg)
    flat = q.ravel()
    return np.einsum("k...,k...->...", w, flat[idx])


# --------------------------------------------------------------------------
# angular quadrature and radial differences
# --------------------------------------------------------------------------
ANGULAR_WEIGHTS = {
    "1": lambda c, s: np.ones_like(c),
    "cos": lambda c, s: c,
    "sin": lambda c, s: s,
    "cos2": lambda c, s: c * c,
    "sin2": lambda c, s: s * s,
    "cossin": lambda c, s: c * s,
}


def angular_moment(q: np.ndarray, pg: PolarGrid, weight: str = "1") -> np.ndarray:
    """Periodic trapezoid rule for ``<w(theta) q(r, .)>`` at every radius."""
    try:
        w = ANGULAR_WEIGHTS[weight](pg.cos, pg.sin)
    except KeyError:
        raise ValueError(f"unknown angular weight {weight!r}") from None
    return (np.asarray(q) @ w) * pg.dtheta


def radial_derivative(q: np.ndarray, dr: float, order: int = 1) -> np.ndarray:
    """Second-order finite differences along axis 0 (the radius).

    Interior radii use central differences; the first and last radii use
    one-sided second-order stencils.
    """
    q = np.asarray(q, dtype=float)
    if q.shape[0] < 3 or (order == 2 and q.shape[0] < 4):
        raise ValueError("need at least 3 radii (4 for the second derivative)")
    out = np.empty_like(q)
    if order == 1:
        out[1:-1] = (q[2:] - q[:-2]) / (2 * dr)
        out[0] = (-3 * q[0] + 4 * q[1] - q[2]) / (2 * dr)
        out[-1] = (3 * q[-1] - 4 * q[-2] + q[-3]) / (2 * dr)
    elif order == 2:
        out[1:-1] = (q[2:] - 2 * q[1:-1] + q[:-2]) / dr**2
        out[0] = (2 * q[0] - 5 * q[1] + 4 * q[2] - q[3]) / dr**2
        out[-1] = (2 * q[-1] - 5 * q[-2] + 4 * q[-3] - q[-4]) / dr**2
    else:
        raise ValueError("order must be 1 or 2")
    return out


def restrict(f_fine: np.ndarray, n_coarse: int) -> np.ndarray:
    """Sample a fine-grid field on the nested coarse grid (every k-th node)."""
    n_fine = f_fine.shape[0]
    if n_fine % n_coarse:
        raise ValueError(f"grid {n_coarse} is not nested in {n_fine}")
    k = n_fine // n_coarse
    return f_fine[::k, ::k]
