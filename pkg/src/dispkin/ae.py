"""Truncated asymptotic-expansion (AE) evaluation of the cross-species operators.

Light side::

    Q^{LH}_AE = sqrt(1+eps^2) (Q^{LH}_0 + eps Q^{LH}_1 + eps^2 Q^{LH}_2)

is evaluated on a polar grid: ``f^L`` is resampled, differentiated in ``r``,
averaged in ``theta`` and the result is mapped back to the Cartesian grid,
after which the origin node is overwritten by its analytic value.  Heavy
side::

    Q^{HL}_AE = sqrt(1+eps^2) (Q^{HL}_0 + eps Q^{HL}_1)

only needs finite differences of ``f^H`` on the Cartesian grid.

Every piece is linear in each distribution argument and depends on the other
species only through its density, mean velocity, temperature and second
moment tensor.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import (
    CartesianGrid,
    PolarGrid,
    build_polar,
    interp_cart_to_polar,
    interp_polar_to_cart,
    radial_derivative,
)
from .moments import moments, second_moment_tensor

__all__ = [
    "SpeciesMoments",
    "species_moments",
    "AeWorkspace",
    "ae_workspace",
    "lh_polar_pieces",
    "q_lh0",
    "q_lh1",
    "q_lh2",
    "q_hl0",
    "q_hl1",
    "q_lh_ae",
    "q_hl_ae",
    "ae_pair",
    "B_CROSS",
]

B_CROSS = 1.0 / (8.0 * np.pi)


@dataclass(frozen=True)
class SpeciesMoments:
    """Moments of the partner species entering the AE formulas."""

    n: float
    u: np.ndarray
    T: float
    P: np.ndarray  # int v (x) v f dv

    @property
    def half_trace(self) -> float:
        """``n |u|^2 / 2 + n T``, i.e. half the trace of ``P``."""
        return 0.5 * self.n * float(self.u @ self.u) + self.n * self.T


def species_moments(f: np.ndarray, grid: CartesianGrid) -> SpeciesMoments:
    U = moments(f, grid)
    return SpeciesMoments(U.n, U.u_vec, U.T, second_moment_tensor(f, grid))


@lru_cache(maxsize=16)
def _paired_polar(grid: CartesianGrid) -> PolarGrid:
    return build_polar(grid.n, grid.half_width)


# --------------------------------------------------------------------------
# light side, polar pipeline
# --------------------------------------------------------------------------
@dataclass
class AeWorkspace:
    """Polar resample of ``f^L``, its radial derivatives and angular tables.

    ``avg[name]`` holds radial profiles (shape ``(n_r, 1)``) of the periodic
    trapezoid averages used by the polar operator forms.
    """

    pg: PolarGrid
    f: np.ndarray
    fr: np.ndarray
    frr: np.ndarray
    avg: dict


def ae_workspace(f_polar: np.ndarray, pg: PolarGrid,
                 fr: np.ndarray | None = None, frr: np.ndarray | None = None) -> AeWorkspace:
    """Build the angular tables from polar samples of ``f^L``.

    Radial derivatives are taken by finite differences unless supplied.
    """
    if fr is None:
        fr = radial_derivative(f_polar, pg.dr, 1)
    if frr is None:
        frr = radial_derivative(f_polar, pg.dr, 2)
    r = pg.r[:, None]
    c, s, dth = pg.cos, pg.sin, pg.dtheta
    # field-valued combinations that are averaged against trig weights
    a3 = frr + 3.0 * fr / r
    a4 = frr + fr / r - f_polar / r**2

    def av(q, w=None):
        out = q.sum(axis=1) if w is None else q @ w
        return (out * dth)[:, None]

    avg = {
        "f": av(f_polar), "c_f": av(f_polar, c), "s_f": av(f_polar, s),
        "fr": av(fr), "c_fr": av(fr, c), "s_fr": av(fr, s),
        "cc_fr": av(fr, c * c), "ss_fr": av(fr, s * s),
        "frr": av(frr), "cc_frr": av(frr, c * c), "ss_frr": av(frr, s * s),
        "cs_a3": av(a3, c * s), "c_a4": av(a4, c), "s_a4": av(a4, s),
    }
    return AeWorkspace(pg, f_polar, fr, frr, avg)


def lh_polar_pieces(ws: AeWorkspace, heavy: SpeciesMoments, B: float = B_CROSS,
                    orders=(0, 1, 2)) -> dict:
    """Evaluate ``Q^{LH}_i`` (``i`` in ``orders``) at the polar nodes.

    Returns a dict ``{i: array(n_r, n_theta)}``.
    """
    pg, a = ws.pg, ws.avg
    r = pg.r[:, None]
    c = pg.cos[None, :]
    s = pg.sin[None, :]
    nH, uH, P = heavy.n, heavy.u, heavy.P
    out = {}
    if 0 in orders:
        out[0] = B * nH * (a["f"] - 2.0 * np.pi * ws.f)
    if 1 in orders:
        # <grad f> - grad <f>, angular derivatives removed by parts
        g1 = a["c_fr"] + a["c_f"] / r - c * a["fr"]
        g2 = a["s_fr"] + a["s_f"] / r - s * a["fr"]
        out[1] = B * nH * (uH[0] * g1 + uH[1] * g2)
    if 2 in orders:
        A1 = a["frr"] - a["fr"] / r
        A2 = a["fr"] / r
        A5 = a["fr"]
        I1 = nH * (2.0 * a["f"] - c * a["c_f"] - s * a["s_f"])
        I2 = nH * r * A5 + heavy.half_trace * A2
        I3 = -nH * r * (c * a["c_fr"] + s * a["s_fr"])
        I4 = 0.5 * P[0, 0] * (c * c * A1 + a["cc_frr"]
                              + (2.0 * a["cc_fr"] - a["ss_fr"]) / r - 2.0 * c * a["c_a4"])
        I5 = (P[0, 1] * (c * s * A1 + a["cs_a3"] - s * a["c_a4"] - c * a["s_a4"])
              + 0.5 * P[1, 1] * (s * s * A1 + a["ss_frr"]
                                 + (2.0 * a["ss_fr"] - a["cc_fr"]) / r - 2.0 * s * a["s_a4"]))
        out[2] = B * (I1 + I2 + I3 + I4 + I5)
    return out


def _grad_origin(f: np.ndarray, grid: CartesianGrid) -> np.ndarray:
    o = grid.origin_index
    h = grid.spacing
    return np.array([(f[o + 1, o] - f[o - 1, o]) / (2 * h), (f[o, o + 1] - f[o, o - 1]) / (2 * h)])


def _hessian_origin(f: np.ndarray, grid: CartesianGrid) -> np.ndarray:
    o = grid.origin_index
    h = grid.spacing
    d11 = (f[o + 1, o] - 2 * f[o, o] + f[o - 1, o]) / h**2
    d22 = (f[o, o + 1] - 2 * f[o, o] + f[o, o - 1]) / h**2
    d12 = (f[o + 1, o + 1] - f[o + 1, o - 1] - f[o - 1, o + 1] + f[o - 1, o - 1]) / (4 * h**2)
    return np.array([[d11, d12], [d12, d22]])


def _origin_values(f: np.ndarray, grid: CartesianGrid, heavy: SpeciesMoments, B: float) -> dict:
    """Limits of the polar formulas as ``v -> 0`` (Taylor expansion of ``f`` at the origin)."""
    o = grid.origin_index
    H = _hessian_origin(f, grid)
    q2 = np.pi * B * (4.0 * heavy.n * f[o, o] + heavy.half_trace * np.trace(H)
                      + float(np.sum(heavy.P * H)))
    return {
        0: 0.0,
        1: 2.0 * np.pi * B * heavy.n * float(heavy.u @ _grad_origin(f, grid)),
        2: q2,
    }


def _lh_cartesian(f_L, heavy, grid, B, orders):
    pg = _paired_polar(grid)
    ws = ae_workspace(interp_cart_to_polar(f_L, grid, pg), pg)
    polar = lh_polar_pieces(ws, heavy, B, orders)
    origin = _origin_values(f_L, grid, heavy, B)
    o = grid.origin_index
    out = {}
    for i, q in polar.items():
        qc = interp_polar_to_cart(q, pg, grid)
        qc[o, o] = origin[i]
        out[i] = qc
    return out


def q_lh0(f_L: np.ndarray, heavy: SpeciesMoments, grid: CartesianGrid, B: float = B_CROSS) -> np.ndarray:
    """Leading light-heavy piece ``B n^H (<f> - 2 pi f)``; zero at the origin."""
    return _lh_cartesian(f_L, heavy, grid, B, (0,))[0]


def q_lh1(f_L: np.ndarray, heavy: SpeciesMoments, grid: CartesianGrid, B: float = B_CROSS) -> np.ndarray:
    """First-order light-heavy piece ``B n^H u^H . (<grad f> - grad <f>)``."""
    return _lh_cartesian(f_L, heavy, grid, B, (1,))[1]


def q_lh2(f_L: np.ndarray, heavy: SpeciesMoments, grid: CartesianGrid, B: float = B_CROSS) -> np.ndarray:
    """Second-order light-heavy piece; uses the heavy second-moment tensor."""
    return _lh_cartesian(f_L, heavy, grid, B, (2,))[2]


# --------------------------------------------------------------------------
# heavy side, Cartesian finite differences
# --------------------------------------------------------------------------
def _fd(f: np.ndarray, h: float):
    """Periodic central differences: gradient and Hessian entries."""
    fp0, fm0 = np.roll(f, -1, 0), np.roll(f, 1, 0)
    f0p, f0m = np.roll(f, -1, 1), np.roll(f, 1, 1)
    g1 = (fp0 - fm0) / (2 * h)
    g2 = (f0p - f0m) / (2 * h)
    h11 = (fp0 - 2 * f + fm0) / h**2
    h22 = (f0p - 2 * f + f0m) / h**2
    h12 = (np.roll(g1, -1, 1) - np.roll(g1, 1, 1)) / (2 * h)
    return g1, g2, h11, h12, h22


def q_hl0(f_H: np.ndarray, light: SpeciesMoments, grid: CartesianGrid, B: float = B_CROSS) -> np.ndarray:
    """``-2 pi B grad f^H . n^L u^L``."""
    h = grid.spacing
    g1 = (np.roll(f_H, -1, 0) - np.roll(f_H, 1, 0)) / (2 * h)
    g2 = (np.roll(f_H, -1, 1) - np.roll(f_H, 1, 1)) / (2 * h)
    return -2.0 * np.pi * B * light.n * (light.u[0] * g1 + light.u[1] * g2)


def q_hl1(f_H: np.ndarray, light: SpeciesMoments, grid: CartesianGrid, B: float = B_CROSS) -> np.ndarray:
    """First-order heavy-light piece: a drift-diffusion (Fokker-Planck type) operator."""
    V1, V2 = grid.mesh
    h = grid.spacing
    _, _, h11, h12, h22 = _fd(f_H, h)
    nL, P = light.n, light.P
    # v . grad f + 2 f = div(v f) in two dimensions; the flux form makes the
    # discrete mass, momentum and energy identities exact
    flux = ((np.roll(V1 * f_H, -1, 0) - np.roll(V1 * f_H, 1, 0))
            + (np.roll(V2 * f_H, -1, 1) - np.roll(V2 * f_H, 1, 1))) / (2 * h)
    drift = 2.0 * np.pi * B * nL * flux
    lap = np.pi * B * (h11 + h22) * light.half_trace
    aniso = np.pi * B * (h11 * P[0, 0] + 2.0 * h12 * P[0, 1] + h22 * P[1, 1])
    return drift + lap + aniso


# --------------------------------------------------------------------------
# assembled operators
# --------------------------------------------------------------------------
def ae_pair(f_L: np.ndarray, f_H: np.ndarray, eps: float, grid: CartesianGrid,
            B_lh: float = B_CROSS, B_hl: float = B_CROSS) -> tuple[np.ndarray, np.ndarray]:
    """Both truncated operators, sharing one moment evaluation per species."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    light = species_moments(f_L, grid)
    heavy = species_moments(f_H, grid)
    pieces = _lh_cartesian(f_L, heavy, grid, B_lh, (0, 1, 2))
    pref = np.sqrt(1.0 + eps * eps)
    q_lh = pref * (pieces[0] + eps * pieces[1] + eps * eps * pieces[2])
    q_hl = pref * (q_hl0(f_H, light, grid, B_hl) + eps * q_hl1(f_H, light, grid, B_hl))
    return q_lh, q_hl


def q_lh_ae(f_L: np.ndarray, f_H: np.ndarray, eps: float, grid: CartesianGrid,
            B: float = B_CROSS) -> np.ndarray:
    """``sqrt(1+eps^2) (Q^{LH}_0 + eps Q^{LH}_1 + eps^2 Q^{LH}_2)``."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    heavy = species_moments(f_H, grid)
    pieces = _lh_cartesian(f_L, heavy, grid, B, (0, 1, 2))
    return np.sqrt(1.0 + eps * eps) * (pieces[0] + eps * pieces[1] + eps * eps * pieces[2])


def q_hl_ae(f_H: np.ndarray, f_L: np.ndarray, eps: float, grid: CartesianGrid,
            B: float = B_CROSS) -> np.ndarray:
    """``sqrt(1+eps^2) (Q^{HL}_0 + eps Q^{HL}_1)``."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    light = species_moments(f_L, grid)
    return np.sqrt(1.0 + eps * eps) * (q_hl0(f_H, light, grid, B) + eps * q_hl1(f_H, light, grid, B))
