"""Scaled spectral (SP) evaluation of the inter-species operators.

The heavy species is handled through the dilated density
``ft(vt) = eps^-2 f_H(vt / eps)`` on the light velocity domain.  With
``w = v - g/(1+eps^2)``, ``a = rho/(1+eps^2)`` and ``b = eps^2 rho/(1+eps^2)``
both gain terms reduce to the same products

    P_rho(w) = sum_sigma f_L(w + a sigma) ft(w - b sigma),

followed by ``J0`` averages over the direction of the relative velocity with
arguments ``pi rho |k| / (L (1+eps^2))`` (light) and
``pi rho eps^2 |k| / (L (1+eps^2))`` (heavy).  The coefficients of ``ft`` are
obtained by quadrature of ``f_H`` at ``eps``-compressed frequencies, and the
heavy output is summed back directly at the heavy physical nodes.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0, j1

from .grid import CartesianGrid
from .intra import IMAG_TOL, check_support
from .errors import NumericalError
from .spectral import DEFAULT_SUPPORT_FRACTION, SpectralLayout, gauss_legendre, shift_product_modes

__all__ = [
    "SpKernel",
    "precompute_sp_modes",
    "scaled_heavy_coeffs",
    "scaled_heavy_field",
    "sp_pair",
    "q_lh_sp",
    "q_hl_sp",
    "HEAVY_TRANSFORMS",
]

HEAVY_TRANSFORMS = ("direct", "separable")
_TABLE_LIMIT = 16_000_000  # cache J0 tables below this many entries


def _loss_table(B: float, R: float, L: float, kabs: np.ndarray) -> np.ndarray:
    x = np.pi * R * kabs / L
    safe = np.where(x > 0, x, 1.0)
    ratio = np.where(x > 0, j1(safe) / safe, 0.5)
    return 4.0 * np.pi**2 * R**2 * B * ratio


@dataclass(frozen=True, eq=False)
class SpKernel:
    """Immutable SP tables for one ``(grid, eps)`` pair."""

    grid: CartesianGrid
    eps: float
    B_lh: float
    B_hl: float
    R: float
    rho: np.ndarray
    w_rho: np.ndarray
    theta: np.ndarray
    w_theta: np.ndarray
    loss_lh: np.ndarray = field(repr=False)
    loss_hl: np.ndarray = field(repr=False)
    layout: SpectralLayout = field(repr=False)
    heavy_transform: str = "separable"
    gain_lh: np.ndarray | None = field(default=None, repr=False)
    gain_hl: np.ndarray | None = field(default=None, repr=False)

    @property
    def support(self) -> float:
        return 0.5 * self.R

    def gain_factors(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """Radial weights times ``J0`` factors for node ``q`` (light, heavy)."""
        if self.gain_lh is not None:
            return self.gain_lh[q], self.gain_hl[q]
        return _gain_pair(self, q)


def _gain_pair(k: SpKernel, q: int) -> tuple[np.ndarray, np.ndarray]:
    L = k.grid.half_width
    e2 = k.eps**2
    r = k.rho[q]
    base = 2.0 * np.pi * np.sqrt(1.0 + e2) * k.w_rho[q] * r
    arg = np.pi * r * k.layout.kabs / (L * (1.0 + e2))
    return base * k.B_lh * j0(arg), base * k.B_hl / k.eps * j0(e2 * arg)


def precompute_sp_modes(grid: CartesianGrid, eps: float, B_lh: float = 1.0 / (8 * np.pi),
                        B_hl: float = 1.0 / (8 * np.pi), n_rho: int | None = None, n_theta: int = 16,
                        support_fraction: float = DEFAULT_SUPPORT_FRACTION, dealias: bool = True,
                        heavy_transform: str = "separable") -> SpKernel:
    """Build the SP kernel: closed-form loss tables and quadrature for the gain sums.

    ``n_theta`` uniform nodes on ``[0, pi)`` are used together with their
    antipodes; the inter-species products are not symmetric under
    ``sigma -> -sigma``, so both halves of the circle are evaluated.
    """
    if not (0.0 < eps <= 1.0):
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    n_rho = grid.n if n_rho is None else int(n_rho)
    if n_rho < 2 or n_theta < 2:
        raise ValueError("quadrature sizes must be at least 2")
    if heavy_transform not in HEAVY_TRANSFORMS:
        raise ValueError(f"heavy_transform must be one of {HEAVY_TRANSFORMS}")
    L = grid.half_width
    R = 2.0 * support_fraction * L
    rho, w_rho = gauss_legendre(n_rho, 0.0, R)
    half = np.arange(n_theta) * (np.pi / n_theta)
    theta = np.concatenate([half, half + np.pi])
    w_theta = np.full(2 * n_theta, np.pi / n_theta)
    layout = SpectralLayout(grid.n, L, dealias)
    root = np.sqrt(1.0 + eps**2)
    loss_lh = _loss_table(B_lh * root, R, L, layout.kabs).astype(complex)
    loss_hl = _loss_table(B_hl * root / eps, R, L, layout.kabs).astype(complex)
    k = SpKernel(grid, float(eps), float(B_lh), float(B_hl), float(R), rho, w_rho, theta, w_theta,
                 loss_lh, loss_hl, layout, heavy_transform)
    if n_rho * grid.n**2 <= _TABLE_LIMIT:
        pairs = [_gain_pair(k, q) for q in range(n_rho)]
        object.__setattr__(k, "gain_lh", np.stack([p[0] for p in pairs]))
        object.__setattr__(k, "gain_hl", np.stack([p[1] for p in pairs]))
    return k


def _dilated_exponentials(grid: CartesianGrid, layout: SpectralLayout, eps: float) -> np.ndarray:
    """``E[m, j] = exp(-i pi eps m v_j / L)`` for retained indices ``m`` (FFT order)."""
    E = np.exp(-1j * np.pi * eps * np.outer(layout.idx, grid.nodes) / grid.half_width)
    E[~layout.keep] = 0.0
    return E


def scaled_heavy_coeffs(f_H: np.ndarray, grid: CartesianGrid, eps: float,
                        mode: str = "separable", chunk: int = 64) -> np.ndarray:
    """Fourier coefficients of the dilated heavy density from ``f_H`` samples.

    ``mode="direct"`` forms every exponential ``exp(-i pi eps m.v_j / L)`` and
    costs ``O(N^4)``; ``mode="separable"`` factors the two axes (``O(N^3)``).
    """
    layout = SpectralLayout(grid.n, grid.half_width)
    E = _dilated_exponentials(grid, layout, eps)
    n = grid.n
    f_H = np.asarray(f_H, dtype=float)
    if mode == "separable":
        return (E @ f_H @ E.T) / n**2
    if mode != "direct":
        raise ValueError(f"unknown mode {mode!r}")
    out = np.empty((n, n), dtype=complex)
    flat = f_H.ravel()
    for i0 in range(0, n, max(1, chunk // n) or 1):
        rows = slice(i0, min(n, i0 + max(1, chunk // n)))
        block = E[rows, None, :, None] * E[None, :, None, :]  # (r, m2, j1, j2)
        out[rows] = block.reshape(block.shape[0], n, n * n) @ flat
    return out / n**2


def scaled_heavy_field(Q: np.ndarray, grid: CartesianGrid, eps: float, mode: str = "separable",
                       chunk: int = 64) -> np.ndarray:
    """``eps^2 sum_k Q_k exp(i pi eps k.v / L)`` at the heavy physical nodes (complex)."""
    layout = SpectralLayout(grid.n, grid.half_width)
    C = np.conj(_dilated_exponentials(grid, layout, eps)).T  # (j, k)
    n = grid.n
    if mode == "separable":
        return eps**2 * (C @ Q @ C.T)
    if mode != "direct":
        raise ValueError(f"unknown mode {mode!r}")
    out = np.empty((n, n), dtype=complex)
    flat = Q.ravel()
    step = max(1, chunk // n)
    for i0 in range(0, n, step):
        rows = slice(i0, min(n, i0 + step))
        block = C[rows, None, :, None] * C[None, :, None, :]  # (j1, j2, k1, k2)
        out[rows] = block.reshape(block.shape[0], n, n * n) @ flat
    return eps**2 * out


def _real_part(z: np.ndarray, label: str) -> np.ndarray:
    norm = np.abs(z.real).max()
    resid = np.abs(z.imag).max()
    if norm > 0 and resid > IMAG_TOL * norm:
        raise NumericalError(f"{label}: imaginary residue {resid / norm:.2e} exceeds {IMAG_TOL:g}")
    return z.real


def sp_pair(f_L: np.ndarray, f_H: np.ndarray, kernel: SpKernel,
            warn_support: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``(Q^LH(f_L, f_H), Q^HL(f_H, f_L))`` sharing the gain products."""
    grid = kernel.grid
    f_L = np.asarray(f_L, dtype=float)
    f_H = np.asarray(f_H, dtype=float)
    for f in (f_L, f_H):
        if f.shape != (grid.n, grid.n):
            raise ValueError(f"field shape {f.shape} does not match grid {grid.n}x{grid.n}")
    if warn_support:
        check_support(f_L, grid, kernel.support, 1e-8, "sp light")
        check_support(f_H, grid, kernel.support, 1e-6, "sp heavy")
    lay = kernel.layout
    eps = kernel.eps
    e2 = eps**2
    FL = lay.coeffs(f_L)
    FH = scaled_heavy_coeffs(f_H, grid, eps, kernel.heavy_transform)
    c, s = np.cos(kernel.theta), np.sin(kernel.theta)
    gain_l = np.zeros_like(FL)
    gain_h = np.zeros_like(FL)
    for q, r in enumerate(kernel.rho):
        S = shift_product_modes(lay, FL, FH, r / (1 + e2), e2 * r / (1 + e2), c, s, kernel.w_theta)
        gl, gh = kernel.gain_factors(q)
        gain_l += gl * S
        gain_h += gh * S
    QL = gain_l - lay.product_coeffs(FL, kernel.loss_lh * FH)
    QH = gain_h - lay.product_coeffs(FH, kernel.loss_hl * FL)
    q_lh = _real_part(lay.field(QL), "q_lh_sp")
    q_hl = _real_part(scaled_heavy_field(QH, grid, eps, kernel.heavy_transform), "q_hl_sp")
    return q_lh, q_hl


def q_lh_sp(f_L: np.ndarray, f_H: np.ndarray, kernel: SpKernel) -> np.ndarray:
    return sp_pair(f_L, f_H, kernel)[0]


def q_hl_sp(f_H: np.ndarray, f_L: np.ndarray, kernel: SpKernel) -> np.ndarray:
    return sp_pair(f_L, f_H, kernel)[1]
