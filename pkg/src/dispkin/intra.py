"""Fourier spectral evaluation of the single-species operator for 2-D Maxwell molecules.

The gain term is written in the classical (rho, sigma) parameterization of the
relative velocity ``g = |g| sigma_g`` and post-collisional direction ``sigma``:

    Q+(f)(v)^_k = 2 pi B sum_q w_q rho_q J0(pi rho_q |k| / (2L))
                  * sum_sigma dsigma [f(. + rho_q sigma/2) f(. - rho_q sigma/2)]^_k,

where the ``J0`` factor is the analytic average over the direction of ``g``.
The loss term uses the same quadrature, which makes the discrete mass balance
exact up to rounding.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0, j1

from .errors import NumericalError
from .grid import CartesianGrid
from .spectral import DEFAULT_SUPPORT_FRACTION, SpectralLayout, gauss_legendre, shift_product_modes

__all__ = ["IntraKernel", "precompute_intra_modes", "q_intra", "B_INTRA", "check_support"]

B_INTRA = 1.0 / (4.0 * np.pi)

IMAG_TOL = 1e-6


def check_support(f: np.ndarray, grid: CartesianGrid, radius: float, tol: float, label: str) -> None:
    """Warn when the mass of ``f`` outside the ball of ``radius`` exceeds ``tol`` (relative)."""
    V1, V2 = grid.mesh
    total = np.abs(f).sum()
    if total == 0:
        return
    outside = np.abs(f[V1**2 + V2**2 > radius**2]).sum() / total
    if outside > tol:
        # constant text so the default warning filter reports each call site once
        warnings.warn(f"{label}: mass outside the de-aliasing support exceeds {tol:g}",
                      RuntimeWarning, stacklevel=3)


@dataclass(frozen=True, eq=False)
class IntraKernel:
    """Precomputed mode tables for the single-species operator."""

    grid: CartesianGrid
    B: float
    R: float
    rho: np.ndarray
    w_rho: np.ndarray
    theta: np.ndarray
    w_theta: np.ndarray
    gain_radial: np.ndarray = field(repr=False)    # (N_rho, N, N) J0 factors times weights
    loss_modes: np.ndarray = field(repr=False)     # (N, N) G^-(m), FFT order
    layout: SpectralLayout = field(repr=False)

    @property
    def support(self) -> float:
        return 0.5 * self.R

    def loss_mode_zero(self) -> float:
        return float(self.loss_modes[0, 0].real)

    def gain_mode(self, l: tuple[int, int], m: tuple[int, int]) -> complex:
        """Gain weight ``beta+(l, m)`` multiplying ``fhat_l fhat_m`` in mode ``k = l + m``."""
        L = self.grid.half_width
        l = np.asarray(l, float)
        m = np.asarray(m, float)
        kk = np.hypot(*(l + m))
        d = 0.5 * (l - m)
        phase = np.cos(np.pi / L * np.outer(self.rho, np.cos(self.theta) * d[0] + np.sin(self.theta) * d[1]))
        ang = 2.0 * phase @ self.w_theta
        return complex(2 * np.pi * self.B * np.sum(self.w_rho * self.rho * j0(np.pi * self.rho * kk / (2 * L)) * ang))


def precompute_intra_modes(grid: CartesianGrid, B: float = B_INTRA, n_rho: int | None = None,
                           n_sigma: int = 16, support_fraction: float = DEFAULT_SUPPORT_FRACTION,
                           dealias: bool = True, loss: str = "quadrature") -> IntraKernel:
    """Build the intra-species kernel tables.

    ``loss="quadrature"`` integrates the loss weight with the gain quadrature
    (discrete mass conserved to rounding); ``loss="closed"`` uses
    ``4 pi^2 B R^2 J1(x)/x`` with ``x = pi R |m| / L``.
    """
    n_rho = grid.n if n_rho is None else int(n_rho)
    if n_rho < 2 or n_sigma < 2:
        raise ValueError("quadrature sizes must be at least 2")
    if B <= 0:
        raise ValueError("kernel constant must be positive")
    if loss not in ("quadrature", "closed"):
        raise ValueError(f"unknown loss mode {loss!r}")
    L = grid.half_width
    R = 2.0 * support_fraction * L
    rho, w_rho = gauss_legendre(n_rho, 0.0, R)
    theta = np.arange(n_sigma) * (np.pi / n_sigma)
    w_theta = np.full(n_sigma, 2.0 * np.pi / n_sigma)  # half circle, doubled by symmetry
    layout = SpectralLayout(grid.n, L, dealias)
    kabs = layout.kabs
    coef = 2.0 * np.pi * B * w_rho * rho
    gain_radial = coef[:, None, None] * j0(np.pi * rho[:, None, None] * kabs[None] / (2.0 * L))
    k1, k2 = np.meshgrid(layout.idx, layout.idx, indexing="ij")
    if loss == "closed":
        x = np.pi * R * kabs / L
        ratio = np.where(x > 0, j1(x) / np.where(x > 0, x, 1.0), 0.5)
        loss_modes = 4.0 * np.pi**2 * B * R**2 * ratio
    else:
        loss_modes = np.zeros_like(kabs)
        c, s = np.cos(theta), np.sin(theta)
        for q in range(n_rho):
            arg = (np.pi * rho[q] / L) * (k1[None] * c[:, None, None] + k2[None] * s[:, None, None])
            loss_modes += coef[q] * np.tensordot(w_theta, np.cos(arg), axes=1)
    return IntraKernel(grid, float(B), float(R), rho, w_rho, theta, w_theta,
                       gain_radial, loss_modes.astype(complex), layout)


def _finish(layout: SpectralLayout, Q: np.ndarray, scale: float, label: str) -> np.ndarray:
    z = layout.field(Q)
    norm = np.abs(z.real).max()
    resid = np.abs(z.imag).max()
    if norm > 0 and resid > IMAG_TOL * norm:
        raise NumericalError(f"{label}: imaginary residue {resid / norm:.2e} exceeds {IMAG_TOL:g}")
    return z.real


def q_intra(f: np.ndarray, kernel: IntraKernel, warn_support: bool = True) -> np.ndarray:
    """Evaluate ``Q(f, f)`` on the Cartesian nodes."""
    f = np.asarray(f, dtype=float)
    grid = kernel.grid
    if f.shape != (grid.n, grid.n):
        raise ValueError(f"field shape {f.shape} does not match grid {grid.n}x{grid.n}")
    if warn_support:
        check_support(f, grid, kernel.support, 1e-8, "q_intra")
    lay = kernel.layout
    F = lay.coeffs(f)
    c, s = np.cos(kernel.theta), np.sin(kernel.theta)
    gain = np.zeros_like(F)
    for q, r in enumerate(kernel.rho):
        S = shift_product_modes(lay, F, F, 0.5 * r, 0.5 * r, c, s, kernel.w_theta)
        gain += kernel.gain_radial[q] * S
    loss = lay.product_coeffs(F, kernel.loss_modes * F)
    return _finish(lay, gain - loss, 1.0, "q_intra")
