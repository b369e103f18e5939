"""Shared Fourier-Galerkin plumbing for the spectral collision operators.

Coefficients follow ``f(v) = sum_l fhat_l exp(i pi l.v / L)`` with
``l`` in ``(-N/2, N/2)`` (the Nyquist mode is dropped so that shifted
trigonometric interpolants stay real).  Quadratic products are evaluated on a
zero-padded grid (3/2 rule) so that the retained modes equal the truncated
convolution sums ``sum_{l+m=k}`` exactly.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from numpy.polynomial.legendre import leggauss

__all__ = ["SpectralLayout", "workers", "gauss_legendre", "shift_product_modes", "DEFAULT_SUPPORT_FRACTION"]

DEFAULT_SUPPORT_FRACTION = 0.38  # S = 0.38 L, truncation radius R = 2 S


def workers() -> int:
    """Worker count for FFTs, from ``DISPKIN_THREADS`` (0 or unset means all cores)."""
    raw = os.environ.get("DISPKIN_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _even_at_least(m: int) -> int:
    return m + (m % 2)


@dataclass(frozen=True)
class SpectralLayout:
    """Index bookkeeping for an ``n``-mode grid and its padded product grid."""

    n: int
    half_width: float
    dealias: bool = True

    @property
    def m(self) -> int:
        return _even_at_least((3 * self.n + 1) // 2) if self.dealias else self.n

    @cached_property
    def idx(self) -> np.ndarray:
        """Integer mode indices of the ``n`` grid in FFT order."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).round().astype(int)

    @cached_property
    def idx_pad(self) -> np.ndarray:
        return np.fft.fftfreq(self.m, 1.0 / self.m).round().astype(int)

    @cached_property
    def keep(self) -> np.ndarray:
        """Mask of retained modes (Nyquist dropped) on the ``n`` grid, 1-D."""
        return np.abs(self.idx) < self.n // 2

    @cached_property
    def sign(self) -> np.ndarray:
        s = np.where(self.idx % 2 == 0, 1.0, -1.0)
        return np.outer(s, s)

    @cached_property
    def sign_pad(self) -> np.ndarray:
        s = np.where(self.idx_pad % 2 == 0, 1.0, -1.0)
        return np.outer(s, s)

    @cached_property
    def pad_pos(self) -> np.ndarray:
        """Positions of the retained ``n``-grid modes inside the padded arrays."""
        return np.mod(self.idx[self.keep], self.m)

    @cached_property
    def kabs(self) -> np.ndarray:
        """``|k|`` on the ``n`` grid (FFT order)."""
        k1, k2 = np.meshgrid(self.idx, self.idx, indexing="ij")
        return np.hypot(k1, k2)

    # -- transforms --------------------------------------------------------
    def coeffs(self, f: np.ndarray) -> np.ndarray:
        """Fourier coefficients of grid samples on ``-L + j dv``."""
        F = sfft.fft2(f, workers=workers()) * self.sign / self.n**2
        F[~self.keep, :] = 0.0
        F[:, ~self.keep] = 0.0
        return F

    def field(self, F: np.ndarray) -> np.ndarray:
        """Samples of the trigonometric polynomial with coefficients ``F`` (complex)."""
        return sfft.ifft2(F * self.sign, workers=workers()) * self.n**2

    def pad(self, F: np.ndarray) -> np.ndarray:
        if not self.dealias:
            return F.copy()
        P = np.zeros((self.m, self.m), dtype=complex)
        pos = self.pad_pos
        P[np.ix_(pos, pos)] = F[np.ix_(self.keep, self.keep)]
        return P

    def unpad(self, P: np.ndarray) -> np.ndarray:
        F = np.zeros((self.n, self.n), dtype=complex)
        pos = self.pad_pos
        F[np.ix_(self.keep, self.keep)] = P[np.ix_(pos, pos)] if self.dealias else P[np.ix_(self.keep, self.keep)]
        return F

    def padded_field(self, P: np.ndarray) -> np.ndarray:
        return sfft.ifft2(P * self.sign_pad, workers=workers()) * self.m**2

    def padded_coeffs(self, g: np.ndarray) -> np.ndarray:
        return sfft.fft2(g, workers=workers()) * self.sign_pad / self.m**2

    def product_coeffs(self, F: np.ndarray, G: np.ndarray) -> np.ndarray:
        """Truncated convolution ``sum_{l+m=k} F_l G_m`` via the padded grid."""
        pf = self.padded_field(self.pad(F)).real
        pg = self.padded_field(self.pad(G)).real
        return self.unpad(self.padded_coeffs(pf * pg))


def shift_product_modes(layout: SpectralLayout, A: np.ndarray, B: np.ndarray,
                        a: float, b: float, cos_s: np.ndarray, sin_s: np.ndarray,
                        weights: np.ndarray, block: int = 8) -> np.ndarray:
    """Modes of ``sum_s w_s A(w + a sigma_s) B(w - b sigma_s)`` on the ``n`` grid.

    ``A`` and ``B`` are coefficient arrays of real fields (``n`` grid).  Shifts
    are separable phase factors; the shifted fields are real, so only the
    half spectrum is formed and inverted.
    """
    L = layout.half_width
    m = layout.m
    h = m // 2 + 1
    same = A is B and a == b
    Ap = layout.pad(A)[:, :h]
    Bp = Ap if same else layout.pad(B)[:, :h]
    s1 = np.where(layout.idx_pad % 2 == 0, 1.0, -1.0)
    lp = layout.idx_pad * (np.pi / L)
    acc = np.zeros((m, m))
    nw = workers()
    for start in range(0, len(cos_s), block):
        c = cos_s[start:start + block]
        s = sin_s[start:start + block]
        w = weights[start:start + block]
        ex = s1 * np.exp(1j * a * np.outer(c, lp))
        ey = (s1 * np.exp(1j * a * np.outer(s, lp)))[:, :h]
        pa = (ex[:, :, None] * ey[:, None, :]) * Ap
        if same:
            pb = np.conj(ex)[:, :, None] * np.conj(ey)[:, None, :] * Bp
        else:
            fx = s1 * np.exp(-1j * b * np.outer(c, lp))
            fy = (s1 * np.exp(-1j * b * np.outer(s, lp)))[:, :h]
            pb = (fx[:, :, None] * fy[:, None, :]) * Bp
        ra = sfft.irfft2(pa, s=(m, m), axes=(-2, -1), workers=nw)
        rb = sfft.irfft2(pb, s=(m, m), axes=(-2, -1), workers=nw)
        ra *= rb
        acc += np.tensordot(w, ra, axes=1)
    acc *= float(m) ** 4
    return layout.unpad(layout.padded_coeffs(acc))
