"""Macroscopic temperature relaxation at the slowest scale (Maxwell molecules, 2-D).

With ``lambda(T) = 2 pi B^HL n_L T`` the relaxation system reduces to

    dT_L/dt = -4 pi B^HL n_H (T_L - T_H),   dT_H/dt = -4 pi B^HL n_L (T_H - T_L).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError

__all__ = ["MacroPair", "lambda_coeff", "relax_temperatures", "relax_exact"]


@dataclass(frozen=True)
class MacroPair:
    T_L: float
    T_H: float
    n_L: float = 1.0
    n_H: float = 1.0
    B_hl: float = 1.0 / (8.0 * np.pi)

    def __post_init__(self):
        vals = (self.T_L, self.T_H, self.n_L, self.n_H, self.B_hl)
        if not all(np.isfinite(vals)) or min(vals) < 0:
            raise ValueError(f"temperatures, densities and kernel must be finite and >= 0: {self}")


def lambda_coeff(T: float, n_L: float = 1.0, B_hl: float = 1.0 / (8.0 * np.pi)) -> float:
    """``2 pi B^HL n_L T``."""
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    return 2.0 * np.pi * B_hl * n_L * T


def _rhs(p: MacroPair, y: np.ndarray) -> np.ndarray:
    # d(n_L T_L) = -2 (lambda(T_L)/T_L) n_H (T_L - T_H): lambda/T is constant
    rate = 2.0 * lambda_coeff(1.0, 1.0, p.B_hl)
    d = y[0] - y[1]
    return np.array([-rate * p.n_H * d, rate * p.n_L * d])


def relax_temperatures(init: MacroPair, dt: float = 1e-2, t_final: float = 10.0) -> np.ndarray:
    """Classical RK4; returns rows ``(t, T_L, T_H)`` including ``t = 0``."""
    if dt <= 0 or t_final < 0:
        raise ValueError("dt must be positive and t_final nonnegative")
    steps = int(np.ceil(t_final / dt - 1e-12))
    out = np.empty((steps + 1, 3))
    y = np.array([init.T_L, init.T_H], dtype=float)
    t = 0.0
    out[0] = (t, *y)
    for i in range(1, steps + 1):
        h = min(dt, t_final - t)
        k1 = _rhs(init, y)
        k2 = _rhs(init, y + 0.5 * h * k1)
        k3 = _rhs(init, y + 0.5 * h * k2)
        k4 = _rhs(init, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + h
        if y.min() < 0:
            raise InvalidStateError(f"negative temperature {y} at t={t:g}")
        out[i] = (t, *y)
    return out


def relax_exact(init: MacroPair, t: np.ndarray) -> np.ndarray:
    """Closed-form solution at times ``t``; returns rows ``(t, T_L, T_H)``."""
    t = np.asarray(t, dtype=float)
    rate = 2.0 * lambda_coeff(1.0, 1.0, init.B_hl) * (init.n_L + init.n_H)
    total = init.n_L * init.T_L + init.n_H * init.T_H
    T_eq = total / (init.n_L + init.n_H)
    d = (init.T_L - init.T_H) * np.exp(-rate * t)
    s = init.n_L + init.n_H
    return np.column_stack([t, T_eq + init.n_H / s * d, T_eq - init.n_L / s * d])
