"""Time stepping: BGK-penalized asymptotic-preserving step and forward Euler.

The light species evolves with ``df_L/dt = (Q^LL + Q^LH) / tau`` and the heavy
species with ``df_H/dt = eps (Q^HH + Q^HL) / tau``.  The AP step adds and
subtracts ``nu (M - f)``; the Maxwellian at the new level is built from
moments advanced a priori in closed form, so the implicit relation is solved
by a single division.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ae import B_CROSS, ae_pair
from .errors import InstabilityError, InvalidStateError, StiffnessError
from .grid import CartesianGrid
from .intra import B_INTRA, IntraKernel, precompute_intra_modes, q_intra
from .moments import MacroState, maxwellian, moments
from .sp import SpKernel, precompute_sp_modes, sp_pair

__all__ = [
    "MixtureState",
    "Kernels",
    "CollisionModel",
    "StepConfig",
    "MomentUpdateResult",
    "resolve_tau",
    "penalty_rates",
    "update_moments",
    "ap_step",
    "euler_step",
]

NEGATIVITY_TOL = 1e-8


@dataclass(frozen=True)
class Kernels:
    """Constant collision kernels of the mixture."""

    b_ll: float = B_INTRA
    b_hh: float = B_INTRA
    b_lh: float = B_CROSS
    b_hl: float = B_CROSS


@dataclass(frozen=True, eq=False)
class MixtureState:
    """Both distributions at time ``t`` on a shared Cartesian grid."""

    f_L: np.ndarray
    f_H: np.ndarray
    grid: CartesianGrid
    t: float = 0.0

    def __post_init__(self):
        shape = (self.grid.n, self.grid.n)
        if self.f_L.shape != shape or self.f_H.shape != shape:
            raise ValueError(f"fields must have shape {shape}")

    def macro(self) -> tuple[MacroState, MacroState]:
        return moments(self.f_L, self.grid), moments(self.f_H, self.grid)


class CollisionModel:
    """Intra-species spectral operators plus an AE or SP inter-species backend.

    Kernel tables are built once; ``elapsed`` accumulates wall time spent in
    operator evaluation only.  With ``mass_fix`` the inter-species outputs are
    shifted by a multiple of the input field so that their discrete mass is
    zero; the raw operators are untouched and the option defaults off.
    ``n_rho_sp`` sets the radial quadrature of the SP gain sums separately
    (``None`` reuses ``n_rho``); they need about ``n_v / 2`` nodes at small
    ``eps`` while the intra-species sums converge with far fewer.
    """

    def __init__(self, grid: CartesianGrid, eps: float, backend: str = "ae",
                 kernels: Kernels = Kernels(), n_rho: int | None = None, n_sigma: int = 16,
                 dealias: bool = True, heavy_transform: str = "separable", intra: bool = True,
                 mass_fix: bool = False, n_rho_sp: int | None = None):
        if backend not in ("ae", "sp"):
            raise ValueError(f"backend must be 'ae' or 'sp', got {backend!r}")
        if not (0.0 < eps <= 1.0):
            raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
        self.grid = grid
        self.eps = float(eps)
        self.backend = backend
        self.kernels = kernels
        self.intra = intra
        self.mass_fix = mass_fix
        self.elapsed = 0.0
        self.calls = 0
        self._ll: IntraKernel | None = None
        self._hh: IntraKernel | None = None
        self._sp: SpKernel | None = None
        if intra:
            self._ll = precompute_intra_modes(grid, kernels.b_ll, n_rho, n_sigma, dealias=dealias)
            self._hh = (self._ll if kernels.b_hh == kernels.b_ll
                        else precompute_intra_modes(grid, kernels.b_hh, n_rho, n_sigma, dealias=dealias))
        if backend == "sp":
            self._sp = precompute_sp_modes(grid, eps, kernels.b_lh, kernels.b_hl,
                                           n_rho if n_rho_sp is None else n_rho_sp, n_sigma,
                                           dealias=dealias, heavy_transform=heavy_transform)

    def inter(self, f_L: np.ndarray, f_H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.backend == "ae":
            return ae_pair(f_L, f_H, self.eps, self.grid, self.kernels.b_lh, self.kernels.b_hl)
        return sp_pair(f_L, f_H, self._sp)

    def __call__(self, f_L: np.ndarray, f_H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Total right sides ``(Q^LL + Q^LH, Q^HH + Q^HL)``."""
        t0 = time.perf_counter()
        q_l, q_h = self.inter(f_L, f_H)
        if self.mass_fix:
            q_l = _remove_mass(q_l, f_L)
            q_h = _remove_mass(q_h, f_H)
        if self.intra:
            q_l = q_l + q_intra(f_L, self._ll)
            q_h = q_h + q_intra(f_H, self._hh)
        self.elapsed += time.perf_counter() - t0
        self.calls += 1
        return q_l, q_h


def _remove_mass(q: np.ndarray, f: np.ndarray) -> np.ndarray:
    n = f.sum()
    if n <= 0:
        return q
    return q - (q.sum() / n) * f


def resolve_tau(tau: float | str, eps: float) -> float:
    """Map ``"one"``, ``"eps"``, ``"eps2"`` (or a positive number) to a value."""
    if isinstance(tau, str):
        table = {"one": 1.0, "eps": eps, "eps2": eps * eps}
        if tau not in table:
            raise ValueError(f"unknown tau scale {tau!r}")
        return table[tau]
    if not tau > 0:
        raise ValueError("tau must be positive")
    return float(tau)


@dataclass(frozen=True, eq=False)
class StepConfig:
    """Step size, relaxation scale and the collision model used by a step."""

    dt: float
    tau: float
    collision: CollisionModel
    lemma_bracket: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and self.tau > 0):
            raise ValueError("dt and tau must be positive")

    @property
    def eps(self) -> float:
        return self.collision.eps


@dataclass(frozen=True)
class MomentUpdateResult:
    U_L: MacroState
    U_H: MacroState
    W: np.ndarray = field(repr=False)
    alpha: float
    beta: float
    gamma: float


def penalty_rates(U_L: MacroState, U_H: MacroState, b_lh: float = B_CROSS,
                  b_hl: float = B_CROSS) -> tuple[float, float]:
    """``nu_L = 2 pi B^LH (n_L + n_H)`` and ``nu_H = 2 pi B^HL (n_L + n_H)``."""
    total = U_L.n + U_H.n
    return 2.0 * np.pi * b_lh * total, 2.0 * np.pi * b_hl * total


def update_moments(U_L: MacroState, U_H: MacroState, eps: float, tau: float, dt: float,
                   b_hl: float = B_CROSS, lemma_bracket: bool = False) -> MomentUpdateResult:
    """Closed-form a-priori moments with ``u_L - eps u_H`` treated implicitly.

    ``lemma_bracket`` replaces the temperature bracket ``2T_H - 2T_L - |u_L|^2``
    by the lemma-consistent ``2T_H - 2T_L + |u_H|^2 - |u_L|^2``.
    """
    if not (eps > 0 and tau > 0 and dt > 0):
        raise ValueError("eps, tau and dt must be positive")
    uL, uH = U_L.u_vec, U_H.u_vec
    c = 2.0 * np.pi * b_hl * dt / tau
    alpha = c * U_H.n
    beta = c * U_L.n * eps
    gamma = c * U_H.n * eps * eps
    with np.errstate(all="ignore"):
        den = 1.0 + alpha + beta * eps
        W = ((1.0 + gamma) * uL - eps * uH) / den
        uH_new = ((1.0 + alpha) * uH + beta * (1.0 + gamma) * uL) / den
        uL_new = uL - alpha * W + gamma * uL
        bracket = 2.0 * U_H.T - 2.0 * U_L.T - uL @ uL
        if lemma_bracket:
            bracket += uH @ uH
        drive = (eps / tau) * (W @ uH) - (eps * eps / tau) * bracket
        TL_new = U_L.T - 2.0 * np.pi * b_hl * U_H.n * dt * drive
        TH_new = U_H.T + 2.0 * np.pi * b_hl * U_L.n * dt * drive
    try:
        new_L = MacroState(U_L.n, tuple(uL_new), TL_new)
        new_H = MacroState(U_H.n, tuple(uH_new), TH_new)
    except InvalidStateError as exc:
        raise StiffnessError(f"moment update overflowed (tau={tau:g}, dt={dt:g}): {exc}") from None
    return MomentUpdateResult(new_L, new_H, W, float(alpha), float(beta), float(gamma))


def _check_fields(*fields: np.ndarray) -> None:
    for f in fields:
        if not np.all(np.isfinite(f)):
            raise InstabilityError("non-finite values in distribution after step")
        top = np.abs(f).max()
        if f.min() < -NEGATIVITY_TOL * top:
            warnings.warn("distribution has negative values beyond the round-off tolerance",
                          RuntimeWarning, stacklevel=3)


def ap_step(state: MixtureState, cfg: StepConfig, info: dict | None = None) -> MixtureState:
    """One step of the BGK-penalized AP scheme.

    If ``info`` is a dict it receives the moment update and the penalty rates.
    """
    grid = state.grid
    eps, tau, dt = cfg.eps, cfg.tau, cfg.dt
    kern = cfg.collision.kernels
    U_L, U_H = state.macro()
    nu_L, nu_H = penalty_rates(U_L, U_H, kern.b_lh, kern.b_hl)
    M_L, M_H = maxwellian(U_L, grid), maxwellian(U_H, grid)
    upd = update_moments(U_L, U_H, eps, tau, dt, kern.b_hl, cfg.lemma_bracket)
    nu_L1, nu_H1 = penalty_rates(upd.U_L, upd.U_H, kern.b_lh, kern.b_hl)
    M_L1, M_H1 = maxwellian(upd.U_L, grid), maxwellian(upd.U_H, grid)
    q_l, q_h = cfg.collision(state.f_L, state.f_H)
    rl, rh = dt / tau, dt * eps / tau
    f_L = (state.f_L + rl * (q_l - nu_L * (M_L - state.f_L) + nu_L1 * M_L1)) / (1.0 + rl * nu_L1)
    f_H = (state.f_H + rh * (q_h - nu_H * (M_H - state.f_H) + nu_H1 * M_H1)) / (1.0 + rh * nu_H1)
    _check_fields(f_L, f_H)
    if info is not None:
        info.update(update=upd, nu=(nu_L, nu_H), nu_new=(nu_L1, nu_H1))
    return MixtureState(f_L, f_H, grid, state.t + dt)


def euler_step(state: MixtureState, cfg: StepConfig) -> MixtureState:
    """Explicit step ``f + dt s Q / tau`` with ``s = 1`` (light) or ``eps`` (heavy)."""
    eps, tau, dt = cfg.eps, cfg.tau, cfg.dt
    kern = cfg.collision.kernels
    U_L, U_H = state.macro()
    nu_L, nu_H = penalty_rates(U_L, U_H, kern.b_lh, kern.b_hl)
    if dt * max(nu_L, eps * nu_H) / tau > 1.0:
        warnings.warn("forward Euler step exceeds dt nu / tau = 1; expect instability",
                      RuntimeWarning, stacklevel=2)
    q_l, q_h = cfg.collision(state.f_L, state.f_H)
    f_L = state.f_L + (dt / tau) * q_l
    f_H = state.f_H + (dt * eps / tau) * q_h
    _check_fields(f_L, f_H)
    return MixtureState(f_L, f_H, state.grid, state.t + dt)
