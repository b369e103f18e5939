"""Experiment configuration, drivers and CSV export.

Configuration documents are flat ``key = value`` lines with ``#`` comments.
Every run is deterministic: identical configurations give byte-identical CSV.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import os
import time
import warnings
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigError, OutputError
from .grid import build_cartesian, restrict
from .macro import MacroPair, relax_temperatures
from .moments import MacroState, double_peak, maxwellian, moments, relative_entropy
from .stepper import (CollisionModel, Kernels, MixtureState, StepConfig, ap_step, euler_step,
                      resolve_tau)

__all__ = [
    "SimConfig",
    "parse_config",
    "serialize_config",
    "load_config",
    "write_csv",
    "read_csv",
    "initial_state",
    "simulate",
    "run_convergence",
    "run_compare",
    "run_epochal",
    "run_single_step",
    "time_inter_operator",
    "MOMENT_COLUMNS",
    "ENTROPY_COLUMNS",
    "CONVERGENCE_COLUMNS",
    "COMPARE_COLUMNS",
    "MACRO_COLUMNS",
]

MOMENT_COLUMNS = ("t", "n_L", "u_L_x", "u_L_y", "T_L", "n_H", "u_H_x", "u_H_y",
                  "eps_u_H_x", "eps_u_H_y", "T_H")
ENTROPY_COLUMNS = ("t", "H_L", "H_H", "dist_L", "dist_H")
CONVERGENCE_COLUMNS = ("species", "nv", "e_rel", "slope")
COMPARE_COLUMNS = ("eps", "nv_ae", "nv_ref", "E_L", "E_H", "secs_ae", "secs_ref")
MACRO_COLUMNS = ("t", "T_L_ref", "T_H_ref")

TAU_SCALES = ("one", "eps", "eps2")


@dataclass(frozen=True)
class SimConfig:
    """Full description of one experiment; defaults follow the double-peak test problem."""

    eps: float = 0.1
    tau_scale: str = "one"
    nv: int = 128
    lv: float = 20.0
    dt: float = 0.1
    t_final: float = 6.0
    backend: str = "ae"
    stepper: str = "ap"
    b_ll: float = 1.0 / (4.0 * math.pi)
    b_hh: float = 1.0 / (4.0 * math.pi)
    b_lh: float = 1.0 / (8.0 * math.pi)
    b_hl: float = 1.0 / (8.0 * math.pi)
    n_l: float = 1.0
    t_l: float = 3.0
    u_l1: tuple[float, float] = (1.2, 0.0)
    u_l2: tuple[float, float] = (-0.5, 0.0)
    n_h: float = 1.0
    t_h: float = 0.5
    u_h1: tuple[float, float] = (-1.2, 0.0)
    u_h2: tuple[float, float] = (0.5, 0.0)
    n_rho: int = 0          # 0 selects n_rho = nv
    n_rho_sp: int = 0       # SP gain sums; 0 reuses n_rho
    n_sigma: int = 16
    dealias: bool = True
    heavy_transform: str = "separable"
    lemma_bracket: bool = False
    intra: bool = True
    mass_fix: bool = False
    nv_list: tuple[int, ...] = (30, 60, 120)
    nv_ae: int = 160
    nv_ref: int = 1280
    ode_dt: float = 0.01
    output_dir: str = "out"

    @property
    def tau(self) -> float:
        try:
            return resolve_tau(_tau_value(self.tau_scale), self.eps)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def kernels(self) -> Kernels:
        return Kernels(self.b_ll, self.b_hh, self.b_lh, self.b_hl)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def replace(self, **changes) -> "SimConfig":
        return validate(dataclasses.replace(self, **changes))


def _tau_value(raw: str) -> float | str:
    return raw if raw in TAU_SCALES else float(raw)


_FIELDS = {f.name: f for f in fields(SimConfig)}


def _parse_value(name: str, raw: str, lineno: int | None):
    where = f"line {lineno}: " if lineno else ""
    kind = _FIELDS[name].type
    try:
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false"):
                raise ValueError("expected true or false")
            return low == "true"
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "tuple[float, float]":
            parts = [float(p) for p in raw.split(",")]
            if len(parts) != 2:
                raise ValueError("expected two comma-separated numbers")
            return tuple(parts)
        if kind == "tuple[int, ...]":
            return tuple(int(p) for p in raw.split(",") if p.strip())
        if name == "tau_scale":
            if raw not in TAU_SCALES:
                float(raw)
            return raw
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}invalid value {raw!r} for {name}: {exc}") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def validate(cfg: SimConfig) -> SimConfig:
    """Check invariants; raise :class:`ConfigError` listing every violation."""
    bad = []
    if not (0.0 < cfg.eps <= 1.0):
        bad.append("eps must lie in (0, 1]")
    try:
        tau = _tau_value(cfg.tau_scale)
        if not isinstance(tau, str) and not tau > 0:
            bad.append("tau_scale must be one, eps, eps2 or a positive number")
    except ValueError:
        bad.append("tau_scale must be one, eps, eps2 or a positive number")
    for name in ("nv", "nv_ae", "nv_ref"):
        v = getattr(cfg, name)
        if v < 4 or v % 2:
            bad.append(f"{name} must be an even integer >= 4")
    for name in ("lv", "dt", "b_ll", "b_hh", "b_lh", "b_hl", "n_l", "t_l", "n_h", "t_h", "ode_dt"):
        v = getattr(cfg, name)
        if not (math.isfinite(v) and v > 0):
            bad.append(f"{name} must be positive")
    if not (math.isfinite(cfg.t_final) and cfg.t_final >= 0):
        bad.append("t_final must be nonnegative")
    elif cfg.dt > 0 and abs(cfg.n_steps * cfg.dt - cfg.t_final) > 1e-9 * max(1.0, cfg.t_final):
        bad.append("t_final must be an integer multiple of dt")
    if cfg.backend not in ("ae", "sp"):
        bad.append("backend must be ae or sp")
    if cfg.stepper not in ("ap", "euler"):
        bad.append("stepper must be ap or euler")
    if cfg.heavy_transform not in ("direct", "separable"):
        bad.append("heavy_transform must be direct or separable")
    for name in ("n_rho", "n_rho_sp"):
        v = getattr(cfg, name)
        if v < 0 or v == 1:
            bad.append(f"{name} must be 0 (auto) or >= 2")
    if cfg.n_sigma < 2:
        bad.append("n_sigma must be >= 2")
    nvl = cfg.nv_list
    if len(nvl) < 2 or any(b != 2 * a for a, b in zip(nvl, nvl[1:])) or any(v < 4 or v % 2 for v in nvl):
        bad.append("nv_list needs at least two even sizes, each double the previous")
    if cfg.nv_ref < cfg.nv_ae or cfg.nv_ref % cfg.nv_ae:
        bad.append("nv_ref must be a multiple of nv_ae")
    for name in ("u_l1", "u_l2", "u_h1", "u_h2"):
        if not all(math.isfinite(x) for x in getattr(cfg, name)):
            bad.append(f"{name} must be finite")
    if bad:
        raise ConfigError("invalid configuration: " + "; ".join(bad))
    if cfg.backend == "sp" and cfg.eps < 0.05:
        warnings.warn("SP backend below eps = 0.05 needs nv proportional to 1/eps", RuntimeWarning,
                      stacklevel=3)
    return cfg


def parse_config(text: str, overrides: Iterable[str] = ()) -> SimConfig:
    """Parse a ``key = value`` document (plus ``key=value`` overrides) into a config."""
    values: dict[str, object] = {}
    entries = [(i, line) for i, line in enumerate(text.splitlines(), start=1)]
    entries += [(None, o) for o in overrides]
    for lineno, line in entries:
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"line {lineno}: " if lineno else "override: "
        if "=" not in body:
            raise ConfigError(f"{where}expected 'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{where}unknown key {key!r}")
        if not raw:
            raise ConfigError(f"{where}missing value for {key!r}")
        values[key] = _parse_value(key, raw, lineno)
    return validate(SimConfig(**values))


def serialize_config(cfg: SimConfig) -> str:
    return "".join(f"{f.name} = {_format_value(getattr(cfg, f.name))}\n" for f in fields(SimConfig))


def load_config(path: str | os.PathLike | None, overrides: Iterable[str] = ()) -> SimConfig:
    if path is None:
        return parse_config("", overrides)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config(text, overrides)


# -- CSV ----------------------------------------------------------------------

def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Header plus rows; floats use 17 significant digits, LF newlines, UTF-8."""
    path = Path(path)
    rows = [list(r) for r in rows]
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"row of length {len(r)} does not match header of length {len(header)}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_cell(x) for x in r])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            data = list(csv.reader(fh))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from None
    return data[0], data[1:]


# -- runs ---------------------------------------------------------------------

def initial_state(cfg: SimConfig, nv: int | None = None) -> MixtureState:
    grid = build_cartesian(cfg.nv if nv is None else nv, cfg.lv)
    f_L = double_peak(grid, cfg.n_l, cfg.t_l, cfg.u_l1, cfg.u_l2)
    f_H = double_peak(grid, cfg.n_h, cfg.t_h, cfg.u_h1, cfg.u_h2)
    return MixtureState(f_L, f_H, grid, 0.0)


def collision_model(cfg: SimConfig, grid, backend: str | None = None) -> CollisionModel:
    return CollisionModel(grid, cfg.eps, backend or cfg.backend, cfg.kernels,
                          n_rho=cfg.n_rho or None, n_sigma=cfg.n_sigma, dealias=cfg.dealias,
                          heavy_transform=cfg.heavy_transform, intra=cfg.intra,
                          mass_fix=cfg.mass_fix, n_rho_sp=cfg.n_rho_sp or None)


def simulate(cfg: SimConfig, nv: int | None = None, backend: str | None = None,
             callback: Callable[[int, MixtureState], None] | None = None
             ) -> tuple[MixtureState, CollisionModel]:
    """Run ``cfg.n_steps`` steps; ``callback(k, state)`` sees the state at step ``k``."""
    state = initial_state(cfg, nv)
    model = collision_model(cfg, state.grid, backend)
    step_cfg = StepConfig(cfg.dt, cfg.tau, model, cfg.lemma_bracket)
    step = ap_step if cfg.stepper == "ap" else euler_step
    if callback:
        callback(0, state)
    for k in range(1, cfg.n_steps + 1):
        state = step(state, step_cfg)
        state = MixtureState(state.f_L, state.f_H, state.grid, k * cfg.dt)
        if callback:
            callback(k, state)
    return state, model


def _l2(f: np.ndarray, area: float) -> float:
    return float(np.sqrt(np.sum(f * f) * area))


def centered_maxwellian(f: np.ndarray, grid) -> np.ndarray:
    """Maxwellian with the density and kinetic energy of ``f`` and zero mean velocity."""
    U = moments(f, grid)
    return maxwellian(MacroState(U.n, (0.0, 0.0), 0.5 * U.energy / U.n), grid)


def moment_row(state: MixtureState, eps: float) -> list[float]:
    UL, UH = state.macro()
    return [state.t, UL.n, *UL.u, UL.T, UH.n, *UH.u, eps * UH.u[0], eps * UH.u[1], UH.T]


def entropy_row(state: MixtureState) -> list[float]:
    g = state.grid
    ML0 = centered_maxwellian(state.f_L, g)
    MH = maxwellian(moments(state.f_H, g), g)
    return [state.t, relative_entropy(state.f_L, ML0, g), relative_entropy(state.f_H, MH, g),
            _l2(state.f_L - ML0, g.cell_area), _l2(state.f_H - MH, g.cell_area)]


def run_epochal(cfg: SimConfig, out_dir: str | os.PathLike | None = None) -> dict[str, Path]:
    """AP run writing per-step moments and entropy tables (plus the macro reference at tau = eps^2)."""
    if cfg.stepper != "ap":
        raise ConfigError("run_epochal requires stepper = ap")
    out = Path(out_dir or cfg.output_dir)
    mom, ent = [], []

    def record(k, state):
        mom.append(moment_row(state, cfg.eps))
        ent.append(entropy_row(state))

    simulate(cfg, callback=record)
    files = {"moments": write_csv(out / "moments.csv", MOMENT_COLUMNS, mom),
             "entropy": write_csv(out / "entropy.csv", ENTROPY_COLUMNS, ent)}
    if cfg.tau_scale == "eps2":
        r0 = mom[0]
        ref = relax_temperatures(MacroPair(r0[4], r0[10], r0[1], r0[5], cfg.b_hl), cfg.ode_dt, cfg.t_final)
        files["macro"] = write_csv(out / "macro.csv", MACRO_COLUMNS, ref.tolist())
    return files


def convergence_table(finals: dict[int, MixtureState]) -> list[list]:
    """Rows ``(species, nv, e_rel, slope)`` from final states on nested grids."""
    rows = []
    nvs = sorted(finals)
    for species in ("L", "H"):
        prev = None
        for coarse, fine in zip(nvs, nvs[1:]):
            ff = getattr(finals[fine], f"f_{species}")
            fc = getattr(finals[coarse], f"f_{species}")
            fr = restrict(ff, coarse)
            e = float(np.linalg.norm(fr - fc) / np.linalg.norm(fr))
            slope = math.log2(prev / e) if prev is not None and e > 0 and prev > 0 else float("nan")
            rows.append([species, fine, e, slope])
            prev = e
    return rows


def run_convergence(cfg: SimConfig, nv_list: Sequence[int] | None = None,
                    out_dir: str | os.PathLike | None = None) -> list[list]:
    """Identical physics on nested grids; errors ``||f_N - f_{N/2}|| / ||f_N||`` on coarse nodes."""
    nv_list = tuple(nv_list or cfg.nv_list)
    cfg.replace(nv_list=nv_list)
    finals = {nv: simulate(cfg, nv)[0] for nv in nv_list}
    rows = convergence_table(finals)
    if out_dir is not None:
        write_csv(Path(out_dir) / "convergence.csv", CONVERGENCE_COLUMNS, rows)
    return rows


def run_compare(cfg: SimConfig, nv_ae: int | None = None, nv_ref: int | None = None,
                out_dir: str | os.PathLike | None = None, ref_backend: str = "sp") -> list:
    """AE run against a reference (SP by default) on a nested grid; returns the compare row."""
    nv_ae = nv_ae or cfg.nv_ae
    nv_ref = nv_ref or cfg.nv_ref
    cfg.replace(nv_ae=nv_ae, nv_ref=nv_ref)
    ae, m_ae = simulate(cfg, nv_ae, backend="ae")
    ref, m_ref = simulate(cfg, nv_ref, backend=ref_backend)
    errs = []
    for species in ("L", "H"):
        fr = restrict(getattr(ref, f"f_{species}"), nv_ae)
        errs.append(float(np.linalg.norm(getattr(ae, f"f_{species}") - fr) / np.linalg.norm(fr)))
    row = [cfg.eps, nv_ae, nv_ref, errs[0], errs[1], m_ae.elapsed, m_ref.elapsed]
    if out_dir is not None:
        write_csv(Path(out_dir) / "compare.csv", COMPARE_COLUMNS, [row])
    return row


def run_single_step(cfg: SimConfig, out_dir: str | os.PathLike | None = None) -> dict[str, Path]:
    """One step from the initial data; writes moments before/after and the fields."""
    out = Path(out_dir or cfg.output_dir)
    one = cfg.replace(t_final=cfg.dt)
    states = []
    simulate(one, callback=lambda k, s: states.append(s))
    files = {"moments": write_csv(out / "moments.csv", MOMENT_COLUMNS,
                                  [moment_row(s, cfg.eps) for s in states])}
    path = out / "fields.npz"
    try:
        np.savez(path, v=states[0].grid.nodes, f_L0=states[0].f_L, f_H0=states[0].f_H,
                 f_L1=states[1].f_L, f_H1=states[1].f_H)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    files["fields"] = path
    return files


def time_inter_operator(nv: int, eps: float, backend: str, repeats: int = 3,
                        heavy_transform: str = "direct", n_rho: int | None = None,
                        cfg: SimConfig | None = None) -> float:
    """Best-of-``repeats`` wall time of one inter-species evaluation (tables excluded)."""
    cfg = cfg or SimConfig()
    cfg = cfg.replace(eps=eps, nv=nv, heavy_transform=heavy_transform, intra=False,
                      n_rho=n_rho or 0)
    state = initial_state(cfg, nv)
    model = collision_model(cfg, state.grid, backend)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        model.inter(state.f_L, state.f_H)
        best = min(best, time.perf_counter() - t0)
    return best
