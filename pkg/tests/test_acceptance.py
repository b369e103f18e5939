"""Acceptance suite: one check per acceptance criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the report lines;
``-m "not slow"`` skips the long runs (criteria 4 to 8).
"""
import contextlib
import math
import warnings

import numpy as np
import pytest

from dispkin.ae import q_hl0, q_hl1, q_lh0, q_lh1, q_lh2, species_moments
from dispkin.experiments import (SimConfig, collision_model, initial_state, run_compare,
                                 run_convergence, simulate, time_inter_operator)
from dispkin.grid import build_cartesian, restrict
from dispkin.intra import precompute_intra_modes, q_intra
from dispkin.macro import MacroPair, relax_temperatures
from dispkin.moments import MacroState, maxwellian, moments, relative_entropy
from dispkin.sp import precompute_sp_modes, sp_pair
from dispkin.stepper import StepConfig, ap_step, resolve_tau, update_moments

from oracles.intra_direct import direct_q

B = 1.0 / (8.0 * np.pi)
B_INTRA = 1.0 / (4.0 * np.pi)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title}: {detail}")
        assert ok, detail
    return emit


@contextlib.contextmanager
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


def _cutoff(grid, r0=5.0, width=2.0):
    """Smooth function equal to 1 for |v| < r0 and 0 for |v| > r0 + width."""
    r = np.hypot(*grid.mesh)

    def s(x):
        return np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)

    x = (r0 + width - r) / width
    return s(x) / (s(x) + s(1.0 - x))


def _random_mixture(grid, rng, T_range, chi):
    V1, V2 = grid.mesh
    f = np.zeros_like(V1)
    for _ in range(rng.integers(1, 4)):
        u = rng.uniform(-0.8, 0.8, 2)
        T = rng.uniform(*T_range)
        w = rng.uniform(0.3, 1.0)
        f += w / (2 * np.pi * T) * np.exp(-((V1 - u[0]) ** 2 + (V2 - u[1]) ** 2) / (2 * T))
    return f * chi


def _gaussian(grid, n, u, T):
    V1, V2 = grid.mesh
    return n / (2 * np.pi * T) * np.exp(-((V1 - u[0]) ** 2 + (V2 - u[1]) ** 2) / (2 * T))


# -- 1 ------------------------------------------------------------------------

def test_criterion_01_conservation(report):
    """Moment defects relative to the loss scale 2 pi B n_partner int f |phi|."""
    g = build_cartesian(128, 20.0)
    V1, V2 = g.mesh
    E = V1**2 + V2**2
    one = np.ones_like(V1)
    eps = 0.05
    chi = _cutoff(g)
    spk = precompute_sp_modes(g, eps)
    ik = precompute_intra_modes(g, B_INTRA)
    rng = np.random.default_rng(2024)
    worst = {"ae": 0.0, "sp": 0.0, "intra": 0.0}
    for _ in range(10):
        fl = _random_mixture(g, rng, (0.8, 2.0), chi)
        fh = _random_mixture(g, rng, (0.4, 0.8), chi)
        L, H = species_moments(fl, g), species_moments(fh, g)

        def sL(phi):
            return 2 * np.pi * B * H.n * (fl * np.abs(phi)).sum()

        def sH(phi):
            return 2 * np.pi * B * L.n * (fh * np.abs(phi)).sum()

        def sI(phi):
            return 2 * np.pi * B_INTRA * L.n * (fl * np.abs(phi)).sum()

        def m(q, phi):
            return abs((q * phi).sum())

        lh = [q_lh0(fl, H, g), q_lh1(fl, H, g), q_lh2(fl, H, g)]
        hl = [q_hl0(fh, L, g), q_hl1(fh, L, g)]
        ae = [m(q, one) / sL(one) for q in lh] + [m(q, one) / sH(one) for q in hl]
        for i in (0, 1):
            ae += [m(lh[i] + hl[i], V) / (sL(V) + sH(V)) for V in (V1, V2)]
        ae += [m(lh[0], E) / sL(E)]
        ae += [m(lh[i] + hl[i - 1], E) / (sL(E) + sH(E)) for i in (1, 2)]
        worst["ae"] = max(worst["ae"], *ae)

        with _quiet():
            ql, qh = sp_pair(fl, fh, spk)
            qi = q_intra(fl, ik)
        sp = [m(ql, one) / sL(one), m(qh, one) / sH(one)]
        sp += [m(ql + qh, V) / (sL(V) + sH(V)) for V in (V1, V2)]
        sp += [m(ql + eps * qh, E) / (sL(E) + eps * sH(E))]
        worst["sp"] = max(worst["sp"], *sp)
        worst["intra"] = max(worst["intra"], *[m(qi, w) / sI(w) for w in (one, V1, V2, E)])
    ok = worst["ae"] <= 1e-4 and worst["sp"] <= 1e-6 and worst["intra"] <= 1e-6
    report(1, "conservation suite", ok,
           f"max defect AE {worst['ae']:.2e} (tol 1e-4), SP {worst['sp']:.2e} (tol 1e-6), "
           f"intra {worst['intra']:.2e} (tol 1e-6)")


# -- 2 ------------------------------------------------------------------------

def test_criterion_02_vanishing(report):
    g = build_cartesian(128, 20.0)
    V1, V2 = g.mesh
    r2 = V1**2 + V2**2
    fh = _gaussian(g, 1.0, (-0.4, 0.3), 0.6) + _gaussian(g, 0.5, (0.8, 0.0), 0.8)
    H = species_moments(fh, g)
    worst_lh = 0.0
    for fl in (_gaussian(g, 1.0, (0, 0), 2.0), r2 * np.exp(-r2 / 3.0) / (9 * np.pi)):
        scale = 2 * np.pi * B * H.n * np.abs(fl).max()
        worst_lh = max(worst_lh, np.abs(q_lh0(fl, H, g)).max() / scale)
    even = 0.5 * _gaussian(g, 1.0, (1.2, 0.0), 3.0) + 0.5 * _gaussian(g, 1.0, (-1.2, 0.0), 3.0)
    L = species_moments(even, g)
    q = q_hl0(fh, L, g)
    worst_hl = np.abs(q).max() / (2 * np.pi * B * L.n * np.abs(fh).max())
    ok = worst_lh <= 1e-4 and worst_hl <= 1e-4
    report(2, "vanishing properties", ok,
           f"q_lh0 on radial input {worst_lh:.2e}, q_hl0 on even input {worst_hl:.2e} (tol 1e-4)")


# -- 3 ------------------------------------------------------------------------

def test_criterion_03_lemma_identities(report):
    g = build_cartesian(128, 20.0)
    V1, V2 = g.mesh
    dA = g.cell_area
    E = V1**2 + V2**2
    cases = [((1.0, (0.35, 0.0), 3.36), (1.0, (-0.35, 0.0), 0.86)),
             ((0.8, (0.3, -0.2), 2.0), (1.2, (-0.5, 0.4), 0.6)),
             ((1.0, (0.0, 0.5), 1.5), (1.0, (0.2, 0.1), 1.0))]
    worst = np.zeros(5)
    for a, b in cases:
        fl, fh = _gaussian(g, *a), _gaussian(g, *b)
        L, H = species_moments(fl, g), species_moments(fh, g)
        h0, h1, l2 = q_hl0(fh, L, g), q_hl1(fh, L, g), q_lh2(fl, H, g)
        c = 2 * np.pi * B * L.n * H.n
        dT = 2 * H.T - 2 * L.T + H.u @ H.u - L.u @ L.u

        def vec(q):
            return np.array([(q * V1).sum(), (q * V2).sum()]) * dA

        got = [vec(h0), (h0 * E).sum() * dA, vec(h1), vec(l2), (h1 * E).sum() * dA]
        ref = [c * L.u, 2 * c * (L.u @ H.u), -c * H.u, c * L.u, -2 * c * dT]
        for k, (x, y) in enumerate(zip(got, ref)):
            worst[k] = max(worst[k], np.abs(np.asarray(x) - y).max() / np.abs(y).max())
    names = ["HL0.v", "HL0.|v|^2", "HL1.v", "LH2.v", "HL1.|v|^2"]
    ok = worst.max() <= 1e-4
    report(3, "moment identities", ok,
           ", ".join(f"{n} {w:.1e}" for n, w in zip(names, worst)) + " (tol 1e-4)")


# -- 4 ------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_04_ae_vs_sp(report):
    # SP gain sums need about nv/2 radial nodes at small eps; 640 is the smallest
    # reference commensurable with nv_ae = 160 above nv = 512
    cfg = SimConfig(eps=0.05, stepper="euler", dt=0.1, t_final=1.0, n_rho=32, n_rho_sp=360,
                    n_sigma=16, dealias=False, nv_ae=160, nv_ref=640)
    with _quiet():
        row = run_compare(cfg)
    E_L, E_H = row[3], row[4]
    ok = E_L <= 5e-3 and E_H <= 5e-4
    report(4, "AE vs SP cross-validation", ok,
           f"E_L {E_L:.2e} (tol 5e-3), E_H {E_H:.2e} (tol 5e-4), SP reference nv {row[2]}, "
           f"{row[6]:.0f} s")


# -- 5 ------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_05_convergence_orders(report):
    cfg = SimConfig(eps=0.1, stepper="euler", dt=0.025, t_final=0.5, n_rho=16, n_sigma=8,
                    dealias=False, nv_list=(120, 240, 480))
    with _quiet():
        rows = run_convergence(cfg)
    slope = {r[0]: r[3] for r in rows if r[1] == 480}
    ok = 0.7 <= slope["L"] <= 1.3 and 1.5 <= slope["H"] <= 2.3
    errs = ", ".join(f"e_{r[0]}({r[1]}) {r[2]:.2e}" for r in rows)
    report(5, "convergence orders", ok,
           f"slopes 240->480: f_L {slope['L']:.2f} (want 0.7-1.3), f_H {slope['H']:.2f} "
           f"(want 1.5-2.3); {errs}")


# -- 6 ------------------------------------------------------------------------

def _sp_self_errors(eps, nvs):
    """Nested self-convergence e(N) = ||q_2N - q_N|| / ||q_2N|| of the SP pair on the initial data."""
    cfg = SimConfig(eps=eps)
    outs = {}
    for nv in nvs:
        state = initial_state(cfg, nv)
        k = precompute_sp_modes(state.grid, eps, n_rho=nv // 2, dealias=False)
        with _quiet():
            outs[nv] = sp_pair(state.f_L, state.f_H, k, warn_support=False)
    errs = {}
    for coarse, fine in zip(nvs, nvs[1:]):
        e = 0.0
        for i in (0, 1):
            ref = restrict(outs[fine][i], coarse)
            e = max(e, float(np.linalg.norm(outs[coarse][i] - ref) / np.linalg.norm(ref)))
        errs[coarse] = e
    return errs


def _crossing(errs, target):
    """Log-log interpolated N at which the error first drops below ``target``."""
    ns = sorted(errs)
    for a, b in zip(ns, ns[1:]):
        if errs[a] > target >= errs[b]:
            t = math.log(errs[a] / target) / math.log(errs[a] / errs[b])
            return math.exp(math.log(a) + t * math.log(b / a))
    return float("nan")


@pytest.mark.slow
def test_criterion_06_resolution_law(report):
    # the heavy error falls from ~1 to a few 1e-2 over one doubling once the
    # band limit pi eps N / (2 lv) passes the heavy spectrum; 0.1 sits inside it
    target = 1e-1
    e02 = _sp_self_errors(0.2, (64, 128, 256, 512))
    e01 = _sp_self_errors(0.1, (128, 256, 512, 1024))
    n02, n01 = _crossing(e02, target), _crossing(e01, target)
    ratio = n01 / n02
    ok = 1.5 <= ratio <= 3.0
    fmt = lambda e: ", ".join(f"{n}:{v:.1e}" for n, v in sorted(e.items()))
    report(6, "SP resolution law", ok,
           f"N at error {target:g}: eps 0.2 -> {n02:.0f}, eps 0.1 -> {n01:.0f}, ratio {ratio:.2f} "
           f"(want 1.5-3); e(eps=0.2) {fmt(e02)}; e(eps=0.1) {fmt(e01)}")


# -- 7 ------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_07_slowest_scale(report):
    cfg = SimConfig(eps=0.01, tau_scale="eps2", dt=0.1, t_final=40.0, nv=128, n_rho=32,
                    dealias=False)
    rows = []
    with _quiet():
        simulate(cfg, callback=lambda k, s: rows.append((s.t, *(U.T for U in s.macro()))))
    rows = np.array(rows)
    ref = relax_temperatures(MacroPair(rows[0, 1], rows[0, 2]), cfg.ode_dt, cfg.t_final)
    ref_T = np.column_stack([np.interp(rows[:, 0], ref[:, 0], ref[:, j]) for j in (1, 2)])
    early = rows[:, 0] <= 10.0 + 1e-9
    gap = np.abs(rows[early, 1] - ref_T[early, 0]).max()
    end = rows[-1, 1:]
    ok = gap <= 0.05 and np.all(np.abs(end - 1.75) <= 0.02)
    report(7, "slowest-scale relaxation", ok,
           f"max |T_L - T_ref| on [0,10] {gap:.3f} (tol 0.05); at t=40 T_L {end[0]:.3f}, "
           f"T_H {end[1]:.3f} (want 1.75 +- 0.02; macro equilibrium {ref[-1, 1]:.4f})")


# -- 8 ------------------------------------------------------------------------

def _epochal(eps, tau_scale, t_final=6.0):
    cfg = SimConfig(eps=eps, tau_scale=tau_scale, dt=0.1, t_final=t_final, nv=128, n_rho=32,
                    dealias=False)
    rows = []

    def record(k, s):
        UL, UH = s.macro()
        ML0 = maxwellian(MacroState(UL.n, (0.0, 0.0), 0.5 * UL.energy / UL.n), s.grid)
        rows.append((s.t, np.linalg.norm(UL.u_vec - eps * UH.u_vec), UL.T, UH.T,
                     relative_entropy(s.f_L, ML0, s.grid)))

    with _quiet():
        simulate(cfg, callback=record)
    return np.array(rows)


@pytest.mark.slow
def test_criterion_08_fast_and_intermediate_scales(report):
    eps = 0.01
    fast = _epochal(eps, "one")
    w = fast[1:, 1]
    mono = bool(np.all(np.diff(w) <= 0))
    w_end = fast[-1, 1]
    mid = _epochal(eps, "eps")
    dTL = np.ptp(mid[:, 2])
    dTH = np.ptp(mid[:, 3])
    H = {e: _epochal(e, "one")[:, 4] for e in (1e-3, 1e-4)}
    H[eps] = fast[:, 4]
    H0 = max(abs(h[0]) for h in H.values())
    spread = max(np.abs(H[a] - H[b]).max() for a in H for b in H if a < b) / H0
    ok = mono and w_end < 10 * eps and dTL <= 5 * eps and dTH <= 5 * eps and spread <= 0.05
    report(8, "fast and intermediate scales", ok,
           f"tau=1: |u_L - eps u_H| monotone after step 1 {mono}, at t=6 {w_end:.3f} (tol {10 * eps:g}); "
           f"tau=eps: variation T_L {dTL:.3f}, T_H {dTH:.3f} (tol {5 * eps:g}); "
           f"H(f_L) spread over eps {spread:.2e} of H0 (tol 0.05)")


# -- 9 ------------------------------------------------------------------------

def test_criterion_09_moment_consistency(report):
    cfg = SimConfig(eps=0.1, nv=128, n_rho=32, dealias=False)
    state = initial_state(cfg)
    model = collision_model(cfg, state.grid)
    gaps = []
    for dt in (0.2, 0.1, 0.05):
        info = {}
        with _quiet():
            new = ap_step(state, StepConfig(dt, 1.0, model), info)
        UL, UH = new.macro()
        tl, th = info["update"].U_L, info["update"].U_H
        gaps.append([abs(UL.n - tl.n), *np.abs(UL.u_vec - tl.u_vec), abs(UL.T - tl.T),
                     abs(UH.n - th.n), *np.abs(cfg.eps * (UH.u_vec - th.u_vec)), abs(UH.T - th.T)])
    gaps = np.array(gaps)
    total = gaps.max(axis=1)
    orders = np.log2(total[:-1] / total[1:])
    ok = orders.min() >= 2.5
    report(9, "moment-update consistency", ok,
           f"max moment gap {', '.join(f'{x:.2e}' for x in total)} at dt 0.2/0.1/0.05, "
           f"observed orders {', '.join(f'{o:.2f}' for o in orders)} (want >= 2.5)")


# -- 10 -----------------------------------------------------------------------

def test_criterion_10_oracles(report):
    worst = 0.0
    U_L = MacroState(1.0, (0.35, -0.2), 3.0)
    U_H = MacroState(0.8, (-1.1, 0.4), 0.5)
    dt = 0.1
    for eps in (1e-2, 1e-4):
        for scale in ("one", "eps", "eps2"):
            tau = resolve_tau(scale, eps)
            r = update_moments(U_L, U_H, eps, tau, dt)
            c = 2 * np.pi * B * dt
            A = np.array([[1 + c * U_H.n / tau, -c * U_H.n * eps / tau],
                          [-c * U_L.n * eps / tau, 1 + c * U_L.n * eps**2 / tau]])
            for d in range(2):
                rhs = np.array([U_L.u[d] * (1 + c * U_H.n * eps**2 / tau), U_H.u[d]])
                x = np.linalg.solve(A, rhs)
                got = np.array([r.U_L.u[d], r.U_H.u[d]])
                worst = max(worst, np.abs(got - x).max() / np.abs(x).max())
    g = build_cartesian(16, 20.0)
    f = 0.5 * _gaussian(g, 1.0, (1.2, 0.0), 3.0) + 0.5 * _gaussian(g, 1.0, (-0.5, 0.0), 3.0)
    # the oracle integrates the angle exactly, so the half-circle rule is converged here
    k = precompute_intra_modes(g, B_INTRA, n_sigma=32)
    q = q_intra(f, k, warn_support=False)
    ref = direct_q(f, g.half_width, B_INTRA, k.R)
    intra = np.abs(q - ref).max() / np.abs(ref).max()
    ok = worst <= 1e-12 and intra <= 1e-6
    report(10, "oracle equivalences", ok,
           f"moment update vs 2x2 solve {worst:.1e} (tol 1e-12), q_intra vs direct sum N=16 "
           f"{intra:.1e} (tol 1e-6)")


# -- 11 -----------------------------------------------------------------------

def test_criterion_11_cost_scaling(report):
    t = {}
    for nv in (64, 128):
        t["ae", nv] = time_inter_operator(nv, 0.05, "ae", repeats=5)
        t["sp", nv] = time_inter_operator(nv, 0.05, "sp", repeats=3, heavy_transform="direct")
    t_small_eps = time_inter_operator(128, 0.005, "ae", repeats=5)
    r_ae = t["ae", 128] / t["ae", 64]
    r_sp = t["sp", 128] / t["sp", 64]
    drift = abs(t_small_eps / t["ae", 128] - 1.0)
    ok = r_ae <= 6.0 and r_sp >= 12.0 and drift <= 0.2
    report(11, "cost scaling", ok,
           f"AE x{r_ae:.1f} per doubling (tol 6), SP direct x{r_sp:.1f} (want >= 12), "
           f"AE eps 0.05 vs 0.005 differ {100 * drift:.0f}% (tol 20%)")
