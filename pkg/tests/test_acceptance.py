"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (printed live and again in the pytest
terminal summary).  The long runs are marked ``slow``; deselect them with
``-m "not slow"``.
"""

import time

import numpy as np
import pytest

from ugks.collision import (CollisionModel, SpectralKernel, boltzmann_Q, build_kernel,
                            conserve_fix, direct_Q_oracle, moments_of_rate)
from ugks.config import default_config
from ugks.experiments import run_relaxation, run_shock_structure, run_sod
from ugks.hybrid import D_CLAMP, beta, cell_collision_update, critical_time, split_weights
from ugks.kinetic import (GasProperties, MacroState, build_grid, conserved, maxwellian,
                          maxwellian_array, primitives)
from ugks.mesh import uniform_mesh
from ugks.solver import (BoundarySpec, CollisionSettings, Solver, cfl_timestep,
                         homogeneous_step)

from conftest import smooth_positive
from test_hybrid import nonnegative_gain, random_nonnegative
from test_solver import independent_upwind_step, periodic_state

FAMILIES = ("anisotropic", "double_half_normal", "tailored_half_maxwellian")


# --- 1. relaxation equivalence ------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("case,temps,t_min", [(1, (273.0, 373.0, 273.0), 0.2),
                                              (2, (273.0, 5460.0, 273.0), 2.0)])
@pytest.mark.parametrize("family", FAMILIES)
def test_relaxation_equivalence(family, case, temps, t_min, report):
    cfg = default_config("relax")
    cfg.case.family = family
    cfg.case.temps = list(temps)
    assert cfg.velocity.points == 32 and cfg.velocity.half_width == 8.0
    t0 = time.perf_counter()
    res = run_relaxation(cfg, ("shakhov", "hybrid", "boltzmann"))
    sel = res.times >= t_min - 1e-12
    worst = max(float(res.discrepancy(op)[sel].max()) for op in ("hybrid", "boltzmann"))
    ok = worst < 0.02
    report(f"1.{case}.{family}", ok,
           f"max Linf/peak for t >= {t_min} tau_r: {worst:.4f} (limit 0.02), T0 = {res.T0:.1f} K, "
           f"D0 = {res.D0:.3f}, {time.perf_counter() - t0:.0f} s")
    assert ok


# --- 2. transform equivalence ---------------------------------------------

def test_transform_equivalence(report):
    g = build_grid(5.0, 8)
    rng = np.random.default_rng(2)
    lj = CollisionModel("lj").kernel_terms()
    cases = [("hs", CollisionModel("hs").kernel_terms()),
             ("vhs", CollisionModel("vhs", omega=0.81).kernel_terms())]
    cases += [(f"lj[{i}]", [t]) for i, t in enumerate(lj)]
    errs = {}
    for name, terms in cases:
        k = SpectralKernel(g, terms, modes=8)
        f = smooth_positive(rng, g)
        Qd = direct_Q_oracle(f, k)
        errs[name] = float(np.max(np.abs(boltzmann_Q(f, k, fix=False) - Qd)) / np.max(np.abs(Qd)))
    worst = max(errs.values())
    ok = worst < 1e-12
    report("2", ok, "K = 8 relative error " +
           ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + " (limit 1e-12)")
    assert ok


# --- 3. equilibrium annihilation ------------------------------------------

def test_equilibrium_annihilation(report):
    res = {}
    for K in (16, 24, 32):
        g = build_grid(8.0, K)
        k = build_kernel(CollisionModel("hs"), g)
        M = maxwellian(MacroState(1.0, [0, 0, 0], 1.0), g)
        gain, nu = k.gain_loss(M)
        res[K] = float(np.max(np.abs(gain - nu * M)) / np.max(np.abs(nu * M)))
    ok = res[32] < 1e-5 and res[16] > res[24] > res[32]
    report("3", ok, "||Q(M,M)||/||nu M|| " + ", ".join(f"K={K}: {v:.2e}" for K, v in res.items())
           + " (K=32 limit 1e-5, monotone)")
    assert ok


# --- 4. conservation ---------------------------------------------------------

def test_conservation(report):
    rng = np.random.default_rng(4)
    # (a) conserve_fix
    g = build_grid(6.0, 16)
    model = CollisionModel("hs", mu_ref=1.0)
    k = build_kernel(model, g)
    fix_err = 0.0
    for _ in range(5):
        f = smooth_positive(rng, g, scale=0.5)
        Q = boltzmann_Q(f, k)
        scale = np.abs(k.frequency(f) * f).sum() * g.weight
        fix_err = max(fix_err, float(np.max(np.abs(moments_of_rate(Q, g))) / scale))
    # (b) 1000 homogeneous hybrid steps
    g12 = build_grid(6.0, 12)
    kk = build_kernel(model, g12)
    f = maxwellian_array(1.0, [0.2, 0, 0], 1.0, g12) * (1 + 0.5 * np.tanh(g12.u * g12.v))
    W0 = conserved(f, g12)
    st = CollisionSettings("hybrid", model, kk)
    for _ in range(1000):
        f, _ = homogeneous_step(f, 0.05, st, g12)
    hom_err = float(np.max(np.abs(conserved(f, g12) - W0)) / np.max(np.abs(W0)))
    # (c) periodic 1D runs, all modes
    per_err = 0.0
    mesh = uniform_mesh(0.0, 1.0, 8)
    for mode in ("hybrid", "shakhov", "boltzmann"):
        solver = Solver(mesh, g12, BoundarySpec.make_periodic(),
                        CollisionSettings(mode, CollisionModel("hs", mu_ref=0.05),
                                          build_kernel(CollisionModel("hs", mu_ref=0.05), g12)
                                          if mode != "shakhov" else None))
        s = periodic_state(solver, rng)
        dt = cfl_timestep(mesh, g12, 0.5)
        tot = (s.W * mesh.widths[:, None]).sum(0)
        for _ in range(5):
            s = solver.step(s, dt)
            new = (s.W * mesh.widths[:, None]).sum(0)
            per_err = max(per_err, float(np.max(np.abs(new - tot)) / np.max(np.abs(tot))))
            tot = new
    ok = fix_err < 1e-12 and hom_err < 1e-10 and per_err < 1e-10
    report("4", ok, f"conserve_fix moments {fix_err:.1e} (1e-12), 1000 homogeneous hybrid steps "
                    f"{hom_err:.1e} (1e-10), periodic per step {per_err:.1e} (1e-10)")
    assert ok


# --- 5. positivity and L-stability ---------------------------------------------

def test_positivity_and_l_stability(report):
    g = build_grid(6.0, 12)
    gas = GasProperties(Pr=1.0)
    k = build_kernel(CollisionModel("hs", mu_ref=0.5), g)
    rng = np.random.default_rng(5)
    worst = np.inf
    for _ in range(10000):
        f = random_nonnegative(rng, g)
        nu = np.maximum(k.frequency(f), 0.0)
        G = nonnegative_gain(f, nu, g)
        sup = nu.max()
        dt = 10 ** rng.uniform(-2, 1) / sup
        A = beta(dt, sup) * dt
        out = cell_collision_update(f, 0 * f, conserved(f, g), (A, dt - A),
                                    10 ** rng.uniform(-2, 2) / dt, g, G - nu * f, gas)
        worst = min(worst, float(out.min() / f.max()))
    gas = GasProperties()
    f = random_nonnegative(rng, g) + 1e-3
    W = conserved(f, g)
    from ugks.hybrid import shakhov_target
    Mt = shakhov_target(f, W, 1e6, g, gas)
    out = cell_collision_update(f, 0 * f, W, (0.0, 1.0), 1e6, g, None, gas)
    lstab = float(np.max(np.abs(out - Mt)) / np.max(np.abs(f - Mt)))
    ok = worst >= 0.0 and lstab < 1e-5
    report("5", ok, f"10^4 fuzz trials min f/max f = {worst:.2e} (>= 0); B/tau = 1e6 "
                    f"||f - Mt||/||f0 - Mt|| = {lstab:.1e} (1e-5)")
    assert ok


# --- 6. collisionless limit --------------------------------------------------

def test_collisionless_limit(report):
    g = build_grid(6.0, 12)
    rng = np.random.default_rng(6)
    worst = 0.0
    for n in (8, 13):
        mesh = uniform_mesh(0.0, 1.0, n)
        solver = Solver(mesh, g, BoundarySpec.make_periodic(), CollisionSettings("none"))
        for _ in range(5):
            s = periodic_state(solver, rng, amp=0.3)
            dt = cfl_timestep(mesh, g, rng.uniform(0.2, 1.0))
            new = solver.step(s, dt)
            ref = independent_upwind_step(s.f, mesh.widths[0], dt, solver.fg.u)
            worst = max(worst, float(np.max(np.abs(new.f - ref)) / np.abs(s.f).max()))
    ok = worst < 1e-13
    report("6", ok, f"UGKS step with 1/tau = 0 vs independent MUSCL upwind: {worst:.1e} (1e-13)")
    assert ok


# --- 7. Sod tube -------------------------------------------------------------

@pytest.mark.slow
def test_sod_continuum(report):
    cfg = default_config("sod")
    assert cfg.collision.kn == pytest.approx(1e-3) and cfg.mesh.cells == 100
    res = run_sod(cfg)
    ok_l1 = res.l1_error < 0.02
    ok_dt = res.dt_tau_min >= 10.0
    report("7.1", ok_l1 and ok_dt,
           f"Kn = 1e-3: L1(rho - exact) = {res.l1_error:.4f} (0.02); dt/tau in "
           f"[{res.dt_tau_min:.3g}, {res.dt_tau_max:.3g}] (need >= 10); {res.wall_time:.0f} s")
    assert ok_l1 and ok_dt


@pytest.mark.slow
def test_sod_transition_hybrid_vs_boltzmann(report):
    cfg = default_config("sod")
    cfg.collision.kn = 0.1
    cfg.mesh.cells = 50
    cfg.velocity.points = 24
    a = run_sod(cfg.with_operator("hybrid"))
    b = run_sod(cfg.with_operator("boltzmann"))
    ra = np.array([r.rho for r in a.records])
    rb = np.array([r.rho for r in b.records])
    err = float(np.mean(np.abs(ra - rb)) / np.max(rb))
    ok = err < 0.03
    report("7.2", ok, f"Kn = 0.1: L1(hybrid - Boltzmann) = {err:.2e} (0.03); Boltzmann fraction "
                      f"{a.boltzmann_fraction:.2f}; {a.wall_time + b.wall_time:.0f} s")
    assert ok


# --- 8. shock structure ------------------------------------------------------

def _smooth_at(x, y, xs, half=3):
    """Largest residual of a local quadratic fit through the cells around xs."""
    i = int(np.searchsorted(x, xs))
    lo, hi = max(0, i - half), min(x.size, i + half)
    c = np.polyfit(x[lo:hi], y[lo:hi], 2)
    return float(np.max(np.abs(np.polyval(c, x[lo:hi]) - y[lo:hi])))


def _jump_bounded(x, y, xs):
    """First difference across xs no larger than those on either side of it."""
    i = int(np.searchsorted(x, xs))          # switch lies between cells i - 1 and i
    d = np.abs(np.diff(y))
    across = d[i - 1]
    near = [d[k] for k in (i - 2, i) if 0 <= k < d.size]
    return bool(near) and across <= max(near)


@pytest.mark.slow
def test_shock_structure(report):
    cfg = default_config("shock")
    assert cfg.collision.family == "hs" and cfg.case.mach == 3.0
    assert cfg.mesh.total_cells == 60 and cfg.velocity.points == 24
    # the runtime bound is part of the criterion; stop there and judge the last iterate
    cfg.time.max_wall_time = 3600.0
    res = run_shock_structure(cfg, require_convergence=False)
    dev = float(np.max(res.flux_deviation))
    mono = bool(np.all(np.diff(res.rho_hat) > 0))
    q = res.heat_flux
    qmax = np.max(np.abs(q))
    main_sign = np.sign(q[np.argmax(np.abs(q))])
    single = bool(np.all(q * main_sign >= -1e-3 * qmax))
    x_q = float(res.x[np.argmax(np.abs(q))])
    upstream = x_q < 0.0           # x origin is the density midpoint
    kinks = [max(_smooth_at(res.x, res.rho_hat, xs), _smooth_at(res.x, res.T_hat, xs))
             for xs in res.switch_x]
    jumps = [_jump_bounded(res.x, res.rho_hat, xs) for xs in res.switch_x]
    smooth = all(kk < 5e-3 for kk in kinks) and all(jumps)
    fast = res.wall_time < 3600
    ok = res.converged and dev < 0.01 and mono and single and upstream and smooth and fast
    report("8", ok,
           f"converged to {cfg.time.residual:g}: {res.converged} (last residual "
           f"{res.residuals[-1]:.1e}); flux deviation {dev:.2e} (0.01); monotone {mono}; heat flux single-signed {single}, "
           f"extremum at x = {x_q:.2f} (upstream: {upstream}); switch at "
           f"{[round(v, 2) for v in res.switch_x]} local-fit residual "
           f"{max(kinks) if kinks else 0.0:.1e} (5e-3), first difference bounded by "
           f"neighbours {all(jumps)}; {res.steps} steps, {res.wall_time:.0f} s (3600)")
    assert ok


# --- 9. switching unit suite ---------------------------------------------------

def test_switching_suite(report, monkeypatch):
    import ugks.hybrid as hy
    checks = []
    for D, exp in [(0.05, 0.05), (1.0, 1.0), (4.0, 4.0), (7.0, 4.0)]:
        monkeypatch.setattr(hy, "distance_to_equilibrium", lambda f, g, gas=None, D=D: D)
        checks.append(critical_time(None, 1.5, None) == 1.5 * exp)
    monkeypatch.undo()
    checks.append(critical_time(None, 1.5, None, fixed=0.4) == 0.4 * 1.5)
    checks.append(D_CLAMP == 4.0)
    for x, exp in [(0.0, 1.0), (0.9, 1.0), (1.0, 1.0), (1.5, np.exp(-0.5)), (3.0, np.exp(-2.0))]:
        checks.append(abs(beta(x / 2.0, 2.0) - exp) <= 1e-15 * exp)
    eps = 1e-12
    checks.append(abs(beta(1.0 - eps, 1.0) - beta(1.0 + eps, 1.0)) < 1e-11)
    for dt, tc, b, A, B in [(0.1, 0.3, 1.0, 0.1, 0.0), (0.2, 0.3, 0.5, 0.1, 0.1),
                            (0.3, 0.3, 1.0, 0.0, 0.3), (0.5, 0.3, 0.5, 0.0, 0.5)]:
        w = split_weights(dt, tc, b)
        checks.append(abs(w.A - A) < 1e-15 and abs(w.B - B) < 1e-15)
    ok = all(checks)
    report("9", ok, f"{sum(checks)}/{len(checks)} tabulated t_c, beta, (A, B) checks exact, "
                    "including the D = 4 clamp and the join at dt sup(nu) = 1")
    assert ok
