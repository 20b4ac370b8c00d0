"""Drivers for the homogeneous relaxation, Sod tube and normal-shock runs."""

import logging
import math
import time as _time
from dataclasses import dataclass, field

import numpy as np

from .collision import CollisionModel, build_kernel, mean_free_time_ratio, mu_from_knudsen
from .errors import ConvergenceError
from .io import records_from_arrays
from .kinetic import (GasProperties, MacroState, build_grid, conserved, distance_to_equilibrium,
                      init_relaxation, primitives, relaxation_reference_temperature)
from .mesh import stretched_mesh, uniform_mesh
from .riemann import exact_riemann
from .solver import (BoundarySpec, CollisionSettings, Solver, cfl_timestep,
                     discrete_rankine_hugoniot, homogeneous_step,
                     rankine_hugoniot)

__all__ = ["run_relaxation", "run_sod", "run_shock_structure", "RelaxationResult", "SodResult",
           "ShockResult", "make_model", "make_kernel", "slice_u00", "cell_profiles"]

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# shared construction

def make_model(cfg, rho_ref=1.0, T_ref=1.0, tau_target=None):
    """Collision model from the config block.

    With neither kn nor mu_ref set, mu_ref is chosen so that tau_r equals
    ``tau_target`` (default 1) at (rho_ref, T_ref).
    """
    c = cfg.collision
    base = dict(family=c.family, omega=c.omega, T0=c.T0)
    if c.mu_ref is not None:
        return CollisionModel(mu_ref=c.mu_ref, **base)
    if c.kn is not None:
        return CollisionModel(mu_ref=mu_from_knudsen(c.kn, CollisionModel(**base).effective_omega),
                              **base)
    unit = CollisionModel(mu_ref=1.0, **base)
    tau1 = float(unit.relaxation_time(rho_ref, T_ref))
    return CollisionModel(mu_ref=(tau_target or 1.0) / tau1, **base)


def make_kernel(cfg, model, grid):
    s = cfg.spectral
    return build_kernel(model, grid, s.modes or grid.N, (s.sphere_theta, s.sphere_phi))


def _settings(cfg, model, kernel, mode=None):
    mode = mode or cfg.hybrid.operator
    tcm = cfg.hybrid.tc_multiple if cfg.hybrid.tc == "fixed" else None
    return CollisionSettings(mode, model, kernel if mode != "shakhov" else None, tcm,
                             GasProperties(Pr=cfg.hybrid.Pr))


def slice_u00(f, grid):
    """f(u, 0, 0): centre node for odd N, mean of the four straddling nodes otherwise."""
    f = np.asarray(f).reshape(grid.shape)
    N = grid.N
    if N % 2:
        return f[:, N // 2, N // 2].copy()
    c = N // 2
    return f[:, c - 1:c + 1, c - 1:c + 1].mean(axis=(1, 2))


# ---------------------------------------------------------------------------
# homogeneous relaxation

@dataclass
class RelaxationResult:
    u: np.ndarray
    times: np.ndarray                 # in units of tau_r
    slices: dict                      # operator -> (n_times, N)
    conserved: dict                   # operator -> (n_times, 5)
    history: dict = field(default_factory=dict)
    T0: float = 273.0
    D0: float = 0.0
    tau_r: float = 1.0

    def discrepancy(self, op, ref="shakhov"):
        """Per output time L-infinity difference relative to the slice peak."""
        a, b = self.slices[op], self.slices[ref]
        return np.max(np.abs(a - b), axis=1) / np.max(np.abs(b), axis=1)


def run_relaxation(cfg, operators=("shakhov", "hybrid", "boltzmann")):
    """Homogeneous relaxation of one initial family with several operators."""
    case = cfg.case
    grid = build_grid(cfg.velocity.half_width, cfg.velocity.points)
    T0 = case.T0 or relaxation_reference_temperature(case.temps, grid)
    f0 = init_relaxation(case.family, case.temps, grid, T0)
    gas = GasProperties(Pr=cfg.hybrid.Pr)
    W0 = conserved(f0, grid)
    rho, _, T = primitives(W0, gas.R)
    model = make_model(cfg, float(rho), float(T))
    tau = float(model.relaxation_time(rho, T, gas.R))
    dt = cfg.time.dt_tau * tau
    kernel = None
    if any(op in ("hybrid", "boltzmann") for op in operators):
        kernel = make_kernel(cfg, model, grid)
    times = np.array(sorted(case.output_times), dtype=float)
    out_steps = np.rint(times * tau / dt).astype(int)
    res = RelaxationResult(grid.nodes.copy(), out_steps * dt / tau, {}, {}, {}, T0,
                           float(distance_to_equilibrium(f0, grid, gas)), tau)
    for op in operators:
        st = _settings(cfg, model, kernel, op)
        f = f0.copy()
        slices, cons, hist = [], [], {"A": [], "t_c": [], "substeps": []}
        t0 = _time.perf_counter()
        for n in range(out_steps[-1] + 1):
            if n in out_steps:
                k = int(np.sum(out_steps == n))
                slices.extend([slice_u00(f, grid)] * k)
                cons.extend([conserved(f, grid)] * k)
            if n == out_steps[-1]:
                break
            if op == "boltzmann":
                f, nsub = _boltzmann_substeps(f, dt, st, grid)
                hist["substeps"].append(nsub)
            else:
                f, info = homogeneous_step(f, dt, st, grid)
                hist["A"].append(info["A"])
                hist["t_c"].append(info["t_c"])
        log.info("relaxation %s/%s done in %.1fs", case.family, op, _time.perf_counter() - t0)
        res.slices[op] = np.array(slices)
        res.conserved[op] = np.array(cons)
        res.history[op] = {k: np.array(v) for k, v in hist.items()}
    return res


def _boltzmann_substeps(f, dt, settings, grid, margin=0.9):
    """Explicit Boltzmann step split so that each piece has dt nu_max <= margin."""
    _, nu = settings.kernel.gain_loss(f)
    nsub = max(1, math.ceil(dt * float(nu.max()) / margin))
    h = dt / nsub
    for _ in range(nsub):
        f, info = homogeneous_step(f, h, settings, grid)
        if h * info["sup_nu"] > 1.0:
            raise ConvergenceError("explicit Boltzmann sub-step exceeded its stability bound")
    return f, nsub


# ---------------------------------------------------------------------------
# 1D profiles

def cell_profiles(solver, state):
    """(rho, U_x, T, p, q_x, shear) per cell."""
    gas = solver.gas
    fg = solver.fg
    rho, U, T = primitives(state.W, gas.R)
    p = rho * gas.R * T
    q = fg.heat_flux(state.f, U)
    cx = fg.u - U[:, 0:1]
    pxx = (state.f * cx * cx).sum(1) * fg.weight
    return rho, U[:, 0], T, p, q[:, 0], pxx - p


@dataclass
class SodResult:
    records: list
    exact_rho: np.ndarray
    l1_error: float
    dt_tau_min: float
    dt_tau_max: float
    dt_tau_history: np.ndarray
    steps: int
    boltzmann_fraction: float
    wall_time: float


def run_sod(cfg):
    """Sod shock tube with Dirichlet ghosts; profiles at the final time."""
    case = cfg.case
    m = cfg.mesh
    mesh = uniform_mesh(m.x0, m.x1, m.cells)
    grid = build_grid(cfg.velocity.half_width, cfg.velocity.points)
    model = make_model(cfg)
    kernel = make_kernel(cfg, model, grid) if cfg.hybrid.operator != "shakhov" else None
    st = _settings(cfg, model, kernel)
    left = MacroState(case.left[0], [case.left[1], 0, 0], case.left[2])
    right = MacroState(case.right[0], [case.right[1], 0, 0], case.right[2])
    solver = Solver(mesh, grid, BoundarySpec.fixed(left, right), st)
    x = mesh.centers
    L = x < case.diaphragm
    rho0 = np.where(L, left.rho, right.rho)
    U0 = np.zeros((mesh.n, 3))
    U0[:, 0] = np.where(L, left.U[0], right.U[0])
    T0 = np.where(L, left.T, right.T)
    state = solver.state_from_macro(rho0, U0, T0)
    ratio = mean_free_time_ratio(model.effective_omega)
    dt_cfl = cfl_timestep(mesh, grid, cfg.time.cfl)
    t_end = cfg.time.final_time
    hist = []
    nb = 0
    explicit = st.mode == "boltzmann"
    if explicit:
        sup_nu = max(float(kernel.frequency(fj.reshape(grid.shape)).max()) for fj in state.f)
    t_start = _time.perf_counter()
    while state.time < t_end * (1 - 1e-12) and state.step < cfg.time.max_steps:
        dt = min(dt_cfl, t_end - state.time)
        if explicit:
            # global step reduced so that dt sup(nu) stays under the explicit bound
            dt = min(dt, 0.9 / (1.05 * sup_nu))
        rho, _, T = primitives(state.W, solver.gas.R)
        tau = model.relaxation_time(rho, T, solver.gas.R) / ratio
        state = solver.step(state, dt)
        hist.append((state.time, float(np.min(dt / tau)), float(np.max(dt / tau))))
        nb += int(np.sum(state.info["boltzmann_cells"]))
        if explicit:
            sup_nu = float(state.info["sup_nu"].max())
        if cfg.output.cadence and state.step % cfg.output.cadence == 0:
            log.info("sod step %d t=%.4f", state.step, state.time)
    rho, U, T, p, q, shear = cell_profiles(solver, state)
    tau = model.relaxation_time(rho, T, solver.gas.R) / ratio
    records = records_from_arrays(x=x, rho=rho, U=U, T=T, p=p, q_x=q, shear=shear,
                                  dt_tau=state.dt / tau)
    ex_rho, _, _ = exact_riemann((left.rho, left.U[0], left.p), (right.rho, right.U[0], right.p),
                                 x, t_end, case.diaphragm)
    l1 = float(np.mean(np.abs(rho - ex_rho)) / np.max(ex_rho))
    hist = np.array(hist)
    return SodResult(records, ex_rho, l1, float(hist[:, 1].min()), float(hist[:, 2].max()), hist,
                     state.step, nb / max(1, state.step * mesh.n), _time.perf_counter() - t_start)


# ---------------------------------------------------------------------------
# normal shock structure

@dataclass
class ShockResult:
    x: np.ndarray                 # mean free paths, origin at rho_hat = 0.5
    rho_hat: np.ndarray
    T_hat: np.ndarray
    U_hat: np.ndarray
    shear: np.ndarray             # tau_xx / p_1
    heat_flux: np.ndarray         # q_x / (rho_1 (2 R T_1)^1.5)
    rho: np.ndarray
    flux_deviation: np.ndarray    # max relative deviation of (mass, momentum, energy) flux
    switch_x: list
    boltzmann_cells: np.ndarray
    residuals: list
    steps: int
    wall_time: float
    converged: bool = True
    solver: object = None
    state: object = None


def shock_mesh(cfg):
    m = cfg.mesh
    if m.kind == "uniform":
        return uniform_mesh(m.x0, m.x1, m.cells)
    return stretched_mesh(m.x0, m.x1, (m.fine_lo, m.fine_hi), m.left_cells, m.fine_cells,
                          m.right_cells)


def _iterate(solver, state, dt_cells, target, max_steps, residuals, cadence, label,
             deadline=math.inf):
    local = np.ndim(dt_cells) > 0
    for _ in range(max_steps):
        if _time.perf_counter() > deadline:
            log.warning("%s: wall-time budget exhausted at step %d", label, state.step)
            return state, False
        rho_old = state.W[:, 0]
        state = solver.step(state, dt_cells if local else float(dt_cells))
        r = float(np.max(np.abs(state.W[:, 0] - rho_old) / state.dt))
        residuals.append(r)
        if not np.isfinite(r):
            raise ConvergenceError(f"{label}: residual became non-finite", residuals)
        if cadence and state.step % cadence == 0:
            log.info("%s step %d residual %.3e", label, state.step, r)
        if r < target:
            return state, True
    return state, False


def conserved_fluxes(solver, state):
    """Kinetic fluxes of mass, momentum, energy at the cell centres, (n, 3)."""
    fg = solver.fg
    uf = state.f * fg.u
    return np.stack([uf.sum(1), (uf * fg.u).sum(1), (uf * fg.e).sum(1)], axis=1) * fg.weight


def run_shock_structure(cfg, state=None, require_convergence=True):
    """Steady normal shock by pseudo-time iteration; see ShockResult.

    Iteration stops at ``time.residual``, after ``time.max_steps`` steps or
    once ``time.max_wall_time`` seconds have passed.  Without convergence a
    ConvergenceError is raised, unless ``require_convergence`` is false, in
    which case the last iterate is returned with ``converged = False``.
    """
    case = cfg.case
    grid = build_grid(cfg.velocity.half_width, cfg.velocity.points)
    gas = GasProperties(Pr=cfg.hybrid.Pr)
    up, down = rankine_hugoniot(case.mach, MacroState(1.0, [0, 0, 0], 1.0, R=gas.R))
    down = discrete_rankine_hugoniot(up, down, grid)
    model = make_model(cfg)
    mesh = shock_mesh(cfg)
    op = cfg.hybrid.operator
    kernel = make_kernel(cfg, model, grid) if op != "shakhov" else None
    bc = BoundarySpec.fixed(up, down)
    pre = Solver(mesh, grid, bc, _settings(cfg, model, None, "shakhov"))
    main = Solver(mesh, grid, bc, _settings(cfg, model, kernel, op))
    x = mesh.centers
    if state is None:
        s = 0.5 * (1.0 + np.tanh(x / 2.0))
        rho0 = up.rho + (down.rho - up.rho) * s
        U0 = np.zeros((mesh.n, 3))
        U0[:, 0] = up.rho * up.U[0] / rho0
        T0 = up.T + (down.T - up.T) * s
        state = pre.state_from_macro(rho0, U0, T0)
    dt = cfl_timestep(mesh, grid, cfg.time.cfl, local=cfg.time.mode == "local")
    residuals = []
    t0 = _time.perf_counter()
    deadline = t0 + cfg.time.max_wall_time if cfg.time.max_wall_time > 0 else math.inf
    state, ok = _iterate(pre, state, dt, case.precondition_residual, case.precondition_steps,
                         residuals, cfg.output.cadence, "shock/shakhov", deadline)
    if op != "shakhov":
        state, ok = _iterate(main, state, dt, cfg.time.residual, cfg.time.max_steps,
                             residuals, cfg.output.cadence, f"shock/{op}", deadline)
    elif cfg.time.residual < case.precondition_residual:
        state, ok = _iterate(main, state, dt, cfg.time.residual, cfg.time.max_steps,
                             residuals, cfg.output.cadence, "shock/shakhov", deadline)
    if not ok and require_convergence:
        raise ConvergenceError(
            f"shock did not reach residual {cfg.time.residual:g} "
            f"(last {residuals[-1] if residuals else math.nan:.3e})",
            residuals)
    # one diagnostic step to record the switching pattern at the steady state
    probe = main.step(state, dt)
    rho, U, T, p, q, shear = cell_profiles(main, state)
    rho_hat = (rho - up.rho) / (down.rho - up.rho)
    x0 = float(np.interp(0.5, rho_hat, x)) if np.all(np.diff(rho_hat) > 0) else \
        float(x[np.argmin(np.abs(rho_hat - 0.5))])
    xs = x - x0
    F = conserved_fluxes(main, state)
    dev = np.max(np.abs(F - F[0]), axis=0) / np.abs(F[0])
    bcells = np.asarray(probe.info["boltzmann_cells"], dtype=bool)
    switch = [0.5 * (xs[i] + xs[i + 1]) for i in np.flatnonzero(bcells[1:] != bcells[:-1])]
    return ShockResult(xs, rho_hat, (T - up.T) / (down.T - up.T),
                       (U - down.U[0]) / (up.U[0] - down.U[0]), shear / up.p,
                       q / (up.rho * (2 * gas.R * up.T) ** 1.5), rho, dev, switch, bcells,
                       residuals, state.step, _time.perf_counter() - t0, ok, main, state)
