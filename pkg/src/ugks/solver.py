"""Finite-volume UGKS time stepping on a 1D mesh with a 3D velocity lattice."""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import fsolve

from .collision import conserve_fix
from .errors import ConfigurationError, DegenerateStateError, NumericError
from .flux import FlatGrid, interface_flux, reconstruct_slopes
from .hybrid import beta as beta_fn, cell_collision_update, critical_time
from .kinetic import GasProperties, MacroState, maxwellian_array, primitives

__all__ = ["BoundarySide", "BoundarySpec", "CollisionSettings", "SimulationState", "Solver",
           "cfl_timestep", "rankine_hugoniot", "discrete_rankine_hugoniot", "MODES", "homogeneous_step"]

MODES = ("hybrid", "shakhov", "boltzmann", "none")
NG = 2


@dataclass(frozen=True)
class BoundarySide:
    kind: str = "outflow"                 # fixed_state | outflow | periodic
    state: MacroState = None

    def __post_init__(self):
        if self.kind not in ("fixed_state", "outflow", "periodic"):
            raise ConfigurationError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "fixed_state" and self.state is None:
            raise ConfigurationError("fixed_state boundary needs a ghost state")


@dataclass(frozen=True)
class BoundarySpec:
    left: BoundarySide = BoundarySide()
    right: BoundarySide = BoundarySide()

    def __post_init__(self):
        if (self.left.kind == "periodic") != (self.right.kind == "periodic"):
            raise ConfigurationError("periodic boundaries must be set on both sides")

    @property
    def periodic(self):
        return self.left.kind == "periodic"

    @classmethod
    def fixed(cls, left_state, right_state):
        return cls(BoundarySide("fixed_state", left_state), BoundarySide("fixed_state", right_state))

    @classmethod
    def make_periodic(cls):
        return cls(BoundarySide("periodic"), BoundarySide("periodic"))


@dataclass
class CollisionSettings:
    """Collision treatment of a run.

    ``tc_multiple`` pins t_c to a multiple of tau_r; None uses the adaptive
    criterion.  ``kernel`` is required unless mode is shakhov or none.
    """

    mode: str = "hybrid"
    model: object = None
    kernel: object = None
    tc_multiple: float = None
    gas: GasProperties = field(default_factory=GasProperties)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown collision mode {self.mode!r}")
        if self.mode != "none" and self.model is None:
            raise ConfigurationError("a collision model is required")
        if self.mode in ("hybrid", "boltzmann") and self.kernel is None:
            raise ConfigurationError(f"mode {self.mode!r} needs a spectral kernel")


@dataclass
class SimulationState:
    f: np.ndarray          # (n, Nv)
    W: np.ndarray          # (n, 5)
    step: int = 0
    time: float = 0.0
    dt: np.ndarray = None  # last per-cell step
    info: dict = field(default_factory=dict)

    def copy(self):
        return replace(self, f=self.f.copy(), W=self.W.copy(),
                       dt=None if self.dt is None else np.array(self.dt), info=dict(self.info))


def cfl_timestep(mesh, grid, cfl, local=False):
    """CFL dx / u_max, per cell in local mode, minimum otherwise."""
    if not 0 < cfl <= 1:
        raise ConfigurationError(f"CFL must lie in (0, 1], got {cfl}")
    dt = cfl * mesh.widths / grid.u_max
    return dt if local else float(dt.min())


def rankine_hugoniot(mach, upstream, gamma=5.0 / 3.0):
    """Downstream state of a normal shock moving into ``upstream``.

    The upstream flow speed is taken as mach times the sound speed and
    directed along +x.
    """
    if not mach > 1:
        raise ConfigurationError(f"Mach number must exceed 1, got {mach}")
    R = upstream.R
    T1, rho1 = upstream.T, upstream.rho
    u1 = mach * np.sqrt(gamma * R * T1)
    M2 = mach * mach
    r = (gamma + 1) * M2 / ((gamma - 1) * M2 + 2)
    pr = (2 * gamma * M2 - (gamma - 1)) / (gamma + 1)
    rho2 = rho1 * r
    T2 = T1 * pr / r
    return (MacroState(rho1, [u1, 0, 0], T1, R=R), MacroState(rho2, [u1 / r, 0, 0], T2, R=R))


def lattice_normal_fluxes(state, grid):
    """x-fluxes of mass, x-momentum and energy of the discrete Maxwellian of ``state``."""
    M = maxwellian_array(np.atleast_1d(state.rho), np.atleast_2d(state.U),
                         np.atleast_1d(state.T), grid, state.R)[0]
    u = grid.u
    e = 0.5 * grid.speed2
    return np.array([(u * M).sum(), (u * u * M).sum(), (u * e * M).sum()]) * grid.weight


def discrete_rankine_hugoniot(upstream, downstream, grid, tol=1e-12):
    """Downstream state whose discrete Maxwellian carries the upstream lattice fluxes.

    The continuum jump conditions hold only up to the lattice quadrature
    error, which leaves a shock with pinned boundary states drifting.  The
    continuum downstream state is the initial guess.
    """
    target = lattice_normal_fluxes(upstream, grid)
    R = downstream.R

    def residual(x):
        st = MacroState(x[0], [x[1], 0.0, 0.0], x[2], R=R)
        return lattice_normal_fluxes(st, grid) / target - 1.0

    x0 = np.array([downstream.rho, downstream.U[0], downstream.T])
    x, _, _, msg = fsolve(residual, x0, xtol=1e-14, full_output=True)
    if not np.max(np.abs(residual(x))) < tol:
        raise NumericError(f"discrete jump conditions did not converge: {msg}")
    return MacroState(x[0], [x[1], 0.0, 0.0], x[2], R=R)


def _prims_checked(W, R):
    rho, U, T = primitives(W, R)
    bad = ~((rho > 0) & (T > 0) & np.isfinite(T))
    if np.any(bad):
        raise DegenerateStateError("non-positive density or temperature", cell=int(np.argmax(bad)))
    return rho, U, T


class Solver:
    """Advances a SimulationState by UGKS steps."""

    def __init__(self, mesh, grid, boundary, settings):
        self.mesh = mesh
        self.grid = grid
        self.fg = FlatGrid(grid)
        self.boundary = boundary
        self.settings = settings
        self.gas = settings.gas
        self.xc_ext, self.xf_ext = mesh.extended_centers(NG, boundary.periodic)
        self._ghost = {}
        for side in ("left", "right"):
            b = getattr(boundary, side)
            if b.kind == "fixed_state":
                s = b.state
                g = maxwellian_array(s.rho, s.U, s.T, grid, s.R).ravel()
                self._ghost[side] = g

    # state helpers ------------------------------------------------------
    def state_from_f(self, f):
        f = np.ascontiguousarray(np.asarray(f, dtype=float).reshape(self.mesh.n, -1))
        return SimulationState(f, self.fg.conserved(f))

    def state_from_macro(self, rho, U, T):
        """Maxwellian cells from per-cell primitive arrays."""
        rho = np.asarray(rho, dtype=float)
        U = np.broadcast_to(np.asarray(U, dtype=float), rho.shape + (3,))
        T = np.asarray(T, dtype=float)
        f = maxwellian_array(rho, U, T, self.grid, self.gas.R).reshape(rho.size, -1)
        return self.state_from_f(f)

    def primitives(self, state):
        return primitives(state.W, self.gas.R)

    def _extend(self, a, which):
        """Append ghost cells to a per-cell array (f rows or W rows)."""
        n = self.mesh.n
        if self.boundary.periodic:
            return np.concatenate([a[n - NG:], a, a[:NG]])
        parts = []
        for side, edge in (("left", a[:1]), ("right", a[-1:])):
            b = getattr(self.boundary, side)
            if b.kind == "fixed_state":
                g = self._ghost[side]
                row = g[None, :] if which == "f" else self.fg.conserved(g[None, :])
            else:
                row = edge
            parts.append(np.repeat(row, NG, axis=0))
        return np.concatenate([parts[0], a, parts[1]])

    # fluxes -------------------------------------------------------------
    def face_fluxes(self, state, dt_cells):
        """Time-integrated fluxes on the n + 1 faces and the face time steps."""
        n = self.mesh.n
        f_ext = self._extend(state.f, "f")
        W_ext = self._extend(state.W, "W")
        xc = self.xc_ext
        sf = reconstruct_slopes(f_ext, xc)
        sW = reconstruct_slopes(W_ext, xc)
        il = np.arange(NG - 1, NG + n)       # left cell of each face
        ir = il + 1
        xf = self.xf_ext[NG:NG + n + 1]
        fL = f_ext[il] + sf[il] * (xf - xc[il])[:, None]
        fR = f_ext[ir] + sf[ir] * (xf - xc[ir])[:, None]
        dt_ext = np.concatenate([np.repeat(dt_cells[:1], NG), dt_cells, np.repeat(dt_cells[-1:], NG)])
        if self.boundary.periodic:
            dt_ext = np.concatenate([dt_cells[n - NG:], dt_cells, dt_cells[:NG]])
        dt_face = np.minimum(dt_ext[il], dt_ext[ir])
        collisionless = self.settings.mode in ("none", "boltzmann")
        flux = interface_flux(fL, fR, sf[il], sf[ir], sW[il], sW[ir], dt_face,
                              self.settings.model, self.fg, self.gas, collisionless)
        return flux, dt_face

    # stepping -----------------------------------------------------------
    def step(self, state, dt):
        """One UGKS step; ``dt`` is a scalar (global) or per-cell array (local)."""
        n = self.mesh.n
        scalar = np.ndim(dt) == 0
        dt_cells = np.full(n, float(dt)) if scalar else np.asarray(dt, dtype=float)
        if np.any(~(dt_cells > 0)):
            raise ConfigurationError("time steps must be positive")
        flux, dt_face = self.face_fluxes(state, dt_cells)
        dx = self.mesh.widths
        if scalar:
            dF = flux.F[:-1] - flux.F[1:]
            dW = flux.FW[:-1] - flux.FW[1:]
        else:
            sl = (dt_cells / dt_face[:-1])[:, None]
            sr = (dt_cells / dt_face[1:])[:, None]
            dF = flux.F[:-1] * sl - flux.F[1:] * sr
            dW = flux.FW[:-1] * sl - flux.FW[1:] * sr
        inc = dF / dx[:, None]
        W_new = state.W + dW / dx[:, None]
        f_new, info = self.collide(state.f, inc, W_new, dt_cells)
        new = SimulationState(f_new, self.fg.conserved(f_new), state.step + 1,
                              state.time + (float(dt) if scalar else 0.0), dt_cells, info)
        return new

    def collide(self, f_n, inc, W_new, dt_cells):
        """Hybrid collision update of every cell (Steps 2-4)."""
        s = self.settings
        gas = self.gas
        n = f_n.shape[0]
        rho, U, T = _prims_checked(W_new, gas.R)
        A = np.zeros(n)
        B = dt_cells.copy()
        info = {"boltzmann_cells": np.zeros(n, dtype=bool), "sup_nu": np.zeros(n)}
        if s.mode == "none":
            inv_tau = np.zeros(n)
        else:
            inv_tau = s.model.inverse_relaxation_time(rho, T, gas.R)
        Q = None
        if s.mode in ("hybrid", "boltzmann"):
            rho_n, _, T_n = _prims_checked(self.fg.conserved(f_n), gas.R)
            if s.mode == "hybrid":
                tau_n = s.model.relaxation_time(rho_n, T_n, gas.R)
                tc = critical_time(f_n.reshape((n,) + self.grid.shape), tau_n, self.grid, gas,
                                   s.tc_multiple)
                active = dt_cells < tc
            else:
                active = np.ones(n, dtype=bool)
            if np.any(active):
                Q = np.zeros_like(f_n)
                for j in np.flatnonzero(active):
                    fj = f_n[j].reshape(self.grid.shape)
                    gain, nu = s.kernel.gain_loss(fj)
                    Q[j] = conserve_fix(gain - nu * fj, self.grid).ravel()
                    sup = float(nu.max())
                    if s.mode == "boltzmann" and dt_cells[j] * sup > 1.0:
                        raise NumericError(f"explicit Boltzmann step unstable in cell {j}: "
                                           f"dt sup(nu) = {dt_cells[j] * sup:.3g} > 1")
                    b = 1.0 if s.mode == "boltzmann" else beta_fn(dt_cells[j], sup)
                    A[j] = b * dt_cells[j]
                    B[j] = dt_cells[j] - A[j]
                    info["sup_nu"][j] = sup
                info["boltzmann_cells"] = active
        shape = (n,) + self.grid.shape
        f_new = cell_collision_update(
            f_n.reshape(shape), inc.reshape(shape), W_new, (A, B), inv_tau, self.grid,
            None if Q is None else Q.reshape(shape), gas)
        info["A"] = A
        info["B"] = B
        info["inv_tau"] = inv_tau
        return f_new.reshape(n, -1), info


def homogeneous_step(f, dt, settings, grid):
    """Space-homogeneous update of one distribution (3D array).

    Returns (f_new, info dict with A, B, t_c, beta, sup_nu).
    """
    gas = settings.gas
    from .kinetic import conserved
    W = conserved(f, grid)
    rho, U, T = _prims_checked(W[None], gas.R)
    tau = float(settings.model.relaxation_time(rho, T, gas.R)[0])
    A, tc, b, sup = 0.0, 0.0, 1.0, 0.0
    Q = None
    if settings.mode in ("hybrid", "boltzmann"):
        tc = float(critical_time(f, tau, grid, gas, settings.tc_multiple)) if settings.mode == "hybrid" else np.inf
        if dt < tc:
            gain, nu = settings.kernel.gain_loss(f)
            sup = float(nu.max())
            Q = conserve_fix(gain - nu * f, grid)
            b = beta_fn(dt, sup) if settings.mode == "hybrid" else 1.0
            A = b * dt
    B = dt - A
    inv_tau = 0.0 if settings.mode == "none" else 1.0 / tau
    f_new = cell_collision_update(f, np.zeros_like(f), W, (A, B), inv_tau, grid, Q, gas)
    return f_new, {"A": A, "B": B, "t_c": tc, "beta": b, "sup_nu": sup, "tau_r": tau}
