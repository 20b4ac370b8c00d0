"""Velocity lattice, moments and equilibrium distributions.

All quantities are nondimensional.  The velocity unit is the most probable
speed sqrt(2 R T0), so with the default gas R = 1/2, lambda = 1/T and the
pressure is p = rho T / 2.

Distributions are numpy arrays whose trailing three axes index the velocity
lattice (u, v, w).  Any number of leading axes (cells, interfaces) is allowed
by the array-level helpers; the MacroState wrappers work on one cell.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DegenerateStateError, ResolutionError

__all__ = [
    "VelocityGrid", "GasProperties", "MacroState", "build_grid",
    "conserved", "primitives", "fit_maxwellian", "heat_flux", "stress", "maxwellian_array",
    "shakhov_array", "moments", "maxwellian", "shakhov_equilibrium",
    "distance_to_equilibrium", "init_relaxation", "relaxation_reference_temperature",
    "FAMILIES",
]

_VAXES = (-3, -2, -1)


@dataclass(frozen=True)
class GasProperties:
    """Nondimensional gas constants (monatomic)."""

    m: float = 1.0
    R: float = 0.5
    k: float = 0.5
    Pr: float = 2.0 / 3.0

    def __post_init__(self):
        for name in ("m", "R", "k", "Pr"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"gas property {name} must be positive")


@dataclass(frozen=True, eq=False)
class VelocityGrid:
    """Uniform cell-centred lattice on [-L, L]^3 with N nodes per axis."""

    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if not (np.isfinite(self.half_width) and self.half_width > 0):
            raise ConfigurationError("velocity half_width must be positive")
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis < 4:
            raise ConfigurationError("points_per_axis must be an integer >= 4")
        object.__setattr__(self, "points_per_axis", int(self.points_per_axis))

    def __eq__(self, other):
        return (isinstance(other, VelocityGrid) and self.half_width == other.half_width
                and self.points_per_axis == other.points_per_axis)

    def __hash__(self):
        return hash((self.half_width, self.points_per_axis))

    @property
    def L(self):
        return float(self.half_width)

    @property
    def N(self):
        return self.points_per_axis

    @property
    def shape(self):
        return (self.N,) * 3

    @property
    def size(self):
        return self.N ** 3

    @property
    def spacing(self):
        return 2.0 * self.L / self.N

    @property
    def weight(self):
        return self.spacing ** 3

    @cached_property
    def nodes(self):
        """1D node coordinates, cell centred and symmetric about zero."""
        h = self.spacing
        return -self.L + h * (np.arange(self.N) + 0.5)

    @cached_property
    def u(self):
        return self.nodes[:, None, None]

    @cached_property
    def v(self):
        return self.nodes[None, :, None]

    @cached_property
    def w(self):
        return self.nodes[None, None, :]

    @cached_property
    def speed2(self):
        """|u|^2 on the full lattice."""
        return self.u ** 2 + self.v ** 2 + self.w ** 2

    @property
    def u_max(self):
        return float(self.nodes[-1])

    @cached_property
    def flat(self):
        """(u, v, w) as flat arrays in C order, as used by the flux kernels."""
        U, V, W = np.meshgrid(self.nodes, self.nodes, self.nodes, indexing="ij")
        return U.ravel(), V.ravel(), W.ravel()

    @cached_property
    def psi(self):
        """Conservative moment basis (1, u, v, w, |u|^2/2), shape (5, N, N, N)."""
        ones = np.ones(self.shape)
        return np.stack([ones, ones * self.u, ones * self.v, ones * self.w,
                         0.5 * self.speed2])

    def center_index(self):
        """Indices of the node pair straddling zero (or the zero node)."""
        return self.N // 2


def build_grid(half_width, points_per_axis):
    """Construct a VelocityGrid, validating its parameters."""
    return VelocityGrid(float(half_width), points_per_axis)


@dataclass(frozen=True)
class MacroState:
    """Moments of one distribution."""

    rho: float
    U: np.ndarray
    T: float
    q: np.ndarray = field(default_factory=lambda: np.zeros(3))
    theta: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    R: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "U", np.asarray(self.U, dtype=float).reshape(3))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float).reshape(3))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float).reshape(3, 3))
        if not (self.rho > 0 and self.T > 0):
            raise DegenerateStateError(
                f"non-positive density or temperature (rho={self.rho}, T={self.T})")

    @property
    def p(self):
        return self.rho * self.R * self.T

    @property
    def lam(self):
        return 1.0 / (2.0 * self.R * self.T)

    @property
    def rhoE(self):
        return 0.5 * self.rho * float(self.U @ self.U) + 1.5 * self.rho * self.R * self.T

    @property
    def W(self):
        """Conservative 5-vector (rho, rho U, rho E)."""
        return np.concatenate([[self.rho], self.rho * self.U, [self.rhoE]])

    @classmethod
    def from_conserved(cls, W, R=0.5, q=None, theta=None):
        rho, U, T = primitives(np.asarray(W, dtype=float), R)
        kw = {}
        if q is not None:
            kw["q"] = q
        if theta is not None:
            kw["theta"] = theta
        return cls(float(rho), U, float(T), R=R, **kw)


# ---------------------------------------------------------------------------
# array-level moment helpers (leading batch axes allowed)

def conserved(f, grid):
    """(rho, rho u, rho v, rho w, rho E) of f, shape f.shape[:-3] + (5,).

    Uses 1D marginals so the cost is one pass over f per axis.
    """
    f = np.asarray(f)
    c = grid.nodes
    fx = f.sum(axis=(-2, -1))
    fy = f.sum(axis=(-3, -1))
    fz = f.sum(axis=(-3, -2))
    out = np.empty(f.shape[:-3] + (5,))
    out[..., 0] = fx.sum(axis=-1)
    out[..., 1] = fx @ c
    out[..., 2] = fy @ c
    out[..., 3] = fz @ c
    c2 = c * c
    out[..., 4] = 0.5 * (fx @ c2 + fy @ c2 + fz @ c2)
    return out * grid.weight


def primitives(W, R=0.5):
    """(rho, U, T) from conservative vectors of shape (..., 5)."""
    W = np.asarray(W, dtype=float)
    rho = W[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        U = W[..., 1:4] / rho[..., None]
        T = (W[..., 4] - 0.5 * rho * np.sum(U * U, axis=-1)) / (1.5 * rho * R)
    return rho, U, T


def fit_maxwellian(W, build, moments, R=0.5, iters=12, tol=1e-14):
    """Maxwellian whose discrete moments equal W; returns (rho, U, T, M).

    The closed-form parameters of W carry the quadrature error of the
    lattice.  Each pass shifts them by the parameter mismatch of the
    discrete moments, which contracts at the rate of that error.
    ``build(rho, U, T)`` evaluates the Maxwellian, ``moments(M)`` its
    conserved moments.
    """
    W = np.asarray(W, dtype=float)
    target = primitives(W, R)
    rho, U, T = (np.array(v, dtype=float) for v in target)
    scale = np.max(np.abs(W), axis=-1, keepdims=True)
    for _ in range(iters):
        M = build(rho, U, T)
        Wm = moments(M)
        if not np.max(np.abs(Wm - W) / scale) > tol:
            break
        r, u, t = primitives(Wm, R)
        rho = rho + (target[0] - r)
        U = U + (target[1] - u)
        T = T + (target[2] - t)
    return rho, U, T, M


def _bc(a):
    """Broadcast a per-batch scalar over the velocity axes."""
    return np.asarray(a, dtype=float)[..., None, None, None]


def _peculiar(grid, U):
    U = np.asarray(U, dtype=float)
    return (grid.u - _bc(U[..., 0]), grid.v - _bc(U[..., 1]), grid.w - _bc(U[..., 2]))


def heat_flux(f, grid, U):
    """q = w sum(0.5 |c|^2 c f) about the velocity U, shape (..., 3)."""
    cx, cy, cz = _peculiar(grid, U)
    g = 0.5 * (cx * cx + cy * cy + cz * cz) * f
    wt = grid.weight
    return np.stack([(g * cx).sum(axis=_VAXES), (g * cy).sum(axis=_VAXES),
                     (g * cz).sum(axis=_VAXES)], axis=-1) * wt


def stress(f, grid, U, p):
    """Deviatoric stress P_ij - p delta_ij, shape (..., 3, 3)."""
    c = _peculiar(grid, U)
    out = np.empty(np.shape(f)[:-3] + (3, 3))
    for i in range(3):
        for j in range(i, 3):
            s = (c[i] * c[j] * f).sum(axis=_VAXES) * grid.weight
            out[..., i, j] = s
            out[..., j, i] = s
    out[..., [0, 1, 2], [0, 1, 2]] -= np.asarray(p)[..., None]
    return out


def maxwellian_array(rho, U, T, grid, R=0.5):
    """Nodewise Maxwellian for batched (rho, U, T)."""
    lam = 1.0 / (2.0 * R * np.asarray(T, dtype=float))
    cx, cy, cz = _peculiar(grid, U)
    return _bc(rho * (lam / np.pi) ** 1.5) * np.exp(-_bc(lam) * (cx * cx + cy * cy + cz * cz))


def shakhov_array(rho, U, T, q, grid, gas):
    """Shakhov target M (1 + (1-Pr) c.q (c^2/RT - 5) / (5 p R T)), batched."""
    M = maxwellian_array(rho, U, T, grid, gas.R)
    if gas.Pr == 1.0:
        return M
    q = np.asarray(q, dtype=float)
    RT = gas.R * np.asarray(T, dtype=float)
    p = np.asarray(rho) * RT
    cx, cy, cz = _peculiar(grid, U)
    cq = cx * _bc(q[..., 0]) + cy * _bc(q[..., 1]) + cz * _bc(q[..., 2])
    c2 = (cx * cx + cy * cy + cz * cz) / _bc(RT)
    return M * (1.0 + (1.0 - gas.Pr) * cq * (c2 - 5.0) / _bc(5.0 * p * RT))


# ---------------------------------------------------------------------------
# single-cell API

def moments(f, grid, gas=None):
    """MacroState of one distribution, including heat flux and stress."""
    gas = gas or GasProperties()
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise DegenerateStateError("distribution contains non-finite values")
    W = conserved(f, grid)
    rho, U, T = primitives(W, gas.R)
    if not (rho > 0 and T > 0):
        raise DegenerateStateError(f"non-positive density or temperature (rho={rho}, T={T})")
    q = heat_flux(f, grid, U)
    theta = stress(f, grid, U, rho * gas.R * T)
    return MacroState(float(rho), U, float(T), q, theta, R=gas.R)


def maxwellian(state, grid):
    return maxwellian_array(state.rho, state.U, state.T, grid, state.R)


def shakhov_equilibrium(state, grid, gas=None):
    gas = gas or GasProperties(R=state.R)
    return shakhov_array(state.rho, state.U, state.T, state.q, grid, gas)


def distance_to_equilibrium(f, grid, gas=None):
    """D = (2/rho) w sum|f - M| with M built from the moments of f.

    Works on batches; returns an array matching the leading axes.
    """
    R = (gas or GasProperties()).R
    W = conserved(f, grid)
    rho, U, T = primitives(W, R)
    if np.any(~(rho > 0)) or np.any(~(T > 0)):
        raise DegenerateStateError("non-positive density or temperature")
    M = maxwellian_array(rho, U, T, grid, R)
    return 2.0 / rho * np.abs(f - M).sum(axis=_VAXES) * grid.weight


# ---------------------------------------------------------------------------
# homogeneous relaxation initial data

FAMILIES = ("anisotropic", "double_half_normal", "tailored_half_maxwellian")


def relaxation_reference_temperature(temps, grid, tol=1e-5):
    """Pick T0 (Kelvin) so every initial Gaussian fits the lattice.

    Two errors compete: cold components become too narrow for the midpoint
    rule and hot ones get clipped at +-L.  The returned T0 is the smallest
    value at or above 273 K for which both stay below ``tol``.
    """
    temps = np.asarray(temps, dtype=float)
    h, L = grid.spacing, grid.L

    def err(T0):
        s_cold = np.sqrt(temps.min() / T0 / 2.0)
        s_hot = np.sqrt(temps.max() / T0 / 2.0)
        alias = 2.0 * np.exp(-2.0 * np.pi ** 2 * s_cold ** 2 / h ** 2)
        from scipy.special import erfc
        clip = erfc(L / (np.sqrt(2.0) * s_hot))
        return alias, clip

    T0 = 273.0
    alias, clip = err(T0)
    while clip > tol and alias < tol:
        T0 *= 1.02
        alias, clip = err(T0)
    return T0


def init_relaxation(family, temps, grid, T0=273.0, mass_tol=1e-3):
    """Initial distributions of the homogeneous relaxation problems.

    ``temps`` are (T1, T2, T3) in Kelvin, ``T0`` the reference temperature
    used to scale them, so beta_i = 1/sqrt(T_i/T0).
    """
    temps = np.asarray(temps, dtype=float)
    if temps.shape != (3,) or np.any(~(temps > 0)):
        raise ConfigurationError("temps must be three positive temperatures")
    if family not in FAMILIES:
        raise ConfigurationError(f"unknown relaxation family {family!r}")
    b1, b2, b3 = 1.0 / np.sqrt(temps / T0)
    u, v, w = grid.u, grid.v, grid.w
    sp = np.sqrt(np.pi)

    def gauss(b, x):
        return b / sp * np.exp(-(b * x) ** 2)

    if family == "anisotropic":
        f = gauss(b1, u) * gauss(b2, v) * gauss(b3, w)
    elif family == "double_half_normal":
        fx = np.where(u < 0, gauss(b1, u), gauss(b2, u))
        f = fx * gauss(b2, v) * gauss(b3, w)
    else:
        # amplitude chosen so both halves meet at u = 0 and the mass is one
        amp = 2.0 * b1 * b2 / (sp * (b1 + b2))
        fx = amp * np.where(u < 0, np.exp(-(b1 * u) ** 2), np.exp(-(b2 * u) ** 2))
        f = fx * gauss(b2, v) * gauss(b3, w)
    f = np.ascontiguousarray(np.broadcast_to(f, grid.shape), dtype=float)
    mass = f.sum() * grid.weight
    if abs(mass - 1.0) > mass_tol:
        raise ResolutionError(
            f"velocity grid holds mass {mass:.6f} of the initial data (tolerance {mass_tol})")
    return f
