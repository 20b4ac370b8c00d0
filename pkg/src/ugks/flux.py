"""Interface reconstruction and time-integrated UGKS fluxes.

Distributions here are flat: shape (n, Nv) with Nv = N^3 in C order of the
velocity lattice.  The macro flux is the lattice quadrature of the micro
flux, so the conserved variables stay equal to the moments of f.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, DegenerateStateError
from .kinetic import fit_maxwellian

__all__ = ["van_leer_slope", "reconstruct_slopes", "interface_state", "moment_matrix",
           "expansion_coefficients", "time_factors", "interface_flux", "InterfaceFlux",
           "FlatGrid", "COND_LIMIT", "fit_discrete_maxwellian"]

COND_LIMIT = 1e12


class FlatGrid:
    """Flat views of a VelocityGrid used on the flux path."""

    def __init__(self, grid):
        self.grid = grid
        u, v, w = grid.flat
        self.u = np.ascontiguousarray(u)
        self.v = np.ascontiguousarray(v)
        self.w = np.ascontiguousarray(w)
        self.e = 0.5 * (u * u + v * v + w * w)
        self.psi = np.stack([np.ones_like(u), u, v, w, self.e])
        self.weight = grid.weight
        self.positive = u > 0.0

    def conserved(self, f):
        return (f @ self.psi.T) * self.weight

    def heat_flux(self, f, U):
        cx = self.u - U[:, 0:1]
        cy = self.v - U[:, 1:2]
        cz = self.w - U[:, 2:3]
        g = 0.5 * (cx * cx + cy * cy + cz * cz) * f
        return np.stack([(g * cx).sum(1), (g * cy).sum(1), (g * cz).sum(1)], axis=1) * self.weight

    def maxwellian(self, rho, U, lam):
        c2 = ((self.u - U[:, 0:1]) ** 2 + (self.v - U[:, 1:2]) ** 2 + (self.w - U[:, 2:3]) ** 2)
        return (rho * (lam / np.pi) ** 1.5)[:, None] * np.exp(-lam[:, None] * c2)


def van_leer_slope(s1, s2):
    """Scalar or array van Leer limiter."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    a1, a2 = np.abs(s1), np.abs(s2)
    den = a1 + a2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.sign(s1) + np.sign(s2)) * a1 * a2 / den
    return np.where(den > 0, out, 0.0)


def reconstruct_slopes(f_ext, xc_ext):
    """Limited slopes of every extended cell; the two end cells get zero.

    f_ext : (m, K) cell values (distributions or conserved vectors)
    xc_ext : (m,) cell centres
    """
    f_ext = np.ascontiguousarray(f_ext, dtype=float)
    m = f_ext.shape[0]
    if m < 3:
        raise ConfigurationError("slope reconstruction needs at least three cells")
    out = np.zeros_like(f_ext)
    dx = np.diff(xc_ext)
    out[1:-1] = kernels.van_leer(np.ascontiguousarray(f_ext[:-2]), np.ascontiguousarray(f_ext[1:-1]),
                                 np.ascontiguousarray(f_ext[2:]), np.ascontiguousarray(dx[:-1]),
                                 np.ascontiguousarray(dx[1:]))
    return out


def interface_state(fL, fR, fg, gas):
    """Upwind interface distribution and its moments.

    Returns (f0, W0, rho0, U0, T0, q0) for flat (n, Nv) inputs.
    """
    fL = np.atleast_2d(fL)
    fR = np.atleast_2d(fR)
    f0 = np.where(fg.positive, fL, fR)
    W0 = fg.conserved(f0)
    rho = W0[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        U = W0[:, 1:4] / rho[:, None]
        T = (W0[:, 4] - 0.5 * rho * np.sum(U * U, 1)) / (1.5 * rho * gas.R)
    bad = ~((rho > 0) & (T > 0))
    if np.any(bad):
        raise DegenerateStateError("degenerate interface state", cell=int(np.argmax(bad)))
    q = fg.heat_flux(f0, U)
    return f0, W0, rho, U, T, q


def fit_discrete_maxwellian(W, fg, R=0.5):
    """Interface Maxwellian with lattice moments W; returns (rho, U, lam, M)."""
    rho, U, T, M = fit_maxwellian(W, lambda r, u, t: fg.maxwellian(r, u, 1.0 / (2.0 * R * t)),
                                  fg.conserved, R)
    return rho, U, 1.0 / (2.0 * R * T), M


def moment_matrix(M, fg):
    """<psi psi^T M> for each row of M, shape (n, 5, 5)."""
    tmp = M[:, None, :] * fg.psi[None, :, :]
    return (tmp @ fg.psi.T) * fg.weight


def _guarded_solve(A, rhs):
    """Solve A x = rhs per interface; zero where A is ill-conditioned."""
    cond = np.linalg.cond(A)
    ok = np.isfinite(cond) & (cond < COND_LIMIT)
    x = np.zeros_like(rhs)
    if np.any(ok):
        x[ok] = np.linalg.solve(A[ok], rhs[ok][..., None])[..., 0]
    return x


def expansion_coefficients(M0, slope_l, slope_r, fg):
    """Coefficients a^l, a^r, At of the interface equilibrium expansion.

    a^l, a^r reproduce the conserved slopes; At closes the time derivative
    through the compatibility condition <At M> = -<u a_up M>.
    """
    A = moment_matrix(M0, fg)
    al = _guarded_solve(A, np.atleast_2d(slope_l))
    ar = _guarded_solve(A, np.atleast_2d(slope_r))
    pl = al @ fg.psi
    pr = ar @ fg.psi
    aup = np.where(fg.positive, pl, pr)
    rhs = -((fg.u * aup * M0) @ fg.psi.T) * fg.weight
    At = _guarded_solve(A, rhs)
    return al, ar, At


_NSER = 25


def _series(x, coef):
    out = np.zeros_like(x)
    for c in reversed(coef):
        out = out * x + c
    return out


def _fact(n):
    return float(np.prod(np.arange(1, n + 1))) if n > 0 else 1.0


_PHI1 = [(-1.0) ** n / _fact(n + 1) for n in range(_NSER)]
_PHI2 = [(-1.0) ** n * (n + 1) / _fact(n + 2) for n in range(_NSER)]
_Q2 = [0.0] + [(-1.0) ** (m + 1) / _fact(m + 2) for m in range(1, _NSER)]
_Q3 = [0.0] + [(-1.0) ** m * m / _fact(m + 2) for m in range(1, _NSER)]


def time_factors(dt, inv_tau):
    """Closed-form time integrals (q1..q5) over [0, dt], shape (n, 5).

    q1 multiplies the Shakhov equilibrium, q2 At M, q3 u a M, q4 f0 and
    q5 u sigma.  Taylor series are used for dt/tau < 1, so the collisionless
    limit inv_tau = 0 is exact.
    """
    dt = np.atleast_1d(np.asarray(dt, dtype=float))
    inv_tau = np.broadcast_to(np.asarray(inv_tau, dtype=float), dt.shape)
    if np.any(inv_tau < 0) or np.any(~np.isfinite(inv_tau)):
        raise ConfigurationError("relaxation time must be positive")
    x = dt * inv_tau
    small = x < 1.0
    xs = np.where(small, x, 0.0)
    xl = np.where(small, 1.0, x)
    ex = np.exp(-xl)
    phi1 = np.where(small, _series(xs, _PHI1), (1.0 - ex) / xl)
    phi2 = np.where(small, _series(xs, _PHI2), (1.0 - ex - xl * ex) / xl ** 2)
    c2 = np.where(small, _series(xs, _Q2), 0.5 - 1.0 / xl + (1.0 - ex) / xl ** 2)
    c3 = np.where(small, _series(xs, _Q3), -1.0 / xl + 2.0 * (1.0 - ex) / xl ** 2 - ex / xl)
    d2 = dt * dt
    return np.stack([dt * (1.0 - phi1), d2 * c2, d2 * c3, dt * phi1, d2 * phi2], axis=1)


@dataclass
class InterfaceFlux:
    F: np.ndarray    # (n, Nv) time-integrated micro flux
    FW: np.ndarray   # (n, 5) time-integrated conserved flux


def interface_flux(fL, fR, sL, sR, slope_Wl, slope_Wr, dt, model, fg, gas, collisionless=False):
    """Full interface evaluation for a batch of faces.

    fL, fR : reconstructed face values from the left/right cells
    sL, sR : slopes of the left/right cells
    slope_Wl, slope_Wr : conserved slopes of the left/right cells
    dt : (n,) time step of each face
    """
    f0, W0, rho, U, T, q = interface_state(fL, fR, fg, gas)
    sig = np.where(fg.positive, sL, sR)
    rho, U, lam, M0 = fit_discrete_maxwellian(W0, fg, gas.R)
    al, ar, At = expansion_coefficients(M0, slope_Wl, slope_Wr, fg)
    if collisionless:
        inv_tau = np.zeros_like(rho)
    else:
        inv_tau = model.inverse_relaxation_time(rho, T, gas.R)
    qc = time_factors(np.broadcast_to(dt, rho.shape), inv_tau)
    c = np.ascontiguousarray
    F, FW = kernels.micro_flux(fg.u, fg.v, fg.w, c(f0), c(sig), c(rho), c(U), c(lam), c(q),
                               c(al), c(ar), c(At), c(qc), float(gas.Pr), float(gas.R),
                               float(fg.weight))
    return InterfaceFlux(F, FW)
