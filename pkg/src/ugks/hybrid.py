"""Switching between the explicit Boltzmann and implicit Shakhov collision parts.

The per-cell update is

    f^{n+1} = [f^n + flux + A Q^n + (B/tau) Mt^{n+1}] / (1 + B/tau)

with A + B = dt.  A > 0 only while the distribution is far from equilibrium
(dt < t_c), and A shrinks through beta when the explicit part would be unstable.
Relaxation times are passed as their inverses so that the collisionless limit
is simply ``inv_tau = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .kinetic import (GasProperties, conserved, distance_to_equilibrium, fit_maxwellian,
                      heat_flux, maxwellian_array, shakhov_array)

__all__ = ["SplitWeights", "critical_time", "beta", "split_weights",
           "shakhov_target", "cell_collision_update", "D_CLAMP"]

D_CLAMP = 4.0


@dataclass(frozen=True)
class SplitWeights:
    A: float
    B: float
    beta: float
    t_c: float
    sup_nu: float = 0.0

    @property
    def dt(self):
        return self.A + self.B


def critical_time(f, tau_r, grid, gas=None, fixed=None):
    """t_c = min(4, D) tau_r, or ``fixed * tau_r`` when an override is set."""
    if fixed is not None:
        return fixed * np.asarray(tau_r, dtype=float)
    D = distance_to_equilibrium(f, grid, gas)
    return np.minimum(D_CLAMP, D) * tau_r


def beta(dt, sup_nu):
    """1 if dt < 1/sup_nu, otherwise exp(1 - dt sup_nu)."""
    x = np.asarray(dt, dtype=float) * np.asarray(sup_nu, dtype=float)
    out = np.where(x < 1.0, 1.0, np.exp(1.0 - np.maximum(x, 1.0)))
    return out if out.ndim else float(out)


def split_weights(dt, t_c, b, sup_nu=0.0):
    if dt < t_c:
        A = b * dt
        return SplitWeights(A, dt - A, b, t_c, sup_nu)
    return SplitWeights(0.0, dt, b, t_c, sup_nu)


def shakhov_target(f_star, W_new, inv_tau_B, grid, gas):
    """Mt built from the updated conserved state with the relaxed heat flux.

    ``inv_tau_B`` is B/tau_r per cell.  The heat flux of f_star about the new
    bulk velocity is damped by 1/(1 + Pr B/tau_r).  The Maxwellian part is
    built on the Maxwellian whose discrete moments equal W_new, and the
    remaining moments of the heat-flux term are removed by a multiple of
    (lambda . psi) M, so the discrete moments of the target equal W_new
    exactly.  With zero heat flux the target is that discrete Maxwellian.
    """
    rho, U, T, M = fit_maxwellian(W_new, lambda r, u, t: maxwellian_array(r, u, t, grid, gas.R),
                                  lambda m: conserved(m, grid), gas.R)
    x = np.asarray(inv_tau_B, dtype=float)
    q = heat_flux(f_star, grid, U) / (1.0 + gas.Pr * x)[..., None]
    Mt = shakhov_array(rho, U, T, q, grid, gas)
    return _match_moments(Mt, M, W_new, grid)


def _match_moments(Mt, M, W, grid):
    err = W - conserved(Mt, grid)
    psi = grid.psi
    # 5x5 mass matrix of M against psi psi
    A = np.einsum("...ijk,aijk,bijk->...ab", M, psi, psi, optimize=True) * grid.weight
    lam = np.linalg.solve(A, err[..., None])[..., 0]
    corr = np.einsum("...a,aijk->...ijk", lam, psi)
    return Mt + M * corr


def cell_collision_update(f_n, flux_increment, W_new, weights, inv_tau_new, grid,
                          Q_n=None, gas=None):
    """Closed-form hybrid collision update for one cell or a batch of cells.

    ``weights`` may be a SplitWeights (single cell) or a pair of arrays
    (A, B) broadcasting over the leading axes.
    """
    gas = gas or GasProperties()
    if isinstance(weights, SplitWeights):
        A, B = weights.A, weights.B
    else:
        A, B = weights
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    inv_tau = np.asarray(inv_tau_new, dtype=float)
    if np.any(inv_tau < 0) or not np.all(np.isfinite(inv_tau)):
        raise ConfigurationError("relaxation time must be positive")
    f_star = np.asarray(f_n) + flux_increment
    if np.any(A > 0):
        if Q_n is None:
            raise ConfigurationError("a Boltzmann rate is required when A > 0")
        f_star = f_star + A[..., None, None, None] * Q_n
    x = B * inv_tau
    if not np.any(x > 0):
        return f_star
    Mt = shakhov_target(f_star, np.asarray(W_new, dtype=float), x, grid, gas)
    xb = x[..., None, None, None]
    return (f_star + xb * Mt) / (1.0 + xb)
