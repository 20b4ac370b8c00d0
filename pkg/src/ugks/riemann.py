"""Exact solution of the 1D Riemann problem for an ideal gas."""

import numpy as np
from scipy.optimize import brentq

__all__ = ["exact_riemann"]


def _pressure_function(p, rho, pk, c, gamma):
    if p > pk:
        A = 2.0 / ((gamma + 1.0) * rho)
        B = (gamma - 1.0) / (gamma + 1.0) * pk
        return (p - pk) * np.sqrt(A / (p + B))
    return 2.0 * c / (gamma - 1.0) * ((p / pk) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)


def exact_riemann(left, right, x, t, x0=0.5, gamma=5.0 / 3.0):
    """Sample (rho, u, p) of the exact solution at positions ``x`` and time ``t``.

    ``left`` and ``right`` are (rho, u, p) triples.
    """
    rl, ul, pl = left
    rr, ur, pr = right
    cl = np.sqrt(gamma * pl / rl)
    cr = np.sqrt(gamma * pr / rr)
    g = gamma

    def fstar(p):
        return (_pressure_function(p, rl, pl, cl, g) + _pressure_function(p, rr, pr, cr, g)
                + (ur - ul))

    hi = max(pl, pr)
    while fstar(hi) < 0:
        hi *= 2.0
    ps = brentq(fstar, 1e-14, hi, xtol=1e-15, rtol=1e-15)
    us = 0.5 * (ul + ur) + 0.5 * (_pressure_function(ps, rr, pr, cr, g)
                                  - _pressure_function(ps, rl, pl, cl, g))
    x = np.asarray(x, dtype=float)
    s = (x - x0) / max(t, 1e-300)
    rho = np.empty_like(s)
    u = np.empty_like(s)
    p = np.empty_like(s)
    gm = (g - 1.0) / (g + 1.0)
    for i, si in enumerate(s):
        if si <= us:
            r0, u0, p0, c0, sign = rl, ul, pl, cl, 1.0
        else:
            r0, u0, p0, c0, sign = rr, ur, pr, cr, -1.0
        if ps > p0:  # shock
            rs = r0 * (ps / p0 + gm) / (gm * ps / p0 + 1.0)
            sh = u0 - sign * c0 * np.sqrt((g + 1) / (2 * g) * ps / p0 + (g - 1) / (2 * g))
            outside = si <= sh if sign > 0 else si >= sh
            rho[i], u[i], p[i] = (r0, u0, p0) if outside else (rs, us, ps)
        else:  # rarefaction
            rs = r0 * (ps / p0) ** (1.0 / g)
            cs = c0 * (ps / p0) ** ((g - 1) / (2 * g))
            head = u0 - sign * c0
            tail = us - sign * cs
            if (sign > 0 and si <= head) or (sign < 0 and si >= head):
                rho[i], u[i], p[i] = r0, u0, p0
            elif (sign > 0 and si >= tail) or (sign < 0 and si <= tail):
                rho[i], u[i], p[i] = rs, us, ps
            else:
                uf = 2.0 / (g + 1) * (sign * c0 + 0.5 * (g - 1) * u0 + si)
                cf = 2.0 / (g + 1) * (c0 + sign * 0.5 * (g - 1) * (u0 - si))
                rho[i] = r0 * (cf / c0) ** (2.0 / (g - 1))
                u[i] = uf
                p[i] = p0 * (cf / c0) ** (2.0 * g / (g - 1))
    return rho, u, p
