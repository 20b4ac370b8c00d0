"""Pure numpy implementations of the hot loops (fallback backend).

The compiled module ``_kernels`` exposes the same functions with the same
signatures; ``kernels`` picks one at import.
"""

import numpy as np

NAME = "python"


def van_leer(fm, f0, fp, dxm, dxp):
    """Limited slope from left/right neighbours on a non-uniform mesh.

    fm, f0, fp : (n, Nv) values of cells j-1, j, j+1
    dxm, dxp   : (n,) centre distances x_j - x_{j-1} and x_{j+1} - x_j
    """
    s1 = (f0 - fm) / dxm[:, None]
    s2 = (fp - f0) / dxp[:, None]
    a1 = np.abs(s1)
    a2 = np.abs(s2)
    den = a1 + a2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.sign(s1) + np.sign(s2)) * a1 * a2 / den
    return np.where(den > 0, out, 0.0)


def micro_flux(u, v, w, f0, sig, rho0, U0, lam0, q0, al, ar, At, qc, Pr, R, weight):
    """Time-integrated interface flux per node and its conservative moments.

    u, v, w : (Nv,) lattice velocities
    f0, sig : (n, Nv) upwind interface values and upwind slopes
    rho0, lam0 : (n,), U0, q0 : (n, 3) interface equilibrium parameters
    al, ar, At : (n, 5) expansion coefficients
    qc : (n, 5) time-integration factors (q1 .. q5)
    Returns F (n, Nv) and FW (n, 5).
    """
    cx = u[None, :] - U0[:, 0:1]
    cy = v[None, :] - U0[:, 1:2]
    cz = w[None, :] - U0[:, 2:3]
    c2 = cx * cx + cy * cy + cz * cz
    lam = lam0[:, None]
    M = (rho0 * (lam0 / np.pi) ** 1.5)[:, None] * np.exp(-lam * c2)
    RT = 1.0 / (2.0 * lam0)
    p = rho0 * RT
    cq = cx * q0[:, 0:1] + cy * q0[:, 1:2] + cz * q0[:, 2:3]
    corr = (1.0 - Pr) * cq * (c2 / RT[:, None] - 5.0) / (5.0 * p * RT)[:, None]
    Mt = M * (1.0 + corr)
    e = 0.5 * (u * u + v * v + w * w)

    def poly(a):
        return a[:, 0:1] + a[:, 1:2] * u + a[:, 2:3] * v + a[:, 3:4] * w + a[:, 4:5] * e

    pos = (u > 0.0)[None, :]
    aup = np.where(pos, poly(al), poly(ar))
    F = u * (qc[:, 0:1] * Mt + qc[:, 1:2] * poly(At) * M + qc[:, 2:3] * u * aup * M
             + qc[:, 3:4] * f0 - qc[:, 4:5] * u * sig)
    FW = np.empty((F.shape[0], 5))
    FW[:, 0] = F.sum(axis=1)
    FW[:, 1] = F @ u
    FW[:, 2] = F @ v
    FW[:, 3] = F @ w
    FW[:, 4] = F @ e
    return F, FW * weight
