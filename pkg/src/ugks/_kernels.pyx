# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; mirrors ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, M_PI, pow

cnp.import_array()

NAME = "cython"


def van_leer(double[:, ::1] fm, double[:, ::1] f0, double[:, ::1] fp,
             double[::1] dxm, double[::1] dxp):
    cdef Py_ssize_t n = f0.shape[0], nv = f0.shape[1], i, k
    cdef double s1, s2, a1, a2, sg
    out_arr = np.empty((n, nv))
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        for k in range(nv):
            s1 = (f0[i, k] - fm[i, k]) / dxm[i]
            s2 = (fp[i, k] - f0[i, k]) / dxp[i]
            if s1 * s2 > 0.0:
                a1 = fabs(s1)
                a2 = fabs(s2)
                sg = 2.0 if s1 > 0.0 else -2.0
                out[i, k] = sg * a1 * a2 / (a1 + a2)
            else:
                out[i, k] = 0.0
    return out_arr


def micro_flux(double[::1] u, double[::1] v, double[::1] w,
               double[:, ::1] f0, double[:, ::1] sig,
               double[::1] rho0, double[:, ::1] U0, double[::1] lam0, double[:, ::1] q0,
               double[:, ::1] al, double[:, ::1] ar, double[:, ::1] At,
               double[:, ::1] qc, double Pr, double R, double weight):
    cdef Py_ssize_t n = f0.shape[0], nv = f0.shape[1], i, k
    cdef double amp, lam, RT, p, cx, cy, cz, c2, M, Mt, e, cq, pa, pup, val, uk
    cdef double s0, s1, s2, s3, s4
    F_arr = np.empty((n, nv))
    FW_arr = np.empty((n, 5))
    cdef double[:, ::1] F = F_arr
    cdef double[:, ::1] FW = FW_arr
    for i in range(n):
        lam = lam0[i]
        amp = rho0[i] * pow(lam / M_PI, 1.5)
        RT = 1.0 / (2.0 * lam)
        p = rho0[i] * RT
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        s3 = 0.0
        s4 = 0.0
        for k in range(nv):
            uk = u[k]
            cx = uk - U0[i, 0]
            cy = v[k] - U0[i, 1]
            cz = w[k] - U0[i, 2]
            c2 = cx * cx + cy * cy + cz * cz
            M = amp * exp(-lam * c2)
            cq = cx * q0[i, 0] + cy * q0[i, 1] + cz * q0[i, 2]
            Mt = M * (1.0 + (1.0 - Pr) * cq * (c2 / RT - 5.0) / (5.0 * p * RT))
            e = 0.5 * (uk * uk + v[k] * v[k] + w[k] * w[k])
            pa = At[i, 0] + At[i, 1] * uk + At[i, 2] * v[k] + At[i, 3] * w[k] + At[i, 4] * e
            if uk > 0.0:
                pup = al[i, 0] + al[i, 1] * uk + al[i, 2] * v[k] + al[i, 3] * w[k] + al[i, 4] * e
            else:
                pup = ar[i, 0] + ar[i, 1] * uk + ar[i, 2] * v[k] + ar[i, 3] * w[k] + ar[i, 4] * e
            val = uk * (qc[i, 0] * Mt + qc[i, 1] * pa * M + qc[i, 2] * uk * pup * M
                        + qc[i, 3] * f0[i, k] - qc[i, 4] * uk * sig[i, k])
            F[i, k] = val
            s0 += val
            s1 += val * uk
            s2 += val * v[k]
            s3 += val * w[k]
            s4 += val * e
        FW[i, 0] = s0 * weight
        FW[i, 1] = s1 * weight
        FW[i, 2] = s2 * weight
        FW[i, 3] = s3 * weight
        FW[i, 4] = s4 * weight
    return F_arr, FW_arr
