# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (see pure.py for the reference)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs

cnp.import_array()

cdef double _EXP_CLIP = 700.0
cdef double _SAT = 700.0


def gompertz_curve(t, onsets, sat, eta, growth, slope):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t_ = np.ascontiguousarray(t, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tk_ = np.ascontiguousarray(onsets, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] M_ = np.ascontiguousarray(sat, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e_ = np.ascontiguousarray(eta, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b_ = np.ascontiguousarray(growth, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c_ = np.ascontiguousarray(slope, dtype=np.float64)
    cdef Py_ssize_t n = t_.shape[0]
    cdef Py_ssize_t k = tk_.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double tau, A, E, G, F
    for j in range(k):
        for i in range(n):
            tau = t_[i] - tk_[j]
            if tau < 0.0:
                continue
            A = b_[j] * tau
            if A > _EXP_CLIP:
                A = _EXP_CLIP
            E = exp(A)
            G = e_[j] * (E - 1.0)
            if G > _SAT:
                F = 0.0
            else:
                F = exp(-G)
            out[i] += M_[j] * (1.0 - F) + c_[j] * tau
    return out


def gompertz_curve_jac(t, onsets, sat, eta, growth, slope):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t_ = np.ascontiguousarray(t, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tk_ = np.ascontiguousarray(onsets, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] M_ = np.ascontiguousarray(sat, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e_ = np.ascontiguousarray(eta, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b_ = np.ascontiguousarray(growth, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c_ = np.ascontiguousarray(slope, dtype=np.float64)
    cdef Py_ssize_t n = t_.shape[0]
    cdef Py_ssize_t k = tk_.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] curve = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] jac = np.zeros((n, 5 * k), dtype=np.float64)
    cdef Py_ssize_t i, j, base
    cdef double tau, A, E, G, F, FE, FE1
    for j in range(k):
        base = 5 * j
        for i in range(n):
            tau = t_[i] - tk_[j]
            if tau < 0.0:
                continue
            A = b_[j] * tau
            if A > _EXP_CLIP:
                A = _EXP_CLIP
            E = exp(A)
            G = e_[j] * (E - 1.0)
            if G > _SAT:
                F = 0.0
                FE = 0.0
                FE1 = 0.0
            else:
                F = exp(-G)
                FE = F * E
                FE1 = F * (E - 1.0)
            curve[i] += M_[j] * (1.0 - F) + c_[j] * tau
            jac[i, base + 0] = -(M_[j] * e_[j] * b_[j] * FE + c_[j])
            jac[i, base + 1] = 1.0 - F
            jac[i, base + 2] = M_[j] * FE1
            jac[i, base + 3] = M_[j] * e_[j] * tau * FE
            jac[i, base + 4] = tau
    return curve, jac


def lasso_cd(gram, xty, w0, lam, nonneg, tol, max_sweeps):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G = np.ascontiguousarray(gram, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.ascontiguousarray(xty, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.array(w0, dtype=np.float64, copy=True)
    cdef Py_ssize_t m = w.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gw = np.dot(G, w)
    cdef double lam_ = lam
    cdef double tol_ = tol
    cdef bint nonneg_ = 1 if nonneg else 0
    cdef Py_ssize_t max_sweeps_ = max_sweeps
    cdef Py_ssize_t sweeps = 0, i, j
    cdef double delta_max, gjj, cj, new_wj, d
    cdef bint converged = 0
    for sweeps in range(1, max_sweeps_ + 1):
        delta_max = 0.0
        for j in range(m):
            gjj = G[j, j]
            if gjj <= 0.0:
                new_wj = 0.0
            else:
                cj = b[j] - gw[j] + gjj * w[j]
                if nonneg_:
                    new_wj = cj - lam_
                    if new_wj < 0.0:
                        new_wj = 0.0
                    new_wj = new_wj / gjj
                else:
                    if cj > lam_:
                        new_wj = (cj - lam_) / gjj
                    elif cj < -lam_:
                        new_wj = (cj + lam_) / gjj
                    else:
                        new_wj = 0.0
            d = new_wj - w[j]
            if d != 0.0:
                for i in range(m):
                    gw[i] += G[i, j] * d
                w[j] = new_wj
                if fabs(d) > delta_max:
                    delta_max = fabs(d)
        if delta_max < tol_:
            converged = 1
            break
    return np.asarray(w), int(sweeps), bool(converged)
