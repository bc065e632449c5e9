"""Numpy reference implementations of the hot kernels.

The compiled extension (``engagedyn._kernels._native``) mirrors these
signatures exactly; parity between the two is asserted in the test suite.
All growth-curve evaluation uses the saturation guard described below so
the double exponential never overflows: once eta*(exp(b*tau) - 1) passes
``_SAT`` the saturating term equals its limit M to machine precision and
every derivative of that term is identically zero.
"""

import numpy as np

_EXP_CLIP = 700.0   # exp argument ceiling
_SAT = 700.0        # eta*(exp(b*tau)-1) beyond this: component fully saturated


def gompertz_curve(t, onsets, sat, eta, growth, slope):
    """Evaluate the multi-component saturating growth curve at times ``t``.

    Each component k contributes, for t >= onsets[k],
    ``sat[k]*(1 - exp(-eta[k]*(exp(growth[k]*(t-onset)) - 1))) + slope[k]*(t-onset)``
    and zero before its onset.
    """
    t = np.asarray(t, dtype=np.float64)
    total = np.zeros_like(t)
    for tk, M, e, b, c in zip(onsets, sat, eta, growth, slope):
        tau = t - tk
        active = tau >= 0.0
        tau = np.where(active, tau, 0.0)
        A = np.minimum(b * tau, _EXP_CLIP)
        E = np.exp(A)
        G = e * (E - 1.0)
        satd = G > _SAT
        F = np.exp(-np.where(satd, 0.0, G))
        F = np.where(satd, 0.0, F)
        total += np.where(active, M * (1.0 - F) + c * tau, 0.0)
    return total


def gompertz_curve_jac(t, onsets, sat, eta, growth, slope):
    """Curve values plus Jacobian w.r.t. the packed component parameters.

    Returns ``(curve, jac)`` where ``jac`` has one column block of
    ``[d/d onset, d/d sat, d/d eta, d/d growth, d/d slope]`` per component,
    i.e. shape ``(len(t), 5 * n_components)``.
    """
    t = np.asarray(t, dtype=np.float64)
    n = t.shape[0]
    k = len(onsets)
    curve = np.zeros(n)
    jac = np.zeros((n, 5 * k))
    for i, (tk, M, e, b, c) in enumerate(zip(onsets, sat, eta, growth, slope)):
        tau = t - tk
        active = tau >= 0.0
        tau = np.where(active, tau, 0.0)
        A = np.minimum(b * tau, _EXP_CLIP)
        E = np.exp(A)
        G = e * (E - 1.0)
        satd = G > _SAT
        Gsafe = np.where(satd, 0.0, G)
        F = np.where(satd, 0.0, np.exp(-Gsafe))
        FE = np.where(satd, 0.0, F * E)
        FE1 = np.where(satd, 0.0, F * (E - 1.0))
        curve += np.where(active, M * (1.0 - F) + c * tau, 0.0)
        zero = np.zeros_like(tau)
        base = 5 * i
        jac[:, base + 0] = np.where(active, -(M * e * b * FE + c), zero)
        jac[:, base + 1] = np.where(active, 1.0 - F, zero)
        jac[:, base + 2] = np.where(active, M * FE1, zero)
        jac[:, base + 3] = np.where(active, M * e * tau * FE, zero)
        jac[:, base + 4] = np.where(active, tau, zero)
    return curve, jac


def lasso_cd(gram, xty, w0, lam, nonneg, tol, max_sweeps):
    """Cyclic coordinate descent on 0.5*||y-Xw||^2 + lam*||w||_1.

    Operates on the precomputed normal equations ``gram = X'X`` and
    ``xty = X'y``. Returns ``(w, sweeps, converged)``; converged means the
    largest coordinate change in the final sweep fell below ``tol``.
    """
    gram = np.asarray(gram, dtype=np.float64)
    xty = np.asarray(xty, dtype=np.float64)
    w = np.array(w0, dtype=np.float64, copy=True)
    m = w.shape[0]
    gw = gram @ w
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        delta_max = 0.0
        for j in range(m):
            gjj = gram[j, j]
            if gjj <= 0.0:
                new_wj = 0.0
            else:
                cj = xty[j] - gw[j] + gjj * w[j]
                if nonneg:
                    new_wj = max(0.0, cj - lam) / gjj
                else:
                    if cj > lam:
                        new_wj = (cj - lam) / gjj
                    elif cj < -lam:
                        new_wj = (cj + lam) / gjj
                    else:
                        new_wj = 0.0
            d = new_wj - w[j]
            if d != 0.0:
                gw += gram[:, j] * d
                w[j] = new_wj
                delta_max = max(delta_max, abs(d))
        if delta_max < tol:
            return w, sweeps, True
    return w, sweeps, False
