"""Shared numerical primitives.

Pseudoinverse, least squares with coefficient covariance, an L1-penalized
solver (optionally sign-constrained), bound-constrained nonlinear least
squares, exact segmented linear regression, a discrete periodogram, and
chi-square tail probabilities. Everything here is a pure function of its
inputs and safe to call concurrently.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from . import _kernels
from .errors import ConvergenceError, InvalidInputError, SingularDesignError

DEFAULT_SV_RTOL = 1e-12


def _as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInputError(f"{name} must be 2-D and non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def _as_vector(v, name="vector"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return v


def pinv(a, tol=DEFAULT_SV_RTOL):
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``tol * max(singular values)`` are treated as
    exactly zero. The result satisfies the four Penrose conditions to
    within ~1e-8 relative error for well-scaled inputs.
    """
    a = _as_matrix(a)
    if tol <= 0:
        raise InvalidInputError("tol must be > 0")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]))
    cutoff = tol * s[0]
    s_inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    return (vt.T * s_inv) @ u.T


def _first_dependent_column(x, cutoff_rtol=DEFAULT_SV_RTOL):
    """Index of the first column linearly dependent on its predecessors."""
    for j in range(1, x.shape[1]):
        sub = x[:, : j + 1]
        s = np.linalg.svd(sub, compute_uv=False)
        if s[-1] <= cutoff_rtol * max(s[0], 1.0) * max(sub.shape):
            return j
    return x.shape[1] - 1


@dataclass(frozen=True)
class OlsFit:
    """Ordinary least squares result with coefficient covariance."""

    coefficients: np.ndarray
    residuals: np.ndarray
    sigma2: float
    cov: np.ndarray
    dof: int

    @property
    def sse(self):
        return float(self.residuals @ self.residuals)


def ols(x, y, column_names=None):
    """Least squares fit of ``y`` on the columns of ``x``.

    Requires more rows than columns and full column rank; a rank-deficient
    design raises :class:`SingularDesignError` naming the offending column.
    ``cov`` is ``sigma2 * (X'X)^-1`` with ``sigma2 = SSE / dof``.
    """
    x = _as_matrix(x, "design matrix")
    y = _as_vector(y, "target")
    n, m = x.shape
    if n <= m:
        raise InvalidInputError(f"need more rows than columns, got {n}x{m}")
    if y.shape[0] != n:
        raise InvalidInputError("target length does not match design rows")
    s = np.linalg.svd(x, compute_uv=False)
    if s[-1] <= DEFAULT_SV_RTOL * s[0] * max(n, m):
        j = _first_dependent_column(x)
        name = column_names[j] if column_names is not None else f"column {j}"
        raise SingularDesignError(
            f"design matrix is rank deficient ({name} is linearly dependent)",
            column=name,
        )
    xp = pinv(x)
    beta = xp @ y
    resid = y - x @ beta
    dof = n - m
    sigma2 = float(resid @ resid) / dof
    xtx_inv = xp @ xp.T
    cov = sigma2 * xtx_inv
    return OlsFit(coefficients=beta, residuals=resid, sigma2=sigma2, cov=cov, dof=dof)


def lasso_gram(gram, xty, lam, nonneg=False, tol=1e-8, max_sweeps=10_000):
    """L1-penalized least squares from precomputed normal equations.

    Solves 0.5*||y - Xw||^2 + lam*||w||_1 given ``gram = X'X`` and
    ``xty = X'y`` by deterministic cyclic coordinate descent, optionally
    constrained to w >= 0. Raises :class:`ConvergenceError` carrying the
    last iterate if the maximum coordinate change has not dropped below
    ``tol`` after ``max_sweeps``.
    """
    gram = _as_matrix(gram, "gram matrix")
    xty = _as_vector(xty, "xty")
    if lam < 0:
        raise InvalidInputError("lambda must be >= 0")
    w0 = np.zeros(xty.shape[0])
    w, sweeps, converged = _kernels.lasso_cd(
        gram, xty, w0, float(lam), bool(nonneg), tol, int(max_sweeps)
    )
    if not converged:
        raise ConvergenceError(
            f"coordinate descent did not converge in {sweeps} sweeps",
            last_iterate=w,
        )
    return w


def lasso(x, y, lam, nonneg=False, standardize=False, tol=1e-8, max_sweeps=10_000):
    """Solve 0.5*||y - Xw||^2 + lam*||w||_1 by cyclic coordinate descent.

    ``nonneg=True`` additionally constrains w >= 0. The caller is expected
    to standardize columns, or pass ``standardize=True`` to do it here
    (coefficients are returned on the original scale).
    """
    x = _as_matrix(x, "design matrix")
    y = _as_vector(y, "target")
    if x.shape[0] != y.shape[0]:
        raise InvalidInputError("target length does not match design rows")
    scales = None
    if standardize:
        scales = x.std(axis=0, ddof=0)
        scales[scales == 0.0] = 1.0
        x = x / scales
    try:
        w = lasso_gram(x.T @ x, x.T @ y, lam, nonneg=nonneg, tol=tol, max_sweeps=max_sweeps)
    except ConvergenceError as err:
        if scales is not None and err.last_iterate is not None:
            err.last_iterate = err.last_iterate / scales
        raise
    if scales is not None:
        w = w / scales
    return w


@dataclass
class NllsResult:
    """Outcome of a bound-constrained nonlinear least squares run."""

    x: np.ndarray
    sse: float
    n_iter: int
    converged: bool
    message: str


def _fd_jacobian(residual_fn, x, lower, upper, h=1e-7):
    r0 = residual_fn(x)
    jac = np.empty((r0.shape[0], x.shape[0]))
    for j in range(x.shape[0]):
        step = h * max(1.0, abs(x[j]))
        xp = x.copy()
        if x[j] + step > upper[j]:
            xp[j] = x[j] - step
            jac[:, j] = (r0 - residual_fn(xp)) / step
        else:
            xp[j] = x[j] + step
            jac[:, j] = (residual_fn(xp) - r0) / step
    return jac


def nlls(
    residual_fn,
    x0,
    lower,
    upper,
    jacobian_fn=None,
    max_iter=500,
    sse_rtol=1e-10,
    grad_tol=1e-8,
    damping_max=1e12,
):
    """Bound-constrained Levenberg-Marquardt with projected steps.

    Minimizes ``sum(residual_fn(x)**2)`` over ``lower <= x <= upper``.
    Accepted steps never increase the SSE. Stops when the relative SSE
    decrease falls below ``sse_rtol``, the projected-gradient infinity
    norm falls below ``grad_tol`` (components pushing outward at an active
    bound are ignored), or after ``max_iter`` iterations. A non-finite
    residual during the search rejects the step and increases damping;
    damping beyond ``damping_max`` raises :class:`ConvergenceError` with
    the best iterate so far.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if np.any(x < lower - 1e-12) or np.any(x > upper + 1e-12):
        raise InvalidInputError("x0 violates bounds")
    x = np.clip(x, lower, upper)
    r = np.asarray(residual_fn(x), dtype=np.float64)
    if not np.all(np.isfinite(r)):
        raise InvalidInputError("residual_fn non-finite at x0")
    sse = float(r @ r)

    if jacobian_fn is None:
        jac_eval = lambda xx: _fd_jacobian(residual_fn, xx, lower, upper)
    else:
        jac_eval = jacobian_fn

    damping = 1e-3
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        jac = np.asarray(jac_eval(x), dtype=np.float64)
        grad = jac.T @ r
        proj = grad.copy()
        at_lo = (x <= lower + 1e-14) & (proj > 0)
        at_hi = (x >= upper - 1e-14) & (proj < 0)
        proj[at_lo | at_hi] = 0.0
        if np.max(np.abs(proj)) < grad_tol:
            return NllsResult(x, sse, n_iter, True, "projected gradient below tolerance")
        a = jac.T @ jac
        diag = np.diag(a).copy()
        diag[diag <= 0.0] = 1.0
        accepted = False
        while not accepted:
            try:
                step = np.linalg.solve(a + damping * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                x_new = np.clip(x + step, lower, upper)
                r_new = np.asarray(residual_fn(x_new), dtype=np.float64)
                if np.all(np.isfinite(r_new)):
                    sse_new = float(r_new @ r_new)
                    if sse_new < sse:
                        accepted = True
                        break
            damping *= 10.0
            if damping > damping_max:
                raise ConvergenceError(
                    "damping exceeded limit without an acceptable step",
                    last_iterate=x,
                    sse=sse,
                )
        damping = max(damping / 10.0, 1e-12)
        rel_decrease = (sse - sse_new) / max(sse, np.finfo(float).tiny)
        x, r, sse = x_new, r_new, sse_new
        if rel_decrease < sse_rtol:
            return NllsResult(x, sse, n_iter, True, "relative SSE decrease below tolerance")
    return NllsResult(x, sse, n_iter, False, "iteration limit reached")


@dataclass(frozen=True)
class SegmentedFit:
    """Piecewise-linear fit: breakpoints are start indices of segments 2..k."""

    breakpoints: tuple
    slopes: tuple
    intercepts: tuple
    sse: float
    bic: float
    n_breaks: int


MIN_SEGMENT_LEN = 3


def _segment_cost_table(y):
    """cost[i, j] = SSE of the best line over points i..j inclusive.

    Closed form from prefix sums; segments shorter than MIN_SEGMENT_LEN
    get infinite cost.
    """
    n = y.shape[0]
    t = np.arange(n, dtype=np.float64)
    one = np.ones(n)

    def prefix(v):
        return np.concatenate(([0.0], np.cumsum(v)))

    s1, st, stt = prefix(one), prefix(t), prefix(t * t)
    sy, syy, sty = prefix(y), prefix(y * y), prefix(t * y)
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    cnt = s1[j + 1] - s1[i]
    sx = st[j + 1] - st[i]
    sxx = stt[j + 1] - stt[i]
    sy_ = sy[j + 1] - sy[i]
    syy_ = syy[j + 1] - syy[i]
    sxy = sty[j + 1] - sty[i]
    det = cnt * sxx - sx * sx
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = (cnt * sxy - sx * sy_) / det
        intercept = (sy_ - slope * sx) / cnt
        sse = syy_ - intercept * sy_ - slope * sxy
    sse = np.where(det <= 0, np.inf, sse)
    sse = np.maximum(sse, 0.0)  # clip tiny negative rounding
    sse[cnt < MIN_SEGMENT_LEN] = np.inf
    sse[j < i] = np.inf
    return sse, slope, intercept


def segmented_regression(series, max_breaks):
    """Exact least-squares segmentation of ``series`` into straight lines.

    Dynamic programming minimizes total SSE for each break count
    0..max_breaks (segments at least 3 points long); the returned fit is
    the count minimizing BIC = n*ln(SSE/n) + p*ln(n) with
    p = 2*(breaks+1) + breaks. Ties prefer fewer breaks.
    """
    y = _as_vector(series, "series")
    n = y.shape[0]
    if max_breaks < 0:
        raise InvalidInputError("max_breaks must be >= 0")
    if n < 2 * (max_breaks + 1) or n < MIN_SEGMENT_LEN:
        raise InvalidInputError(
            f"series of length {n} too short for {max_breaks} breaks"
        )

    cost, slope_tab, icept_tab = _segment_cost_table(y)

    # best[k][j] = min SSE splitting points 0..j into k+1 segments;
    # argbest holds the start index of the last segment.
    best = np.full((max_breaks + 1, n), np.inf)
    argbest = np.zeros((max_breaks + 1, n), dtype=np.intp)
    best[0] = cost[0]
    for k in range(1, max_breaks + 1):
        for j in range(1, n):
            cand = best[k - 1, :j] + cost[1 : j + 1, j]
            i = int(np.argmin(cand))
            best[k, j] = cand[i]
            argbest[k, j] = i + 1

    fits = []
    for k in range(max_breaks + 1):
        total = best[k, n - 1]
        if not np.isfinite(total):
            continue
        p = 2 * (k + 1) + k
        bic = n * np.log(max(total, 1e-300) / n) + p * np.log(n)
        fits.append((bic, k))
    if not fits:
        raise InvalidInputError("no feasible segmentation")
    _, k_opt = min(fits, key=lambda t: (t[0], t[1]))

    # backtrack segment starts
    starts = []
    j = n - 1
    for k in range(k_opt, 0, -1):
        i = int(argbest[k, j])
        starts.append(i)
        j = i - 1
    starts = sorted(starts)
    bounds = [0] + starts + [n]
    slopes, intercepts = [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        slopes.append(float(slope_tab[a, b - 1]))
        intercepts.append(float(icept_tab[a, b - 1]))
    total = float(best[k_opt, n - 1])
    p = 2 * (k_opt + 1) + k_opt
    bic = float(n * np.log(max(total, 1e-300) / n) + p * np.log(n))
    return SegmentedFit(
        breakpoints=tuple(starts),
        slopes=tuple(slopes),
        intercepts=tuple(intercepts),
        sse=total,
        bic=bic,
        n_breaks=k_opt,
    )


def periodogram(series):
    """One-sided discrete periodogram of a mean-removed series.

    Returns ``(frequencies, power)`` with power ``|DFT_j|^2 / n`` at the
    Fourier frequencies j/n for j = 1..n//2 (DC excluded). Satisfies
    Parseval: the two-sided sum of power equals n * var(series).
    """
    y = _as_vector(series, "series")
    n = y.shape[0]
    if n < 4:
        raise InvalidInputError("series length must be >= 4")
    y = y - y.mean()
    spec = np.fft.rfft(y)
    power = (spec.real**2 + spec.imag**2) / n
    j = np.arange(1, n // 2 + 1)
    freqs = j / n
    return freqs, power[1 : n // 2 + 1]


def chi2_sf(x, dof):
    """Chi-square survival function P(X >= x) with ``dof`` degrees of freedom."""
    if dof < 1:
        raise InvalidInputError("dof must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise InvalidInputError("x must be finite and >= 0")
    out = gammaincc(dof / 2.0, x / 2.0)
    if out.ndim == 0:
        return float(out)
    return out
