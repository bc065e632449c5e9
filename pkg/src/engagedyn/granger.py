"""Subscriber/view causality pipeline.

Fits the subscriber series on its own lags plus lagged channel views,
screens model adequacy with a portmanteau whiteness test on the
residuals, and tests whether the view-lag coefficients are jointly zero
with a Wald statistic. A channel exhibits causality when the model is
adequate and the null of all-zero view coefficients is rejected.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numkit
from .data import ChannelSeries
from .errors import (
    AnalysisStageError,
    InsufficientDataError,
    InvalidInputError,
    SingularDesignError,
)

DEFAULT_LAGS = 3
DEFAULT_ALPHA = 0.05
DEFAULT_LB_LAGS = 10


@dataclass(frozen=True)
class ArFit:
    """Lagged linear model of s(t) on s- and v-lags."""

    n_s: int
    n_v: int
    a: np.ndarray          # subscriber-lag coefficients
    b: np.ndarray          # view-lag coefficients
    intercept: Optional[float]
    residuals: np.ndarray
    ols: numkit.OlsFit

    @property
    def b_cov(self):
        k = (1 if self.intercept is not None else 0) + self.n_s
        return self.ols.cov[k : k + self.n_v, k : k + self.n_v]


def _lag_design(s, v, n_s, n_v, intercept):
    p = max(n_s, n_v)
    t = len(s)
    rows = t - p
    cols = []
    names = []
    if intercept:
        cols.append(np.ones(rows))
        names.append("intercept")
    for k in range(1, n_s + 1):
        cols.append(s[p - k : t - k])
        names.append(f"s_lag{k}")
    for k in range(1, n_v + 1):
        cols.append(v[p - k : t - k])
        names.append(f"v_lag{k}")
    return np.column_stack(cols), s[p:], names


def fit_ar(channel: ChannelSeries, n_s=DEFAULT_LAGS, n_v=DEFAULT_LAGS,
           intercept=False, difference=False, swap_direction=False) -> ArFit:
    """Least-squares fit of the lagged subscriber model.

    ``difference=True`` first-differences both series before fitting;
    ``swap_direction=True`` swaps the roles of subscribers and views
    (testing the reverse direction). No intercept by default.
    """
    if n_s < 1 or n_v < 1:
        raise InvalidInputError("lag counts must be >= 1")
    s = channel.subscribers.astype(np.float64)
    v = channel.views.astype(np.float64)
    if swap_direction:
        s, v = v, s
    if difference:
        s, v = np.diff(s), np.diff(v)
    t = len(s)
    minimum = max(n_s, n_v) + n_s + n_v + 5
    if t <= minimum:
        raise InsufficientDataError(
            f"series length {t} too short for lags ({n_s}, {n_v}); need > {minimum}"
        )
    x, y, names = _lag_design(s, v, n_s, n_v, intercept)
    fit = numkit.ols(x, y, column_names=names)
    offset = 1 if intercept else 0
    return ArFit(
        n_s=n_s,
        n_v=n_v,
        a=fit.coefficients[offset : offset + n_s],
        b=fit.coefficients[offset + n_s : offset + n_s + n_v],
        intercept=float(fit.coefficients[0]) if intercept else None,
        residuals=fit.residuals,
        ols=fit,
    )


def ljung_box(residuals, h=DEFAULT_LB_LAGS, fitted_params=0):
    """Portmanteau whiteness test on a residual sequence.

    Q = n(n+2) * sum_{k=1..h} acf_k^2 / (n-k), referred to a chi-square
    with h - fitted_params degrees of freedom. Autocorrelations are taken
    about zero (regression residuals are treated as mean-free).
    """
    e = np.asarray(residuals, dtype=np.float64)
    n = e.shape[0]
    if h <= fitted_params:
        raise InvalidInputError(f"need h > fitted_params, got h={h}, fitted={fitted_params}")
    if n <= h:
        raise InsufficientDataError(f"need more residuals than lags, got {n} <= {h}")
    denom = float(e @ e)
    if denom == 0.0:
        return {"Q": 0.0, "h": h, "dof": h - fitted_params, "p": 1.0}
    q = 0.0
    for k in range(1, h + 1):
        rho = float(e[k:] @ e[:-k]) / denom
        q += rho * rho / (n - k)
    q *= n * (n + 2.0)
    dof = h - fitted_params
    return {"Q": float(q), "h": h, "dof": dof, "p": numkit.chi2_sf(q, dof)}


def wald_test(fit: ArFit):
    """Wald test of the joint null that every view-lag coefficient is zero."""
    cov_bb = fit.b_cov
    try:
        solved = np.linalg.solve(cov_bb, fit.b)
    except np.linalg.LinAlgError:
        cond = np.linalg.cond(cov_bb)
        raise SingularDesignError(
            f"view-lag covariance block is singular (condition number {cond:.3e})"
        ) from None
    w = float(fit.b @ solved)
    return {"W": w, "dof": fit.n_v, "p": numkit.chi2_sf(max(w, 0.0), fit.n_v)}


@dataclass(frozen=True)
class GrangerReport:
    channel_id: str
    n_s: int
    n_v: int
    a: tuple
    b: tuple
    ljung_box: dict
    wald: dict
    adequacy_pass: bool
    causality: Optional[bool]  # None when the model is inadequate

    def to_dict(self):
        return {
            "channel_id": self.channel_id,
            "n_s": self.n_s,
            "n_v": self.n_v,
            "a": list(self.a),
            "b": list(self.b),
            "ljung_box": self.ljung_box,
            "wald": self.wald,
            "adequacy_pass": self.adequacy_pass,
            "causality": self.causality,
        }


def channel_causality(channel: ChannelSeries, n_s=DEFAULT_LAGS, n_v=DEFAULT_LAGS,
                      alpha=DEFAULT_ALPHA, h=DEFAULT_LB_LAGS, intercept=False,
                      difference=False, swap_direction=False) -> GrangerReport:
    """Full pipeline: lag fit, adequacy screen, causality test.

    The model is adequate when the whiteness test fails to reject
    (p > alpha); causality holds when additionally the Wald p-value falls
    below alpha. Stage failures carry the stage name.
    """
    try:
        fit = fit_ar(channel, n_s, n_v, intercept=intercept,
                     difference=difference, swap_direction=swap_direction)
    except (InvalidInputError, SingularDesignError) as err:
        raise AnalysisStageError("fit_ar", err) from err
    try:
        lb = ljung_box(fit.residuals, h=h, fitted_params=n_s + n_v)
    except InvalidInputError as err:
        raise AnalysisStageError("ljung_box", err) from err
    adequacy = lb["p"] > alpha
    try:
        wald = wald_test(fit)
    except SingularDesignError as err:
        raise AnalysisStageError("wald_test", err) from err
    causality = bool(wald["p"] < alpha) if adequacy else None
    return GrangerReport(
        channel_id=channel.channel_id,
        n_s=n_s,
        n_v=n_v,
        a=tuple(float(x) for x in fit.a),
        b=tuple(float(x) for x in fit.b),
        ljung_box=lb,
        wald=wald,
        adequacy_pass=bool(adequacy),
        causality=causality,
    )


def cohort_summary(channels, n_s=DEFAULT_LAGS, n_v=DEFAULT_LAGS, alpha=DEFAULT_ALPHA,
                   h=DEFAULT_LB_LAGS, intercept=False, difference=False):
    """Per-category fraction of adequate channels exhibiting causality.

    Channels that error out are recorded under ``skipped``. Categories
    with no analyzable channels are omitted with a note.
    """
    per_category = {}
    skipped = []
    for channel in channels:
        try:
            report = channel_causality(
                channel, n_s=n_s, n_v=n_v, alpha=alpha, h=h,
                intercept=intercept, difference=difference,
            )
        except AnalysisStageError as err:
            skipped.append({"channel_id": channel.channel_id, "reason": str(err)})
            continue
        bucket = per_category.setdefault(
            channel.category or "uncategorized",
            {"n_channels": 0, "n_adequate": 0, "n_causal": 0},
        )
        bucket["n_channels"] += 1
        if report.adequacy_pass:
            bucket["n_adequate"] += 1
            if report.causality:
                bucket["n_causal"] += 1
    summary = {}
    notes = []
    for category in sorted(per_category):
        bucket = per_category[category]
        if bucket["n_adequate"] == 0:
            notes.append(f"category {category!r} has no adequate channels")
            summary[category] = {**bucket, "fraction_causal": None}
        else:
            summary[category] = {
                **bucket,
                "fraction_causal": bucket["n_causal"] / bucket["n_adequate"],
            }
    return {"categories": summary, "skipped": skipped, "notes": notes}
