"""Ground-truth synthetic data generators.

Every estimator in the toolkit can be validated against data with known
parameters. Generators are deterministic functions of (params, seed);
callers parallelize by splitting seeds. The growth-curve generator
evaluates the model with its own straightforward formula, independent of
the fitting code, so generator/fitter agreement is a real check.
"""

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .data import ChannelSeries, TimeSeries
from .errors import InvalidInputError, StabilityError
from .gompertz import GompertzParams

SYNTH_EPOCH = date(2015, 1, 1)
AR_BURN_IN = 100


def _curve_value(components, t):
    total = 0.0
    for comp in components:
        tau = t - comp.onset
        if tau < 0:
            continue
        inner = math.exp(min(comp.growth * tau, 700.0)) - 1.0
        if comp.eta * inner > 700.0:
            gomp = comp.sat
        else:
            gomp = comp.sat * (1.0 - math.exp(-comp.eta * inner))
        total += gomp + comp.slope * tau
    return total


def gen_gompertz(params: GompertzParams, horizon, noise_sigma=0.0, rng=None):
    """Cumulative view series from known growth-curve parameters.

    Gaussian observation noise is resampled (up to a retry cap, then
    clamped) so the cumulative series stays non-decreasing and
    non-negative. ``noise_sigma`` is in view units.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if horizon < 1:
        raise InvalidInputError("horizon must be >= 1")
    if params.components[-1].onset >= horizon:
        raise InvalidInputError("all onsets must lie before the horizon")
    if noise_sigma < 0:
        raise InvalidInputError("noise_sigma must be >= 0")
    clean = np.array([_curve_value(params.components, t) for t in range(horizon)])
    if noise_sigma == 0.0:
        return TimeSeries(SYNTH_EPOCH, clean, kind="cumulative")
    noisy = np.empty(horizon)
    prev = 0.0
    for t in range(horizon):
        floor = prev if t > 0 else 0.0
        value = None
        for _ in range(100):
            cand = clean[t] + rng.normal(0.0, noise_sigma)
            if cand >= floor:
                value = cand
                break
        if value is None:
            value = floor
        noisy[t] = value
        prev = value
    return TimeSeries(SYNTH_EPOCH, noisy, kind="cumulative")


@dataclass(frozen=True)
class ViewProcess:
    """Driving process for the channel view-count series.

    kinds: ``white`` (mean + sigma*N(0,1)), ``ar1`` (phi plus noise),
    ``bursts`` (baseline plus amplitude every ``period`` days), and
    ``impulse`` (zeros except ``amplitude`` at day ``at``).
    """

    kind: str = "white"
    mean: float = 0.0
    sigma: float = 1.0
    phi: float = 0.5
    period: int = 7
    amplitude: float = 1.0
    at: int = 0

    def simulate(self, n, rng):
        if self.kind == "white":
            return self.mean + self.sigma * rng.standard_normal(n)
        if self.kind == "ar1":
            if abs(self.phi) >= 1:
                raise StabilityError("ar1 view process requires |phi| < 1")
            eps = self.sigma * rng.standard_normal(n)
            out = np.empty(n)
            prev = 0.0
            for t in range(n):
                prev = self.phi * prev + eps[t]
                out[t] = prev
            return self.mean + out
        if self.kind == "bursts":
            out = np.full(n, self.mean)
            out[:: self.period] += self.amplitude
            if self.sigma > 0:
                out = out + self.sigma * rng.standard_normal(n)
            return out
        if self.kind == "impulse":
            out = np.zeros(n)
            idx = AR_BURN_IN + self.at
            if 0 <= idx < n:
                out[idx] = self.amplitude
            return out
        raise InvalidInputError(f"unknown view process kind {self.kind!r}")


def _companion_spectral_radius(a):
    n = len(a)
    if n == 0:
        return 0.0
    comp = np.zeros((n, n))
    comp[0, :] = a
    if n > 1:
        comp[1:, :-1] = np.eye(n - 1)
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def gen_granger_channel(
    a,
    b,
    view_process: ViewProcess = None,
    horizon=500,
    noise_sigma=1.0,
    rng=None,
    category="synthetic",
    channel_id="synthetic",
    shift_nonneg=True,
):
    """Simulate a channel whose subscribers follow a lagged linear model.

    ``s(t) = sum_k a[k] s(t-k-1) + sum_k b[k] v(t-k-1) + noise`` with the
    view series from ``view_process``. The first ``AR_BURN_IN`` steps are
    discarded. With ``shift_nonneg`` both series are shifted up by their
    own minimum so the subscriber-count invariant holds; a constant shift
    is absorbed exactly by an intercept term when fitting.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if np.any(np.abs(a) >= 1) or np.any(np.abs(b) >= 1):
        raise InvalidInputError("stationarity requires |a_i| < 1 and |b_i| < 1")
    radius = _companion_spectral_radius(a)
    if radius >= 1.0:
        raise StabilityError(f"subscriber recursion is explosive (spectral radius {radius:.3f})")
    view_process = view_process or ViewProcess()
    n = horizon + AR_BURN_IN
    v = view_process.simulate(n, rng)
    eps = noise_sigma * rng.standard_normal(n) if noise_sigma > 0 else np.zeros(n)
    s = np.zeros(n)
    n_s, n_v = len(a), len(b)
    for t in range(n):
        acc = eps[t]
        for k in range(n_s):
            if t - k - 1 >= 0:
                acc += a[k] * s[t - k - 1]
        for k in range(n_v):
            if t - k - 1 >= 0:
                acc += b[k] * v[t - k - 1]
        s[t] = acc
    s = s[AR_BURN_IN:]
    v = v[AR_BURN_IN:]
    if shift_nonneg:
        if s.min() < 0:
            s = s - s.min()
        if v.min() < 0:
            v = v - v.min()
    return ChannelSeries(
        channel_id=channel_id,
        category=category,
        start_day=SYNTH_EPOCH,
        subscribers=s,
        views=v,
        uploads=np.zeros(horizon),
    )


@dataclass(frozen=True)
class ScheduleTruth:
    uploads: np.ndarray
    scheduled_days: tuple
    off_schedule_days: tuple


def gen_schedule(period, jitter_prob=0.0, off_schedule_prob=0.0, horizon=None, rng=None):
    """Upload indicator series with a periodic schedule and labeled extras.

    Scheduled uploads land every ``period`` days, each independently
    shifted by ±1 day with probability ``jitter_prob``; additional
    off-schedule uploads occur independently per day with probability
    ``off_schedule_prob`` (days already carrying an upload are skipped).
    Ground-truth labels are returned alongside the indicator.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if period < 2:
        raise InvalidInputError("period must be >= 2")
    if horizon is None:
        horizon = 10 * period
    if horizon < 10 * period:
        raise InvalidInputError("horizon must be >= 10 * period")
    uploads = np.zeros(horizon)
    scheduled = []
    for base in range(0, horizon, period):
        day = base
        if jitter_prob > 0 and rng.random() < jitter_prob:
            day = base + (1 if rng.random() < 0.5 else -1)
        if 0 <= day < horizon and uploads[day] == 0:
            uploads[day] = 1
            scheduled.append(day)
    off = []
    if off_schedule_prob > 0:
        draws = rng.random(horizon)
        for day in range(horizon):
            if draws[day] < off_schedule_prob and uploads[day] == 0:
                uploads[day] = 1
                off.append(day)
    return ScheduleTruth(
        uploads=uploads,
        scheduled_days=tuple(scheduled),
        off_schedule_days=tuple(off),
    )


_LINKS = ("linear", "additive-sigmoid", "multiplicative")


def gen_feature_dataset(n, n_features, relevant, link="additive-sigmoid", noise_sigma=0.0, rng=None):
    """Regression bed: uniform features with a known sparse link.

    ``relevant`` indexes the features that carry signal. Links: ``linear``
    sums them, ``additive-sigmoid`` sums steep sigmoids of them, and
    ``multiplicative`` multiplies shifted copies. Returns
    ``(feature_names, X, y)`` with X uniform on [0, 1].
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if n < 50:
        raise InvalidInputError("need n >= 50 samples")
    relevant = sorted(int(j) for j in relevant)
    if relevant and (relevant[0] < 0 or relevant[-1] >= n_features):
        raise InvalidInputError("relevant indices out of range")
    if link not in _LINKS:
        raise InvalidInputError(f"unknown link {link!r} (options: {_LINKS})")
    x = rng.uniform(0.0, 1.0, size=(n, n_features))
    cols = x[:, relevant] if relevant else np.zeros((n, 0))
    if link == "linear":
        signal = cols.sum(axis=1)
    elif link == "additive-sigmoid":
        signal = (1.0 / (1.0 + np.exp(-8.0 * (cols - 0.5)))).sum(axis=1)
    else:
        signal = np.prod(cols + 0.5, axis=1)
    y = signal + (noise_sigma * rng.standard_normal(n) if noise_sigma > 0 else 0.0)
    width = max(2, len(str(n_features)))
    names = tuple(f"f{j:0{width}d}" for j in range(1, n_features + 1))
    return names, x, y
