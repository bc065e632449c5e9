"""Upload-schedule analytics.

Detects a dominant periodic upload schedule from the periodogram of the
upload indicator, labels uploads that fall off that schedule, and
measures view/comment gains in a window after off-schedule uploads.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numkit
from .data import ChannelSeries
from .errors import InsufficientDataError, InvalidInputError

DOMINANCE_RATIO = 2.0
MIN_SERIES_DAYS = 28
MIN_UPLOADS = 4


@dataclass(frozen=True)
class DominantSchedule:
    """Detected period (None when no schedule dominates) and peak ratio."""

    period: Optional[int]
    peak_ratio: float
    peak_frequency: float

    @property
    def dominant(self):
        return self.period is not None


def _local_maxima(power):
    n = power.shape[0]
    out = []
    for i in range(n):
        left = power[i - 1] if i > 0 else -np.inf
        right = power[i + 1] if i + 1 < n else -np.inf
        if power[i] > 0 and power[i] >= left and power[i] >= right:
            out.append(i)
    return out


def dominant_schedule(uploads) -> DominantSchedule:
    """Detect a dominant upload period from the indicator periodogram.

    The top periodogram peak is compared with the strongest remaining
    local maximum after masking the peak's neighboring bins (spectral
    leakage) and the bins at its harmonics - a strict comb puts equal
    power at every harmonic of the true period, so harmonics describe the
    same schedule rather than a competing one. The schedule dominates
    when the ratio exceeds 2; the period is round(1/f_peak) days.
    """
    uploads = np.asarray(uploads, dtype=np.float64)
    if uploads.shape[0] < MIN_SERIES_DAYS:
        raise InsufficientDataError(
            f"need at least {MIN_SERIES_DAYS} days, got {uploads.shape[0]}"
        )
    if np.sum(uploads > 0) < MIN_UPLOADS:
        raise InsufficientDataError(f"need at least {MIN_UPLOADS} uploads")
    freqs, power = numkit.periodogram(uploads)
    if not np.any(power > 0):
        return DominantSchedule(period=None, peak_ratio=1.0, peak_frequency=0.0)
    peak = int(np.argmax(power))
    peak_power = float(power[peak])
    f_peak = freqs[peak]

    excluded = {peak - 1, peak, peak + 1}
    harmonic = 2 * (peak + 1) - 1  # bin index of 2*f_peak
    while harmonic < power.shape[0] + 1:
        excluded.update({harmonic - 1, harmonic, harmonic + 1})
        harmonic += peak + 1
    candidates = [i for i in _local_maxima(power) if i not in excluded]
    second = max((float(power[i]) for i in candidates), default=0.0)
    ratio = peak_power / second if second > 0 else np.inf
    period = int(round(1.0 / f_peak))
    if ratio > DOMINANCE_RATIO:
        return DominantSchedule(period=period, peak_ratio=ratio, peak_frequency=float(f_peak))
    return DominantSchedule(period=None, peak_ratio=ratio, peak_frequency=float(f_peak))


def off_schedule_events(uploads, period, tolerance=1):
    """Days whose upload does not fit the periodic schedule.

    The schedule anchor is the modal upload phase mod ``period``. An
    upload is off-schedule when its circular phase distance from the
    anchor exceeds ``tolerance``, or when it is an extra upload in a
    period window already served by a closer upload (uploads claim their
    nearest scheduled gridpoint in order of proximity).
    """
    uploads = np.asarray(uploads, dtype=np.float64)
    if period < 2:
        raise InvalidInputError("period must be >= 2")
    days = np.flatnonzero(uploads > 0)
    if days.size == 0:
        return []
    phases = days % period
    counts = Counter(int(p) for p in phases)
    anchor = min(sorted(counts), key=lambda p: (-counts[p], p))

    off = set()
    in_tolerance = []
    for day in days:
        phase_dist = min((day - anchor) % period, (anchor - day) % period)
        if phase_dist > tolerance:
            off.add(int(day))
        else:
            window = round((day - anchor) / period)
            grid_day = anchor + window * period
            in_tolerance.append((abs(day - grid_day), int(day), int(window)))
    claimed = set()
    for _, day, window in sorted(in_tolerance):
        if window in claimed:
            off.add(day)
        else:
            claimed.add(window)
    return sorted(off)


@dataclass(frozen=True)
class GainStats:
    fraction_views_gain: Optional[float]
    fraction_comments_gain: Optional[float]
    n_events: int
    n_used: int
    skipped: tuple  # (day, reason)

    def to_dict(self):
        return {
            "fraction_views_gain": self.fraction_views_gain,
            "fraction_comments_gain": self.fraction_comments_gain,
            "n_events": self.n_events,
            "n_used": self.n_used,
            "skipped_events": [{"day": d, "reason": r} for d, r in self.skipped],
        }


def off_schedule_gain(channel: ChannelSeries, events, window=7) -> GainStats:
    """Fraction of off-schedule uploads followed by increased activity.

    Per event day d the gain is mean(views over [d, d+window-1]) divided
    by mean(views over [d-window, d-1]); an event counts as a gain when
    the ratio exceeds 1. Events with truncated windows or zero pre-window
    mean are skipped and reported. Comments are treated identically when
    present.
    """
    views = channel.views
    comments = channel.comments
    n = len(views)
    skipped = []
    view_gains = []
    comment_gains = []
    for day in sorted(int(d) for d in events):
        if day - window < 0 or day + window - 1 >= n:
            skipped.append((day, "window-truncated"))
            continue
        pre = float(np.mean(views[day - window : day]))
        post = float(np.mean(views[day : day + window]))
        if pre <= 0:
            skipped.append((day, "zero-pre-views"))
            continue
        view_gains.append(post / pre)
        if comments is not None:
            pre_c = float(np.mean(comments[day - window : day]))
            post_c = float(np.mean(comments[day : day + window]))
            if pre_c > 0:
                comment_gains.append(post_c / pre_c)
    frac_views = (
        sum(1 for g in view_gains if g > 1.0) / len(view_gains) if view_gains else None
    )
    frac_comments = (
        sum(1 for g in comment_gains if g > 1.0) / len(comment_gains)
        if comment_gains
        else None
    )
    return GainStats(
        fraction_views_gain=frac_views,
        fraction_comments_gain=frac_comments,
        n_events=len(list(events)),
        n_used=len(view_gains),
        skipped=tuple(skipped),
    )


def channel_schedule_report(channel: ChannelSeries, tolerance=1, window=7,
                            max_daily_upload_rate=None):
    """End-to-end schedule analysis for one channel as a plain dict.

    ``max_daily_upload_rate`` optionally filters out channels uploading
    nearly every day (copied-content farms): when the upload rate exceeds
    it the channel is reported as filtered without further analysis.
    """
    uploads = channel.uploads
    rate = float(np.mean(uploads > 0))
    base = {"channel_id": channel.channel_id, "upload_rate": rate}
    if max_daily_upload_rate is not None and rate > max_daily_upload_rate:
        return {**base, "filtered": "upload-rate-exceeds-threshold",
                "dominant_period": None, "peak_ratio": None, "events": [],
                "fraction_views_gain": None, "fraction_comments_gain": None,
                "skipped_events": []}
    detection = dominant_schedule(uploads)
    if not detection.dominant:
        return {**base, "dominant_period": None, "peak_ratio": detection.peak_ratio,
                "events": [], "fraction_views_gain": None,
                "fraction_comments_gain": None, "skipped_events": []}
    events = off_schedule_events(uploads, detection.period, tolerance=tolerance)
    gains = off_schedule_gain(channel, events, window=window)
    return {
        **base,
        "dominant_period": detection.period,
        "peak_ratio": detection.peak_ratio,
        "events": events,
        **gains.to_dict(),
    }
