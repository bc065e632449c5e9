"""Impact analysis of post-publication metadata changes.

The sensitivity of one optimization event is the ratio of the mean daily
view count over the 7 days from the event day to the mean over the 7 days
up to and including it - both windows deliberately share the event day.
Cohort statistics aggregate the per-event ratios, excluding time-sensitive
content, and per-traffic-source ratios restrict the same computation to
one source's daily views.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import MetaOptEvent, VideoRecord
from .errors import InsufficientDataError, InvalidInputError

WINDOW_DAYS = 7
NO_CHANGE_DAY = 90
DEFAULT_EXCLUDED_CATEGORIES = ("politics", "movies-and-trailers")
DEFAULT_EXCLUDED_KEYWORDS = ("holiday", "movie", "trailers")
MIN_TRAFFIC_EVENTS = 600
REPORTED_SOURCES = ("related", "promoted", "search")


@dataclass(frozen=True)
class OptSensitivity:
    """Per-event view ratio; invalid events carry a skip reason."""

    event: MetaOptEvent
    ratio: Optional[float]
    pre_mean: Optional[float]
    post_mean: Optional[float]
    valid: bool
    reason: Optional[str] = None


def _window_ratio(values, day, overlapping=True):
    """(ratio, pre_mean, post_mean, reason) on a daily series."""
    n = len(values)
    if overlapping:
        pre_lo, pre_hi = day - WINDOW_DAYS + 1, day + 1  # [day-6, day]
        post_lo, post_hi = day, day + WINDOW_DAYS        # [day, day+6]
    else:
        pre_lo, pre_hi = day - WINDOW_DAYS, day          # [day-7, day-1]
        post_lo, post_hi = day, day + WINDOW_DAYS        # [day, day+6]
    if pre_lo < 0 or post_hi > n:
        return None, None, None, "window-truncated"
    pre = float(np.mean(values[pre_lo:pre_hi]))
    post = float(np.mean(values[post_lo:post_hi]))
    if pre <= 0:
        return None, pre, post, "zero-pre-views"
    return post / pre, pre, post, None


def opt_sensitivity(video: VideoRecord, event: MetaOptEvent, overlapping=True) -> OptSensitivity:
    """Mean-view ratio around one optimization event.

    With ``overlapping=True`` (the default) both 7-day windows include
    the event day itself; ``overlapping=False`` uses the disjoint
    variant with the pre-window ending the day before the event.
    """
    if event.video_id != video.video_id:
        raise InvalidInputError("event does not belong to this video")
    ratio, pre, post, reason = _window_ratio(
        video.daily_views.values, event.day_index, overlapping=overlapping
    )
    return OptSensitivity(
        event=event, ratio=ratio, pre_mean=pre, post_mean=post,
        valid=reason is None, reason=reason,
    )


def _is_time_sensitive(video, categories, keywords):
    if video.category in categories:
        return True
    lowered = [k.lower() for k in video.keywords]
    return any(k.lower() in lowered for k in keywords)


def _iter_events(dataset, kind):
    """Yield (video, event) pairs; kind None means all kinds, 'none' means
    pseudo-events for videos without any optimization."""
    for vid in sorted(dataset.videos):
        video = dataset.videos[vid]
        if kind == "none":
            if not video.optimization_events and len(video.daily_views) >= NO_CHANGE_DAY + WINDOW_DAYS:
                yield video, MetaOptEvent(vid, NO_CHANGE_DAY, "title")
            continue
        for event in video.optimization_events:
            if kind is None or event.kind == kind:
                yield video, event


@dataclass(frozen=True)
class CohortFraction:
    kind: Optional[str]
    fraction_gain: float
    n_events: int
    n_valid: int
    n_excluded: int

    def to_dict(self):
        return {
            "kind": self.kind or "all",
            "fraction_gain": self.fraction_gain,
            "n_events": self.n_events,
            "n_valid": self.n_valid,
            "n_excluded": self.n_excluded,
        }


def cohort_fraction(dataset, kind=None, excluded_categories=DEFAULT_EXCLUDED_CATEGORIES,
                    excluded_keywords=DEFAULT_EXCLUDED_KEYWORDS, overlapping=True) -> CohortFraction:
    """Fraction of valid events whose ratio exceeds one.

    ``kind`` filters by event kind; ``kind='none'`` evaluates the
    no-change baseline (a pseudo-event 90 days after posting on videos
    without any optimization). Time-sensitive content is excluded by
    category and keyword lists.
    """
    n_events = 0
    n_excluded = 0
    ratios = []
    for video, event in _iter_events(dataset, kind):
        n_events += 1
        if _is_time_sensitive(video, excluded_categories, excluded_keywords):
            n_excluded += 1
            continue
        sens = opt_sensitivity(video, event, overlapping=overlapping)
        if sens.valid:
            ratios.append(sens.ratio)
    if not ratios:
        raise InsufficientDataError(
            f"no valid events for kind {kind!r} after exclusions"
        )
    gains = sum(1 for r in ratios if r > 1.0)
    return CohortFraction(
        kind=kind,
        fraction_gain=gains / len(ratios),
        n_events=n_events,
        n_valid=len(ratios),
        n_excluded=n_excluded,
    )


def traffic_ratios(dataset, kind=None, min_events=MIN_TRAFFIC_EVENTS,
                   excluded_categories=DEFAULT_EXCLUDED_CATEGORIES,
                   excluded_keywords=DEFAULT_EXCLUDED_KEYWORDS, overlapping=True):
    """Median per-source ratio over events that increased popularity.

    Only events with a valid overall ratio above one enter; for each of
    the reported traffic sources the same window ratio is computed on
    that source's daily views. Sources with fewer than ``min_events``
    usable events report ``median_ratio=None`` (insufficient sample for
    the cohort statistic).
    """
    per_source = {src: [] for src in REPORTED_SOURCES}
    for video, event in _iter_events(dataset, kind):
        if _is_time_sensitive(video, excluded_categories, excluded_keywords):
            continue
        overall = opt_sensitivity(video, event, overlapping=overlapping)
        if not overall.valid or overall.ratio <= 1.0:
            continue
        if not video.traffic:
            continue
        for src in REPORTED_SOURCES:
            series = video.traffic.get(src)
            if series is None:
                continue
            ratio, _, _, reason = _window_ratio(series, event.day_index, overlapping=overlapping)
            if reason is None:
                per_source[src].append(ratio)
    out = {}
    for src in REPORTED_SOURCES:
        ratios = per_source[src]
        if len(ratios) < min_events:
            out[src] = {"median_ratio": None, "n": len(ratios)}
        else:
            out[src] = {"median_ratio": float(np.median(ratios)), "n": len(ratios)}
    return out
