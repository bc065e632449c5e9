"""Canonical data model, CSV ingestion, and feature pre-processing.

Feature columns are ingested as opaque numeric columns (image/text feature
extraction happens upstream); this module handles min-max scaling to
[0, 1], base-10 log view targets, and correlation-based feature
elimination. Datasets are immutable after load.
"""

import csv
import warnings
from dataclasses import dataclass, replace
from datetime import date, datetime
from typing import Optional

import numpy as np

from .errors import DataSchemaError, InvalidInputError

#: Canonical names for the meta-level features referenced throughout the
#: docs and presets. Files may carry any f_-prefixed columns; this list
#: only fixes a preferred ordering for the well-known ones.
CANONICAL_FEATURES = (
    "first_day_views",
    "subscribers",
    "thumb_contrast",
    "google_hits",
    "n_keywords",
    "category_code",
    "title_length",
    "title_uppercase",
)

TRAFFIC_SOURCES = ("related", "promoted", "search", "other")
EVENT_KINDS = ("title", "thumbnail", "keyword")


@dataclass(frozen=True)
class TimeSeries:
    """Daily-sampled series with no gaps; kind is 'daily' or 'cumulative'."""

    start_day: date
    values: np.ndarray
    kind: str = "daily"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if self.kind not in ("daily", "cumulative"):
            raise InvalidInputError(f"unknown series kind {self.kind!r}")
        if v.ndim != 1 or v.size == 0:
            raise InvalidInputError("series must be 1-D and non-empty")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InvalidInputError("series values must be finite and >= 0")
        if self.kind == "cumulative" and np.any(np.diff(v) < 0):
            raise InvalidInputError("cumulative series must be non-decreasing")

    def __len__(self):
        return int(self.values.shape[0])


@dataclass(frozen=True)
class MetaOptEvent:
    """A post-publication title/thumbnail/keyword change."""

    video_id: str
    day_index: int
    kind: str

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise InvalidInputError(f"unknown optimization kind {self.kind!r}")
        if self.day_index < 0:
            raise InvalidInputError("day_index must be >= 0")


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    channel_id: str
    upload_date: date
    category: str
    features: dict
    daily_views: TimeSeries
    optimization_events: tuple = ()
    traffic: Optional[dict] = None  # source -> per-day views array
    keywords: tuple = ()


@dataclass(frozen=True)
class ChannelSeries:
    """Aligned daily subscriber/view/upload/comment series for one channel."""

    channel_id: str
    category: str
    start_day: date
    subscribers: np.ndarray
    views: np.ndarray
    uploads: np.ndarray
    comments: Optional[np.ndarray] = None

    def __post_init__(self):
        subs = np.asarray(self.subscribers, dtype=np.float64)
        views = np.asarray(self.views, dtype=np.float64)
        ups = np.asarray(self.uploads, dtype=np.float64)
        object.__setattr__(self, "subscribers", subs)
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "uploads", ups)
        if self.comments is not None:
            com = np.asarray(self.comments, dtype=np.float64)
            object.__setattr__(self, "comments", com)
        lengths = {len(subs), len(views), len(ups)}
        if self.comments is not None:
            lengths.add(len(self.comments))
        if len(lengths) != 1:
            raise InvalidInputError(f"channel {self.channel_id}: aligned arrays differ in length")
        if np.any(subs < 0):
            raise InvalidInputError(f"channel {self.channel_id}: negative subscriber count")

    def __len__(self):
        return int(self.subscribers.shape[0])


@dataclass(frozen=True)
class FeatureDataset:
    """Regression view of a dataset: feature matrix plus log-view targets.

    ``feature_names`` fixes the registry order used for deterministic
    tie-breaking everywhere downstream.
    """

    feature_names: tuple
    x: np.ndarray
    y: np.ndarray
    ids: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 2 or x.shape[1] != len(self.feature_names):
            raise InvalidInputError("feature matrix shape does not match names")
        if y.shape[0] != x.shape[0]:
            raise InvalidInputError("target length does not match samples")

    @property
    def n_samples(self):
        return int(self.x.shape[0])


@dataclass(frozen=True)
class Dataset:
    """Validated in-memory dataset."""

    videos: dict
    channels: dict
    feature_names: tuple

    def feature_dataset(self, target_day=14):
        """(features, log views) pairs; target is the cumulative view count
        over the first ``target_day`` days on the log10 scale."""
        ids, rows, targets = [], [], []
        for vid in sorted(self.videos):
            rec = self.videos[vid]
            rows.append([rec.features[name] for name in self.feature_names])
            horizon = min(target_day, len(rec.daily_views))
            total = float(np.sum(rec.daily_views.values[:horizon]))
            targets.append(log_views(total))
            ids.append(vid)
        return FeatureDataset(
            feature_names=self.feature_names,
            x=np.array(rows, dtype=np.float64).reshape(len(ids), len(self.feature_names)),
            y=np.array(targets, dtype=np.float64),
            ids=tuple(ids),
        )


def log_views(raw_views):
    """View counts on the log10 scale, shifted by one so zero maps to zero."""
    raw = np.asarray(raw_views, dtype=np.float64)
    if np.any(raw < 0):
        raise InvalidInputError("view counts must be >= 0")
    out = np.log10(raw + 1.0)
    return float(out) if out.ndim == 0 else out


def _parse_date(text, path, line, column):
    try:
        return datetime.strptime(text, "%Y-%m-%d").date()
    except ValueError:
        raise DataSchemaError(f"bad date {text!r} (want YYYY-MM-DD)", path, line, column) from None


def _parse_float(text, path, line, column):
    try:
        v = float(text)
    except ValueError:
        raise DataSchemaError(f"bad number {text!r}", path, line, column) from None
    if not np.isfinite(v):
        raise DataSchemaError(f"non-finite number {text!r}", path, line, column)
    return v


def _parse_nonneg_int(text, path, line, column):
    try:
        v = int(text)
    except ValueError:
        raise DataSchemaError(f"bad integer {text!r}", path, line, column) from None
    if v < 0:
        raise DataSchemaError(f"negative value {v}", path, line, column)
    return v


def _read_rows(path, required, optional=()):
    """Yield (line_number, row_dict) after validating the header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataSchemaError("empty file (header row required)", path) from None
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise DataSchemaError(f"missing required columns {missing}", path, line=1)
        rows = []
        for line_no, raw in enumerate(reader, start=2):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if len(raw) != len(header):
                raise DataSchemaError(
                    f"expected {len(header)} fields, got {len(raw)}", path, line=line_no
                )
            rows.append((line_no, dict(zip(header, raw))))
    return header, rows


def load_dataset(videos_path, views_path, channels_path=None, events_path=None, traffic_path=None):
    """Load and cross-validate the CSV file set into a :class:`Dataset`.

    Referential integrity is enforced: every video needs a view series and
    every view/event/traffic row must join to a video. Errors name the
    file, line, and column that failed.
    """
    header, video_rows = _read_rows(
        videos_path, required=("video_id", "channel_id", "upload_date", "category")
    )
    feature_cols = [c for c in header if c.startswith("f_")]
    known = [f"f_{n}" for n in CANONICAL_FEATURES if f"f_{n}" in feature_cols]
    rest = [c for c in feature_cols if c not in known]
    feature_cols = known + rest
    feature_names = tuple(c[2:] for c in feature_cols)

    raw_videos = {}
    for line_no, row in video_rows:
        vid = row["video_id"].strip()
        if not vid:
            raise DataSchemaError("empty video_id", videos_path, line_no, "video_id")
        if vid in raw_videos:
            raise DataSchemaError(f"duplicate video_id {vid!r}", videos_path, line_no, "video_id")
        features = {}
        for col, name in zip(feature_cols, feature_names):
            features[name] = _parse_float(row[col], videos_path, line_no, col)
        kw = tuple(
            k.strip() for k in row.get("keywords", "").split(";") if k.strip()
        )
        raw_videos[vid] = {
            "channel_id": row["channel_id"].strip(),
            "upload_date": _parse_date(row["upload_date"], videos_path, line_no, "upload_date"),
            "category": row["category"].strip(),
            "features": features,
            "keywords": kw,
        }

    _, view_rows = _read_rows(views_path, required=("video_id", "day_index", "views"))
    per_video = {}
    orphans = set()
    for line_no, row in view_rows:
        vid = row["video_id"].strip()
        if vid not in raw_videos:
            orphans.add(vid)
            continue
        day = _parse_nonneg_int(row["day_index"], views_path, line_no, "day_index")
        views = _parse_nonneg_int(row["views"], views_path, line_no, "views")
        bucket = per_video.setdefault(vid, {})
        if day in bucket:
            raise DataSchemaError(
                f"duplicate day_index {day} for video {vid!r}", views_path, line_no, "day_index"
            )
        bucket[day] = views
    if orphans:
        raise DataSchemaError(
            f"view rows reference unknown videos: {sorted(orphans)}", views_path
        )
    missing_series = sorted(set(raw_videos) - set(per_video))
    if missing_series:
        raise DataSchemaError(
            f"videos lack view series: {missing_series}", views_path
        )
    series = {}
    for vid, bucket in per_video.items():
        days = sorted(bucket)
        if days != list(range(days[0], days[-1] + 1)) or days[0] != 0:
            raise DataSchemaError(
                f"video {vid!r} daily views must cover days 0..T-1 without gaps", views_path
            )
        series[vid] = np.array([bucket[d] for d in days], dtype=np.float64)

    events_by_video = {}
    if events_path is not None:
        _, event_rows = _read_rows(events_path, required=("video_id", "day_index", "kind"))
        for line_no, row in event_rows:
            vid = row["video_id"].strip()
            if vid not in raw_videos:
                raise DataSchemaError(f"event references unknown video {vid!r}", events_path, line_no, "video_id")
            day = _parse_nonneg_int(row["day_index"], events_path, line_no, "day_index")
            kind = row["kind"].strip()
            if kind not in EVENT_KINDS:
                raise DataSchemaError(f"unknown kind {kind!r}", events_path, line_no, "kind")
            if day >= len(series[vid]):
                raise DataSchemaError(
                    f"event day {day} beyond observed range of video {vid!r}",
                    events_path, line_no, "day_index",
                )
            events_by_video.setdefault(vid, []).append(MetaOptEvent(vid, day, kind))

    traffic_by_video = {}
    if traffic_path is not None:
        _, traffic_rows = _read_rows(traffic_path, required=("video_id", "day_index", "source", "views"))
        for line_no, row in traffic_rows:
            vid = row["video_id"].strip()
            if vid not in raw_videos:
                raise DataSchemaError(f"traffic references unknown video {vid!r}", traffic_path, line_no, "video_id")
            source = row["source"].strip()
            if source not in TRAFFIC_SOURCES:
                raise DataSchemaError(f"unknown source {source!r}", traffic_path, line_no, "source")
            day = _parse_nonneg_int(row["day_index"], traffic_path, line_no, "day_index")
            if day >= len(series[vid]):
                raise DataSchemaError(
                    f"traffic day {day} beyond observed range of video {vid!r}",
                    traffic_path, line_no, "day_index",
                )
            views = _parse_nonneg_int(row["views"], traffic_path, line_no, "views")
            vt = traffic_by_video.setdefault(vid, {})
            vt.setdefault(source, np.zeros(len(series[vid])))[day] = views

    videos = {}
    for vid, raw in raw_videos.items():
        videos[vid] = VideoRecord(
            video_id=vid,
            channel_id=raw["channel_id"],
            upload_date=raw["upload_date"],
            category=raw["category"],
            features=raw["features"],
            daily_views=TimeSeries(raw["upload_date"], series[vid], kind="daily"),
            optimization_events=tuple(
                sorted(events_by_video.get(vid, ()), key=lambda e: (e.day_index, e.kind))
            ),
            traffic=traffic_by_video.get(vid),
            keywords=raw["keywords"],
        )

    channels = {}
    if channels_path is not None:
        channels = load_channels_csv(channels_path)

    return Dataset(videos=videos, channels=channels, feature_names=feature_names)


def load_channels_csv(path):
    """Load channels.csv into a dict of channel_id -> ChannelSeries."""
    _, channel_rows = _read_rows(
        path, required=("channel_id", "date", "subscribers", "views", "uploads")
    )
    per_channel = {}
    for line_no, row in channel_rows:
        cid = row["channel_id"].strip()
        day = _parse_date(row["date"], path, line_no, "date")
        entry = per_channel.setdefault(cid, {})
        if day in entry:
            raise DataSchemaError(
                f"duplicate date {day} for channel {cid!r}", path, line_no, "date"
            )
        comments = row.get("comments", "").strip()
        entry[day] = (
            _parse_float(row["subscribers"], path, line_no, "subscribers"),
            _parse_float(row["views"], path, line_no, "views"),
            _parse_nonneg_int(row["uploads"], path, line_no, "uploads"),
            _parse_float(comments, path, line_no, "comments") if comments else None,
            row.get("category", "").strip(),
        )
    channels = {}
    for cid, entry in per_channel.items():
        days = sorted(entry)
        if (days[-1] - days[0]).days != len(days) - 1:
            raise DataSchemaError(f"channel {cid!r} series has date gaps", path)
        subs = np.array([entry[d][0] for d in days])
        views = np.array([entry[d][1] for d in days])
        ups = np.array([entry[d][2] for d in days])
        comments = [entry[d][3] for d in days]
        category = next((entry[d][4] for d in days if entry[d][4]), "")
        channels[cid] = ChannelSeries(
            channel_id=cid,
            category=category,
            start_day=days[0],
            subscribers=subs,
            views=views,
            uploads=ups,
            comments=np.array(comments) if all(c is not None for c in comments) else None,
        )
    return channels


def load_views_csv(path, start_day=date(2015, 1, 1)):
    """Load views.csv alone into a dict of video_id -> daily TimeSeries."""
    _, view_rows = _read_rows(path, required=("video_id", "day_index", "views"))
    per_video = {}
    for line_no, row in view_rows:
        vid = row["video_id"].strip()
        day = _parse_nonneg_int(row["day_index"], path, line_no, "day_index")
        views = _parse_nonneg_int(row["views"], path, line_no, "views")
        bucket = per_video.setdefault(vid, {})
        if day in bucket:
            raise DataSchemaError(
                f"duplicate day_index {day} for video {vid!r}", path, line_no, "day_index"
            )
        bucket[day] = views
    series = {}
    for vid, bucket in per_video.items():
        days = sorted(bucket)
        if days != list(range(days[0], days[-1] + 1)) or days[0] != 0:
            raise DataSchemaError(
                f"video {vid!r} daily views must cover days 0..T-1 without gaps", path
            )
        series[vid] = TimeSeries(
            start_day, np.array([bucket[d] for d in days], dtype=np.float64), kind="daily"
        )
    return series


class MinMaxScaler:
    """Per-feature min-max scaling learned on a fit subset.

    Constant features map to 0.5; held-out values outside the fit range
    are clipped. ``n_clipped_`` records how many values were clipped in
    the most recent :func:`scale_features` call.
    """

    def __init__(self, mins, maxs, feature_names, constant_features=()):
        self.mins = np.asarray(mins, dtype=np.float64)
        self.maxs = np.asarray(maxs, dtype=np.float64)
        self.feature_names = tuple(feature_names)
        self.constant_features = tuple(constant_features)
        self.n_clipped_ = 0

    def transform_report(self, x):
        x = np.asarray(x, dtype=np.float64)
        span = self.maxs - self.mins
        constant = span <= 0
        safe_span = np.where(constant, 1.0, span)
        scaled = (x - self.mins) / safe_span
        scaled = np.where(constant, 0.5, scaled)
        clipped = np.clip(scaled, 0.0, 1.0)
        n_clipped = int(np.sum((scaled < 0.0) | (scaled > 1.0)))
        return clipped, n_clipped

    def transform(self, x):
        return self.transform_report(x)[0]

    def to_dict(self):
        return {
            "feature_names": list(self.feature_names),
            "mins": [float(v) for v in self.mins],
            "maxs": [float(v) for v in self.maxs],
            "constant_features": list(self.constant_features),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["mins"], d["maxs"], d["feature_names"], d.get("constant_features", ()))


def scale_features(dataset: FeatureDataset, fit_on=None):
    """Min-max scale features to [0, 1] with parameters learned on ``fit_on``.

    ``fit_on`` is an index array into the dataset rows (default: all).
    Values outside the fit range on the remaining rows are clipped and
    counted on the returned scaler. Features are deliberately not
    whitened. Returns ``(scaled dataset, scaler)``.
    """
    if fit_on is None:
        fit_idx = np.arange(dataset.n_samples)
    else:
        fit_idx = np.asarray(fit_on, dtype=np.intp)
        if fit_idx.size == 0:
            raise InvalidInputError("fit subset must be nonempty")
    fit_x = dataset.x[fit_idx]
    mins = fit_x.min(axis=0)
    maxs = fit_x.max(axis=0)
    constant = [
        name for name, lo, hi in zip(dataset.feature_names, mins, maxs) if hi <= lo
    ]
    for name in constant:
        warnings.warn(f"feature {name!r} is constant on the fit subset; mapped to 0.5")
    scaler = MinMaxScaler(mins, maxs, dataset.feature_names, constant)
    scaled, n_clipped = scaler.transform_report(dataset.x)
    scaler.n_clipped_ = n_clipped
    return replace(dataset, x=scaled), scaler


def pearson_eliminate(dataset: FeatureDataset, threshold=0.9):
    """Greedy correlation-based feature elimination.

    While any absolute pairwise Pearson correlation exceeds ``threshold``,
    the member of the worst pair with the larger mean absolute correlation
    to all other remaining features is dropped (registry order breaks
    ties: the later feature is dropped). Zero-variance features are
    dropped first with a warning. Returns ``(kept names, dropped pairs)``
    where each dropped pair is ``(dropped, kept partner, correlation)``.
    """
    if not 0 < threshold <= 1:
        raise InvalidInputError("threshold must be in (0, 1]")
    x = dataset.x
    if x.shape[0] < 2:
        raise InvalidInputError("need at least 2 samples")
    names = list(dataset.feature_names)
    keep = list(range(len(names)))
    dropped = []

    variances = x.var(axis=0)
    for j in range(len(names)):
        if variances[j] == 0.0:
            warnings.warn(f"feature {names[j]!r} has zero variance; dropped")
            keep.remove(j)
            dropped.append((names[j], None, 0.0))

    while len(keep) >= 2:
        sub = x[:, keep]
        corr = np.corrcoef(sub, rowvar=False)
        np.fill_diagonal(corr, 0.0)
        abs_corr = np.abs(corr)
        worst = np.unravel_index(np.argmax(abs_corr), abs_corr.shape)
        if abs_corr[worst] <= threshold:
            break
        a, b = worst
        mean_a = abs_corr[a].sum() / (len(keep) - 1)
        mean_b = abs_corr[b].sum() / (len(keep) - 1)
        if mean_a > mean_b:
            drop_local, partner_local = a, b
        elif mean_b > mean_a:
            drop_local, partner_local = b, a
        else:  # tie: drop the later feature in registry order
            drop_local, partner_local = max(a, b), min(a, b)
        rho = float(corr[a, b])
        dropped.append((names[keep[drop_local]], names[keep[partner_local]], rho))
        del keep[drop_local]

    kept_names = [names[j] for j in keep]
    return kept_names, dropped


def to_cumulative(series: TimeSeries) -> TimeSeries:
    """Prefix-sum a daily series into a cumulative one."""
    if series.kind != "daily":
        raise InvalidInputError(f"expected a daily series, got {series.kind!r}")
    return TimeSeries(series.start_day, np.cumsum(series.values), kind="cumulative")


def to_daily(series: TimeSeries) -> TimeSeries:
    """First-difference a cumulative series back into daily increments."""
    if series.kind != "cumulative":
        raise InvalidInputError(f"expected a cumulative series, got {series.kind!r}")
    values = series.values
    daily = np.diff(values, prepend=0.0)
    if np.any(daily < 0):
        raise InvalidInputError("cumulative series is not non-decreasing")
    return TimeSeries(series.start_day, daily, kind="daily")
