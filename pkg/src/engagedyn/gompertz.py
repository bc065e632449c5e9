"""Cumulative view-count modeling with a multi-component growth curve.

Each component is a saturating (Gompertz-shaped) rise plus a linear
"migration" ramp, switched on at its onset day. Component 0 is the upload
itself (virality from subscribers); later components model exogenous
promotion events. This module estimates how many event components a
series needs (via segmented linear regression), fits all continuous
parameters with bound-constrained nonlinear least squares, provides an
exhaustive subset-enumeration oracle for the event-selection problem, and
profiles playlists by per-video virality/migration rates.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels, numkit
from .data import TimeSeries
from .errors import ConvergenceError, InsufficientDataError, InvalidInputError

ETA_BOUNDS = (1e-4, 10.0)
GROWTH_BOUNDS = (1e-4, 5.0)
ONSET_WINDOW = 5.0  # days either side of a candidate the onset may move


@dataclass(frozen=True)
class GompertzComponent:
    """One saturating-growth component: onset day, saturation level M,
    shape eta, growth rate b, and migration slope c (views/day)."""

    onset: float
    sat: float
    eta: float
    growth: float
    slope: float

    def __post_init__(self):
        if self.sat < 0 or self.eta <= 0 or self.growth <= 0 or self.slope < 0:
            raise InvalidInputError(
                f"component out of bounds: M={self.sat}, eta={self.eta}, "
                f"b={self.growth}, c={self.slope}"
            )


@dataclass(frozen=True)
class GompertzParams:
    """Component 0 anchored at day 0 plus zero or more event components."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise InvalidInputError("need at least one component")
        if comps[0].onset != 0.0:
            raise InvalidInputError("component 0 must have onset 0")
        onsets = [c.onset for c in comps]
        if any(b <= a for a, b in zip(onsets, onsets[1:])):
            raise InvalidInputError("onsets must be strictly increasing")

    @property
    def k_max(self):
        return len(self.components) - 1

    def arrays(self):
        c = self.components
        return (
            np.array([x.onset for x in c]),
            np.array([x.sat for x in c]),
            np.array([x.eta for x in c]),
            np.array([x.growth for x in c]),
            np.array([x.slope for x in c]),
        )


def eval_model(params: GompertzParams, t):
    """Cumulative model value at day(s) ``t`` (scalar or array)."""
    scalar = np.isscalar(t)
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = _kernels.gompertz_curve(tt, *params.arrays())
    return float(out[0]) if scalar else out


def decompose(params: GompertzParams, t):
    """Split the model total into viral, migration, and per-event parts.

    Returns a dict of arrays over ``t``: ``total``, ``viral`` (component
    0's saturating part), ``migration`` (sum of all linear ramps), and
    ``events`` (one saturating part per event component). The parts sum
    to ``total`` exactly.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    onsets, sats, etas, growths, slopes = params.arrays()
    zeros = np.zeros_like(sats)
    sel = np.arange(len(onsets))
    gomp_parts = []
    for k in range(len(onsets)):
        part = _kernels.gompertz_curve(
            tt, onsets, np.where(sel == k, sats, 0.0), etas, growths, zeros
        )
        gomp_parts.append(part)
    migration = _kernels.gompertz_curve(tt, onsets, zeros, etas, growths, slopes)
    total = _kernels.gompertz_curve(tt, onsets, sats, etas, growths, slopes)
    return {
        "total": total,
        "viral": gomp_parts[0],
        "migration": migration,
        "events": gomp_parts[1:],
    }


@dataclass(frozen=True)
class FitConfig:
    """Knobs for event estimation and fitting."""

    c_max: float = None          # migration slope ceiling; None = adaptive
    lam: float = None            # event penalty; None = 0.01 * SSE of the K=0 fit
    multistart: int = 8
    max_breaks: int = 6
    max_candidates: int = 6
    min_series: int = 14

    def __post_init__(self):
        if self.c_max is not None and self.c_max <= 0:
            raise InvalidInputError("c_max must be > 0")
        if self.lam is not None and self.lam < 0:
            raise InvalidInputError("lambda must be >= 0")


def adaptive_c_max(values):
    """Migration-slope ceiling: 3x the 75th percentile of |daily increments|.

    The 75th percentile tolerates decaying migration rates across phases
    (early migration is often several times the final rate) while burst
    days, which are rare, land far above it.
    """
    inc = np.abs(np.diff(np.asarray(values, dtype=np.float64)))
    if inc.size == 0:
        return 1.0
    return max(3.0 * float(np.percentile(inc, 75)), 1e-6)


@dataclass(frozen=True)
class KmaxEstimate:
    k_max: int
    candidate_days: tuple
    c_max: float
    segments: numkit.SegmentedFit
    runs: tuple  # (kind, start_day, end_day_exclusive, level_jump, next_slope)


def _classify_runs(values, seg: numkit.SegmentedFit, c_max):
    bounds = [0] + list(seg.breakpoints) + [len(values)]
    kinds = ["migration" if s < c_max else "burst" for s in seg.slopes]
    runs = []
    for kind, start, end in zip(kinds, bounds[:-1], bounds[1:]):
        if runs and runs[-1][0] == kind:
            prev = runs.pop()
            runs.append((kind, prev[1], end))
        else:
            runs.append((kind, start, end))
    out = []
    for idx, (kind, start, end) in enumerate(runs):
        lo = values[max(start - 1, 0)]
        hi = values[end - 1]
        nxt = None
        if idx + 1 < len(runs) and runs[idx + 1][0] == "migration":
            s2, e2 = runs[idx + 1][1], runs[idx + 1][2]
            nxt = (values[e2 - 1] - values[s2]) / max(e2 - 1 - s2, 1)
        out.append((kind, start, end, float(hi - lo), nxt))
    return out


def estimate_kmax(series: TimeSeries, cfg: FitConfig = None):
    """Estimate the number of exogenous events in a cumulative series.

    Segments the series into straight lines, classifies each segment as
    migration (slope below ``c_max``) or burst, merges consecutive
    same-class segments, and counts burst runs after the initial viral
    rise. The start day of each counted run is its candidate event day.
    """
    cfg = cfg or FitConfig()
    if series.kind != "cumulative":
        raise InvalidInputError("expected a cumulative series")
    values = series.values
    if len(values) < cfg.min_series:
        raise InsufficientDataError(
            f"series of length {len(values)} is below the minimum {cfg.min_series}"
        )
    c_max = cfg.c_max if cfg.c_max is not None else adaptive_c_max(values)
    seg = numkit.segmented_regression(values, cfg.max_breaks)
    runs = _classify_runs(values, seg, c_max)
    burst_runs = [r for r in runs if r[0] == "burst"]
    if burst_runs and burst_runs[0][1] == runs[0][1]:
        event_runs = burst_runs[1:]  # first run is the initial viral rise
    else:
        event_runs = burst_runs
    candidates = tuple(int(r[1]) for r in event_runs)
    return KmaxEstimate(
        k_max=len(candidates),
        candidate_days=candidates,
        c_max=c_max,
        segments=seg,
        runs=tuple(runs),
    )


@dataclass(frozen=True)
class GompertzFit:
    """Fitted parameters, quality, and per-day decomposition."""

    params: GompertzParams
    sse: float
    k_max: int
    converged: bool
    candidate_days: tuple
    decomposition: dict = field(repr=False)

    def component_dicts(self):
        return [
            {"t": c.onset, "M": c.sat, "eta": c.eta, "b": c.growth, "c": c.slope}
            for c in self.params.components
        ]


def _initial_guesses(values, est: KmaxEstimate, candidates):
    """Initial (M, c) per component from the segmented structure."""
    runs = est.runs
    v_max = float(values.max())
    # component 0
    if runs and runs[0][0] == "burst":
        m0 = max(runs[0][3], 1.0)
        c0 = runs[0][4]
    else:
        m0 = max(v_max * 0.1, 1.0)
        c0 = runs[0][4] if runs and runs[0][4] is not None else None
    if c0 is None:
        c0 = max((values[-1] - values[0]) / max(len(values) - 1, 1), 0.0)
    run_by_start = {r[1]: r for r in runs}
    event_inits = []
    for day in candidates:
        run = run_by_start.get(day)
        if run is not None and run[0] == "burst":
            m_init = max(run[3], 1.0)
            c_init = run[4] if run[4] is not None else c0
        else:
            m_init = max(v_max * 0.1, 1.0)
            c_init = c0
        event_inits.append((float(m_init), float(c_init)))
    return float(m0), float(c0), event_inits


def _pack_bounds(n_days, candidates, c_max, v_max):
    lower, upper = [], []
    # component 0: M, eta, b, c
    lower += [0.0, ETA_BOUNDS[0], GROWTH_BOUNDS[0], 0.0]
    upper += [10.0 * v_max, ETA_BOUNDS[1], GROWTH_BOUNDS[1], 5.0 * c_max]
    for day in candidates:
        lower += [max(day - ONSET_WINDOW, 0.5), 0.0, ETA_BOUNDS[0], GROWTH_BOUNDS[0], 0.0]
        upper += [min(day + ONSET_WINDOW, n_days - 1.0), 10.0 * v_max,
                  ETA_BOUNDS[1], GROWTH_BOUNDS[1], 5.0 * c_max]
    return np.array(lower), np.array(upper)


def _unpack(x, n_events):
    raw = [(0.0, max(x[0], 0.0), max(x[1], ETA_BOUNDS[0]),
            max(x[2], GROWTH_BOUNDS[0]), max(x[3], 0.0))]
    for k in range(n_events):
        o = 4 + 5 * k
        raw.append((float(x[o]), max(x[o + 1], 0.0), max(x[o + 2], ETA_BOUNDS[0]),
                    max(x[o + 3], GROWTH_BOUNDS[0]), max(x[o + 4], 0.0)))
    raw.sort(key=lambda c: c[0])
    comps = []
    prev_onset = None
    for onset, sat, eta, growth, slope in raw:
        if prev_onset is not None and onset <= prev_onset:
            onset = prev_onset + 1e-6  # onsets collided during the search
        comps.append(GompertzComponent(onset, sat, eta, growth, slope))
        prev_onset = onset
    return GompertzParams(tuple(comps))


def _model_arrays(x, n_events):
    onsets = np.empty(n_events + 1)
    sats = np.empty(n_events + 1)
    etas = np.empty(n_events + 1)
    growths = np.empty(n_events + 1)
    slopes = np.empty(n_events + 1)
    onsets[0], sats[0], etas[0], growths[0], slopes[0] = 0.0, x[0], x[1], x[2], x[3]
    for k in range(n_events):
        o = 4 + 5 * k
        onsets[k + 1] = x[o]
        sats[k + 1], etas[k + 1], growths[k + 1], slopes[k + 1] = x[o + 1], x[o + 2], x[o + 3], x[o + 4]
    return onsets, sats, etas, growths, slopes


def fit(series: TimeSeries, cfg: FitConfig = None, k_max=None, candidate_days=None, seed=0):
    """Fit the growth model to a cumulative series.

    If ``k_max``/``candidate_days`` are not given they come from
    :func:`estimate_kmax`. Onsets stay within ±5 days of their candidates;
    ``multistart`` restarts perturb the initial guesses by ±20% and the
    best SSE wins (ties by start index). A stalled solver yields the best
    iterate flagged ``converged=False`` instead of raising.
    """
    cfg = cfg or FitConfig()
    if series.kind != "cumulative":
        raise InvalidInputError("expected a cumulative series")
    values = series.values
    n = len(values)
    est = estimate_kmax(series, cfg)
    if candidate_days is None:
        candidates = list(est.candidate_days)
        if k_max is not None:
            if k_max < len(candidates):
                candidates = candidates[:k_max]
            else:
                # pad with interior days away from existing candidates
                extra = k_max - len(candidates)
                taken = set(candidates) | {0}
                spots = [d for d in np.linspace(2, n - 2, num=2 * (extra + 1), dtype=int) if d not in taken]
                candidates += [int(d) for d in spots[:extra]]
                candidates.sort()
        else:
            k_max = est.k_max
    else:
        candidates = sorted(int(d) for d in candidate_days)
        k_max = len(candidates)
    if len(candidates) != k_max:
        raise InvalidInputError("could not place the requested number of events")

    m0, c0, event_inits = _initial_guesses(values, est, candidates)
    lower, upper = _pack_bounds(n, candidates, est.c_max, float(values.max()) or 1.0)

    x_init = [m0, 1.0, 0.1, c0]
    for day, (m_init, c_init) in zip(candidates, event_inits):
        x_init += [float(day), m_init, 1.0, 0.1, c_init]
    x_init = np.clip(np.array(x_init, dtype=np.float64), lower, upper)

    t_grid = np.arange(n, dtype=np.float64)

    def residual(x):
        arrays = _model_arrays(x, k_max)
        return _kernels.gompertz_curve(t_grid, *arrays) - values

    def jacobian(x):
        arrays = _model_arrays(x, k_max)
        _, jac_full = _kernels.gompertz_curve_jac(t_grid, *arrays)
        return jac_full[:, 1:]  # drop d/d onset of component 0 (fixed at 0)

    rng = np.random.default_rng(seed)
    best = None
    for start in range(max(cfg.multistart, 1)):
        if start == 0:
            x0 = x_init.copy()
        else:
            x0 = np.clip(x_init * rng.uniform(0.8, 1.2, size=x_init.shape), lower, upper)
        try:
            res = numkit.nlls(residual, x0, lower, upper, jacobian_fn=jacobian)
            cand = (res.sse, res.x, res.converged)
        except ConvergenceError as err:
            if err.last_iterate is None:
                continue
            cand = (err.sse, err.last_iterate, False)
        if best is None or cand[0] < best[0]:
            best = cand
    if best is None:
        raise ConvergenceError("all restarts failed")
    sse, x_best, converged = best
    params = _unpack(x_best, k_max)
    deco = decompose(params, t_grid)
    return GompertzFit(
        params=params,
        sse=float(sse),
        k_max=k_max,
        converged=bool(converged),
        candidate_days=tuple(candidates),
        decomposition=deco,
    )


@dataclass(frozen=True)
class OracleResult:
    selected_days: tuple
    fit: GompertzFit
    score: float
    lam: float
    subset_scores: tuple  # ((days...), sse, score) per enumerated subset


def minlp_oracle(series: TimeSeries, candidate_days, cfg: FitConfig = None, seed=0):
    """Exhaustive event-subset selection: minimize SSE + lam * K.

    Enumerates every subset of ``candidate_days`` (at most 6, i.e. 64
    subsets), fits each, and returns the subset minimizing the penalized
    SSE. With ``cfg.lam`` unset the penalty is 0.01x the SSE of the
    no-event fit.
    """
    cfg = cfg or FitConfig()
    candidates = sorted(int(d) for d in candidate_days)
    if len(candidates) > cfg.max_candidates or len(candidates) > 6:
        raise InvalidInputError(
            f"{len(candidates)} candidates exceed the enumeration limit (6); "
            "use estimate_kmax + fit instead"
        )
    subsets = []
    for mask in range(2 ** len(candidates)):
        chosen = tuple(d for i, d in enumerate(candidates) if mask >> i & 1)
        subsets.append(chosen)
    subsets.sort(key=lambda s: (len(s), s))

    lam = cfg.lam
    best = None
    table = []
    for chosen in subsets:
        f = fit(series, cfg, k_max=len(chosen), candidate_days=chosen, seed=seed)
        if lam is None and len(chosen) == 0:
            lam = 0.01 * f.sse
        score = f.sse + (lam or 0.0) * len(chosen)
        table.append((chosen, f.sse, score))
        if best is None or score < best[2]:
            best = (chosen, f, score)
    return OracleResult(
        selected_days=best[0],
        fit=best[1],
        score=float(best[2]),
        lam=float(lam or 0.0),
        subset_scores=tuple(table),
    )


def _rank_average_ties(v):
    v = np.asarray(v, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(a, b):
    """Spearman rank correlation with average ranks; None when degenerate."""
    ra, rb = _rank_average_ties(a), _rank_average_ties(b)
    sa, sb = ra.std(), rb.std()
    if sa == 0.0 or sb == 0.0:
        return None
    return float(np.corrcoef(ra, rb)[0, 1])


@dataclass(frozen=True)
class PlaylistProfile:
    entries: tuple  # per-video dicts
    rank_correlation: float  # None when undefined
    correlation_status: str  # "ok" | "degenerate" | "not-applicable"
    failures: tuple


def playlist_profile(series_list, cfg: FitConfig = None, early_days=7, seed=0):
    """Per-video virality/migration profile across an ordered playlist.

    Each video is fitted with no event components; the profile reports the
    fitted saturation level (virality), migration slope, early cumulative
    views, and fit SSE, plus the Spearman correlation between early views
    and migration slope across the playlist.
    """
    cfg = cfg or FitConfig()
    entries = []
    failures = []
    for idx, series in enumerate(series_list):
        try:
            f = fit(series, cfg, k_max=0, candidate_days=(), seed=seed + idx)
        except (ConvergenceError, InvalidInputError, InsufficientDataError) as err:
            failures.append((idx, str(err)))
            continue
        comp = f.params.components[0]
        early = float(series.values[min(early_days, len(series)) - 1])
        entries.append(
            {
                "index": idx,
                "virality": comp.sat,
                "migration": comp.slope,
                "early_views": early,
                "sse": f.sse,
                "converged": f.converged,
            }
        )
    if len(entries) < 2:
        corr, status = None, "not-applicable"
    else:
        corr = spearman(
            [e["early_views"] for e in entries], [e["migration"] for e in entries]
        )
        status = "ok" if corr is not None else "degenerate"
    return PlaylistProfile(
        entries=tuple(entries),
        rank_correlation=corr,
        correlation_status=status,
        failures=tuple(failures),
    )
