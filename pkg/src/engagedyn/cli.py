"""Command-line front end.

One binary with a subcommand per analysis, each writing deterministic
artifacts plus a manifest.json recording the command, seed, inputs,
outputs, and wall time. With a fixed seed every artifact referenced by
the manifest is byte-identical across runs (the wall time lives only in
the manifest). Exit codes: 0 success, 1 usage error, 2 data error,
3 numerical/convergence error (partial artifacts flagged in the
manifest).
"""

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, data, elm, gompertz, granger, hsic, metaopt, schedule, synth
from .errors import (
    AnalysisStageError,
    ConvergenceError,
    DataSchemaError,
    EngageDynError,
    InsufficientDataError,
    InvalidInputError,
    SingularDesignError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

_DATA_ERRORS = (DataSchemaError, InsufficientDataError, InvalidInputError, FileNotFoundError)
_NUMERICAL_ERRORS = (ConvergenceError, SingularDesignError, AnalysisStageError, np.linalg.LinAlgError)

INPUT_ROLES = ("videos.csv", "views.csv", "channels.csv", "events.csv", "traffic.csv")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _n_workers():
    try:
        return max(1, int(os.environ.get("ENGAGEDYN_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    workers = _n_workers()
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _resolve_inputs(paths, required, optional=()):
    """Map role names (videos.csv, ...) to paths from files or directories."""
    roles = {}
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            for role in INPUT_ROLES:
                if (p / role).is_file():
                    roles.setdefault(role, p / role)
        else:
            if not p.is_file():
                raise FileNotFoundError(f"input file not found: {p}")
            if p.name not in INPUT_ROLES:
                raise DataSchemaError(
                    f"unrecognized input file name {p.name!r} (expected one of {INPUT_ROLES})",
                    path=p,
                )
            roles[p.name] = p
    missing = [r for r in required if r not in roles]
    if missing:
        raise FileNotFoundError(f"missing required input file(s): {missing}")
    return roles


def _load(roles):
    return data.load_dataset(
        roles["videos.csv"],
        roles["views.csv"],
        channels_path=roles.get("channels.csv"),
        events_path=roles.get("events.csv"),
        traffic_path=roles.get("traffic.csv"),
    )


def _scaled_features(dataset, target_day):
    fd = dataset.feature_dataset(target_day=target_day)
    scaled, scaler = data.scale_features(fd)
    return scaled, scaler


# ---------------------------------------------------------------- presets

PAPER_EXO_PARAMS = gompertz.GompertzParams(
    (
        gompertz.GompertzComponent(0.0, 2910.0, 1.0, 0.5, 13.0),
        gompertz.GompertzComponent(41.0, 7174.0, 1.0, 2.0, 2.0),
    )
)

TWO_EVENT_PARAMS = gompertz.GompertzParams(
    (
        gompertz.GompertzComponent(0.0, 3000.0, 1.0, 0.5, 13.0),
        gompertz.GompertzComponent(40.0, 5000.0, 1.0, 1.5, 5.0),
        gompertz.GompertzComponent(80.0, 4000.0, 1.0, 1.5, 2.0),
    )
)


def _views_rows_from_cumulative(video_id, series):
    cumulative = np.round(series.values).astype(np.int64)
    daily = np.diff(cumulative, prepend=0)
    return [(video_id, day, int(v)) for day, v in enumerate(daily)]


def _preset_gompertz(outdir, params, horizon, noise_sigma, seed):
    rng = np.random.default_rng(seed)
    series = synth.gen_gompertz(params, horizon, noise_sigma=noise_sigma, rng=rng)
    videos = outdir / "videos.csv"
    views = outdir / "views.csv"
    _write_csv(videos, ["video_id", "channel_id", "upload_date", "category", "f_subscribers"],
               [("v1", "c1", "2015-01-01", "gaming", f"{params.components[0].sat:.1f}")])
    _write_csv(views, ["video_id", "day_index", "views"],
               _views_rows_from_cumulative("v1", series))
    return [videos, views]


def _preset_schedule(outdir, seed, horizon=700, period=7, jitter=0.2, off_prob=0.02):
    rng = np.random.default_rng(seed)
    truth = synth.gen_schedule(period, jitter_prob=jitter, off_schedule_prob=off_prob,
                               horizon=horizon, rng=rng)
    views = np.full(horizon, 100.0)
    for day in truth.off_schedule_days:
        views[day : day + 7] += 50.0
    views += np.round(rng.normal(0.0, 3.0, size=horizon))
    views = np.maximum(views, 0)
    comments = np.round(views * 0.1)
    rows = []
    for t in range(horizon):
        day = np.datetime64("2015-01-01") + t
        rows.append(("ch_sched", str(day), 1000, int(views[t]), int(truth.uploads[t]), int(comments[t])))
    path = outdir / "channels.csv"
    _write_csv(path, ["channel_id", "date", "subscribers", "views", "uploads", "comments"], rows)
    labels = outdir / "schedule_truth.json"
    _write_json(labels, {
        "period": period,
        "scheduled_days": list(truth.scheduled_days),
        "off_schedule_days": list(truth.off_schedule_days),
    })
    return [path, labels]


def _preset_channel(outdir, seed, causal, horizon=500):
    rng = np.random.default_rng(seed)
    b = (0.4, 0.1, 0.0) if causal else (0.0, 0.0, 0.0)
    channel = synth.gen_granger_channel(
        a=(0.5, 0.2, 0.1), b=b,
        view_process=synth.ViewProcess(kind="ar1", phi=0.6, sigma=5.0),
        horizon=horizon, noise_sigma=1.0, rng=rng,
        channel_id="ch_causal" if causal else "ch_null", category="gaming",
    )
    rows = []
    for t in range(len(channel)):
        day = np.datetime64("2015-01-01") + t
        rows.append((channel.channel_id, str(day), f"{channel.subscribers[t]:.6f}",
                     f"{channel.views[t]:.6f}", 0, ""))
    path = outdir / "channels.csv"
    _write_csv(path, ["channel_id", "date", "subscribers", "views", "uploads", "comments"], rows)
    return [path]


def _preset_feature_bed(outdir, seed, n=500, n_features=20, relevant=(0, 1, 2), noise=0.05):
    rng = np.random.default_rng(seed)
    names, x, y = synth.gen_feature_dataset(
        n, n_features, relevant, link="additive-sigmoid", noise_sigma=noise, rng=rng
    )
    header = ["video_id", "channel_id", "upload_date", "category"] + [f"f_{nm}" for nm in names]
    video_rows = []
    view_rows = []
    for i in range(n):
        vid = f"v{i:05d}"
        total = max(int(round(10.0 ** max(y[i], 0.0) - 1.0)), 0)
        video_rows.append([vid, "c1", "2015-01-01", "synthetic"] + [f"{v:.9f}" for v in x[i]])
        view_rows.append((vid, 0, total))
        view_rows.extend((vid, d, 0) for d in range(1, 14))
    videos = outdir / "videos.csv"
    views = outdir / "views.csv"
    _write_csv(videos, header, video_rows)
    _write_csv(views, ["video_id", "day_index", "views"], view_rows)
    truth = outdir / "feature_truth.json"
    _write_json(truth, {"relevant": [names[j] for j in relevant], "noise_sigma": noise})
    return [videos, views, truth]


def _cmd_synth(args, outdir):
    seed = args.seed
    if args.preset == "paper-fig-exo":
        noise = args.noise_sigma if args.noise_sigma is not None else 0.01 * 7174.0
        return _preset_gompertz(outdir, PAPER_EXO_PARAMS, args.horizon or 120, noise, seed)
    if args.preset == "two-event":
        noise = args.noise_sigma if args.noise_sigma is not None else 0.01 * 5000.0
        return _preset_gompertz(outdir, TWO_EVENT_PARAMS, args.horizon or 150, noise, seed)
    if args.preset == "weekly-schedule":
        return _preset_schedule(outdir, seed, horizon=args.horizon or 700)
    if args.preset == "causal-channel":
        return _preset_channel(outdir, seed, causal=True, horizon=args.horizon or 500)
    if args.preset == "null-channel":
        return _preset_channel(outdir, seed, causal=False, horizon=args.horizon or 500)
    if args.preset == "feature-bed":
        return _preset_feature_bed(outdir, seed, n=args.n_samples)
    raise InvalidInputError(f"unknown preset {args.preset!r}")


def _cmd_train_elm(args, outdir):
    roles = _resolve_inputs(args.input, required=("videos.csv", "views.csv"))
    dataset = _load(roles)
    scaled, scaler = _scaled_features(dataset, args.target_day)
    rng = np.random.default_rng(args.seed)
    model = elm.train(
        scaled.x, scaled.y, feature_names=scaled.feature_names,
        n_neurons=args.neurons, transfer=args.transfer, rng=rng,
        ridge=args.ridge, scaler=scaler.to_dict(),
    )
    outputs = []
    model_path = outdir / "model.json"
    model_path.parent.mkdir(parents=True, exist_ok=True)
    model_path.write_text(elm.to_json(model) + "\n", encoding="utf-8")
    outputs.append(model_path)
    if args.kfold:
        report = elm.kfold_eval(
            scaled.x, scaled.y, n_folds=args.kfold, n_neurons=args.neurons,
            transfer=args.transfer, seed=args.seed, ridge=args.ridge,
        )
        eval_path = outdir / "eval.json"
        _write_json(eval_path, {
            "n_folds": report.n_folds,
            "fold_rmse": list(report.fold_rmse),
            "rmse": report.rmse,
            "r2": report.r2,
            "seed": report.seed,
        })
        outputs.append(eval_path)
    return outputs


def _load_model(path):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"model file not found: {p}")
    return elm.from_json(p.read_text(encoding="utf-8"))


def _apply_model_scaler(model, fd):
    if model.scaler is None:
        return fd.x
    scaler = data.MinMaxScaler.from_dict(model.scaler)
    if tuple(scaler.feature_names) != tuple(fd.feature_names):
        raise DataSchemaError(
            "dataset feature columns do not match the model's feature names"
        )
    return scaler.transform(fd.x)


def _cmd_sensitivity(args, outdir):
    model = _load_model(args.model)
    roles = _resolve_inputs(args.input, required=("videos.csv", "views.csv"))
    dataset = _load(roles)
    fd = dataset.feature_dataset(target_day=args.target_day)
    x = _apply_model_scaler(model, fd)
    report = elm.ssd_sensitivity(model, x)
    doc = {
        "method": "elm-ssd",
        "features": [
            {
                "name": report.feature_names[j],
                "score": float(report.ssd[j]),
                "normalized": float(report.normalized[j]),
                "rank": int(list(report.rank_order).index(j)) + 1,
            }
            for j in range(len(report.feature_names))
        ],
        "params": {"transfer": model.transfer, "L": model.n_neurons},
    }
    path = outdir / "sensitivity.json"
    _write_json(path, doc)
    outputs = [path]
    if args.emit_plot_data:
        plot = outdir / "plot_ssd.csv"
        rows = [
            (rank + 1, f"{report.normalized[j]:.12g}")
            for rank, j in enumerate(report.rank_order)
        ]
        _write_csv(plot, ["rank", "normalized_ssd"], rows)
        outputs.append(plot)
    return outputs


def _cmd_predict(args, outdir):
    model = _load_model(args.model)
    roles = _resolve_inputs(args.input, required=("videos.csv", "views.csv"))
    dataset = _load(roles)
    fd = dataset.feature_dataset(target_day=args.target_day)
    x = _apply_model_scaler(model, fd)
    result = elm.predict_many(model, x)
    outputs = []
    if args.format == "json":
        path = outdir / "predictions.json"
        _write_json(path, {
            "n_clipped": result.n_clipped,
            "predictions": [
                {"video_id": vid, "predicted_log_views": float(v)}
                for vid, v in zip(fd.ids, result.values)
            ],
        })
    else:
        path = outdir / "predictions.csv"
        _write_csv(path, ["video_id", "predicted_log_views"],
                   [(vid, f"{v:.12g}") for vid, v in zip(fd.ids, result.values)])
    outputs.append(path)
    return outputs


def _cmd_hsic(args, outdir):
    roles = _resolve_inputs(args.input, required=("videos.csv", "views.csv"))
    dataset = _load(roles)
    scaled, _ = _scaled_features(dataset, args.target_day)
    rng = np.random.default_rng(args.seed)
    result = hsic.hsic_lasso(
        scaled.x, scaled.y, lam=args.lam, feature_names=scaled.feature_names,
        rng=rng, sample_cap=args.sample_cap,
    )
    top = float(result.alphas.max()) if result.alphas.size else 0.0
    order = list(np.lexsort((np.arange(result.alphas.size), -result.alphas)))
    doc = {
        "method": "hsic-lasso",
        "features": [
            {
                "name": result.feature_names[j],
                "score": float(result.alphas[j]),
                "normalized": float(result.alphas[j] / top) if top > 0 else 0.0,
                "rank": order.index(j) + 1,
            }
            for j in range(len(result.feature_names))
        ],
        "params": {"lambda": result.lam, "n_used": result.n_used},
        "selected": list(result.selected),
    }
    path = outdir / "hsic.json"
    _write_json(path, doc)
    return [path]


def _cmd_granger(args, outdir):
    roles = _resolve_inputs(args.input, required=("channels.csv",))
    channels = data.load_channels_csv(roles["channels.csv"])
    ordered = [channels[cid] for cid in sorted(channels)]

    def analyze(channel):
        try:
            report = granger.channel_causality(
                channel, n_s=args.ns, n_v=args.nv, alpha=args.alpha,
                h=args.lb_lags, intercept=args.intercept, difference=args.difference,
            )
            return channel.channel_id, report.to_dict(), None
        except AnalysisStageError as err:
            return channel.channel_id, None, str(err)

    outputs = []
    skipped = []
    for cid, doc, err in _map_ordered(analyze, ordered):
        if doc is None:
            skipped.append({"channel_id": cid, "reason": err})
            continue
        path = outdir / f"granger_{cid}.json"
        _write_json(path, doc)
        outputs.append(path)
    cohort = granger.cohort_summary(
        ordered, n_s=args.ns, n_v=args.nv, alpha=args.alpha,
        h=args.lb_lags, intercept=args.intercept, difference=args.difference,
    )
    cohort_path = outdir / "granger_cohort.json"
    _write_json(cohort_path, cohort)
    outputs.append(cohort_path)
    return outputs


def _cmd_schedule(args, outdir):
    roles = _resolve_inputs(args.input, required=("channels.csv",))
    channels = data.load_channels_csv(roles["channels.csv"])
    ordered = [channels[cid] for cid in sorted(channels)]

    def analyze(channel):
        try:
            return channel.channel_id, schedule.channel_schedule_report(
                channel, tolerance=args.tolerance, window=args.window,
                max_daily_upload_rate=args.max_upload_rate,
            )
        except InsufficientDataError as err:
            return channel.channel_id, {
                "channel_id": channel.channel_id, "error": str(err),
                "dominant_period": None, "peak_ratio": None, "events": [],
                "fraction_views_gain": None, "fraction_comments_gain": None,
                "skipped_events": [],
            }

    outputs = []
    for cid, doc in _map_ordered(analyze, ordered):
        path = outdir / f"schedule_{cid}.json"
        _write_json(path, doc)
        outputs.append(path)
    return outputs


def _fit_one_video(args, outdir, video_id, series, cfg):
    cumulative = data.to_cumulative(series)
    if args.oracle:
        est = gompertz.estimate_kmax(cumulative, cfg)
        candidates = est.candidate_days[: cfg.max_candidates]
        result = gompertz.minlp_oracle(cumulative, candidates, cfg, seed=args.seed)
        fit = result.fit
        extra = {
            "oracle": {
                "candidate_days": list(candidates),
                "selected_days": list(result.selected_days),
                "lambda": result.lam,
                "score": result.score,
            }
        }
    else:
        fit = gompertz.fit(cumulative, cfg, k_max=args.kmax, seed=args.seed)
        extra = {}
    deco = fit.decomposition
    deco_path = outdir / f"decomposition_{video_id}.csv"
    header = ["day", "total", "viral", "migration"] + [
        f"event_{k}" for k in range(1, fit.k_max + 1)
    ]
    rows = []
    for day in range(len(deco["total"])):
        row = [day, f"{deco['total'][day]:.6f}", f"{deco['viral'][day]:.6f}",
               f"{deco['migration'][day]:.6f}"]
        row += [f"{ev[day]:.6f}" for ev in deco["events"]]
        rows.append(row)
    _write_csv(deco_path, header, rows)
    doc = {
        "video_id": video_id,
        "k_max": fit.k_max,
        "converged": fit.converged,
        "components": fit.component_dicts(),
        "sse": fit.sse,
        "decomposition_csv_path": deco_path.name,
        **extra,
    }
    report_path = outdir / f"gompertz_{video_id}.json"
    _write_json(report_path, doc)
    outputs = [report_path, deco_path]
    if args.emit_plot_data:
        obs = outdir / f"plot_observed_{video_id}.csv"
        fitted = outdir / f"plot_fitted_{video_id}.csv"
        _write_csv(obs, ["day", "cumulative_views"],
                   [(d, f"{v:.6f}") for d, v in enumerate(cumulative.values)])
        _write_csv(fitted, ["day", "cumulative_views"],
                   [(d, f"{v:.6f}") for d, v in enumerate(deco["total"])])
        outputs += [obs, fitted]
    return outputs


def _cmd_fit_gompertz(args, outdir):
    roles = _resolve_inputs(args.input, required=("views.csv",))
    series_by_video = data.load_views_csv(roles["views.csv"])
    if args.video is not None:
        if args.video not in series_by_video:
            raise DataSchemaError(f"video {args.video!r} not present in views file")
        targets = [args.video]
    else:
        targets = sorted(series_by_video)
    cfg = gompertz.FitConfig(c_max=args.c_max, lam=args.lam, multistart=args.multistart)
    outputs = []
    for vid in targets:
        outputs.extend(_fit_one_video(args, outdir, vid, series_by_video[vid], cfg))
    return outputs


def _cmd_metaopt(args, outdir):
    roles = _resolve_inputs(args.input, required=("videos.csv", "views.csv", "events.csv"))
    dataset = _load(roles)
    if args.no_exclusions:
        categories, keywords = (), ()
    else:
        categories = metaopt.DEFAULT_EXCLUDED_CATEGORIES
        keywords = metaopt.DEFAULT_EXCLUDED_KEYWORDS
    cohort = metaopt.cohort_fraction(
        dataset, kind=args.kind,
        excluded_categories=categories, excluded_keywords=keywords,
    )
    per_source = metaopt.traffic_ratios(
        dataset, kind=args.kind, min_events=args.min_traffic_events,
        excluded_categories=categories, excluded_keywords=keywords,
    )
    doc = {
        **cohort.to_dict(),
        "per_source": {
            src: {"median_ratio": info["median_ratio"], "n": info["n"]}
            for src, info in per_source.items()
        },
    }
    path = outdir / "metaopt.json"
    _write_json(path, doc)
    return [path]


def build_parser():
    parser = _Parser(prog="engagedyn", description=__doc__)
    parser.add_argument("--version", action="version", version=f"engagedyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", nargs="+", required=True, metavar="PATH",
                           help="input files or a directory holding them")
        p.add_argument("--output", default="engagedyn-out", metavar="DIR")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="csv")
        p.add_argument("--emit-plot-data", action="store_true")

    p = sub.add_parser("synth", help="generate synthetic datasets")
    p.add_argument("--preset", required=True,
                   choices=("paper-fig-exo", "two-event", "weekly-schedule",
                            "causal-channel", "null-channel", "feature-bed"))
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--n-samples", type=int, default=500)
    common(p, needs_input=False)

    p = sub.add_parser("train-elm", help="train the regression model")
    p.add_argument("--neurons", type=int, default=elm.DEFAULT_NEURONS)
    p.add_argument("--transfer", choices=("sigmoid", "tanh", "gaussian"), default="sigmoid")
    p.add_argument("--ridge", type=float, default=0.0)
    p.add_argument("--kfold", type=int, default=0)
    p.add_argument("--target-day", type=int, default=14)
    common(p)

    p = sub.add_parser("sensitivity", help="derivative-based feature sensitivity")
    p.add_argument("--model", required=True)
    p.add_argument("--target-day", type=int, default=14)
    common(p)

    p = sub.add_parser("predict", help="predict log view counts")
    p.add_argument("--model", required=True)
    p.add_argument("--target-day", type=int, default=14)
    common(p)

    p = sub.add_parser("hsic", help="kernel feature selection")
    p.add_argument("--lambda", dest="lam", type=float, default=hsic.DEFAULT_LAMBDA)
    p.add_argument("--sample-cap", type=int, default=hsic.DEFAULT_SAMPLE_CAP)
    p.add_argument("--target-day", type=int, default=14)
    common(p)

    p = sub.add_parser("granger", help="subscriber/view causality tests")
    p.add_argument("--ns", type=int, default=granger.DEFAULT_LAGS)
    p.add_argument("--nv", type=int, default=granger.DEFAULT_LAGS)
    p.add_argument("--alpha", type=float, default=granger.DEFAULT_ALPHA)
    p.add_argument("--lb-lags", type=int, default=granger.DEFAULT_LB_LAGS)
    p.add_argument("--intercept", action="store_true")
    p.add_argument("--difference", action="store_true")
    common(p)

    p = sub.add_parser("schedule", help="upload-schedule analytics")
    p.add_argument("--tolerance", type=int, default=1)
    p.add_argument("--window", type=int, default=7)
    p.add_argument("--max-upload-rate", type=float, default=None)
    common(p)

    p = sub.add_parser("fit-gompertz", help="fit the view-count growth model")
    p.add_argument("--video", default=None, help="video id (default: every video)")
    p.add_argument("--c-max", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--multistart", type=int, default=8)
    p.add_argument("--oracle", action="store_true",
                   help="exhaustive event-subset selection instead of the heuristic")
    common(p)

    p = sub.add_parser("metaopt", help="meta-level optimization impact")
    p.add_argument("--kind", choices=("title", "thumbnail", "keyword", "none"), default=None)
    p.add_argument("--min-traffic-events", type=int, default=metaopt.MIN_TRAFFIC_EVENTS)
    p.add_argument("--no-exclusions", action="store_true")
    common(p)

    return parser


_HANDLERS = {
    "synth": _cmd_synth,
    "train-elm": _cmd_train_elm,
    "sensitivity": _cmd_sensitivity,
    "predict": _cmd_predict,
    "hsic": _cmd_hsic,
    "granger": _cmd_granger,
    "schedule": _cmd_schedule,
    "fit-gompertz": _cmd_fit_gompertz,
    "metaopt": _cmd_metaopt,
}


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"engagedyn: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    outdir = Path(args.output)
    started = time.monotonic()
    outputs = []
    status = "ok"
    error_msg = None
    try:
        outputs = _HANDLERS[args.command](args, outdir)
    except _DATA_ERRORS as err:
        print(f"engagedyn: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERICAL_ERRORS as err:
        status = "partial"
        error_msg = str(err)
    wall = time.monotonic() - started
    manifest = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "inputs": sorted(str(p) for p in getattr(args, "input", []) or []),
        "outputs": sorted(str(Path(p).relative_to(outdir)) for p in outputs),
        "wall_time": wall,
        "status": status,
    }
    if error_msg is not None:
        manifest["error"] = error_msg
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "manifest.json", manifest)
    if status != "ok":
        print(f"engagedyn: numerical error: {error_msg}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
