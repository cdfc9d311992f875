"""Pipeline orchestration over files.

Every subcommand reads its predecessor's artifacts from the output
directory and writes its own atomically (temp file + rename), so a partial
rerun picks up where things stand. `pipeline` chains all stages. Exit
codes: 0 success, 1 validation/configuration error, 2 numeric failure.
All randomized stages derive their seeds from the single pipeline seed by
fixed offsets. SIGNALCAST_THREADS > 1 lets the ARIMA grid evaluate cells
in a thread pool (the ranking is computed after all cells complete, so the
result is unchanged).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, timedelta, timezone as _utc_timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .arima import ArimaFit, ArimaSpec, fit_arima, forecast, grid_search, residual_acf
from .errors import NumericError, SignalcastError, ValidationError
from .evaluation import backtest
from .ingest import (
    CleanDoc,
    StopwordList,
    clean_corpus,
    detect_and_merge_bigrams,
    identity_normalizer,
    parse_corpus,
    select_tweets,
    suffix_normalizer,
    write_rejections,
)
from .sentiment import LexiconProvider, PassthroughProvider, SidecarProvider
from .series import (
    CaseSeries,
    SeriesTensor,
    build_tensor,
    lag_features,
    lagged_column_name,
    volumetric_series,
)
from .stattests import adf_test, ensure_stationary, select_features, write_feature_report
from .topics import assign_topic, build_vocabulary, fit_lda, select_k
from .var import fit_var, forecast_var, select_var_order

SEED_OFFSET_LDA = 1000


class MissingArtifactError(ValidationError):
    """A required upstream artifact is absent; names the stage to run first."""


@dataclass
class PipelineConfig:
    tweets_csv: Path
    cases_csv: Path
    window_start: date
    window_end: date
    seed: int
    out_dir: Path = Path("out")
    sidecar_csv: Optional[Path] = None
    min_terms: int = 10
    normalizer: str = "identity"
    timezone: str = "UTC"           # day-bucketing timezone for tweet dates
    sentiment_provider: str = "lexicon"
    bigram_min_freq: int = 500
    vocab_min_freq: int = 500
    topics: object = "auto"             # int or "auto"
    k_range: tuple[int, int] = (5, 50)
    per_k_seeds: int = 1
    lda_iterations: int = 1000
    lda_alpha: Optional[float] = None
    lda_beta: float = 0.01
    coherence_top_n: int = 20
    coherence_window: int = 110
    max_lag: int = 14
    min_count: int = 10
    alpha: float = 0.05
    d_cap: int = 2
    adf_max_lag: Optional[int] = None
    grid_p: tuple[int, int] = (0, 3)
    grid_q: tuple[int, int] = (0, 3)
    significances: tuple[float, ...] = (0.05, 0.01)
    split_date: Optional[date] = None
    exog_top: Optional[int] = None      # None feeds all selected components
    arima_spec: Optional[tuple[int, int, int]] = None
    arima_use_exog: bool = False
    var_p_max: int = 20
    var_difference: bool = False
    forecast_horizon: int = 7

    @classmethod
    def from_file(cls, path, out_override=None, seed_override=None) -> "PipelineConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
        base = path.parent

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else base / p

        try:
            window = raw["window"]
            cfg = cls(
                tweets_csv=resolve(raw["tweets_csv"]),
                cases_csv=resolve(raw["cases_csv"]),
                window_start=date.fromisoformat(window["start"]),
                window_end=date.fromisoformat(window["end"]),
                seed=int(seed_override if seed_override is not None else raw["seed"]),
            )
        except KeyError as exc:
            raise ValidationError(f"config {path} is missing required field {exc}") from exc
        if raw.get("sidecar_csv"):
            cfg.sidecar_csv = resolve(raw["sidecar_csv"])
        if out_override is not None:
            cfg.out_dir = Path(out_override)
        elif raw.get("out_dir"):
            cfg.out_dir = resolve(raw["out_dir"])
        simple = [
            "min_terms", "normalizer", "timezone", "sentiment_provider", "bigram_min_freq",
            "vocab_min_freq", "topics", "per_k_seeds", "lda_iterations",
            "lda_alpha", "lda_beta", "coherence_top_n", "coherence_window",
            "max_lag", "min_count", "alpha", "d_cap", "adf_max_lag",
            "exog_top", "arima_use_exog", "var_p_max", "var_difference",
            "forecast_horizon",
        ]
        for name in simple:
            if name in raw and raw[name] is not None:
                setattr(cfg, name, raw[name])
        for name in ("k_range", "grid_p", "grid_q"):
            if name in raw:
                lo, hi = raw[name]
                setattr(cfg, name, (int(lo), int(hi)))
        if "significances" in raw:
            cfg.significances = tuple(float(s) for s in raw["significances"])
        if raw.get("split_date"):
            cfg.split_date = date.fromisoformat(raw["split_date"])
        if raw.get("arima_spec"):
            p, d, q = raw["arima_spec"]
            cfg.arima_spec = (int(p), int(d), int(q))
        if cfg.normalizer not in ("identity", "suffix"):
            raise ValidationError(f"unknown normalizer {cfg.normalizer!r}")
        if cfg.sentiment_provider not in ("lexicon", "passthrough", "sidecar"):
            raise ValidationError(f"unknown sentiment provider {cfg.sentiment_provider!r}")
        if cfg.sentiment_provider == "sidecar" and cfg.sidecar_csv is None:
            raise ValidationError("sidecar provider needs sidecar_csv")
        return cfg

    def resolved(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, Path):
                out[key] = str(value)
            elif isinstance(value, date):
                out[key] = value.isoformat()
            else:
                out[key] = value
        out["version"] = __version__
        return out


# ---------------------------------------------------------------- artifacts

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, default=str) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    _atomic_write(path, buf.getvalue())


def _require(path: Path, producing_stage: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(
            f"missing artifact {path}; run `signalcast {producing_stage}` first"
        )
    return path


def _paths(out: Path) -> dict[str, Path]:
    return {
        "resolved_config": out / "resolved_config.json",
        "docs": out / "ingest" / "docs.jsonl",
        "rejections": out / "ingest" / "rejections.csv",
        "ingest_summary": out / "ingest" / "summary.json",
        "lda_model": out / "topics" / "model.json",
        "assignments": out / "topics" / "assignments.csv",
        "topic_terms": out / "topics" / "topic_terms.csv",
        "coherence": out / "topics" / "coherence.csv",
        "tensor": out / "series" / "tensor.csv",
        "volumetric": out / "series" / "volumetric.csv",
        "series_summary": out / "series" / "summary.json",
        "adf": out / "stationarity" / "adf.csv",
        "ranking": out / "granger" / "feature_ranking.csv",
        "grid_baseline": out / "grid" / "baseline_grid.csv",
        "grid_social": out / "grid" / "social_grid.csv",
        "grid_best": out / "grid" / "best.json",
        "arima_fit": out / "arima" / "fit.json",
        "var_fit": out / "var" / "fit.json",
        "var_order": out / "var" / "order.csv",
        "forecast_arima": out / "forecast" / "arima_forecast.csv",
        "forecast_var": out / "forecast" / "var_forecast.csv",
        "backtest_metrics": out / "backtest" / "metrics.json",
        "backtest_baseline": out / "backtest" / "baseline_forecast.csv",
        "backtest_social": out / "backtest" / "social_forecast.csv",
        "plots_dir": out / "plots",
        "summary": out / "pipeline_summary.json",
    }


def _n_jobs() -> int:
    raw = os.environ.get("SIGNALCAST_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"SIGNALCAST_THREADS must be an integer, got {raw!r}")


# ------------------------------------------------------------------ stages

def stage_ingest(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    records, rejections = parse_corpus(cfg.tweets_csv)
    selected = select_tweets(records, min_terms=cfg.min_terms)

    provider = {
        "lexicon": LexiconProvider.bundled,
        "passthrough": PassthroughProvider,
        "sidecar": lambda: SidecarProvider.from_csv(cfg.sidecar_csv),
    }[cfg.sentiment_provider]()
    normalizer = identity_normalizer if cfg.normalizer == "identity" else suffix_normalizer

    if cfg.timezone.upper() == "UTC":
        tz = _utc_timezone.utc
    else:
        from zoneinfo import ZoneInfo

        try:
            tz = ZoneInfo(cfg.timezone)
        except KeyError as exc:
            raise ValidationError(f"unknown timezone {cfg.timezone!r}") from exc
    docs, empty_ids = clean_corpus(selected, StopwordList.bundled(), normalizer, tz=tz)
    bigrams, docs = detect_and_merge_bigrams(docs, cfg.bigram_min_freq)
    sentiments = {}
    by_id = {rec.id: rec for rec in selected}
    for doc in docs:
        sentiments[doc.tweet_id] = provider.classify(by_id[doc.tweet_id]).label

    lines = [
        json.dumps(
            {
                "id": doc.tweet_id,
                "date": doc.date.isoformat(),
                "tokens": list(doc.tokens),
                "sentiment": sentiments[doc.tweet_id],
            }
        )
        for doc in docs
    ]
    _atomic_write(paths["docs"], "\n".join(lines) + "\n")
    paths["rejections"].parent.mkdir(parents=True, exist_ok=True)
    write_rejections(paths["rejections"], rejections)
    summary = {
        "parsed": len(records),
        "rejected_rows": len(rejections),
        "selected": len(selected),
        "empty_after_cleaning": len(empty_ids),
        "documents": len(docs),
        "merged_bigrams": sorted("_".join(b) for b in bigrams),
    }
    _write_json(paths["ingest_summary"], summary)
    return summary


def _load_docs(paths) -> list[tuple[CleanDoc, int]]:
    _require(paths["docs"], "ingest")
    out = []
    with open(paths["docs"], "r", encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            doc = CleanDoc(row["id"], date.fromisoformat(row["date"]), tuple(row["tokens"]))
            out.append((doc, int(row["sentiment"])))
    return out


def stage_topics(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    doc_rows = _load_docs(paths)
    docs = [doc for doc, _ in doc_rows]
    vocab, bow = build_vocabulary(docs, cfg.vocab_min_freq)
    lda_seed = cfg.seed + SEED_OFFSET_LDA

    coherence_table = None
    if cfg.topics == "auto":
        lo, hi = cfg.k_range
        model, coherence_table = select_k(
            bow, docs, k_range=range(lo, hi + 1), per_k_seeds=cfg.per_k_seeds,
            vocab=vocab, alpha=cfg.lda_alpha, beta=cfg.lda_beta,
            iterations=cfg.lda_iterations, seed=lda_seed,
            top_n=cfg.coherence_top_n, window=cfg.coherence_window,
        )
    else:
        model = fit_lda(
            bow, int(cfg.topics), alpha=cfg.lda_alpha, beta=cfg.lda_beta,
            iterations=cfg.lda_iterations, seed=lda_seed, vocab=vocab,
        )

    doc_lookup = {doc.tweet_id: doc for doc in docs}
    rows = []
    skipped = []
    for doc_id in bow.doc_ids:
        topic, probs = assign_topic(model, doc_lookup[doc_id])
        rows.append([doc_id, topic, f"{max(probs):.6f}"])
    for doc_id in bow.dropped_ids:
        skipped.append(doc_id)
    _write_csv(paths["assignments"], ["id", "topic", "probability"], rows)
    _write_csv(
        paths["topic_terms"],
        ["topic", "top_terms"],
        [[t, " ".join(model.top_terms(t, 12))] for t in range(model.k)],
    )
    if coherence_table is not None:
        _write_csv(
            paths["coherence"], ["k", "mean_coherence"],
            [[k, f"{v:.6f}"] for k, v in sorted(coherence_table.items())],
        )
    model_doc = {
        "format_version": 1,
        "k": model.k,
        "alpha": model.alpha,
        "beta": model.beta,
        "seed": model.seed,
        "iterations": model.iterations,
        "vocabulary": list(model.vocab.id_to_term),
        "topic_word_counts": model.topic_word_counts.tolist(),
        "dropped_doc_ids": list(bow.dropped_ids),
    }
    _write_json(paths["lda_model"], model_doc)
    return {"k": model.k, "documents_assigned": len(rows), "dropped": len(skipped)}


def _load_cases(cfg: PipelineConfig) -> CaseSeries:
    if not Path(cfg.cases_csv).exists():
        raise ValidationError(f"cases file {cfg.cases_csv} does not exist")
    by_date = {}
    with open(cfg.cases_csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"date", "new_cases"} <= set(reader.fieldnames):
            raise ValidationError(f"{cfg.cases_csv} must have columns date,new_cases")
        for row in reader:
            by_date[date.fromisoformat(row["date"])] = int(row["new_cases"])
    days = (cfg.window_end - cfg.window_start).days + 1
    values = np.zeros(days, dtype=np.int64)
    for i in range(days):
        day = cfg.window_start + timedelta(days=i)
        if day not in by_date:
            raise ValidationError(f"cases file has no entry for {day}")
        values[i] = by_date[day]
    return CaseSeries(cfg.window_start, values)


def stage_build_series(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    doc_rows = _load_docs(paths)
    _require(paths["assignments"], "topics")
    topic_of = {}
    with open(paths["assignments"], "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            topic_of[row["id"]] = int(row["topic"])
    model = json.loads(_require(paths["lda_model"], "topics").read_text("utf-8"))
    n_topics = int(model["k"])

    triples = [
        (doc.date, topic_of[doc.tweet_id], sentiment)
        for doc, sentiment in doc_rows
        if doc.tweet_id in topic_of
    ]
    window = (cfg.window_start, cfg.window_end)
    tensor, rejected = build_tensor(triples, window, n_topics)
    rows = []
    for i, day in enumerate(tensor.dates()):
        for j in range(n_topics):
            for k in range(3):
                rows.append([day.isoformat(), j, k, int(tensor.counts[i, j, k])])
    _write_csv(paths["tensor"], ["date", "topic", "sentiment", "count"], rows)

    overall = volumetric_series(triples, window, "overall")
    vol_rows = [
        [day.isoformat(), int(overall.values[i])]
        + [int(tensor.counts[i, j, :].sum()) for j in range(n_topics)]
        for i, day in enumerate(tensor.dates())
    ]
    _write_csv(
        paths["volumetric"],
        ["date", "overall"] + [f"topic{j}" for j in range(n_topics)],
        vol_rows,
    )
    _load_cases(cfg)    # validate alignment early
    summary = {
        "days": tensor.n_days,
        "topics": n_topics,
        "documents_counted": len(triples) - len(rejected),
        "out_of_window": len(rejected),
    }
    _write_json(paths["series_summary"], summary)
    return summary


def _load_tensor(cfg: PipelineConfig) -> SeriesTensor:
    paths = _paths(cfg.out_dir)
    _require(paths["tensor"], "build-series")
    days = (cfg.window_end - cfg.window_start).days + 1
    cells = []
    with open(paths["tensor"], "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            cells.append(
                (date.fromisoformat(row["date"]), int(row["topic"]),
                 int(row["sentiment"]), int(row["count"]))
            )
    n_topics = 1 + max(c[1] for c in cells)
    counts = np.zeros((days, n_topics, 3), dtype=np.int64)
    for day, j, k, n in cells:
        counts[(day - cfg.window_start).days, j, k] = n
    return SeriesTensor(cfg.window_start, cfg.window_end, counts)


def stage_adf(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    tensor = _load_tensor(cfg)
    cases = _load_cases(cfg)
    rows = []

    def describe(name, series):
        try:
            diffed, d = ensure_stationary(
                series.astype(float), max_d=cfg.d_cap, alpha=cfg.alpha,
                max_lag=cfg.adf_max_lag,
            )
            res = adf_test(diffed, max_lag=cfg.adf_max_lag, alpha=cfg.alpha)
            rows.append(
                [name, d, f"{res.statistic:.4f}", f"{res.p_value:.6f}", res.chosen_lag, ""]
            )
        except NumericError as exc:
            rows.append([name, "", "", "", "", f"failed: {exc}"])

    describe("cases", cases.values)
    for j in range(tensor.n_topics):
        for k in range(3):
            comp = tensor.component(j, k)
            if np.ptp(comp) == 0:
                rows.append([f"topic{j}_sent{k}", "", "", "", "", "constant series"])
                continue
            describe(f"topic{j}_sent{k}", comp)
    _write_csv(
        paths["adf"],
        ["series", "d_used", "statistic", "p_value", "chosen_lag", "note"],
        rows,
    )
    return {"series_tested": len(rows)}


def stage_granger(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    tensor = _load_tensor(cfg)
    cases = _load_cases(cfg)
    ranked = select_features(
        tensor, cases, max_lag=cfg.max_lag, alpha=cfg.alpha,
        min_count=cfg.min_count, max_d=cfg.d_cap, adf_max_lag=cfg.adf_max_lag,
    )
    paths["ranking"].parent.mkdir(parents=True, exist_ok=True)
    write_feature_report(paths["ranking"], ranked)
    return {
        "selected": len(ranked),
        "top": ranked[0].name if ranked else None,
        "top_count": ranked[0].significant_count if ranked else 0,
    }


def _load_ranking(cfg: PipelineConfig) -> list[dict]:
    paths = _paths(cfg.out_dir)
    _require(paths["ranking"], "granger")
    with open(paths["ranking"], "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _exog_matrix(cfg: PipelineConfig, tensor, cases):
    """Lagged exogenous columns for the selected components, plus aligned y."""
    ranking = _load_ranking(cfg)
    if cfg.exog_top is not None:
        ranking = ranking[: cfg.exog_top]
    if not ranking:
        raise NumericError(
            f"no components passed the Granger filter at min_count={cfg.min_count}"
        )
    lagged = lag_features(tensor, cases, max_lag=cfg.max_lag)
    names = []
    for row in ranking:
        j, k = int(row["topic"]), int(row["sentiment"])
        names.extend(lagged_column_name(j, k, lag) for lag in range(cfg.max_lag + 1))
    matrix = np.column_stack([lagged.columns[n] for n in names])
    y = CaseSeries(lagged.dates[0], lagged.y)
    return y, matrix, names


def _train_d(cfg: PipelineConfig, y: CaseSeries) -> int:
    """Differencing order for the ARIMA stage, decided on the train segment."""
    if cfg.split_date is not None:
        n_train = (cfg.split_date - y.start_date).days + 1
        train = y.values[:n_train]
    else:
        train = y.values
    _, d = ensure_stationary(
        train.astype(float), max_d=cfg.d_cap, alpha=cfg.alpha, max_lag=cfg.adf_max_lag
    )
    return d


def stage_grid_search(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    tensor = _load_tensor(cfg)
    cases = _load_cases(cfg)
    y, exog, exog_names = _exog_matrix(cfg, tensor, cases)
    if cfg.split_date is not None:
        n_train = (cfg.split_date - y.start_date).days + 1
        y_train = y.values[:n_train].astype(float)
        exog_train = exog[:n_train]
    else:
        y_train = y.values.astype(float)
        exog_train = exog
    d = _train_d(cfg, y)
    p_lo, p_hi = cfg.grid_p
    q_lo, q_hi = cfg.grid_q

    def run_grid(exog_arg, names):
        return grid_search(
            y_train, exog=exog_arg, p_range=range(p_lo, p_hi + 1), d=d,
            q_range=range(q_lo, q_hi + 1), exog_names=names,
        )

    n_jobs = _n_jobs()
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            base_future = pool.submit(run_grid, None, None)
            social_future = pool.submit(run_grid, exog_train, exog_names)
            baseline, social = base_future.result(), social_future.result()
    else:
        baseline = run_grid(None, None)
        social = run_grid(exog_train, exog_names)

    def grid_rows(result):
        return [
            [f.spec.p, f.spec.d, f.spec.q, f"{f.aic:.4f}", f"{f.bic:.4f}", f.converged]
            for f in result.fits
        ]

    _write_csv(paths["grid_baseline"], ["p", "d", "q", "aic", "bic", "converged"], grid_rows(baseline))
    _write_csv(paths["grid_social"], ["p", "d", "q", "aic", "bic", "converged"], grid_rows(social))
    best = {
        "format_version": 1,
        "d": d,
        "baseline": list(
            (baseline.fits[0].spec.p, baseline.fits[0].spec.d, baseline.fits[0].spec.q)
        ),
        "baseline_aic": baseline.fits[0].aic,
        "social": list((social.fits[0].spec.p, social.fits[0].spec.d, social.fits[0].spec.q)),
        "social_aic": social.fits[0].aic,
        "exog_names": exog_names,
        "baseline_failures": [f"{s}: {m}" for s, m in baseline.failures],
        "social_failures": [f"{s}: {m}" for s, m in social.failures],
    }
    _write_json(paths["grid_best"], best)
    return {
        "d": d,
        "best_baseline": best["baseline"],
        "best_social": best["social"],
    }


def _fit_to_json(fit: ArimaFit) -> dict:
    return {
        "format_version": 1,
        "spec": [fit.spec.p, fit.spec.d, fit.spec.q],
        "intercept": fit.intercept,
        "ar": fit.ar.tolist(),
        "ma": fit.ma.tolist(),
        "exog_coeffs": fit.exog_coeffs,
        "sigma2": fit.sigma2,
        "loglik": fit.loglik,
        "aic": fit.aic,
        "bic": fit.bic,
        "converged": fit.converged,
        "n_effective": fit.n_effective,
        "residuals": fit.residuals.tolist(),
        "y_train": fit.y_train.tolist(),
    }


def _fit_from_json(doc: dict) -> ArimaFit:
    from .series import difference

    spec = ArimaSpec(*doc["spec"])
    y_train = np.asarray(doc["y_train"], dtype=float)
    return ArimaFit(
        spec=spec,
        intercept=doc["intercept"],
        ar=np.asarray(doc["ar"], dtype=float),
        ma=np.asarray(doc["ma"], dtype=float),
        exog_coeffs=dict(doc["exog_coeffs"]),
        sigma2=doc["sigma2"],
        loglik=doc["loglik"],
        aic=doc["aic"],
        bic=doc["bic"],
        residuals=np.asarray(doc["residuals"], dtype=float),
        n_effective=doc["n_effective"],
        converged=doc["converged"],
        css=doc["sigma2"] * doc["n_effective"],
        ma_reflected=False,
        y_train=y_train,
        w_train=difference(y_train, spec.d),
    )


def stage_fit_arima(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    tensor = _load_tensor(cfg)
    cases = _load_cases(cfg)
    y, exog, exog_names = _exog_matrix(cfg, tensor, cases)
    if cfg.arima_spec is not None:
        spec = ArimaSpec(*cfg.arima_spec)
    else:
        best = json.loads(_require(paths["grid_best"], "grid-search").read_text("utf-8"))
        key = "social" if cfg.arima_use_exog else "baseline"
        spec = ArimaSpec(*best[key])
    use_exog = cfg.arima_use_exog
    fit = fit_arima(
        y.values.astype(float), spec,
        exog=exog if use_exog else None,
        exog_names=exog_names if use_exog else None,
    )
    doc = _fit_to_json(fit)
    doc["start_date"] = y.start_date.isoformat()
    _write_json(paths["arima_fit"], doc)
    return {"spec": str(fit.spec), "aic": fit.aic, "converged": fit.converged}


def stage_fit_var(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    tensor = _load_tensor(cfg)
    cases = _load_cases(cfg)
    ranking = _load_ranking(cfg)
    if cfg.exog_top is not None:
        ranking = ranking[: cfg.exog_top]
    if not ranking:
        raise NumericError("no selected components to put in the VAR")
    columns = [cases.values.astype(float)]
    names = ["cases"]
    for row in ranking:
        j, k = int(row["topic"]), int(row["sentiment"])
        columns.append(tensor.component(j, k).astype(float))
        names.append(row["component"])
    matrix = np.column_stack(columns)
    if cfg.var_difference:
        orders = []
        diffed = []
        for col in matrix.T:
            out, d_used = ensure_stationary(
                col, max_d=cfg.d_cap, alpha=cfg.alpha, max_lag=cfg.adf_max_lag
            )
            orders.append(d_used)
            diffed.append(out)
        trim = max(orders)
        matrix = np.column_stack(
            [col[trim - d :] if trim > d else col for col, d in zip(diffed, orders)]
        )
    fit, table = select_var_order(matrix, p_max=cfg.var_p_max, variable_names=names)
    _write_csv(
        paths["var_order"], ["p", "aic"],
        [[p, f"{a:.4f}"] for p, a in sorted(table.items())],
    )
    doc = {
        "format_version": 1,
        "p": fit.p,
        "variable_names": list(fit.variable_names),
        "intercept": fit.c.tolist(),
        "coeff": fit.coeff.tolist(),
        "resid_cov": fit.resid_cov.tolist(),
        "loglik": fit.loglik,
        "aic": fit.aic,
        "last_observations": matrix[len(matrix) - fit.p :].tolist() if fit.p else [],
        "end_date": cfg.window_end.isoformat(),
        "differenced": bool(cfg.var_difference),
    }
    _write_json(paths["var_fit"], doc)
    return {"p": fit.p, "aic": fit.aic, "variables": names}


def stage_forecast(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    produced = {}

    if paths["arima_fit"].exists():
        doc = json.loads(paths["arima_fit"].read_text("utf-8"))
        fit = _fit_from_json(doc)
    else:
        fit = None
    if fit is not None and fit.exog_coeffs:
        # future exogenous values are unknowable here; backtest supplies them
        produced["arima"] = "skipped: fit has exogenous columns"
        fit = None
    if fit is not None:
        fc = forecast(fit, cfg.forecast_horizon, significances=cfg.significances)
        start = date.fromisoformat(doc["start_date"]) + timedelta(days=len(fit.y_train))
        rows = []
        for h in range(cfg.forecast_horizon):
            row = [(start + timedelta(days=h)).isoformat(), f"{fc.point[h]:.4f}"]
            for alpha in sorted(cfg.significances, reverse=True):
                lower, upper = fc.bounds[alpha]
                row += [f"{lower[h]:.4f}", f"{upper[h]:.4f}"]
            rows.append(row)
        header = ["date", "point"]
        for alpha in sorted(cfg.significances, reverse=True):
            tag = f"{alpha * 100:g}".replace(".", "_")
            header += [f"lower_{tag}", f"upper_{tag}"]
        _write_csv(paths["forecast_arima"], header, rows)
        produced["arima"] = cfg.forecast_horizon

    var_path = paths["var_fit"]
    if not produced and not var_path.exists():
        raise MissingArtifactError(
            f"missing artifact {paths['arima_fit']} or {var_path}; "
            "run `signalcast fit-arima` or `signalcast fit-var` first"
        )
    if var_path.exists():
        doc = json.loads(var_path.read_text("utf-8"))
        from .var import VarFit

        fit = VarFit(
            p=doc["p"],
            c=np.asarray(doc["intercept"], dtype=float),
            coeff=np.asarray(doc["coeff"], dtype=float).reshape(
                doc["p"], len(doc["variable_names"]), len(doc["variable_names"])
            ),
            resid_cov=np.asarray(doc["resid_cov"], dtype=float),
            loglik=doc["loglik"],
            aic=doc["aic"],
            variable_names=tuple(doc["variable_names"]),
            n_obs_used=0,
        )
        last = np.asarray(doc["last_observations"], dtype=float)
        out = forecast_var(fit, last, cfg.forecast_horizon)
        start = date.fromisoformat(doc["end_date"]) + timedelta(days=1)
        rows = [
            [(start + timedelta(days=h)).isoformat()] + [f"{v:.4f}" for v in out[h]]
            for h in range(cfg.forecast_horizon)
        ]
        _write_csv(paths["forecast_var"], ["date"] + list(fit.variable_names), rows)
        produced["var"] = cfg.forecast_horizon
    return produced


def stage_backtest(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    if cfg.split_date is None:
        raise ValidationError("backtest needs split_date in the config")
    tensor = _load_tensor(cfg)
    cases = _load_cases(cfg)
    y, exog, exog_names = _exog_matrix(cfg, tensor, cases)
    best = json.loads(_require(paths["grid_best"], "grid-search").read_text("utf-8"))
    baseline_spec = ArimaSpec(*best["baseline"])
    social_spec = ArimaSpec(*best["social"])

    base = backtest(y, cfg.split_date, baseline_spec, significances=cfg.significances)
    social = backtest(
        y, cfg.split_date, social_spec, exog=exog, exog_names=exog_names,
        significances=cfg.significances,
    )

    def dump(result, path):
        rows = []
        for i, day in enumerate(result.test_dates):
            row = [
                day.isoformat(),
                int(result.test_actual[i]),
                f"{result.point_forecast[i]:.4f}",
            ]
            for alpha in sorted(cfg.significances, reverse=True):
                lower, upper = result.interval_forecast.bounds[alpha]
                row += [f"{lower[i]:.4f}", f"{upper[i]:.4f}"]
            rows.append(row)
        header = ["date", "actual", "point"]
        for alpha in sorted(cfg.significances, reverse=True):
            tag = f"{alpha * 100:g}".replace(".", "_")
            header += [f"lower_{tag}", f"upper_{tag}"]
        _write_csv(path, header, rows)

    dump(base, paths["backtest_baseline"])
    dump(social, paths["backtest_social"])

    def report(result):
        out = {
            "spec": str(result.fit.spec),
            "point": {
                "rmse": result.point_metrics.rmse,
                "mape": result.point_metrics.mape,
                "r2": result.point_metrics.r2,
            },
        }
        for alpha, m in result.upper_metrics.items():
            out[f"upper_{alpha:g}"] = {"rmse": m.rmse, "mape": m.mape, "r2": m.r2}
        max_lag = min(20, result.fit.n_effective - 1)
        acf = residual_acf(result.fit, max_lag)
        out["residual_correlogram"] = {
            "max_lag": max_lag,
            "band": acf.band,
            "flagged_lags": list(acf.flagged),
        }
        return out

    doc = {
        "format_version": 1,
        "split_date": cfg.split_date.isoformat(),
        "horizon": len(base.test_dates),
        "baseline": report(base),
        "social": report(social),
        "improvement_point_rmse_pct": 100.0
        * (base.point_metrics.rmse - social.point_metrics.rmse)
        / base.point_metrics.rmse,
    }
    _write_json(paths["backtest_metrics"], doc)
    return doc


def stage_emit_plots(cfg: PipelineConfig) -> dict:
    paths = _paths(cfg.out_dir)
    produced = []
    for model in ("baseline", "social"):
        src = paths[f"backtest_{model}"]
        _require(src, "backtest")
        with open(src, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        for column in rows[0]:
            if not column.startswith("upper_") and column != "point":
                continue
            name = f"actual_vs_predicted_{model}_{column}.csv"
            _write_csv(
                paths["plots_dir"] / name,
                ["date", "actual", "predicted"],
                [[r["date"], r["actual"], r[column]] for r in rows],
            )
            produced.append(name)
    if paths["forecast_var"].exists():
        with open(paths["forecast_var"], "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        _write_csv(
            paths["plots_dir"] / "var_forecast_cases.csv",
            ["date", "predicted"],
            [[r["date"], r["cases"]] for r in rows],
        )
        produced.append("var_forecast_cases.csv")
    return {"files": produced}


def stage_pipeline(cfg: PipelineConfig) -> dict:
    summary = {
        "ingest": stage_ingest(cfg),
        "topics": stage_topics(cfg),
        "build-series": stage_build_series(cfg),
        "adf": stage_adf(cfg),
        "granger": stage_granger(cfg),
        "grid-search": stage_grid_search(cfg),
        "fit-arima": stage_fit_arima(cfg),
        "backtest": stage_backtest(cfg),
        "fit-var": stage_fit_var(cfg),
        "forecast": stage_forecast(cfg),
        "emit-plots": stage_emit_plots(cfg),
    }
    _write_json(_paths(cfg.out_dir)["summary"], summary)
    return summary


STAGES = {
    "ingest": stage_ingest,
    "topics": stage_topics,
    "build-series": stage_build_series,
    "adf": stage_adf,
    "granger": stage_granger,
    "fit-arima": stage_fit_arima,
    "grid-search": stage_grid_search,
    "fit-var": stage_fit_var,
    "forecast": stage_forecast,
    "backtest": stage_backtest,
    "emit-plots": stage_emit_plots,
    "pipeline": stage_pipeline,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # validation problems exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="signalcast", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in STAGES:
        stage = sub.add_parser(name, help=f"run the {name} stage")
        stage.add_argument("--config", required=True, help="pipeline config JSON")
        stage.add_argument("--seed", type=int, default=None, help="override the config seed")
        stage.add_argument("--out", default=None, help="override the output directory")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"signalcast: error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = PipelineConfig.from_file(args.config, out_override=args.out, seed_override=args.seed)
        _write_json(_paths(cfg.out_dir)["resolved_config"], cfg.resolved())
        result = STAGES[args.subcommand](cfg)
        print(json.dumps({args.subcommand: result}, indent=2, default=str))
        return 0
    except (ValidationError, OSError) as exc:
        print(f"signalcast: error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"signalcast: numeric failure: {exc}", file=sys.stderr)
        return 2
    except SignalcastError as exc:
        print(f"signalcast: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
