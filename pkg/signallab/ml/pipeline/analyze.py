"""
Análises Tweets x vendas (estágio de análise).

Entrada: weekly_series.csv (+ classified_series.csv, predictions.csv, filtered_tweets.jsonl)
Saída: correlation.csv, adf.json, granger.csv, eventstudy.json, robustness.csv, manifest_analyze_<análise>.json

Responsabilidades:
  - Tabela de correlação por filtro de classe e defasagem
  - Estacionariedade (ADF em nível e diferença)
  - Varredura de Granger (contagem ou fração, com ou sem diferença)
  - Estudo de eventos, grade de robustez e comparação de alcance

Não faz: ingestão, classificação
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from signallab.config import MIN_WEEKLY_TWEETS
from signallab.errors import InputError
from signallab.ml.pipeline.modules.classify import ALL_TWEETS, POSITIVE_PERSONAL, LabelTriple, TripleFilter
from signallab.ml.pipeline.modules.events import (
    DEFAULT_L_RANGE,
    DEFAULT_Q_SET,
    DEFAULT_W_RANGE,
    EventStudyConfig,
    detect_peak_weeks,
    reach_stats,
    robustness_sweep,
    run_event_study,
    significant_region,
)
from signallab.ml.pipeline.modules.ingest import WeeklySeries, align, read_tweets
from signallab.ml.pipeline.modules.tsa import (
    DEFAULT_ADF_LAG_ORDER,
    DEFAULT_LAGS,
    MODERATE_CORRELATION,
    correlation_table,
    granger_frame,
    granger_protocol,
    granger_sweep,
    stationarity_report,
)
from signallab.ml.pipeline.prepare_dataset import FILTERED_TWEETS_NAME, WEEKLY_SERIES_NAME, check_viability
from signallab.ml.pipeline.reports import RunManifest, read_weekly_series, write_csv, write_json, write_manifest
from signallab.ml.pipeline.train_model import CLASSIFIED_SERIES_NAME

logger = logging.getLogger(__name__)

ANALYSES = ("correlate", "adf", "granger", "eventstudy")
PREDICTIONS_NAME = "predictions.csv"
DEFAULT_K_RANGE = tuple(range(1, 9))


class AnalysisInputs:
    """Séries carregadas de um diretório de ingestão/classificação."""

    def __init__(self, series_dir: Union[str, Path]):
        self.series_dir = Path(series_dir)
        weekly = read_weekly_series(self.series_dir / WEEKLY_SERIES_NAME)
        if "sales" not in weekly:
            raise InputError(f"{self.series_dir / WEEKLY_SERIES_NAME}: missing sales column")
        self.sales: WeeklySeries = weekly["sales"]

        classified_path = self.series_dir / CLASSIFIED_SERIES_NAME
        if classified_path.exists():
            self.by_filter: Dict[str, WeeklySeries] = read_weekly_series(classified_path)
        else:
            logger.warning(f"[TSA] {classified_path} ausente: usando apenas o total de Tweets")
            self.by_filter = {ALL_TWEETS.description: weekly["tweets"]}

    def series(self, description: str) -> WeeklySeries:
        if description not in self.by_filter:
            raise InputError(
                f"series {description!r} not found in {self.series_dir}; run classify --mode predict first"
            )
        return self.by_filter[description]

    @property
    def total(self) -> WeeklySeries:
        return self.series(ALL_TWEETS.description)


# ============================================================================
# ANÁLISES
# ============================================================================


def analyze_correlation(inputs: AnalysisInputs, out: Path, manifest: RunManifest, lags: Sequence[int], n_jobs: int) -> None:
    table = correlation_table(inputs.by_filter, inputs.sales, lags, MODERATE_CORRELATION, n_jobs=n_jobs)
    write_csv(table.to_frame(), out / "correlation.csv", manifest)
    write_json(table, out / "correlation.json", manifest)


def analyze_adf(inputs: AnalysisInputs, out: Path, manifest: RunManifest, source: str, lag_order: int) -> None:
    targets = {source: inputs.series(source), "sales": inputs.sales}
    if ALL_TWEETS.description in inputs.by_filter:
        targets.setdefault(ALL_TWEETS.description, inputs.total)

    reports = {name: stationarity_report(series, lag_order) for name, series in targets.items()}
    rows = [
        {
            "series": name,
            "transform": kind,
            "statistic": result.statistic,
            "lag_order": result.lag_order,
            "n_obs": result.n_obs,
            "reject_1%": result.reject["1%"],
            "reject_5%": result.reject["5%"],
            "reject_10%": result.reject["10%"],
        }
        for name, report in reports.items()
        for kind, result in report.items()
    ]
    write_json(reports, out / "adf.json", manifest)
    write_csv(pd.DataFrame(rows), out / "adf.csv", manifest)


def analyze_granger(
    inputs: AnalysisInputs,
    out: Path,
    manifest: RunManifest,
    source: str,
    fraction: bool,
    difference: bool,
    k_range: Sequence[int],
    protocol: bool,
    n_jobs: int,
) -> None:
    total = inputs.total if fraction or protocol else None
    results = granger_sweep(
        inputs.series(source),
        inputs.sales,
        k_range,
        transform="fraction" if fraction else "count",
        difference_first=difference,
        total=total,
        n_jobs=n_jobs,
    )
    write_csv(granger_frame(results), out / "granger.csv", manifest)
    write_json({"transform": "fraction" if fraction else "count", "difference": difference, "results": results}, out / "granger.json", manifest)
    if protocol:
        write_csv(granger_protocol(inputs.series(source), total, inputs.sales, k_range, n_jobs=n_jobs), out / "granger_protocol.csv", manifest)


def _source_tweets(inputs: AnalysisInputs, source: str):
    """Tweets do país cujo trio previsto satisfaz o filtro fonte (para o alcance)."""
    tweets_path = inputs.series_dir / FILTERED_TWEETS_NAME
    predictions_path = inputs.series_dir / PREDICTIONS_NAME
    if not (tweets_path.exists() and predictions_path.exists()):
        return None
    predictions = pd.read_csv(predictions_path, dtype={"id": str})
    wanted = TripleFilter.parse(source)
    keep = {
        row.id
        for row in predictions.itertuples(index=False)
        if wanted(LabelTriple(row.tweet_type, row.user_type, row.sentiment))
    }
    return [t for t in read_tweets(tweets_path) if t.id in keep]


def analyze_events(
    inputs: AnalysisInputs,
    out: Path,
    manifest: RunManifest,
    source: str,
    cfg: EventStudyConfig,
    sweep: bool,
    n_jobs: int,
    q_set: Sequence[float] = DEFAULT_Q_SET,
    w_range: Sequence[int] = DEFAULT_W_RANGE,
    L_range: Sequence[int] = DEFAULT_L_RANGE,
) -> None:
    tweets_series, sales = align(inputs.series(source), inputs.sales)
    result = run_event_study(tweets_series, sales, cfg)
    payload: Dict[str, object] = {"source": source, "result": result}

    tweets = _source_tweets(inputs, source)
    if tweets is not None:
        peaks = [e.week for e in detect_peak_weeks(tweets_series, cfg.quantile, merge_adjacent=False)]
        try:
            payload["reach"] = reach_stats(tweets, peaks, tweets_series.start_week, len(tweets_series))
        except InputError as e:
            manifest.warn(f"reach comparison skipped: {e}")
    write_json(payload, out / "eventstudy.json", manifest)

    if sweep:
        grid = robustness_sweep(tweets_series, sales, q_set, w_range, L_range, one_sided=cfg.one_sided, n_jobs=n_jobs)
        write_csv(grid.to_frame(), out / "robustness.csv", manifest)
        region = significant_region(grid)
        write_json(
            {"alpha": grid.alpha, "region": {str(q): (list(r) if r else None) for q, r in region.items()}},
            out / "robustness_region.json",
            manifest,
        )


# ============================================================================
# ESTÁGIO
# ============================================================================


def run_analyze(
    series_dir: Union[str, Path],
    analysis: str = "all",
    out_dir: Optional[Union[str, Path]] = None,
    source: str = POSITIVE_PERSONAL.description,
    lags: Sequence[int] = DEFAULT_LAGS,
    fraction: bool = False,
    difference: bool = False,
    k_range: Sequence[int] = DEFAULT_K_RANGE,
    adf_lag_order: int = DEFAULT_ADF_LAG_ORDER,
    event_config: Optional[EventStudyConfig] = None,
    sweep: bool = False,
    min_weekly_tweets: int = MIN_WEEKLY_TWEETS,
    n_jobs: int = 1,
) -> RunManifest:
    """Executa uma análise (ou todas) e grava os relatórios ao lado do manifesto."""
    selected: List[str] = list(ANALYSES) if analysis == "all" else [analysis]
    if any(a not in ANALYSES for a in selected):
        raise InputError(f"unknown analysis {analysis!r}; expected one of {list(ANALYSES) + ['all']}")
    cfg = event_config or EventStudyConfig()
    out = Path(out_dir or series_dir)
    out.mkdir(parents=True, exist_ok=True)

    manifest = RunManifest(
        subcommand=f"analyze:{analysis}",
        inputs={"series_dir": str(series_dir)},
        config={
            "source": source,
            "lags": list(lags),
            "fraction": fraction,
            "difference": difference,
            "k_range": list(k_range),
            "adf_lag_order": adf_lag_order,
            "event_study": cfg.model_dump(),
            "sweep": sweep,
            "min_weekly_tweets": min_weekly_tweets,
        },
    )
    inputs = AnalysisInputs(series_dir)
    check_viability(float(np.nanmean(inputs.series(source).values)), source, manifest, min_weekly_tweets)

    for name in selected:
        logger.info(f"[PIPELINE] Análise '{name}'")
        if name == "correlate":
            analyze_correlation(inputs, out, manifest, lags, n_jobs)
        elif name == "adf":
            analyze_adf(inputs, out, manifest, source, adf_lag_order)
        elif name == "granger":
            analyze_granger(inputs, out, manifest, source, fraction, difference, k_range, analysis == "all", n_jobs)
        else:
            analyze_events(inputs, out, manifest, source, cfg, sweep, n_jobs)

    write_manifest(manifest, out)
    return manifest
