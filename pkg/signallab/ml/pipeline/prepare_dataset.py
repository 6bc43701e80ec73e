"""
Preparação das séries semanais (estágio de ingestão).

Entrada: tweets (JSON-lines/CSV) + vendas (CSV) + país
Saída: weekly_series.csv, country_summary.csv, filtered_tweets.jsonl, manifest_ingest.json

Responsabilidades:
  - Ler e validar os arquivos de entrada
  - Tabela de Tweets por país (linha OVERALL incluída)
  - Filtrar o país (idioma + fuso horário)
  - Agregar Tweets e vendas por semana, alinhar e normalizar as vendas

Não faz: classificação (train_model.py), estatística (analyze.py)
"""

from __future__ import annotations

import json
import logging
from datetime import date
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from signallab.config import MIN_WEEKLY_TWEETS
from signallab.errors import InputError
from signallab.ml.pipeline.modules.ingest import (
    CountrySpec,
    SalesRecord,
    TweetRecord,
    aggregate_sales,
    align,
    country_summary,
    filter_country,
    known_countries,
    normalize_series,
    read_sales,
    read_tweets,
    weekly_tweet_counts,
)
from signallab.ml.pipeline.reports import RunManifest, write_csv, write_manifest, write_weekly_series

logger = logging.getLogger(__name__)

WEEKLY_SERIES_NAME = "weekly_series.csv"
FILTERED_TWEETS_NAME = "filtered_tweets.jsonl"
COUNTRY_SUMMARY_NAME = "country_summary.csv"


def _tweet_range(tweets: Sequence[TweetRecord]) -> Tuple[date, date]:
    days = [t.created_at.date() for t in tweets]
    return min(days), max(days)


def _sales_range(sales: Sequence[SalesRecord]) -> Tuple[date, date]:
    return min(r.week_start for r in sales), max(r.week_start for r in sales)


def _clip(span: Tuple[date, date], start: Optional[date], end: Optional[date]) -> Tuple[date, date]:
    lo = max(span[0], start) if start else span[0]
    hi = min(span[1], end) if end else span[1]
    if lo > hi:
        raise InputError(f"requested range {start}..{end} leaves no data")
    return lo, hi


def check_viability(mean_weekly: float, label: str, manifest: RunManifest, threshold: int = MIN_WEEKLY_TWEETS) -> None:
    """Aviso (nunca erro) quando a série fica abaixo da heurística de Tweets por semana."""
    if mean_weekly < threshold:
        manifest.warn(
            f"series {label} averages {mean_weekly:.1f} tweets/week, below the {threshold} tweets/week viability heuristic"
        )


def write_tweets_jsonl(tweets: Sequence[TweetRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in tweets:
            fh.write(json.dumps(t.to_json_dict(), ensure_ascii=False) + "\n")
    return path


def run_ingest(
    tweets_path: Union[str, Path],
    sales_path: Union[str, Path],
    country: CountrySpec,
    out_dir: Union[str, Path],
    start: Optional[date] = None,
    end: Optional[date] = None,
    tweet_format: Optional[str] = None,
    min_weekly_tweets: int = MIN_WEEKLY_TWEETS,
) -> RunManifest:
    """
    Executa a ingestão completa e grava as séries alinhadas.

    Tweets e vendas são agregados cada um no seu intervalo e depois recortados
    para a interseção de semanas; intervalos disjuntos geram AlignmentError.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        subcommand="ingest",
        inputs={"tweets": str(tweets_path), "sales": str(sales_path)},
        config={
            "country": country.model_dump(),
            "from": start.isoformat() if start else None,
            "to": end.isoformat() if end else None,
            "min_weekly_tweets": min_weekly_tweets,
        },
    )

    tweets = read_tweets(tweets_path, tweet_format)
    sales = read_sales(sales_path)

    specs = list(known_countries().values())
    if all(s.name.casefold() != country.name.casefold() for s in specs):
        specs.append(country)
    write_csv(country_summary(tweets, specs), out / COUNTRY_SUMMARY_NAME, manifest)

    kept = filter_country(tweets, country)
    if not kept:
        raise InputError(f"no tweets left after the {country.name} filter ({country.language}/{country.capital})")
    if not sales:
        raise InputError(f"{sales_path}: no sales records")

    # vendas de vários países: usa apenas as do país escolhido
    sales_country = country.name if any(r.country.casefold() == country.name.casefold() for r in sales) else None

    t_start, t_end = _clip(_tweet_range(kept), start, end)
    s_start, s_end = _clip(_sales_range(sales), start, end)
    tweet_series = weekly_tweet_counts(kept, t_start, t_end, label="tweets")
    sales_series = aggregate_sales(sales, s_start, s_end, country=sales_country, label="sales")
    tweet_series, sales_series = align(tweet_series, sales_series)

    write_weekly_series(
        {"tweets": tweet_series, "sales": sales_series, "sales_normalized": normalize_series(sales_series)},
        out / WEEKLY_SERIES_NAME,
        manifest,
    )
    write_tweets_jsonl(kept, out / FILTERED_TWEETS_NAME)
    manifest.add_output(out / FILTERED_TWEETS_NAME)

    if sales_series.n_missing:
        manifest.warn(f"{sales_series.n_missing} weeks without sales records (kept as missing)")
    check_viability(float(np.nanmean(tweet_series.values)), "tweets", manifest, min_weekly_tweets)

    manifest.config["weeks"] = {"start": tweet_series.start_week.isoformat(), "n_weeks": len(tweet_series)}
    write_manifest(manifest, out)
    logger.info(
        f"[INGEST] {country.name}: {len(kept)} Tweets, {len(tweet_series)} semanas alinhadas "
        f"({tweet_series.start_week} .. {tweet_series.end_week})"
    )
    return manifest
