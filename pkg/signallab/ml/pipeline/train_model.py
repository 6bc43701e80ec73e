"""
Treina as três árvores de classificação (tipo de Tweet, tipo de usuário, sentimento).

Entrada: Tweets + avaliações manuais (3 por Tweet) + léxico de primeiros nomes
Saída: tree_<dimensão>.json + train_report.json + rules_<dimensão>.txt

Responsabilidades:
  - Montar o conjunto de treino por dimensão (consenso 2 de 3, esquema revisado)
  - Treinar as árvores em paralelo (joblib)
  - Salvar e carregar os artefatos
  - Classificar Tweets e gerar as séries semanais por filtro de classe

Não faz: parsing de arquivos, análise estatística
"""

from __future__ import annotations

import logging
from datetime import date, timedelta
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd
from joblib import Parallel, delayed

from signallab.errors import InputError
from signallab.ml.pipeline.modules.classify import (
    ALL_TWEETS,
    CORRELATION_FILTERS,
    DEFAULT_EMOTICONS,
    POSITIVE_PERSONAL,
    AgreementReport,
    DecisionTree,
    LabelTriple,
    TrainReport,
    TreeParams,
    agreement_accuracy,
    build_training_set,
    classified_weekly_counts,
    export_rules,
    extract_features,
    group_ratings,
    load_lexicon,
    predict,
    train_tree,
    tree_from_json,
    tree_to_json,
)
from signallab.ml.pipeline.modules.ingest import LabelRecord, TweetRecord, WeeklySeries, monday_of, read_labels, read_tweets
from signallab.ml.pipeline.modules.schemes import DIMENSIONS
from signallab.ml.pipeline.prepare_dataset import WEEKLY_SERIES_NAME
from signallab.ml.pipeline.reports import RunManifest, read_weekly_series, write_csv, write_json, write_manifest, write_weekly_series

logger = logging.getLogger(__name__)

TRAIN_REPORT_NAME = "train_report.json"
CLASSIFIED_SERIES_NAME = "classified_series.csv"


def tree_path(model_dir: Union[str, Path], dimension: str) -> Path:
    return Path(model_dir) / f"tree_{dimension}.json"


# ============================================================================
# TREINAMENTO
# ============================================================================


def _train_dimension(
    tweets: Sequence[TweetRecord],
    labels: Sequence[LabelRecord],
    dimension: str,
    lexicon: frozenset,
    emoticons: frozenset,
    params: TreeParams,
) -> Tuple[DecisionTree, TrainReport]:
    examples, languages = build_training_set(tweets, labels, dimension, lexicon, emoticons)
    return train_tree(examples, dimension, params, languages=languages)


def train_classifiers(
    tweets: Sequence[TweetRecord],
    labels: Sequence[LabelRecord],
    lexicon: frozenset,
    params: Optional[TreeParams] = None,
    emoticons: frozenset = DEFAULT_EMOTICONS,
    n_jobs: int = 1,
) -> Dict[str, Tuple[DecisionTree, TrainReport]]:
    """Uma árvore por dimensão; resultado na ordem de DIMENSIONS."""
    if not labels:
        raise InputError("training needs manual labels")
    params = params or TreeParams()
    logger.info(f"[TRAIN] Treinando {len(DIMENSIONS)} árvores (max_depth={params.max_depth}, min_leaf={params.min_leaf})")

    results = Parallel(n_jobs=n_jobs)(
        delayed(_train_dimension)(tweets, labels, d, lexicon, emoticons, params) for d in DIMENSIONS
    )
    return dict(zip(DIMENSIONS, results))


def save_artifacts(
    models: Mapping[str, Tuple[DecisionTree, TrainReport]],
    model_dir: Union[str, Path],
    manifest: Optional[RunManifest] = None,
) -> Dict[str, Path]:
    """Grava as árvores (JSON exato), regras legíveis e o relatório de treino."""
    model_dir = Path(model_dir)
    model_dir.mkdir(parents=True, exist_ok=True)
    paths: Dict[str, Path] = {}

    for dimension, (tree, _) in models.items():
        path = tree_path(model_dir, dimension)
        path.write_text(tree_to_json(tree) + "\n", encoding="utf-8")
        rules = model_dir / f"rules_{dimension}.txt"
        rules.write_text("\n".join(export_rules(tree)) + "\n", encoding="utf-8")
        if manifest is not None:
            manifest.add_output(path)
            manifest.add_output(rules)
        paths[dimension] = path
        logger.info(f"[SAVE] Árvore '{dimension}' salva: {path}")

    reports = {dimension: report for dimension, (_, report) in models.items()}
    paths["report"] = write_json(reports, model_dir / TRAIN_REPORT_NAME, manifest)
    return paths


def load_models(model_dir: Union[str, Path]) -> Dict[str, DecisionTree]:
    models: Dict[str, DecisionTree] = {}
    for dimension in DIMENSIONS:
        path = tree_path(model_dir, dimension)
        if not path.exists():
            raise InputError(f"{path}: model file not found (run classify --mode train first)")
        tree = tree_from_json(path.read_text(encoding="utf-8"))
        if tree.target != dimension:
            raise InputError(f"{path}: tree predicts {tree.target}, expected {dimension}")
        models[dimension] = tree
        logger.info(f"[LOAD] Árvore '{dimension}' carregada ({len(tree.nodes)} nós)")
    return models


# ============================================================================
# PREDIÇÃO
# ============================================================================


def predict_triples(
    tweets: Sequence[TweetRecord],
    models: Mapping[str, DecisionTree],
    lexicon: frozenset,
    emoticons: frozenset = DEFAULT_EMOTICONS,
) -> Tuple[Dict[str, LabelTriple], pd.DataFrame]:
    """Trio revisado previsto por Tweet + tabela com as confianças."""
    triples: Dict[str, LabelTriple] = {}
    rows: List[dict] = []
    for t in tweets:
        features = extract_features(t, lexicon, emoticons)
        row: Dict[str, object] = {"id": t.id, "week_start": monday_of(t.created_at).isoformat()}
        for dimension in DIMENSIONS:
            cls, confidence = predict(models[dimension], features)
            row[dimension] = cls
            row[f"{dimension}_confidence"] = confidence
        triples[t.id] = LabelTriple(row["tweet_type"], row["user_type"], row["sentiment"])
        rows.append(row)

    columns = ["id", "week_start"] + [c for d in DIMENSIONS for c in (d, f"{d}_confidence")]
    logger.info(f"[CLASSIFY] {len(triples)} Tweets classificados")
    return triples, pd.DataFrame(rows, columns=columns)


def classified_series(
    tweets: Sequence[TweetRecord],
    triples: Mapping[str, LabelTriple],
    start: date,
    end: date,
) -> Dict[str, WeeklySeries]:
    """Séries semanais das linhas da tabela de correlação (+ total e fonte)."""
    filters = [ALL_TWEETS, POSITIVE_PERSONAL] + [f for f in CORRELATION_FILTERS if f not in (ALL_TWEETS, POSITIVE_PERSONAL)]
    return {f.description: classified_weekly_counts(tweets, triples, f, start, end) for f in filters}


# ============================================================================
# ESTÁGIO
# ============================================================================

CLASSIFY_MODES = ("train", "predict", "agreement")


def _series_range(tweets: Sequence[TweetRecord], weekly_series_path: Optional[Path]) -> Tuple[date, date]:
    """Reaproveita as semanas da ingestão quando weekly_series.csv existe."""
    if weekly_series_path is not None and weekly_series_path.exists():
        reference = next(iter(read_weekly_series(weekly_series_path).values()))
        return reference.start_week, reference.end_week + timedelta(days=6)
    if not tweets:
        raise InputError("no tweets to classify")
    days = [t.created_at.date() for t in tweets]
    return min(days), max(days)


def agreement_frame(reports: Sequence[AgreementReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        for cls, accuracy in report.per_class_accuracy.items():
            rows.append({
                "scheme": report.scheme,
                "dimension": report.dimension,
                "class": cls,
                "n_ratings": report.per_class_ratings[cls],
                "accuracy": accuracy,
            })
        rows.append({
            "scheme": report.scheme,
            "dimension": report.dimension,
            "class": "OVERALL",
            "n_ratings": report.n_ratings,
            "accuracy": report.overall_accuracy,
        })
    return pd.DataFrame(rows, columns=["scheme", "dimension", "class", "n_ratings", "accuracy"])


def run_classify(
    mode: str,
    tweets_path: Union[str, Path],
    out_dir: Union[str, Path],
    lexicon_path: Union[str, Path],
    labels_path: Optional[Union[str, Path]] = None,
    model_dir: Optional[Union[str, Path]] = None,
    series_dir: Optional[Union[str, Path]] = None,
    params: Optional[TreeParams] = None,
    n_jobs: int = 1,
) -> RunManifest:
    """train -> árvores + relatório; predict -> predições + séries por classe; agreement -> concordância."""
    if mode not in CLASSIFY_MODES:
        raise InputError(f"unknown classify mode {mode!r}; expected one of {list(CLASSIFY_MODES)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_dir = Path(model_dir) if model_dir else out
    params = params or TreeParams()

    manifest = RunManifest(
        subcommand=f"classify:{mode}",
        inputs={"tweets": str(tweets_path), "lexicon": str(lexicon_path)},
        config={"model_dir": str(model_dir), **params.model_dump()},
        seed=params.split_seed,
    )
    if labels_path:
        manifest.inputs["labels"] = str(labels_path)

    if mode in ("train", "agreement") and not labels_path:
        raise InputError(f"classify --mode {mode} needs --labels")

    if mode == "agreement":
        labels = read_labels(labels_path)
        groups = group_ratings(labels)
        reports = [agreement_accuracy(groups, d, scheme) for scheme in ("raw", "revised") for d in DIMENSIONS]
        write_json({f"{r.scheme}/{r.dimension}": r for r in reports}, out / "agreement_report.json", manifest)
        write_csv(agreement_frame(reports), out / "agreement.csv", manifest)
        write_manifest(manifest, out)
        return manifest

    tweets = read_tweets(tweets_path)
    lexicon = load_lexicon(lexicon_path)

    if mode == "train":
        labels = read_labels(labels_path)
        models = train_classifiers(tweets, labels, lexicon, params, n_jobs=n_jobs)
        save_artifacts(models, model_dir, manifest)
    else:
        models = load_models(model_dir)
        triples, predictions = predict_triples(tweets, models, lexicon)
        write_csv(predictions, out / "predictions.csv", manifest)
        start, end = _series_range(tweets, Path(series_dir or out) / WEEKLY_SERIES_NAME)
        write_weekly_series(classified_series(tweets, triples, start, end), out / CLASSIFIED_SERIES_NAME, manifest)

    write_manifest(manifest, out)
    return manifest
