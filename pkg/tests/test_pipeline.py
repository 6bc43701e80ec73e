"""
Testes dos estágios do pipeline sobre o dataset sintético padrão:
ingestão -> treinamento -> classificação -> análise.
"""

import json
from datetime import date

import pandas as pd
import pytest

from signallab.config import DEFAULT_LEXICON_PATH
from signallab.errors import AlignmentError, InputError
from signallab.ml.pipeline.analyze import run_analyze
from signallab.ml.pipeline.modules.ingest import CountrySpec, resolve_country
from signallab.ml.pipeline.modules.schemes import DIMENSIONS
from signallab.ml.pipeline.prepare_dataset import run_ingest
from signallab.ml.pipeline.train_model import load_models, run_classify, tree_path

NETHERLANDS = resolve_country("netherlands")


@pytest.fixture(scope="module")
def stages(synth_dir, tmp_path_factory):
    """Executa ingest, train e predict uma vez; devolve os diretórios."""
    root = tmp_path_factory.mktemp("stages")
    series, models = root / "series", root / "models"
    ingest = run_ingest(synth_dir / "tweets.jsonl", synth_dir / "sales.csv", NETHERLANDS, series)
    train = run_classify(
        "train", series / "filtered_tweets.jsonl", models, DEFAULT_LEXICON_PATH, labels_path=synth_dir / "labels.csv"
    )
    predict = run_classify("predict", series / "filtered_tweets.jsonl", series, DEFAULT_LEXICON_PATH, model_dir=models)
    return {"series": series, "models": models, "ingest": ingest, "train": train, "predict": predict}


def _load(path):
    return json.loads(path.read_text(encoding="utf-8"))


# ============================================================================
# INGESTÃO
# ============================================================================


class TestIngestStage:
    def test_outputs(self, stages):
        series = stages["series"]
        for name in ("weekly_series.csv", "country_summary.csv", "filtered_tweets.jsonl", "manifest_ingest.json"):
            assert (series / name).exists(), name
        manifest = _load(series / "manifest_ingest.json")
        assert manifest["subcommand"] == "ingest"
        assert "weekly_series.csv" in manifest["outputs"]

    def test_weekly_series_is_aligned(self, stages, synth_dir):
        frame = pd.read_csv(stages["series"] / "weekly_series.csv")
        assert list(frame.columns) == ["week_start", "tweets", "sales", "sales_normalized"]
        assert len(frame) == 91
        assert frame["week_start"].iloc[0] == "2012-01-02"
        truth = _load(synth_dir / "ground_truth.json")
        assert frame["tweets"].sum() == len(truth["revised_triples"])

    def test_normalized_sales_peak_at_one(self, stages):
        frame = pd.read_csv(stages["series"] / "weekly_series.csv")
        assert frame["sales_normalized"].max() == pytest.approx(1.0)
        assert frame["sales_normalized"].min() >= 0.0

    def test_country_summary_has_overall_row(self, stages):
        frame = pd.read_csv(stages["series"] / "country_summary.csv")
        assert frame["country"].iloc[-1] == "OVERALL"
        assert frame["n_tweets"].iloc[-1] == frame["n_tweets"].iloc[:-1].sum()

    def test_viability_warning(self, stages):
        # ~34 Tweets/semana no país: abaixo da heurística de 40
        assert any("viability" in w for w in stages["ingest"].warnings)

    def test_no_warning_below_custom_threshold(self, synth_dir, tmp_path):
        manifest = run_ingest(synth_dir / "tweets.jsonl", synth_dir / "sales.csv", NETHERLANDS, tmp_path, min_weekly_tweets=1)
        assert not any("viability" in w for w in manifest.warnings)

    def test_disjoint_sales(self, synth_dir, tmp_path):
        sales = tmp_path / "sales.csv"
        sales.write_text("week_start,country,units\n2015-01-05,Netherlands,10\n2015-01-12,Netherlands,12\n", encoding="utf-8")
        with pytest.raises(AlignmentError, match="no overlap"):
            run_ingest(synth_dir / "tweets.jsonl", sales, NETHERLANDS, tmp_path / "out")

    def test_country_without_tweets(self, synth_dir, tmp_path):
        with pytest.raises(InputError, match="no tweets left"):
            run_ingest(synth_dir / "tweets.jsonl", synth_dir / "sales.csv", resolve_country("spain"), tmp_path)

    def test_custom_country_is_listed(self, synth_dir, tmp_path):
        custom = CountrySpec(name="Holland", language="nl", capital="Amsterdam")
        run_ingest(synth_dir / "tweets.jsonl", synth_dir / "sales.csv", custom, tmp_path)
        frame = pd.read_csv(tmp_path / "country_summary.csv")
        assert "Holland" in set(frame["country"])

    def test_date_window(self, synth_dir, tmp_path):
        run_ingest(
            synth_dir / "tweets.jsonl", synth_dir / "sales.csv", NETHERLANDS, tmp_path,
            start=date(2012, 3, 5), end=date(2012, 6, 3),
        )
        frame = pd.read_csv(tmp_path / "weekly_series.csv")
        assert frame["week_start"].iloc[0] == "2012-03-05"
        assert len(frame) == 13


# ============================================================================
# CLASSIFICAÇÃO
# ============================================================================


class TestClassifyStage:
    def test_train_outputs(self, stages):
        models = stages["models"]
        for dimension in DIMENSIONS:
            assert tree_path(models, dimension).exists()
            assert (models / f"rules_{dimension}.txt").read_text(encoding="utf-8").strip()
        assert (models / "manifest_classify_train.json").exists()

    def test_train_report(self, stages):
        report = _load(stages["models"] / "train_report.json")
        assert report["manifest"] == "manifest_classify_train.json"
        assert set(DIMENSIONS) <= set(report)
        assert report["user_type"]["accuracy_overall"] >= 0.85
        assert report["user_type"]["n_test"] > 0

    def test_models_reload(self, stages):
        models = load_models(stages["models"])
        assert [m.target for m in models.values()] == list(DIMENSIONS)

    def test_predict_outputs(self, stages):
        series = stages["series"]
        predictions = pd.read_csv(series / "predictions.csv", dtype={"id": str})
        n_tweets = sum(1 for _ in open(series / "filtered_tweets.jsonl", encoding="utf-8"))
        assert len(predictions) == n_tweets
        assert predictions["user_type_confidence"].between(0.0, 1.0).all()

        classified = pd.read_csv(series / "classified_series.csv")
        weekly = pd.read_csv(series / "weekly_series.csv")
        assert list(classified["week_start"]) == list(weekly["week_start"])
        assert list(classified["all/all/all"]) == list(weekly["tweets"])
        assert "per/all/pos" in classified.columns

    def test_agreement(self, synth_dir, tmp_path):
        run_classify("agreement", "", tmp_path, DEFAULT_LEXICON_PATH, labels_path=synth_dir / "labels.csv")
        frame = pd.read_csv(tmp_path / "agreement.csv")
        overall = frame[frame["class"] == "OVERALL"]
        assert len(overall) == 2 * len(DIMENSIONS)
        assert set(overall["scheme"]) == {"raw", "revised"}
        assert overall["accuracy"].between(0.0, 1.0).all()
        assert (tmp_path / "agreement_report.json").exists()

    def test_train_needs_labels(self, stages, tmp_path):
        with pytest.raises(InputError, match="needs --labels"):
            run_classify("train", stages["series"] / "filtered_tweets.jsonl", tmp_path, DEFAULT_LEXICON_PATH)

    def test_predict_without_models(self, stages, tmp_path):
        with pytest.raises(InputError, match="model file not found"):
            run_classify("predict", stages["series"] / "filtered_tweets.jsonl", tmp_path, DEFAULT_LEXICON_PATH)

    def test_unknown_mode(self, tmp_path):
        with pytest.raises(InputError, match="unknown classify mode"):
            run_classify("evaluate", "", tmp_path, DEFAULT_LEXICON_PATH)


# ============================================================================
# ANÁLISE
# ============================================================================


class TestAnalyzeStage:
    @pytest.fixture(scope="class")
    def reports(self, stages, tmp_path_factory):
        out = tmp_path_factory.mktemp("reports")
        manifest = run_analyze(stages["series"], "all", out_dir=out)
        return out, manifest

    def test_all_outputs(self, reports):
        out, manifest = reports
        for name in (
            "correlation.csv", "correlation.json", "adf.json", "adf.csv",
            "granger.csv", "granger.json", "granger_protocol.csv", "eventstudy.json",
        ):
            assert (out / name).exists(), name
            assert name in manifest.outputs
        assert (out / "manifest_analyze_all.json").exists()
        assert not (out / "robustness.csv").exists()

    def test_source_correlates_at_injected_lags(self, reports):
        out, _ = reports
        frame = pd.read_csv(out / "correlation.csv").set_index("filter")
        assert frame.loc["per/all/pos", "lag_3"] >= 0.3
        assert frame.loc["per/all/pos", "lag_4"] >= 0.3
        assert len(frame) == 12

    def test_granger_protocol_has_three_variants(self, reports):
        out, _ = reports
        frame = pd.read_csv(out / "granger_protocol.csv")
        assert len(frame) == 3 * 8
        assert set(frame["transform"]) == {"count", "fraction"}

    def test_event_study_with_reach(self, reports):
        out, _ = reports
        payload = _load(out / "eventstudy.json")
        assert payload["source"] == "per/all/pos"
        assert payload["result"]["outcome"] in ("tested", "uniform_effect")
        assert "reach" in payload

    def test_single_analysis_with_sweep(self, stages, tmp_path):
        run_analyze(stages["series"], "eventstudy", out_dir=tmp_path, sweep=True)
        assert (tmp_path / "robustness.csv").exists()
        region = _load(tmp_path / "robustness_region.json")
        assert "region" in region
        assert (tmp_path / "manifest_analyze_eventstudy.json").exists()

    def test_unknown_analysis(self, stages, tmp_path):
        with pytest.raises(InputError, match="unknown analysis"):
            run_analyze(stages["series"], "spectral", out_dir=tmp_path)

    def test_missing_classified_series(self, synth_dir, tmp_path):
        run_ingest(synth_dir / "tweets.jsonl", synth_dir / "sales.csv", NETHERLANDS, tmp_path)
        with pytest.raises(InputError, match="not found"):
            run_analyze(tmp_path, "adf", out_dir=tmp_path / "out")
