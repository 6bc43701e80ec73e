"""
Testes do gerador sintético: determinismo, coerência com as regras e estrutura causal injetada.
"""

import json
from datetime import timedelta

import pytest

from conftest import make_series, make_tweet
from signallab.errors import InputError
from signallab.ml.pipeline.modules.classify import (
    LabelTriple,
    aggregate_classes,
    agreement_accuracy,
    build_training_set,
    consensus_triples,
    extract_features,
    group_ratings,
    rule_classify,
    train_tree,
)
from signallab.ml.pipeline.modules.ingest import filter_country, read_labels, read_sales, read_tweets
from signallab.ml.pipeline.modules.synth import (
    DEFAULT_SPIKE_TRIPLE,
    SynthConfig,
    expected_hit_rate,
    generate_dataset,
    generate_labels,
    label_sample,
    write_dataset,
)
from signallab.ml.pipeline.modules.tsa import correlation_table, granger_sweep, granger_test

SOURCE = "personal/person/positive"


def _source_only(seed: int, coefficient: float = 8.0) -> SynthConfig:
    """Só a classe fonte: geração rápida para as simulações."""
    return SynthConfig.from_dict(
        {
            "seed": seed,
            "class_rates": {SOURCE: 6.0},
            "spam_spikes": [],
            "effect": {"source": SOURCE, "lags": [3, 4], "coefficient": coefficient},
        }
    )


def _source_and_sales(cfg: SynthConfig, lexicon):
    _, sales, truth = generate_dataset(cfg, lexicon)
    tweets = make_series(truth.source_counts(), start=cfg.start_week, label=SOURCE)
    units = make_series([r.units for r in sales], start=cfg.start_week, label="sales")
    return tweets, units


# ============================================================================
# CONFIGURAÇÃO
# ============================================================================


class TestSynthConfig:
    def test_defaults(self):
        cfg = SynthConfig()
        assert cfg.n_weeks == 91
        assert cfg.effect.source == SOURCE
        assert cfg.effect.lags == [3, 4]

    def test_too_few_weeks(self):
        with pytest.raises(InputError, match="invalid synth config"):
            SynthConfig.from_dict({"n_weeks": 5})

    @pytest.mark.parametrize(
        "data",
        [
            {"effect": {"lags": [9]}},
            {"effect": {"lags": []}},
            {"class_rates": {SOURCE: -1.0}},
            {"class_rates": {"gossip/person/positive": 1.0}},
            {"class_rates": {"other/organization/not_positive": 1.0}},
            {"spam_spikes": [{"week": 95, "triple": SOURCE, "magnitude": 10}]},
            {"start_week": "2012-01-03"},
        ],
    )
    def test_invalid(self, data):
        with pytest.raises(InputError, match="invalid synth config"):
            SynthConfig.from_dict(data)

    def test_key_normalization(self):
        cfg = SynthConfig.from_dict({"class_rates": {"Personal/Person/Positive": 2.0}})
        assert cfg.class_rates == {SOURCE: 2.0}

    def test_load(self, tmp_path):
        path = tmp_path / "synth.json"
        path.write_text(json.dumps({"seed": 7, "n_weeks": 30}), encoding="utf-8")
        cfg = SynthConfig.load(path)
        assert (cfg.seed, cfg.n_weeks) == (7, 30)

    @pytest.mark.parametrize("n_weeks", [20, 30, 40, 91])
    def test_default_spike_inside_series(self, n_weeks):
        cfg = SynthConfig(n_weeks=n_weeks)
        assert cfg.spam_spikes is None
        (spike,) = cfg.effective_spam_spikes()
        assert spike.week == min(40, n_weeks * 2 // 3)
        assert spike.week < n_weeks

    def test_default_spike_survives_n_weeks_override(self):
        base = SynthConfig(seed=1)
        cfg = SynthConfig.from_dict({**base.model_dump(), "n_weeks": 25})
        assert cfg.effective_spam_spikes()[0].week == 16

    def test_explicit_empty_spikes(self):
        assert SynthConfig(spam_spikes=[]).effective_spam_spikes() == []

    def test_load_missing(self, tmp_path):
        with pytest.raises(InputError, match="config file not found"):
            SynthConfig.load(tmp_path / "nope.json")

    def test_load_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{seed: 1", encoding="utf-8")
        with pytest.raises(InputError, match="invalid JSON"):
            SynthConfig.load(path)


# ============================================================================
# GERAÇÃO
# ============================================================================


class TestGenerateDataset:
    def test_deterministic(self, small_config, lexicon):
        first = generate_dataset(small_config, lexicon)
        second = generate_dataset(small_config, lexicon)
        assert first[0] == second[0]
        assert first[1] == second[1]
        assert first[2] == second[2]

    def test_seed_changes_output(self, small_config, lexicon):
        other = small_config.model_copy(update={"seed": small_config.seed + 1})
        assert generate_dataset(small_config, lexicon)[0] != generate_dataset(other, lexicon)[0]

    def test_files_are_byte_identical(self, small_config, lexicon, tmp_path):
        digests = []
        for name in ("a", "b"):
            tweets, sales, truth = generate_dataset(small_config, lexicon)
            labels = generate_labels(tweets, truth, small_config)
            paths = write_dataset(tweets, sales, labels, truth, tmp_path / name)
            digests.append({key: path.read_bytes() for key, path in paths.items()})
        assert digests[0] == digests[1]

    def test_counts_match_country_tweets(self, small_config, lexicon):
        tweets, _, truth = generate_dataset(small_config, lexicon)
        assert len(truth.revised_triples) == sum(sum(c) for c in truth.counts.values())
        kept = filter_country(tweets, small_config.country)
        assert {t.id for t in kept} == set(truth.revised_triples)
        assert set(truth.foreign_ids).isdisjoint(truth.revised_triples)

    def test_tweets_fall_in_their_week(self, small_config, lexicon):
        tweets, _, truth = generate_dataset(small_config, lexicon)
        first = small_config.start_week
        last = first + timedelta(weeks=small_config.n_weeks)
        assert all(first <= t.created_at.date() < last for t in tweets)
        assert [t.created_at for t in tweets] == sorted(t.created_at for t in tweets)

    def test_tweets_follow_classification_rules(self, small_config, lexicon):
        tweets, _, truth = generate_dataset(small_config, lexicon)
        country = [t for t in tweets if t.id in truth.revised_triples]
        hits = sum(
            rule_classify(extract_features(t, lexicon)) == LabelTriple.from_key(truth.revised_triples[t.id])
            for t in country
        )
        assert hits / len(country) >= 0.99

    def test_raw_triples_revise_to_truth(self, small_config, lexicon):
        _, _, truth = generate_dataset(small_config, lexicon)
        for tweet_id, raw in truth.raw_triples.items():
            revised = aggregate_classes(LabelTriple.from_key(raw, scheme="raw"))
            assert revised.key() == truth.revised_triples[tweet_id]

    def test_seasonal_base_without_effect(self, lexicon):
        cfg = _source_only(3, coefficient=0.0)
        _, _, truth = generate_dataset(cfg, lexicon)
        # índice i = semana ISO i+1 em 2012
        assert truth.noiseless_sales[10] == pytest.approx(100.0)
        assert truth.noiseless_sales[30] == pytest.approx(80.0)
        assert truth.noiseless_sales[49] == pytest.approx(150.0)

    def test_noiseless_sales_follow_lagged_source(self, lexicon):
        cfg = _source_only(4)
        _, _, truth = generate_dataset(cfg, lexicon)
        counts = truth.source_counts()
        for t in (10, 20, 60):
            expected = 100.0 + 8.0 * (counts[t - 3] + counts[t - 4])
            assert truth.noiseless_sales[t] == pytest.approx(expected)

    def test_spam_spike_is_added(self, lexicon):
        cfg = SynthConfig(seed=2, n_weeks=30, spam_spikes=[{"week": 12, "triple": SOURCE, "magnitude": 500}])
        _, _, truth = generate_dataset(cfg, lexicon)
        assert truth.counts[SOURCE][12] >= 500

    def test_default_config_at_minimum_length(self, lexicon):
        cfg = SynthConfig(seed=3, n_weeks=20)
        _, sales, truth = generate_dataset(cfg, lexicon)
        assert len(sales) == 20
        assert truth.counts[DEFAULT_SPIKE_TRIPLE][13] >= 60

    def test_sales_never_negative(self, lexicon):
        cfg = SynthConfig(seed=6, n_weeks=30, noise_sd=500.0, spam_spikes=[])
        _, sales, _ = generate_dataset(cfg, lexicon)
        assert min(r.units for r in sales) >= 0.0


class TestGeneratedFiles:
    def test_round_trip_through_ingestion(self, synth_dir):
        tweets = read_tweets(synth_dir / "tweets.jsonl")
        sales = read_sales(synth_dir / "sales.csv")
        labels = read_labels(synth_dir / "labels.csv")
        truth = json.loads((synth_dir / "ground_truth.json").read_text(encoding="utf-8"))
        assert len(sales) == 91
        assert len(tweets) == len(truth["revised_triples"]) + len(truth["foreign_ids"])
        assert len(labels) % 3 == 0
        assert {r.tweet_id for r in labels} <= set(truth["raw_triples"])
        assert (synth_dir / "manifest_synth.json").exists()

    def test_label_share(self, synth_dir):
        labels = read_labels(synth_dir / "labels.csv")
        truth = json.loads((synth_dir / "ground_truth.json").read_text(encoding="utf-8"))
        n_rated = len({r.tweet_id for r in labels})
        assert n_rated == round(0.2 * len(truth["raw_triples"]))


# ============================================================================
# AVALIAÇÕES
# ============================================================================


class TestLabelSample:
    @staticmethod
    def _tweets(n: int):
        return [make_tweet(id=str(i)) for i in range(n)]

    def test_noise_free_agreement_is_perfect(self):
        tweets = self._tweets(30)
        kinds = [("chatter", "person", "positive"), ("news", "company", "neutral"), ("job advert", "company", "negative")]
        truth = {t.id: LabelTriple(*kinds[i % 3], scheme="raw") for i, t in enumerate(tweets)}
        labels = label_sample(tweets, truth, rater_noise=0.0)
        assert len(labels) == 90
        for dimension in ("tweet_type", "user_type", "sentiment"):
            report = agreement_accuracy(group_ratings(labels), dimension)
            assert set(report.per_class_accuracy.values()) == {1.0}
        consensus = consensus_triples(labels, scheme="raw")
        assert consensus["0"] == {"tweet_type": "chatter", "user_type": "person", "sentiment": "positive"}

    def test_empty_tweet_list(self):
        assert label_sample([], {}) == []

    def test_missing_true_label(self):
        with pytest.raises(InputError, match="no true label"):
            label_sample(self._tweets(1), {})

    def test_noise_out_of_range(self):
        with pytest.raises(InputError, match="rater_noise"):
            label_sample([], {}, rater_noise=1.0)

    def test_expected_hit_rate_closed_form(self):
        assert expected_hit_rate(0.0, 2) == 1.0
        assert expected_hit_rate(1 / 3, 2) == pytest.approx(7 / 9)

    def test_two_class_hit_rate_matches_expectation(self):
        tweets = self._tweets(3000)
        truth = {t.id: LabelTriple("chatter", "person" if i % 2 else "company", "positive", scheme="raw") for i, t in enumerate(tweets)}
        labels = label_sample(
            tweets, truth, rater_noise=1 / 3, seed=11, classes={"user_type": ("person", "company")}
        )
        report = agreement_accuracy(group_ratings(labels), "user_type")
        assert report.overall_accuracy == pytest.approx(expected_hit_rate(1 / 3, 2), abs=0.03)


class TestClassifierConsistency:
    @pytest.fixture(scope="class")
    def rated(self, lexicon):
        cfg = SynthConfig(seed=21, label_share=1.0, rater_noise=0.0)
        tweets, _, truth = generate_dataset(cfg, lexicon)
        return tweets, generate_labels(tweets, truth, cfg)

    @pytest.mark.parametrize("dimension", ["tweet_type", "user_type", "sentiment"])
    def test_trees_learn_generator_rules(self, rated, lexicon, dimension):
        tweets, labels = rated
        examples, languages = build_training_set(tweets, labels, dimension, lexicon)
        assert len(examples) == len({r.tweet_id for r in labels})
        _, report = train_tree(examples, dimension, languages=languages)
        assert report.accuracy_overall >= 0.99

    @pytest.mark.parametrize("dimension", ["tweet_type", "user_type", "sentiment"])
    def test_noise_free_ratings_agree_fully(self, rated, dimension):
        _, labels = rated
        for scheme in ("raw", "revised"):
            assert agreement_accuracy(group_ratings(labels), dimension, scheme).overall_accuracy == 1.0


# ============================================================================
# ESTRUTURA CAUSAL
# ============================================================================


class TestInjectedStructure:
    @pytest.mark.slow
    def test_no_effect_rarely_flags_correlation(self, lexicon):
        clean = 0
        for seed in range(100):
            tweets, sales = _source_and_sales(_source_only(seed, coefficient=0.0), lexicon)
            (row,) = correlation_table({SOURCE: tweets}, sales).rows
            clean += not row.flags
        assert clean >= 90

    @pytest.mark.slow
    def test_effect_flags_lags_three_and_four(self, lexicon):
        recovered = 0
        for seed in range(100):
            tweets, sales = _source_and_sales(_source_only(seed), lexicon)
            (row,) = correlation_table({SOURCE: tweets}, sales).rows
            flags = set(row.flags)
            recovered += {3, 4} <= flags and not any(lag <= 0 for lag in flags)
        assert recovered >= 90

    @pytest.mark.slow
    def test_granger_first_significant_at_shortest_lag(self, lexicon):
        first_at_three = 0
        for seed in range(25):
            tweets, sales = _source_and_sales(_source_only(seed), lexicon)
            results = granger_sweep(tweets, sales, range(1, 9), difference_first=False)
            significant = [r.lags for r in results if r.significant()]
            first_at_three += bool(significant) and significant[0] == 3
        assert first_at_three >= 15

    @pytest.mark.slow
    def test_granger_size_without_effect(self, lexicon):
        rejections = 0
        for seed in range(200):
            tweets, sales = _source_and_sales(_source_only(500 + seed, coefficient=0.0), lexicon)
            rejections += granger_test(tweets, sales, 2).significant()
        assert 3 <= rejections <= 22
