"""
Testes da classificação: features, consenso, concordância, agregação de classes e árvore de decisão.
"""

from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest

from conftest import START, make_tweet
from signallab.errors import InputError
from signallab.ml.pipeline.modules.classify import (
    ALL_TWEETS,
    CORRELATION_FILTERS,
    FEATURE_NAMES,
    POSITIVE_PERSONAL,
    DecisionTree,
    LabelTriple,
    TreeParams,
    TripleFilter,
    TweetFeatures,
    agreement_accuracy,
    aggregate_classes,
    build_training_set,
    classified_weekly_counts,
    consensus_label,
    consensus_triples,
    export_rules,
    extract_features,
    fit_tree,
    group_ratings,
    predict,
    revise_class,
    rule_classify,
    train_tree,
    tree_from_json,
    tree_to_json,
)
from signallab.ml.pipeline.modules.ingest import LabelRecord, aggregate_weekly

FOLLOWERS = FEATURE_NAMES.index("followers")
N_HASHTAGS = FEATURE_NAMES.index("n_hashtags")


def _ratings(tweet_id: str, tweet_types, user_type="person", sentiment="positive"):
    return [
        LabelRecord(tweet_id=tweet_id, rater_id=f"r{i}", tweet_type=t, user_type=user_type, sentiment=sentiment)
        for i, t in enumerate(tweet_types)
    ]


def _features(**overrides) -> TweetFeatures:
    fields = dict(
        retweet_count=0,
        is_retweet=False,
        n_hyperlinks=0,
        n_hashtags=0,
        n_mentions=0,
        has_emoticon=False,
        n_question_marks=0,
        n_exclamation_marks=0,
        followers=100,
        friends=100,
        statuses_count=500,
        username_has_first_name=False,
    )
    fields.update(overrides)
    return TweetFeatures(**fields)


def _rule_corpus(n: int, seed: int):
    """Features discretas geradas ao acaso, rotuladas pelas regras descobertas."""
    rng = np.random.Generator(np.random.PCG64(seed))
    corpus = []
    for _ in range(n):
        f = _features(
            retweet_count=int(rng.integers(0, 5)),
            n_hyperlinks=int(rng.integers(0, 2)),
            n_hashtags=int(rng.integers(0, 3)),
            n_exclamation_marks=int(rng.integers(0, 2)),
            followers=int(rng.choice([40, 300, 2500])),
            friends=int(rng.choice([100, 400])),
            statuses_count=int(rng.choice([500, 20000])),
            username_has_first_name=bool(rng.integers(0, 2)),
        )
        corpus.append((f, rule_classify(f)))
    return corpus


def _hand_tree() -> DecisionTree:
    return DecisionTree(
        target="user_type",
        nodes=[
            {"feature": FOLLOWERS, "threshold": 5.0, "left": 1, "right": 2},
            {"class": "A", "histogram": {"A": 3, "B": 1}},
            {"class": "B", "histogram": {"B": 2}},
        ],
    )


# ============================================================================
# FEATURES
# ============================================================================


class TestExtractFeatures:
    def test_text_counts(self, lexicon):
        t = make_tweet(text="Great prints! http://t.co/x #happy @acme :)")
        f = extract_features(t, lexicon)
        assert (f.n_exclamation_marks, f.n_hyperlinks, f.n_hashtags, f.n_mentions) == (1, 1, 1, 1)
        assert f.has_emoticon
        assert f.n_question_marks == 0

    def test_first_name_in_screen_name(self, lexicon):
        f = extract_features(make_tweet(user_screen_name="anna_k93"), lexicon)
        assert f.username_has_first_name

    def test_first_name_in_display_name(self):
        f = extract_features(make_tweet(user_name="Jan de Vries"), frozenset({"jan"}))
        assert f.username_has_first_name

    def test_empty_text(self, lexicon):
        f = extract_features(make_tweet(text="", user_screen_name="x9"), lexicon)
        assert f.n_hyperlinks == f.n_hashtags == f.n_mentions == 0
        assert f.n_question_marks == f.n_exclamation_marks == 0
        assert not f.has_emoticon
        assert not f.username_has_first_name

    def test_bare_symbols_are_not_counted(self, lexicon):
        f = extract_features(make_tweet(text="# @ http:/ ?? !!!"), lexicon)
        assert (f.n_hashtags, f.n_mentions, f.n_hyperlinks) == (0, 0, 0)
        assert (f.n_question_marks, f.n_exclamation_marks) == (2, 3)

    def test_metadata_copied(self, lexicon):
        t = make_tweet(followers=1234, friends=56, statuses_count=789, retweet_count=3, is_retweet=True)
        f = extract_features(t, lexicon)
        assert (f.followers, f.friends, f.statuses_count, f.retweet_count, f.is_retweet) == (1234, 56, 789, 3, True)

    def test_vector_order(self, lexicon):
        f = extract_features(make_tweet(followers=77), lexicon)
        assert f.as_vector().shape == (12,)
        assert f.as_vector()[FOLLOWERS] == 77.0

    def test_empty_lexicon(self):
        with pytest.raises(InputError, match="lexicon"):
            extract_features(make_tweet(), frozenset())

    def test_empty_emoticon_set(self, lexicon):
        with pytest.raises(InputError, match="emoticon"):
            extract_features(make_tweet(), lexicon, frozenset())


# ============================================================================
# CONSENSO E CONCORDÂNCIA
# ============================================================================


class TestConsensus:
    def test_majority(self):
        assert consensus_label(_ratings("1", ["chatter", "chatter", "news"]), "tweet_type") == "chatter"

    def test_no_majority(self):
        assert consensus_label(_ratings("1", ["chatter", "news", "advice"]), "tweet_type") is None

    def test_unanimity(self):
        assert consensus_label(_ratings("1", ["news"] * 3), "tweet_type") == "news"

    def test_revised_scheme_merges_classes(self):
        ratings = _ratings("1", ["chatter", "advice", "news"])
        assert consensus_label(ratings, "tweet_type", scheme="revised") == "personal"

    def test_wrong_number_of_ratings(self):
        with pytest.raises(InputError, match="exactly 3 ratings"):
            consensus_label(_ratings("1", ["news", "news"]), "tweet_type")

    def test_dimensions_are_independent(self):
        labels = _ratings("1", ["chatter", "news", "advice"])
        (triple,) = consensus_triples(labels, scheme="raw").values()
        assert triple == {"tweet_type": None, "user_type": "person", "sentiment": "positive"}


class TestAgreement:
    def test_two_of_three(self):
        report = agreement_accuracy(group_ratings(_ratings("1", ["chatter", "chatter", "news"])), "tweet_type")
        assert report.per_class_accuracy == {"chatter": 1.0, "news": 0.0}
        assert report.overall_accuracy == pytest.approx(2 / 3)
        assert report.n_ratings == 3

    def test_unanimous(self):
        labels = _ratings("1", ["news"] * 3) + _ratings("2", ["advice"] * 3)
        report = agreement_accuracy(group_ratings(labels), "tweet_type")
        assert set(report.per_class_accuracy.values()) == {1.0}

    def test_total_disagreement(self):
        labels = _ratings("1", ["news", "advice", "chatter"]) + _ratings("2", ["other", "job_advert", "news"])
        assert agreement_accuracy(group_ratings(labels), "tweet_type").overall_accuracy == 0.0

    def test_overall_is_ratings_weighted(self):
        labels = _ratings("1", ["chatter", "chatter", "news"]) + _ratings("2", ["news", "news", "news"])
        report = agreement_accuracy(group_ratings(labels), "tweet_type")
        weighted = sum(report.per_class_accuracy[c] * report.per_class_ratings[c] for c in report.per_class_ratings)
        assert report.overall_accuracy == pytest.approx(weighted / report.n_ratings)

    def test_revised_scheme(self):
        labels = _ratings("1", ["chatter", "advice", "news"])
        report = agreement_accuracy(group_ratings(labels), "tweet_type", scheme="revised")
        assert report.per_class_accuracy == {"personal": 1.0, "other": 0.0}

    def test_unknown_dimension(self):
        with pytest.raises(InputError, match="unknown label dimension"):
            agreement_accuracy({}, "topic")


# ============================================================================
# AGREGAÇÃO DE CLASSES
# ============================================================================


class TestAggregateClasses:
    @pytest.mark.parametrize(
        "raw,revised",
        [
            (("customer experience", "person", "positive"), ("personal", "person", "positive")),
            (("news", "other organizations", "neutral"), ("other", "organization", "not_positive")),
            (("job advert", "company", "negative"), ("job_advert", "organization", "not_positive")),
        ],
    )
    def test_mapping(self, raw, revised):
        result = aggregate_classes(LabelTriple(*raw, scheme="raw"))
        assert result == LabelTriple(*revised, scheme="revised")

    def test_idempotent_on_revised(self):
        triple = LabelTriple("personal", "organization", "not_positive")
        assert aggregate_classes(triple) == triple
        assert revise_class("tweet_type", "personal") == "personal"

    def test_unknown_raw_class(self):
        with pytest.raises(InputError, match="unknown raw tweet_type class"):
            revise_class("tweet_type", "gossip")

    def test_revised_class_rejected_in_raw_scheme(self):
        with pytest.raises(InputError):
            LabelTriple("personal", "person", "positive", scheme="raw")

    def test_key_round_trip(self):
        triple = LabelTriple("product_advert", "organization", "positive")
        assert LabelTriple.from_key(triple.key()) == triple


class TestRuleClassify:
    def test_person_with_exclamation(self):
        triple = rule_classify(_features(username_has_first_name=True, n_exclamation_marks=1))
        assert (triple.tweet_type, triple.user_type, triple.sentiment) == ("personal", "person", "positive")

    def test_heavy_poster_with_few_friends_is_job_advert(self):
        assert rule_classify(_features(statuses_count=20000, friends=100)).tweet_type == "job_advert"

    def test_heavy_poster_with_many_friends_is_product_advert(self):
        assert rule_classify(_features(statuses_count=20000, friends=400)).tweet_type == "product_advert"

    def test_hyperlink_is_other(self):
        triple = rule_classify(_features(n_hyperlinks=2))
        assert (triple.tweet_type, triple.user_type, triple.sentiment) == ("other", "organization", "not_positive")


# ============================================================================
# ÁRVORE DE DECISÃO
# ============================================================================


class TestTrainTree:
    def test_single_class(self):
        examples = [(_features(followers=i), "person") for i in range(20)]
        tree, report = train_tree(examples, "user_type")
        assert len(tree.nodes) == 1
        assert report.accuracy_overall == 1.0

    def test_separable_by_one_threshold(self, rng):
        followers = np.concatenate([rng.integers(0, 500, 100), rng.integers(1500, 3000, 100)])
        examples = [(_features(followers=int(v)), "organization" if v > 1000 else "person") for v in followers]
        tree, report = train_tree(examples, "user_type")
        assert tree.depth == 1
        assert tree.nodes[0]["feature"] == FOLLOWERS
        assert report.accuracy_overall == 1.0

    def test_split_sizes(self, rng):
        examples = [(_features(followers=int(v)), "person") for v in rng.integers(0, 100, 101)]
        _, report = train_tree(examples, "user_type")
        assert report.n_train + report.n_test == 101
        assert abs(report.n_train - 0.8 * 101) <= 1

    def test_recovers_user_rule(self):
        corpus = _rule_corpus(1000, seed=3)
        examples = [(f, triple.user_type) for f, triple in corpus]
        _, report = train_tree(examples, "user_type")
        assert report.accuracy_overall >= 0.99

    def test_recovers_tweet_type_rule(self):
        corpus = _rule_corpus(1000, seed=4)
        examples = [(f, triple.tweet_type) for f, triple in corpus]
        tree, report = train_tree(examples, "tweet_type", TreeParams(min_leaf=1, max_depth=10))
        assert report.accuracy_overall == 1.0
        for f, cls in examples:
            assert predict(tree, f)[0] == cls

    @pytest.mark.parametrize("seed", [6, 7, 8])
    def test_recovers_sentiment_rule_on_held_out(self, seed):
        examples = [(f, triple.sentiment) for f, triple in _rule_corpus(1000, seed=seed)]
        _, report = train_tree(examples, "sentiment", TreeParams(split_seed=seed))
        assert report.n_test >= 200
        assert report.accuracy_overall >= 0.99

    def test_deterministic(self):
        examples = [(f, triple.sentiment) for f, triple in _rule_corpus(300, seed=5)]
        first = train_tree(examples, "sentiment", TreeParams(split_seed=9))
        second = train_tree(examples, "sentiment", TreeParams(split_seed=9))
        assert first[0].to_dict() == second[0].to_dict()
        assert first[1] == second[1]

    def test_monotone_transform_invariance(self, rng):
        followers = rng.integers(0, 3000, 300)
        labels = ["organization" if v > 1200 or v < 200 else "person" for v in followers]
        plain = [(_features(followers=int(v)), c) for v, c in zip(followers, labels)]
        scaled = [(_features(followers=int(3 * v + 7)), c) for v, c in zip(followers, labels)]
        tree_a, _ = train_tree(plain, "user_type")
        tree_b, _ = train_tree(scaled, "user_type")
        for (fa, _), (fb, _) in zip(plain, scaled):
            assert predict(tree_a, fa)[0] == predict(tree_b, fb)[0]

    def test_per_language_accuracy(self):
        corpus = _rule_corpus(200, seed=6)
        examples = [(f, triple.user_type) for f, triple in corpus]
        languages = ["nl" if i % 2 else "fr" for i in range(len(examples))]
        _, report = train_tree(examples, "user_type", languages=languages)
        assert set(report.accuracy_per_language) == {"nl", "fr"}

    def test_empty_examples(self):
        with pytest.raises(InputError, match="empty example list"):
            train_tree([], "user_type")

    def test_too_few_examples(self):
        with pytest.raises(InputError, match="at least 10 examples"):
            train_tree([(_features(), "person")] * 9, "user_type")

    @pytest.mark.parametrize("seed", range(10))
    def test_tied_features_split_on_lowest_index(self, seed):
        # n_hashtags e followers ordenam os exemplos da mesma forma
        examples = [
            (_features(n_hashtags=v, followers=v), "person" if v <= 5 else "organization")
            for v in range(20)
            for _ in range(2)
        ]
        tree, _ = train_tree(examples, "user_type", TreeParams(split_seed=seed, min_leaf=1))
        assert tree.nodes[0]["feature"] == N_HASHTAGS
        assert tree.depth == 1

    def test_tied_thresholds_split_on_lowest(self):
        X = np.vstack([_features(retweet_count=v).as_vector() for v in range(4)])
        tree = fit_tree(X, ["A", "B", "B", "A"], "user_type", TreeParams(max_depth=1, min_leaf=1))
        assert tree.nodes[0]["feature"] == 0
        assert tree.nodes[0]["threshold"] == 0.5

    def test_zero_gain_split_is_not_taken(self):
        X = np.vstack([_features(retweet_count=v).as_vector() for v in range(4)])
        tree = fit_tree(X, ["A", "B", "B", "A"], "user_type", TreeParams(min_leaf=2))
        assert len(tree.nodes) == 1

    def test_large_counts_keep_exact_thresholds(self):
        base = 2**24
        X = np.vstack([_features(followers=base + k).as_vector() for k in range(40)])
        labels = ["person" if k < 20 else "organization" for k in range(40)]
        tree = fit_tree(X, labels, "user_type")
        assert tree.nodes[0]["threshold"] == base + 19.5
        assert predict(tree, _features(followers=base + 19))[0] == "person"
        assert predict(tree, _features(followers=base + 20))[0] == "organization"

    def test_min_leaf_respected(self):
        examples = [(f, triple.tweet_type) for f, triple in _rule_corpus(400, seed=8)]
        X = np.vstack([f.as_vector() for f, _ in examples])
        tree = fit_tree(X, [c for _, c in examples], "tweet_type", TreeParams(min_leaf=7))
        assert all(sum(n["histogram"].values()) >= 7 for n in tree.nodes if "class" in n)


class TestPredict:
    def test_single_leaf(self):
        tree = DecisionTree(target="user_type", nodes=[{"class": "A", "histogram": {"A": 10}}])
        assert predict(tree, _features()) == ("A", 1.0)

    def test_routes_left_on_threshold(self):
        assert predict(_hand_tree(), _features(followers=3)) == ("A", 0.75)
        assert predict(_hand_tree(), _features(followers=5)) == ("A", 0.75)

    def test_routes_right_above_threshold(self):
        assert predict(_hand_tree(), _features(followers=6)) == ("B", 1.0)

    def test_export_rules(self):
        assert export_rules(_hand_tree()) == [
            "followers <= 5 => A (0.75, n=4)",
            "followers > 5 => B (1.00, n=2)",
        ]


class TestTreeSerialization:
    def test_json_round_trip(self):
        examples = [(f, triple.tweet_type) for f, triple in _rule_corpus(300, seed=7)]
        tree, _ = train_tree(examples, "tweet_type")
        restored = tree_from_json(tree_to_json(tree))
        assert restored.to_dict() == tree.to_dict()

    def test_malformed_json(self):
        with pytest.raises(InputError, match="malformed decision tree JSON"):
            tree_from_json("{")

    def test_feature_out_of_range(self):
        with pytest.raises(InputError, match="feature index"):
            DecisionTree(
                target="user_type",
                nodes=[
                    {"feature": 12, "threshold": 0.5, "left": 1, "right": 2},
                    {"class": "A", "histogram": {"A": 1}},
                    {"class": "B", "histogram": {"B": 1}},
                ],
            )

    def test_empty_histogram(self):
        with pytest.raises(InputError, match="empty histogram"):
            DecisionTree(target="user_type", nodes=[{"class": "A", "histogram": {}}])


# ============================================================================
# CONJUNTO DE TREINO E CONTAGENS
# ============================================================================


class TestBuildTrainingSet:
    def test_skips_tweets_without_consensus(self, lexicon):
        tweets = [make_tweet(id="1"), make_tweet(id="2", language="fr", user_timezone="Paris")]
        labels = (
            _ratings("1", ["chatter", "chatter", "news"])
            + _ratings("2", ["chatter", "news", "job advert"])
            + _ratings("ghost", ["news"] * 3)
        )
        examples, languages = build_training_set(tweets, labels, "tweet_type", lexicon, scheme="raw")
        assert [cls for _, cls in examples] == ["chatter"]
        assert languages == ["nl"]

    def test_revised_scheme_recovers_consensus(self, lexicon):
        tweets = [make_tweet(id="2")]
        labels = _ratings("2", ["chatter", "advice", "news"])
        examples, _ = build_training_set(tweets, labels, "tweet_type", lexicon)
        assert [cls for _, cls in examples] == ["personal"]


class TestTripleFilter:
    def test_parse(self):
        assert TripleFilter.parse("per/all/pos") == POSITIVE_PERSONAL

    def test_invalid(self):
        with pytest.raises(InputError):
            TripleFilter.parse("per/all")
        with pytest.raises(InputError, match="invalid triple filter"):
            TripleFilter("bot", "all", "all")

    def test_matching(self):
        triple = LabelTriple("personal", "person", "positive")
        assert POSITIVE_PERSONAL(triple)
        assert not TripleFilter("org", "all", "all")(triple)
        assert ALL_TWEETS(triple)

    def test_correlation_rows(self):
        assert len(CORRELATION_FILTERS) == 12
        assert len({f.description for f in CORRELATION_FILTERS}) == 12
        assert all(f.tweet != "job" for f in CORRELATION_FILTERS)


class TestClassifiedWeeklyCounts:
    END = date(2012, 1, 29)

    @pytest.fixture
    def classified(self):
        tweets, triples = [], {}
        kinds = [
            LabelTriple("personal", "person", "positive"),
            LabelTriple("product_advert", "organization", "not_positive"),
            LabelTriple("other", "organization", "positive"),
        ]
        for i in range(30):
            created = datetime(2012, 1, 2, tzinfo=timezone.utc) + timedelta(hours=19 * i)
            tweet = make_tweet(id=str(i), created_at=created)
            tweets.append(tweet)
            triples[tweet.id] = kinds[i % 3]
        return tweets, triples

    def test_all_filter_equals_unfiltered(self, classified):
        tweets, triples = classified
        series = classified_weekly_counts(tweets, triples, ALL_TWEETS, START, self.END)
        expected = aggregate_weekly([t.created_at for t in tweets], START, self.END)
        assert series.values.tolist() == expected.values.tolist()
        assert series.label == "all/all/all"

    def test_no_match_is_all_zero(self, classified):
        tweets, triples = classified
        series = classified_weekly_counts(tweets, triples, TripleFilter("per", "ad", "all"), START, self.END)
        assert series.values.tolist() == [0.0] * 4

    def test_partition_sums_to_total(self, classified):
        tweets, triples = classified
        total = classified_weekly_counts(tweets, triples, ALL_TWEETS, START, self.END).values
        person = classified_weekly_counts(tweets, triples, TripleFilter("per"), START, self.END).values
        org = classified_weekly_counts(tweets, triples, TripleFilter("org"), START, self.END).values
        assert (person + org).tolist() == total.tolist()

    def test_missing_triple(self, classified):
        tweets, triples = classified
        del triples["0"]
        with pytest.raises(InputError, match="no predicted triple"):
            classified_weekly_counts(tweets, triples, ALL_TWEETS, START, self.END)
