"""
Classificação de Tweets independente de idioma.

Entrada: TweetRecord + avaliações manuais (LabelRecord)
Saída: TweetFeatures, AgreementReport, DecisionTree + TrainReport, séries por classe

Responsabilidades:
  - Extração das 12 features independentes de idioma
  - Consenso (2 de 3) e acurácia hit/miss da classificação manual
  - Agregação do esquema bruto para o revisado
  - Árvore de decisão (Gini) por dimensão, com divisão 80/20
  - Contagens semanais por filtro de classe

Não faz: classificação de texto (tokens, léxicos de sentimento, embeddings)
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter, OrderedDict
from dataclasses import astuple, dataclass, fields
from datetime import date
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from sklearn.model_selection import train_test_split

from signallab.errors import InputError
from signallab.ml.pipeline.modules.ingest import LabelRecord, TweetRecord, WeeklySeries, aggregate_weekly
from signallab.ml.pipeline.modules.schemes import (
    DIMENSIONS,
    RAW_CLASSES,
    REVISED_CLASSES,
    REVISION_MAP,
    SCHEMES,
    check_dimension,
    normalize_class_name,
)

logger = logging.getLogger(__name__)

DEFAULT_EMOTICONS = frozenset({":)", ":-)", ":(", ":-(", ":D", ";)", ";-)", ":P", ":p", "=)", "=("})

# Regras descobertas nas árvores (usadas como oráculo e pelo gerador sintético)
ADVERT_MIN_STATUSES = 10000
JOB_ADVERT_MAX_FRIENDS = 250

HYPERLINK_RE = re.compile(r"https?://")
HASHTAG_RE = re.compile(r"#(?=[^\W_])")
MENTION_RE = re.compile(r"@(?=\w)")
LETTER_RUN_RE = re.compile(r"[^\W\d_]+")

# ============================================================================
# FEATURES
# ============================================================================


@dataclass(frozen=True)
class TweetFeatures:
    """As 12 features, nesta ordem fixa (índice usado pela árvore)."""

    retweet_count: int
    is_retweet: bool
    n_hyperlinks: int
    n_hashtags: int
    n_mentions: int
    has_emoticon: bool
    n_question_marks: int
    n_exclamation_marks: int
    followers: int
    friends: int
    statuses_count: int
    username_has_first_name: bool

    def as_vector(self) -> np.ndarray:
        return np.array([float(v) for v in astuple(self)], dtype=float)


FEATURE_NAMES: Tuple[str, ...] = tuple(f.name for f in fields(TweetFeatures))
N_FEATURES = len(FEATURE_NAMES)


def load_lexicon(path: Union[str, Path]) -> frozenset:
    """Um nome por linha; '#' inicia comentário."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: lexicon file not found")
    names = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        name = line.split("#", 1)[0].strip().casefold()
        if name:
            names.add(name)
    if not names:
        raise InputError(f"{path}: lexicon is empty")
    logger.info(f"[CLASSIFY] Léxico carregado: {len(names)} nomes de {path}")
    return frozenset(names)


def has_first_name(names: Iterable[str], lexicon: frozenset) -> bool:
    """Alguma sequência maximal de letras (sem caixa) está no léxico."""
    return any(run.casefold() in lexicon for name in names for run in LETTER_RUN_RE.findall(name or ""))


def extract_features(t: TweetRecord, name_lexicon: frozenset, emoticon_set: frozenset = DEFAULT_EMOTICONS) -> TweetFeatures:
    if not name_lexicon:
        raise InputError("first-name lexicon must not be empty")
    if not emoticon_set:
        raise InputError("emoticon set must not be empty")

    text = t.text
    return TweetFeatures(
        retweet_count=t.retweet_count,
        is_retweet=t.is_retweet,
        n_hyperlinks=len(HYPERLINK_RE.findall(text)),
        n_hashtags=len(HASHTAG_RE.findall(text)),
        n_mentions=len(MENTION_RE.findall(text)),
        has_emoticon=any(e in text for e in emoticon_set),
        n_question_marks=text.count("?"),
        n_exclamation_marks=text.count("!"),
        followers=t.followers,
        friends=t.friends,
        statuses_count=t.statuses_count,
        username_has_first_name=has_first_name((t.user_screen_name, t.user_name), name_lexicon),
    )


# ============================================================================
# RÓTULOS
# ============================================================================


@dataclass(frozen=True)
class LabelTriple:
    tweet_type: str
    user_type: str
    sentiment: str
    scheme: str = "revised"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InputError(f"unknown label scheme {self.scheme!r}")
        vocabulary = SCHEMES[self.scheme]
        for dimension in DIMENSIONS:
            value = normalize_class_name(getattr(self, dimension))
            if value not in vocabulary[dimension]:
                raise InputError(f"unknown {self.scheme} {dimension} class {getattr(self, dimension)!r}")
            object.__setattr__(self, dimension, value)

    def get(self, dimension: str) -> str:
        return getattr(self, check_dimension(dimension))

    def key(self) -> str:
        return f"{self.tweet_type}/{self.user_type}/{self.sentiment}"

    @classmethod
    def from_key(cls, key: str, scheme: str = "revised") -> "LabelTriple":
        parts = key.split("/")
        if len(parts) != 3:
            raise InputError(f"label key must be tweet_type/user_type/sentiment, got {key!r}")
        return cls(*parts, scheme=scheme)

    @classmethod
    def from_record(cls, record: LabelRecord) -> "LabelTriple":
        return cls(record.tweet_type, record.user_type, record.sentiment, scheme="raw")


def revise_class(dimension: str, value: str) -> str:
    """Classe bruta -> revisada; classes já revisadas ficam iguais."""
    name = normalize_class_name(value)
    if name in REVISED_CLASSES[check_dimension(dimension)] and name not in REVISION_MAP[dimension]:
        return name
    try:
        return REVISION_MAP[dimension][name]
    except KeyError:
        raise InputError(f"unknown raw {dimension} class {value!r}")


def aggregate_classes(raw: LabelTriple) -> LabelTriple:
    """Esquema bruto -> revisado; idempotente em entradas revisadas."""
    if raw.scheme == "revised":
        return raw
    return LabelTriple(
        tweet_type=revise_class("tweet_type", raw.tweet_type),
        user_type=revise_class("user_type", raw.user_type),
        sentiment=revise_class("sentiment", raw.sentiment),
        scheme="revised",
    )


def _rating_class(record: LabelRecord, dimension: str, scheme: str) -> str:
    value = getattr(record, dimension)
    return value if scheme == "raw" else revise_class(dimension, value)


def group_ratings(labels: Sequence[LabelRecord]) -> "OrderedDict[str, List[LabelRecord]]":
    groups: "OrderedDict[str, List[LabelRecord]]" = OrderedDict()
    for record in labels:
        groups.setdefault(record.tweet_id, []).append(record)
    return groups


def _check_ratings(ratings: Sequence[LabelRecord]) -> None:
    if len(ratings) != 3:
        tweet = ratings[0].tweet_id if ratings else "?"
        raise InputError(f"tweet {tweet}: expected exactly 3 ratings, got {len(ratings)}")
    if len({r.tweet_id for r in ratings}) != 1:
        raise InputError("ratings belong to different tweets")


def consensus_label(ratings: Sequence[LabelRecord], dimension: str, scheme: str = "raw") -> Optional[str]:
    """Classe escolhida por >= 2 dos 3 avaliadores, senão None."""
    check_dimension(dimension)
    _check_ratings(ratings)
    votes = Counter(_rating_class(r, dimension, scheme) for r in ratings)
    cls, count = votes.most_common(1)[0]
    return cls if count >= 2 else None


class AgreementReport(BaseModel):
    dimension: str
    scheme: str
    per_class_accuracy: Dict[str, float]
    per_class_ratings: Dict[str, int]
    overall_accuracy: float
    n_ratings: int


def agreement_accuracy(
    groups: Mapping[str, Sequence[LabelRecord]],
    dimension: str,
    scheme: str = "raw",
) -> AgreementReport:
    """
    Acurácia hit/miss: uma avaliação é 'hit' se pelo menos um dos outros dois
    avaliadores do mesmo Tweet escolheu a mesma classe.
    """
    check_dimension(dimension)
    hits: Counter = Counter()
    totals: Counter = Counter()

    for ratings in groups.values():
        _check_ratings(ratings)
        classes = [_rating_class(r, dimension, scheme) for r in ratings]
        for i, cls in enumerate(classes):
            others = classes[:i] + classes[i + 1 :]
            totals[cls] += 1
            hits[cls] += int(cls in others)

    n_ratings = sum(totals.values())
    order = [c for c in SCHEMES[scheme][dimension] if c in totals]
    report = AgreementReport(
        dimension=dimension,
        scheme=scheme,
        per_class_accuracy={c: hits[c] / totals[c] for c in order},
        per_class_ratings={c: totals[c] for c in order},
        overall_accuracy=(sum(hits.values()) / n_ratings) if n_ratings else 0.0,
        n_ratings=n_ratings,
    )
    logger.info(f"[CLASSIFY] Concordância {dimension} ({scheme}): {report.overall_accuracy:.1%} em {n_ratings} avaliações")
    return report


def consensus_triples(labels: Sequence[LabelRecord], scheme: str = "revised") -> Dict[str, Dict[str, Optional[str]]]:
    """Consenso por Tweet, cada dimensão independente."""
    result: Dict[str, Dict[str, Optional[str]]] = {}
    for tweet_id, ratings in group_ratings(labels).items():
        result[tweet_id] = {d: consensus_label(ratings, d, scheme) for d in DIMENSIONS}
    return result


# ============================================================================
# REGRAS DESCOBERTAS
# ============================================================================


def rule_classify(f: TweetFeatures) -> LabelTriple:
    """
    Regras lidas nas árvores: primeiro nome -> pessoa; muitos Tweets do
    usuário -> anúncio (vaga quando há poucos amigos); hyperlink sem anúncio
    -> outro; exclamação -> positivo.
    """
    user_type = "person" if f.username_has_first_name else "organization"
    if f.statuses_count >= ADVERT_MIN_STATUSES:
        tweet_type = "job_advert" if f.friends < JOB_ADVERT_MAX_FRIENDS else "product_advert"
    elif f.n_hyperlinks > 0:
        tweet_type = "other"
    else:
        tweet_type = "personal"
    sentiment = "positive" if f.n_exclamation_marks > 0 else "not_positive"
    return LabelTriple(tweet_type, user_type, sentiment)


# ============================================================================
# ÁRVORE DE DECISÃO
# ============================================================================


class TreeParams(BaseModel):
    max_depth: int = Field(default=6, ge=1)
    min_leaf: int = Field(default=5, ge=1)
    split_seed: int = 0


class TrainReport(BaseModel):
    target: str
    accuracy_overall: float
    accuracy_per_class: Dict[str, float]
    accuracy_per_language: Dict[str, float] = {}
    split_seed: int
    n_train: int
    n_test: int


@dataclass
class DecisionTree:
    """
    Árvore binária em lista plana (raiz = nó 0).

    Nó interno: {feature, threshold, left, right} (left: <=, right: >)
    Folha: {class, histogram}
    """

    target: str
    nodes: List[dict]

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.nodes:
            raise InputError("decision tree has no nodes")
        n = len(self.nodes)
        for i, node in enumerate(self.nodes):
            if "class" in node:
                if not node.get("histogram"):
                    raise InputError(f"leaf {i} has an empty histogram")
                continue
            feature = node.get("feature")
            if not isinstance(feature, int) or not 0 <= feature < N_FEATURES:
                raise InputError(f"node {i}: feature index {feature!r} outside [0, {N_FEATURES})")
            for side in ("left", "right"):
                child = node.get(side)
                if not isinstance(child, int) or not 0 < child < n or child == i:
                    raise InputError(f"node {i}: invalid {side} child {child!r}")

    @property
    def depth(self) -> int:
        def _depth(i: int) -> int:
            node = self.nodes[i]
            return 0 if "class" in node else 1 + max(_depth(node["left"]), _depth(node["right"]))

        return _depth(0)

    def to_dict(self) -> dict:
        return {"target": self.target, "nodes": self.nodes}

    @classmethod
    def from_dict(cls, data: Mapping) -> "DecisionTree":
        try:
            nodes = []
            for node in data["nodes"]:
                if "class" in node:
                    nodes.append({"class": str(node["class"]), "histogram": {str(k): int(v) for k, v in node["histogram"].items()}})
                else:
                    nodes.append({
                        "feature": int(node["feature"]),
                        "threshold": float(node["threshold"]),
                        "left": int(node["left"]),
                        "right": int(node["right"]),
                    })
            return cls(target=str(data["target"]), nodes=nodes)
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise InputError(f"malformed decision tree: {e}")


def tree_to_json(tree: DecisionTree) -> str:
    return json.dumps(tree.to_dict(), indent=2)


def tree_from_json(text: str) -> DecisionTree:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed decision tree JSON: {e.msg}")
    return DecisionTree.from_dict(data)


def _features_matrix(features: Sequence[TweetFeatures]) -> np.ndarray:
    if not features:
        return np.empty((0, N_FEATURES))
    return np.vstack([f.as_vector() for f in features])


def _majority(histogram: Mapping[str, int]) -> str:
    # empate -> menor nome de classe
    return min(histogram, key=lambda c: (-histogram[c], c))


# diferença de impureza abaixo disto conta como empate
_IMPURITY_TOL = 1e-12


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int) -> Optional[Tuple[int, float, float]]:
    """
    Busca exaustiva (feature, limiar) com menor impureza de Gini ponderada dos filhos.

    Limiares candidatos: pontos médios entre valores distintos consecutivos, com
    os dois lados >= min_leaf. Empate: menor índice de feature, depois menor limiar.
    """
    n = y.size
    one_hot = np.zeros((n, n_classes))
    one_hot[np.arange(n), y] = 1.0
    totals = one_hot.sum(axis=0)
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    size_ok = (n_left >= min_leaf) & (n_right >= min_leaf)

    best: Optional[Tuple[int, float, float]] = None
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind="mergesort")
        values = X[order, feature]
        valid = size_ok & (values[:-1] != values[1:])
        if not valid.any():
            continue
        left = np.cumsum(one_hot[order], axis=0)[:-1]
        right = totals - left
        impurity = (
            n_left - (left**2).sum(axis=1) / n_left + n_right - (right**2).sum(axis=1) / n_right
        ) / n
        positions = np.flatnonzero(valid)
        candidates = impurity[positions]
        # primeira posição (menor limiar) entre as empatadas no mínimo
        pos = int(positions[np.flatnonzero(candidates <= candidates.min() + _IMPURITY_TOL)[0]])
        if best is not None and impurity[pos] >= best[2] - _IMPURITY_TOL:
            continue
        low, high = float(values[pos]), float(values[pos + 1])
        threshold = low + (high - low) / 2.0
        if not low <= threshold < high:
            threshold = low
        best = (feature, threshold, float(impurity[pos]))
    return best


def _grow(X: np.ndarray, y: np.ndarray, classes: Sequence[str], params: TreeParams, depth: int, nodes: List[dict]) -> int:
    """Acrescenta a subárvore em pré-ordem e devolve o índice da sua raiz."""
    index = len(nodes)
    counts = np.bincount(y, minlength=len(classes))
    histogram = {classes[c]: int(counts[c]) for c in range(len(classes)) if counts[c]}
    nodes.append({"class": _majority(histogram), "histogram": histogram})

    n = y.size
    impurity = 1.0 - float(((counts / n) ** 2).sum())
    if depth >= params.max_depth or impurity <= _IMPURITY_TOL or n < 2 * params.min_leaf:
        return index
    split = _best_split(X, y, len(classes), params.min_leaf)
    if split is None or impurity - split[2] <= _IMPURITY_TOL:
        return index

    feature, threshold, _ = split
    go_left = X[:, feature] <= threshold
    node = {"feature": feature, "threshold": threshold, "left": 0, "right": 0}
    nodes[index] = node
    node["left"] = _grow(X[go_left], y[go_left], classes, params, depth + 1, nodes)
    node["right"] = _grow(X[~go_left], y[~go_left], classes, params, depth + 1, nodes)
    return index


def fit_tree(X: np.ndarray, y: Sequence[str], target: str, params: Optional[TreeParams] = None) -> DecisionTree:
    """CART (Gini) sobre todos os exemplos dados, em float64."""
    params = params or TreeParams()
    classes, y_idx = np.unique(np.asarray(y, dtype=str), return_inverse=True)
    nodes: List[dict] = []
    _grow(np.asarray(X, dtype=float), y_idx, [str(c) for c in classes], params, 0, nodes)
    return DecisionTree(target=target, nodes=nodes)


def train_tree(
    examples: Sequence[Tuple[TweetFeatures, str]],
    target: str,
    params: Optional[TreeParams] = None,
    languages: Optional[Sequence[str]] = None,
) -> Tuple[DecisionTree, TrainReport]:
    """
    CART com impureza de Gini, divisão 80/20 embaralhada pela semente.

    A semente só decide a divisão; com o mesmo conjunto de treino a árvore é
    sempre a mesma. O TrainReport é calculado no conjunto de teste (20%).
    """
    params = params or TreeParams()
    check_dimension(target)
    if not examples:
        raise InputError("empty example list")
    if len(examples) < 2 * params.min_leaf:
        raise InputError(f"need at least {2 * params.min_leaf} examples for min_leaf={params.min_leaf}, got {len(examples)}")
    if languages is not None and len(languages) != len(examples):
        raise InputError("languages must align with examples")

    X = _features_matrix([f for f, _ in examples])
    y = np.array([str(c) for _, c in examples], dtype=object)
    idx_train, idx_test = train_test_split(
        np.arange(len(examples)), test_size=0.2, random_state=params.split_seed, shuffle=True
    )

    tree = fit_tree(X[idx_train], y[idx_train], target, params)

    predicted = np.array([predict(tree, row)[0] for row in X[idx_test]], dtype=object)
    truth = y[idx_test]
    correct = predicted == truth

    per_class = {c: float(correct[truth == c].mean()) for c in sorted(set(truth.tolist()))}
    per_language: Dict[str, float] = {}
    if languages is not None:
        test_langs = np.array([languages[i] for i in idx_test], dtype=object)
        per_language = {lang: float(correct[test_langs == lang].mean()) for lang in sorted(set(test_langs.tolist()))}

    report = TrainReport(
        target=target,
        accuracy_overall=float(correct.mean()) if correct.size else 0.0,
        accuracy_per_class=per_class,
        accuracy_per_language=per_language,
        split_seed=params.split_seed,
        n_train=int(idx_train.size),
        n_test=int(idx_test.size),
    )
    logger.info(
        f"[TRAIN] Árvore '{target}': profundidade {tree.depth}, {len(tree.nodes)} nós, "
        f"acurácia teste {report.accuracy_overall:.1%} ({report.n_train}/{report.n_test})"
    )
    return tree, report


def predict(tree: DecisionTree, f: Union[TweetFeatures, Sequence[float], np.ndarray]) -> Tuple[str, float]:
    """Percorre os limiares; confiança = frequência da classe na folha."""
    vector = f.as_vector() if isinstance(f, TweetFeatures) else np.asarray(f, dtype=float)
    node = tree.nodes[0]
    while "class" not in node:
        node = tree.nodes[node["left"] if vector[node["feature"]] <= node["threshold"] else node["right"]]
    histogram = node["histogram"]
    return node["class"], histogram[node["class"]] / sum(histogram.values())


def export_rules(tree: DecisionTree) -> List[str]:
    """Regras raiz-folha legíveis: 'a <= x and b > y => classe (confiança)'."""
    rules: List[str] = []

    def _walk(i: int, conditions: List[str]) -> None:
        node = tree.nodes[i]
        if "class" in node:
            histogram = node["histogram"]
            confidence = histogram[node["class"]] / sum(histogram.values())
            body = " and ".join(conditions) if conditions else "always"
            rules.append(f"{body} => {node['class']} ({confidence:.2f}, n={sum(histogram.values())})")
            return
        name = FEATURE_NAMES[node["feature"]]
        _walk(node["left"], conditions + [f"{name} <= {node['threshold']:g}"])
        _walk(node["right"], conditions + [f"{name} > {node['threshold']:g}"])

    _walk(0, [])
    return rules


def build_training_set(
    tweets: Sequence[TweetRecord],
    labels: Sequence[LabelRecord],
    dimension: str,
    name_lexicon: frozenset,
    emoticon_set: frozenset = DEFAULT_EMOTICONS,
    scheme: str = "revised",
) -> Tuple[List[Tuple[TweetFeatures, str]], List[str]]:
    """Exemplos (features, classe de consenso) + idioma de cada exemplo."""
    check_dimension(dimension)
    by_id = {t.id: t for t in tweets}
    examples: List[Tuple[TweetFeatures, str]] = []
    languages: List[str] = []
    skipped_no_consensus = skipped_unknown = 0

    for tweet_id, ratings in group_ratings(labels).items():
        tweet = by_id.get(tweet_id)
        if tweet is None:
            skipped_unknown += 1
            continue
        cls = consensus_label(ratings, dimension, scheme)
        if cls is None:
            skipped_no_consensus += 1
            continue
        examples.append((extract_features(tweet, name_lexicon, emoticon_set), cls))
        languages.append(tweet.language)

    if skipped_unknown:
        logger.warning(f"[CLASSIFY] {skipped_unknown} Tweets rotulados não encontrados no arquivo de Tweets")
    logger.info(f"[CLASSIFY] {dimension}: {len(examples)} exemplos, {skipped_no_consensus} sem consenso")
    return examples, languages


# ============================================================================
# CONTAGENS POR CLASSE
# ============================================================================


@dataclass(frozen=True)
class TripleFilter:
    """
    Filtro sobre o trio revisado, no formato das linhas da tabela de correlação:
    usuário (all/per/org), tipo (all/ad/pc/job/other), sentimento (all/pos/notpos).
    """

    user: str = "all"
    tweet: str = "all"
    sentiment: str = "all"

    USER = {"all": None, "per": "person", "org": "organization"}
    TWEET = {"all": None, "ad": "product_advert", "pc": "personal", "job": "job_advert", "other": "other"}
    SENTIMENT = {"all": None, "pos": "positive", "notpos": "not_positive"}

    def __post_init__(self):
        if self.user not in self.USER or self.tweet not in self.TWEET or self.sentiment not in self.SENTIMENT:
            raise InputError(f"invalid triple filter {self.description!r}")

    @property
    def description(self) -> str:
        return f"{self.user}/{self.tweet}/{self.sentiment}"

    @classmethod
    def parse(cls, description: str) -> "TripleFilter":
        parts = description.split("/")
        if len(parts) != 3:
            raise InputError(f"triple filter must be user/tweet/sentiment, got {description!r}")
        return cls(*parts)

    def __call__(self, triple: LabelTriple) -> bool:
        wanted = (self.USER[self.user], self.TWEET[self.tweet], self.SENTIMENT[self.sentiment])
        actual = (triple.user_type, triple.tweet_type, triple.sentiment)
        return all(w is None or w == a for w, a in zip(wanted, actual))


# Linhas da tabela de correlação; vagas de emprego ficam de fora
CORRELATION_FILTERS: Tuple[TripleFilter, ...] = tuple(
    TripleFilter(user, tweet, sentiment)
    for user in ("all", "per", "org")
    for tweet, sentiment in (("all", "all"), ("all", "pos"), ("ad", "all"), ("pc", "pos"))
)
POSITIVE_PERSONAL = TripleFilter("per", "all", "pos")
ALL_TWEETS = TripleFilter()


def classified_weekly_counts(
    tweets: Sequence[TweetRecord],
    triples: Mapping[str, LabelTriple],
    filter: Callable[[LabelTriple], bool],
    start: date,
    end: date,
    label: Optional[str] = None,
) -> WeeklySeries:
    """Contagem semanal dos Tweets cujo trio previsto satisfaz o filtro."""
    missing = [t.id for t in tweets if t.id not in triples]
    if missing:
        raise InputError(f"{len(missing)} tweets have no predicted triple (first: {missing[0]})")
    selected = [t.created_at for t in tweets if filter(triples[t.id])]
    name = label or getattr(filter, "description", "filtered")
    return aggregate_weekly(selected, start, end, label=name)
