"""
Gerador sintético de Tweets + vendas com estrutura causal conhecida.

Entrada: SynthConfig (semente, taxas por classe, efeito injetado)
Saída: TweetRecord, SalesRecord, LabelRecord + GroundTruth

Responsabilidades:
  - Contagens semanais Poisson por trio revisado (+ picos de spam)
  - Materializar Tweets cujos metadados levam as regras de classificação
    à classe pretendida
  - Vendas = base sazonal + coeficiente · Σ contagens defasadas da classe fonte + ruído
  - Avaliações manuais com ruído por avaliador

PRNG: numpy Generator sobre PCG64, um único fluxo sequencial por semente.

Não faz: texto realista, cascatas de retweets, múltiplos países
"""

from __future__ import annotations

import json
import logging
from collections import OrderedDict
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from signallab.config import DEFAULT_LEXICON_PATH
from signallab.errors import InputError
from signallab.ml.pipeline.modules.classify import ADVERT_MIN_STATUSES, JOB_ADVERT_MAX_FRIENDS, LabelTriple, load_lexicon
from signallab.ml.pipeline.modules.ingest import (
    LABEL_FIELDS,
    ONE_WEEK,
    CountrySpec,
    LabelRecord,
    SalesRecord,
    TweetRecord,
)
from signallab.ml.pipeline.modules.schemes import DIMENSIONS, RAW_CLASSES, REVISION_MAP

logger = logging.getLogger(__name__)

MIN_WEEKS = 20
MAX_EFFECT_LAG = 8

# ============================================================================
# CONFIGURAÇÃO
# ============================================================================


class EffectSpec(BaseModel):
    """Efeito da classe fonte sobre as vendas nas defasagens indicadas."""

    source: str = "personal/person/positive"
    lags: List[int] = [3, 4]
    coefficient: float = 8.0

    @field_validator("source")
    @classmethod
    def _valid_triple(cls, v: str) -> str:
        return LabelTriple.from_key(v).key()

    @field_validator("lags")
    @classmethod
    def _lag_range(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("effect needs at least one lag")
        if any(not 1 <= lag <= MAX_EFFECT_LAG for lag in v):
            raise ValueError(f"effect lags must lie in [1, {MAX_EFFECT_LAG}]")
        return sorted(set(v))


class SpamSpike(BaseModel):
    week: int = Field(..., ge=0)
    triple: str
    magnitude: int = Field(..., ge=0)

    @field_validator("triple")
    @classmethod
    def _valid_triple(cls, v: str) -> str:
        return LabelTriple.from_key(v).key()


DEFAULT_SPIKE_WEEK = 40
DEFAULT_SPIKE_TRIPLE = "product_advert/organization/not_positive"
DEFAULT_SPIKE_MAGNITUDE = 60

DEFAULT_CLASS_RATES: Dict[str, float] = {
    "personal/person/positive": 6.0,
    "personal/person/not_positive": 8.0,
    "product_advert/organization/not_positive": 10.0,
    "product_advert/organization/positive": 3.0,
    "job_advert/organization/not_positive": 4.0,
    "other/organization/not_positive": 2.0,
}


def default_spam_spikes(n_weeks: int) -> List[SpamSpike]:
    """Um pico de anúncios em min(40, 2/3 da série)."""
    week = min(DEFAULT_SPIKE_WEEK, n_weeks * 2 // 3)
    return [SpamSpike(week=week, triple=DEFAULT_SPIKE_TRIPLE, magnitude=DEFAULT_SPIKE_MAGNITUDE)]


class SynthConfig(BaseModel):
    seed: int = 0
    n_weeks: int = Field(default=91, ge=MIN_WEEKS)
    start_week: date = date(2012, 1, 2)
    base_sales: float = Field(default=100.0, gt=0)
    summer_dip: float = Field(default=0.8, gt=0)
    summer_weeks: Tuple[int, int] = (26, 34)
    december_peak: float = Field(default=1.5, gt=0)
    december_weeks: Tuple[int, int] = (48, 52)
    class_rates: Dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_CLASS_RATES))
    effect: EffectSpec = Field(default_factory=EffectSpec)
    # None = pico padrão posicionado por default_spam_spikes(n_weeks)
    spam_spikes: Optional[List[SpamSpike]] = None
    noise_sd: float = Field(default=5.0, gt=0)
    country: CountrySpec = CountrySpec(name="Netherlands", language="nl", capital="Amsterdam")
    foreign_share: float = Field(default=0.05, ge=0, lt=1)
    label_share: float = Field(default=0.2, ge=0, le=1)
    raters: int = Field(default=3, ge=1)
    rater_noise: float = Field(default=0.1, ge=0, lt=1)

    @field_validator("start_week")
    @classmethod
    def _monday(cls, v: date) -> date:
        if v.weekday() != 0:
            raise ValueError(f"start_week {v.isoformat()} is not a Monday")
        return v

    @field_validator("class_rates")
    @classmethod
    def _rates(cls, v: Dict[str, float]) -> Dict[str, float]:
        if not v:
            raise ValueError("class_rates must not be empty")
        rates: Dict[str, float] = {}
        for key, rate in v.items():
            if rate < 0:
                raise ValueError(f"rate for {key} must be >= 0")
            rates[LabelTriple.from_key(key).key()] = float(rate)
        return rates

    @model_validator(mode="after")
    def _consistent(self) -> "SynthConfig":
        if self.effect.source not in self.class_rates:
            raise ValueError(f"effect source {self.effect.source} has no class rate")
        for spike in self.spam_spikes or ():
            if spike.week >= self.n_weeks:
                raise ValueError(f"spam spike week {spike.week} outside {self.n_weeks} weeks")
        return self

    def effective_spam_spikes(self) -> List[SpamSpike]:
        return default_spam_spikes(self.n_weeks) if self.spam_spikes is None else list(self.spam_spikes)

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthConfig":
        try:
            return cls.model_validate(dict(data))
        except (ValidationError, InputError) as e:
            raise InputError(f"invalid synth config: {_first_error(e)}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SynthConfig":
        path = Path(path)
        if not path.exists():
            raise InputError(f"{path}: config file not found")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: invalid JSON ({e.msg})")
        return cls.from_dict(data)


def _first_error(e: Exception) -> str:
    if isinstance(e, ValidationError):
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first.get("loc", ()))
        return f"{loc}: {first.get('msg')}" if loc else str(first.get("msg"))
    return str(e)


class GroundTruth(BaseModel):
    """Tudo que o gerador sabe e a análise deve recuperar."""

    seed: int
    start_week: date
    n_weeks: int
    counts: Dict[str, List[int]]
    effect: EffectSpec
    noiseless_sales: List[float]
    revised_triples: Dict[str, str]
    raw_triples: Dict[str, str]
    foreign_ids: List[str] = []

    def source_counts(self) -> np.ndarray:
        return np.asarray(self.counts[self.effect.source], dtype=float)


# ============================================================================
# MATERIALIZAÇÃO
# ============================================================================

# Handles de organização: nenhuma sequência de letras é um primeiro nome
ORGANIZATION_HANDLES: Tuple[str, ...] = (
    "fotodienst",
    "printcenter",
    "drukwerkplaats",
    "beeldbank",
    "kantoorshop",
    "afdrukservice",
    "studiolicht",
    "vacaturebank",
    "werkplein",
    "nieuwsbron",
)

PERSONAL_TEXTS: Tuple[str, ...] = (
    "net mijn foto's opgehaald",
    "wie weet een goede plek voor afdrukken?",
    "mooie dag gehad in het park",
    "eindelijk het album besteld",
    "vakantiefoto's bekijken met @{friend}",
    "nieuwe camera getest #fotografie",
    "fotoboek voor oma gemaakt",
)
OTHER_TEXTS: Tuple[str, ...] = (
    "nieuws over fotografie {link}",
    "nieuwe regels voor drones {link}",
    "weekoverzicht {link} #nieuws",
)
PRODUCT_TEXTS: Tuple[str, ...] = (
    "nu 20% korting op fotoboeken {link} #actie",
    "gratis verzending op canvas prints {link}",
    "nieuw: kalenders met eigen foto's {link}",
)
JOB_TEXTS: Tuple[str, ...] = (
    "vacature: medewerker klantenservice {link} #vacature",
    "wij zoeken een grafisch ontwerper {link}",
)
FOREIGN_LOCATIONS: Tuple[Tuple[str, str], ...] = (("en", "London"), ("de", "Berlin"), ("nl", "London"))

SECONDS_PER_WEEK = 7 * 24 * 3600


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _season_factor(cfg: SynthConfig, week_start: date) -> float:
    iso_week = week_start.isocalendar()[1]
    if cfg.summer_weeks[0] <= iso_week <= cfg.summer_weeks[1]:
        return cfg.summer_dip
    if cfg.december_weeks[0] <= iso_week <= cfg.december_weeks[1]:
        return cfg.december_peak
    return 1.0


def _pick(rng: np.random.Generator, options: Sequence[str]) -> str:
    return options[int(rng.integers(len(options)))]


def _tweet_fields(rng: np.random.Generator, triple: LabelTriple, names: Sequence[str]) -> dict:
    """Texto e metadados coerentes com as regras descobertas para o trio."""
    link = f"http://t.co/{int(rng.integers(16 ** 6)):06x}"

    if triple.user_type == "person":
        name = _pick(rng, names)
        screen_name = f"{name}{int(rng.integers(1, 100))}"
        user_name = f"{name.title()} {chr(ord('A') + int(rng.integers(26)))}."
        followers = int(rng.integers(20, 2000))
    else:
        handle = _pick(rng, ORGANIZATION_HANDLES)
        screen_name = f"{handle}{int(rng.integers(1, 100))}"
        user_name = handle.title()
        followers = int(rng.integers(500, 20000))

    if triple.tweet_type == "personal":
        text = _pick(rng, PERSONAL_TEXTS).format(friend=_pick(rng, names))
        statuses = int(rng.integers(50, 4000))
        friends = int(rng.integers(20, 1500))
    elif triple.tweet_type == "other":
        text = _pick(rng, OTHER_TEXTS).format(link=link)
        statuses = int(rng.integers(200, 4000))
        friends = int(rng.integers(20, 1500))
    elif triple.tweet_type == "product_advert":
        text = _pick(rng, PRODUCT_TEXTS).format(link=link)
        statuses = int(rng.integers(2 * ADVERT_MIN_STATUSES, 8 * ADVERT_MIN_STATUSES))
        friends = int(rng.integers(2 * JOB_ADVERT_MAX_FRIENDS, 3000))
    else:
        text = _pick(rng, JOB_TEXTS).format(link=link)
        statuses = int(rng.integers(2 * ADVERT_MIN_STATUSES, 8 * ADVERT_MIN_STATUSES))
        friends = int(rng.integers(0, JOB_ADVERT_MAX_FRIENDS // 2))

    if triple.sentiment == "positive":
        text += "! :)" if rng.random() < 0.3 else "!"

    is_retweet = bool(rng.random() < 0.1)
    return {
        "text": f"RT @{screen_name}: {text}" if is_retweet else text,
        "user_name": user_name,
        "user_screen_name": screen_name,
        "followers": followers,
        "friends": friends,
        "statuses_count": statuses,
        "retweet_count": int(rng.poisson(1.0)) if is_retweet else 0,
        "is_retweet": is_retweet,
    }


_RAW_PREIMAGES: Dict[str, Dict[str, List[str]]] = {
    dimension: {
        revised: [raw for raw in RAW_CLASSES[dimension] if mapping[raw] == revised]
        for revised in set(mapping.values())
    }
    for dimension, mapping in REVISION_MAP.items()
}


def _raw_triple(rng: np.random.Generator, triple: LabelTriple) -> LabelTriple:
    """Classe bruta uniforme entre as que agregam para a classe revisada."""
    return LabelTriple(*(_pick(rng, _RAW_PREIMAGES[d][triple.get(d)]) for d in DIMENSIONS), scheme="raw")


# ============================================================================
# GERAÇÃO
# ============================================================================


def generate_dataset(
    cfg: SynthConfig,
    lexicon: Optional[frozenset] = None,
) -> Tuple[List[TweetRecord], List[SalesRecord], GroundTruth]:
    """
    Gera Tweets e vendas determinísticos para (cfg, cfg.seed).

    Contagens da classe fonte antes do início da série (necessárias para as
    defasagens) são sorteadas com a mesma taxa e não viram Tweets.
    """
    lexicon = lexicon if lexicon is not None else load_lexicon(DEFAULT_LEXICON_PATH)
    names = sorted(lexicon)
    rng = _rng(cfg.seed)
    n = cfg.n_weeks
    keys = sorted(cfg.class_rates)

    counts: "OrderedDict[str, np.ndarray]" = OrderedDict(
        (key, rng.poisson(cfg.class_rates[key], size=n).astype(np.int64)) for key in keys
    )
    for spike in cfg.effective_spam_spikes():
        counts.setdefault(spike.triple, np.zeros(n, dtype=np.int64))[spike.week] += spike.magnitude

    max_lag = max(cfg.effect.lags)
    pre_sample = rng.poisson(cfg.class_rates[cfg.effect.source], size=max_lag).astype(float)
    source = np.concatenate([pre_sample, counts[cfg.effect.source].astype(float)])

    weeks = [cfg.start_week + ONE_WEEK * i for i in range(n)]
    base = np.array([cfg.base_sales * _season_factor(cfg, w) for w in weeks])
    effect = np.zeros(n)
    for lag in cfg.effect.lags:
        effect += cfg.effect.coefficient * source[max_lag - lag : max_lag - lag + n]
    noiseless = base + effect
    noisy = np.maximum(noiseless + rng.normal(0.0, cfg.noise_sd, size=n), 0.0)

    sales = [
        SalesRecord(week_start=w, country=cfg.country.name, units=round(float(u), 4))
        for w, u in zip(weeks, noisy)
    ]

    # Tweets do país
    drafts: List[Tuple[datetime, dict, bool, LabelTriple]] = []
    for key, series in counts.items():
        triple = LabelTriple.from_key(key)
        for i, c in enumerate(series):
            for _ in range(int(c)):
                drafts.append((_timestamp(rng, weeks[i]), _tweet_fields(rng, triple, names), False, triple))

    # Tweets estrangeiros (descartados pelo filtro de país)
    n_country = len(drafts)
    n_foreign = int(rng.binomial(n_country, cfg.foreign_share / (1.0 - cfg.foreign_share))) if n_country else 0
    for _ in range(n_foreign):
        triple = LabelTriple.from_key(_pick(rng, keys))
        week = weeks[int(rng.integers(n))]
        drafts.append((_timestamp(rng, week), _tweet_fields(rng, triple, names), True, triple))

    drafts.sort(key=lambda d: d[0])
    tweets: List[TweetRecord] = []
    revised: Dict[str, str] = {}
    raw: Dict[str, str] = {}
    foreign_ids: List[str] = []
    for i, (created_at, fields_, foreign, triple) in enumerate(drafts):
        tweet_id = f"{cfg.seed}-{i:06d}"
        language, capital = (
            FOREIGN_LOCATIONS[i % len(FOREIGN_LOCATIONS)] if foreign else (cfg.country.language, cfg.country.capital)
        )
        tweets.append(TweetRecord(id=tweet_id, created_at=created_at, user_timezone=capital, language=language, **fields_))
        if foreign:
            foreign_ids.append(tweet_id)
        else:
            revised[tweet_id] = triple.key()
            raw[tweet_id] = _raw_triple(rng, triple).key()

    truth = GroundTruth(
        seed=cfg.seed,
        start_week=cfg.start_week,
        n_weeks=n,
        counts={key: [int(v) for v in series] for key, series in counts.items()},
        effect=cfg.effect,
        noiseless_sales=[float(v) for v in noiseless],
        revised_triples=revised,
        raw_triples=raw,
        foreign_ids=foreign_ids,
    )
    logger.info(
        f"[SYNTH] seed={cfg.seed}: {n} semanas, {n_country} Tweets do país + {n_foreign} estrangeiros, "
        f"efeito {cfg.effect.source} x{cfg.effect.coefficient} nas defasagens {cfg.effect.lags}"
    )
    return tweets, sales, truth


def _timestamp(rng: np.random.Generator, week_start: date) -> datetime:
    offset = int(rng.integers(SECONDS_PER_WEEK))
    return datetime.combine(week_start, time(0), tzinfo=timezone.utc) + timedelta(seconds=offset)


def label_sample(
    tweets: Sequence[TweetRecord],
    true_labels: Mapping[str, LabelTriple],
    raters: int = 3,
    rater_noise: float = 0.0,
    seed: int = 0,
    classes: Optional[Mapping[str, Sequence[str]]] = None,
) -> List[LabelRecord]:
    """
    Cada Tweet recebe `raters` avaliações; em cada dimensão, cada avaliador
    troca a classe verdadeira por outra uniforme com probabilidade rater_noise.

    `classes` restringe o vocabulário de uma dimensão (as trocas ficam dentro dele).
    """
    if not 0.0 <= rater_noise < 1.0:
        raise InputError(f"rater_noise must be in [0, 1), got {rater_noise}")
    vocab = {d: tuple(RAW_CLASSES[d]) for d in DIMENSIONS}
    for dimension, values in (classes or {}).items():
        vocab[dimension] = tuple(values)

    rng = _rng(seed)
    records: List[LabelRecord] = []
    for tweet in tweets:
        truth = true_labels.get(tweet.id)
        if truth is None:
            raise InputError(f"tweet {tweet.id} has no true label")
        for r in range(raters):
            chosen = {}
            for dimension in DIMENSIONS:
                value = truth.get(dimension)
                if rng.random() < rater_noise:
                    alternatives = [c for c in vocab[dimension] if c != value]
                    value = _pick(rng, alternatives)
                chosen[dimension] = value
            records.append(LabelRecord(tweet_id=tweet.id, rater_id=f"r{r + 1}", **chosen))
    return records


def generate_labels(tweets: Sequence[TweetRecord], truth: GroundTruth, cfg: SynthConfig) -> List[LabelRecord]:
    """Avalia uma amostra (label_share) dos Tweets do país, na ordem do arquivo."""
    country = [t for t in tweets if t.id in truth.raw_triples]
    rng = _rng(cfg.seed + 1)
    n_sample = int(round(cfg.label_share * len(country)))
    picked = np.sort(rng.choice(len(country), size=n_sample, replace=False)) if n_sample else np.array([], dtype=int)
    sample = [country[i] for i in picked]
    true_labels = {t.id: LabelTriple.from_key(truth.raw_triples[t.id], scheme="raw") for t in sample}
    records = label_sample(sample, true_labels, raters=cfg.raters, rater_noise=cfg.rater_noise, seed=cfg.seed + 2)
    logger.info(f"[SYNTH] {len(records)} avaliações para {len(sample)} Tweets (ruído {cfg.rater_noise})")
    return records


def expected_hit_rate(rater_noise: float, n_classes: int) -> float:
    """Taxa esperada de 'hit' por avaliação com 3 avaliadores independentes."""
    e = rater_noise
    wrong_match = e / (n_classes - 1)
    return (1 - e) * (1 - e * e) + e * (1 - (1 - wrong_match) ** 2)


# ============================================================================
# PERSISTÊNCIA
# ============================================================================


def write_dataset(
    tweets: Sequence[TweetRecord],
    sales: Sequence[SalesRecord],
    labels: Sequence[LabelRecord],
    truth: GroundTruth,
    out_dir: Union[str, Path],
) -> Dict[str, Path]:
    """tweets.jsonl, sales.csv, labels.csv e ground_truth.json nos formatos da ingestão."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "tweets": out / "tweets.jsonl",
        "sales": out / "sales.csv",
        "labels": out / "labels.csv",
        "ground_truth": out / "ground_truth.json",
    }

    with open(paths["tweets"], "w", encoding="utf-8", newline="\n") as fh:
        for t in tweets:
            fh.write(json.dumps(t.to_json_dict(), ensure_ascii=False) + "\n")

    sales_df = pd.DataFrame(
        [{"week_start": r.week_start.isoformat(), "country": r.country, "units": r.units} for r in sales],
        columns=["week_start", "country", "units"],
    )
    sales_df.to_csv(paths["sales"], index=False, float_format="%.4f", lineterminator="\n")

    labels_df = pd.DataFrame([r.model_dump() for r in labels], columns=list(LABEL_FIELDS))
    labels_df.to_csv(paths["labels"], index=False, lineterminator="\n")

    paths["ground_truth"].write_text(truth.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"[SAVE] Dataset sintético salvo em {out}")
    return paths
