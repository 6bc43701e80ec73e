"""
Ingestão de Tweets, vendas e rótulos manuais.

Entrada: tweets (JSON-lines ou CSV), vendas (CSV), rótulos (CSV)
Saída: séries semanais alinhadas (WeeklySeries)

Responsabilidades:
  - Parsing com erros por número de linha
  - Filtro de país por idioma + fuso horário (capital)
  - Agregação semanal ISO (segunda-feira 00:00 UTC)
  - Normalização das vendas pelo máximo
  - Alinhamento de séries pela interseção de semanas

Não faz: classificação, estatística
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from signallab.errors import AlignmentError, DegenerateStatisticsError, InputError, ParseError
from signallab.ml.pipeline.modules.schemes import RAW_CLASSES, normalize_class_name

logger = logging.getLogger(__name__)

TWEET_FIELDS: Tuple[str, ...] = (
    "id",
    "text",
    "created_at",
    "user_name",
    "user_screen_name",
    "followers",
    "friends",
    "statuses_count",
    "retweet_count",
    "is_retweet",
    "user_timezone",
    "language",
)
SALES_FIELDS: Tuple[str, ...] = ("week_start", "country", "units")
LABEL_FIELDS: Tuple[str, ...] = ("tweet_id", "rater_id", "tweet_type", "user_type", "sentiment")

ONE_WEEK = timedelta(days=7)

Stream = Union[IO[bytes], IO[str], bytes, str]

# ============================================================================
# TIPOS DE DOMÍNIO
# ============================================================================


class TweetRecord(BaseModel):
    """Um Tweet bruto com metadados do usuário."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    text: str = ""
    created_at: datetime
    user_name: str = ""
    user_screen_name: str = ""
    followers: int = Field(..., ge=0)
    friends: int = Field(..., ge=0)
    statuses_count: int = Field(..., ge=0)
    retweet_count: int = Field(..., ge=0)
    is_retweet: bool
    user_timezone: str = ""
    language: str = ""

    @field_validator("created_at")
    @classmethod
    def _to_utc(cls, v: datetime) -> datetime:
        # Sem offset explícito assumimos UTC
        if v.tzinfo is None:
            return v.replace(tzinfo=timezone.utc)
        return v.astimezone(timezone.utc)

    def to_json_dict(self) -> dict:
        data = self.model_dump()
        data["created_at"] = format_timestamp(self.created_at)
        return {name: data[name] for name in TWEET_FIELDS}


class CountrySpec(BaseModel):
    """País identificado por idioma + capital (fuso horário do Twitter)."""

    model_config = ConfigDict(frozen=True)

    name: str
    language: str = Field(..., min_length=1)
    capital: str = Field(..., min_length=1)


class SalesRecord(BaseModel):
    """Vendas de uma semana (antes da normalização)."""

    model_config = ConfigDict(frozen=True)

    week_start: date
    country: str = ""
    units: float = Field(..., ge=0)

    @field_validator("week_start")
    @classmethod
    def _monday(cls, v: date) -> date:
        if v.weekday() != 0:
            raise ValueError(f"week_start {v.isoformat()} is not a Monday")
        return v


class LabelRecord(BaseModel):
    """Uma avaliação manual (esquema bruto) de um Tweet por um avaliador."""

    model_config = ConfigDict(frozen=True)

    tweet_id: str = Field(..., min_length=1)
    rater_id: str
    tweet_type: str
    user_type: str
    sentiment: str

    @field_validator("tweet_type", "user_type", "sentiment")
    @classmethod
    def _raw_class(cls, v: str, info) -> str:
        name = normalize_class_name(v)
        allowed = RAW_CLASSES[info.field_name]
        if name not in allowed:
            raise ValueError(f"unknown {info.field_name} class {v!r}")
        return name


@dataclass(frozen=True, eq=False)
class WeeklySeries:
    """
    Série semanal contígua começando em uma segunda-feira.

    Valores ausentes são NaN (marcador explícito); semanas sem Tweets valem 0.
    """

    start_week: date
    values: np.ndarray
    label: str = ""
    n_out_of_range: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        if values.ndim != 1 or values.size < 1:
            raise InputError("weekly series must be one-dimensional with at least one week")
        if self.start_week.weekday() != 0:
            raise InputError(f"start_week {self.start_week.isoformat()} is not a Monday")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def end_week(self) -> date:
        return self.start_week + ONE_WEEK * (len(self) - 1)

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.values).sum())

    def weeks(self) -> pd.DatetimeIndex:
        return pd.date_range(self.start_week, periods=len(self), freq="7D")

    def week_offset(self, week: date) -> int:
        return (week - self.start_week).days // 7

    def to_series(self) -> pd.Series:
        return pd.Series(self.values, index=self.weeks(), name=self.label)

    def with_values(self, values: Sequence[float], label: Optional[str] = None, start_week: Optional[date] = None) -> "WeeklySeries":
        return WeeklySeries(start_week or self.start_week, np.asarray(values, dtype=float), label if label is not None else self.label)

    def slice_weeks(self, start: date, end: date) -> "WeeklySeries":
        """Recorta para [start, end] (segundas-feiras dentro da série)."""
        i, j = self.week_offset(start), self.week_offset(end)
        return WeeklySeries(start, self.values[i : j + 1], self.label)

    def equals(self, other: "WeeklySeries") -> bool:
        return (
            self.start_week == other.start_week
            and len(self) == len(other)
            and bool(np.array_equal(self.values, other.values, equal_nan=True))
        )


# Países aceitos por --country
KNOWN_COUNTRIES: Dict[str, CountrySpec] = {
    "france": CountrySpec(name="France", language="fr", capital="Paris"),
    "germany": CountrySpec(name="Germany", language="de", capital="Berlin"),
    "spain": CountrySpec(name="Spain", language="es", capital="Madrid"),
    "netherlands": CountrySpec(name="Netherlands", language="nl", capital="Amsterdam"),
}


def known_countries() -> Dict[str, CountrySpec]:
    return dict(KNOWN_COUNTRIES)


def resolve_country(name: Optional[str] = None, language: Optional[str] = None, capital: Optional[str] = None) -> CountrySpec:
    """Resolve --country e aplica --lang/--capital como sobrescrita."""
    base: Optional[CountrySpec] = None
    if name:
        key = name.strip().casefold().removeprefix("the ").strip()
        base = KNOWN_COUNTRIES.get(key)
        if base is None and not (language and capital):
            raise InputError(f"unknown country {name!r}; pass --lang and --capital")
    if base is None:
        if not (language and capital):
            raise InputError("country requires --country or both --lang and --capital")
        return CountrySpec(name=name or f"{language}/{capital}", language=language, capital=capital)
    return CountrySpec(
        name=base.name,
        language=language or base.language,
        capital=capital or base.capital,
    )


# ============================================================================
# PARSING
# ============================================================================


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _read_text(stream: Stream) -> str:
    if isinstance(stream, (bytes, str)):
        raw = stream
    else:
        raw = stream.read()
    if isinstance(raw, bytes):
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(None, f"invalid UTF-8 ({e.reason} at byte {e.start})")
    return raw


def _validation_detail(error: ValidationError) -> str:
    first = error.errors()[0]
    loc = ".".join(str(part) for part in first.get("loc", ()))
    return f"invalid field {loc}: {first.get('msg')}" if loc else str(first.get("msg"))


def _build_tweet(obj: Mapping, line: int) -> TweetRecord:
    for name in TWEET_FIELDS:
        if name not in obj:
            raise ParseError(line, f"missing field {name}")
    try:
        return TweetRecord.model_validate({name: obj[name] for name in TWEET_FIELDS})
    except ValidationError as e:
        raise ParseError(line, _validation_detail(e))


def _csv_rows(text: str, required: Sequence[str]) -> Iterable[Tuple[int, dict]]:
    """
    Registros de CSV (cabeçalho = linha 1) como (linha física inicial, dict de strings).

    Campos entre aspas com quebra de linha ocupam várias linhas físicas; a
    numeração acompanha o arquivo. Linhas em branco são ignoradas.
    """
    if not text.strip():
        return []
    reader = csv.reader(io.StringIO(text, newline=""))
    header: Optional[List[str]] = None
    rows: List[Tuple[int, dict]] = []
    consumed = 0
    try:
        for fields in reader:
            line_no, consumed = consumed + 1, reader.line_num
            if not any(field.strip() for field in fields):
                continue
            if header is None:
                header = [field.strip() for field in fields]
                missing = [name for name in required if name not in header]
                if missing:
                    raise ParseError(line_no, f"missing field {missing[0]}")
                continue
            if len(fields) != len(header):
                raise ParseError(line_no, f"expected {len(header)} fields, got {len(fields)}")
            rows.append((line_no, dict(zip(header, fields))))
    except csv.Error as e:
        raise ParseError(reader.line_num, f"malformed CSV: {e}")
    return rows


def parse_tweets(stream: Stream, format: str = "jsonlines") -> List[TweetRecord]:
    """
    Lê Tweets em JSON-lines ou CSV.

    Um TweetRecord por registro, na ordem de entrada. Registro malformado ou
    id duplicado gera ParseError com o número da linha.
    """
    text = _read_text(stream)
    fmt = format.lower().replace("-", "").replace("_", "")
    records: List[TweetRecord] = []
    seen: Dict[str, int] = {}

    rows: Iterable[Tuple[int, Mapping]]
    if fmt in ("jsonlines", "jsonl", "ndjson"):
        parsed = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(line_no, f"invalid JSON ({e.msg})")
            if not isinstance(obj, dict):
                raise ParseError(line_no, "expected a JSON object")
            parsed.append((line_no, obj))
        rows = parsed
    elif fmt == "csv":
        rows = _csv_rows(text, TWEET_FIELDS)
    else:
        raise InputError(f"unknown tweet format {format!r}; expected jsonlines or csv")

    for line_no, obj in rows:
        record = _build_tweet(obj, line_no)
        if record.id in seen:
            raise ParseError(line_no, f"duplicate id {record.id} (first seen on line {seen[record.id]})")
        seen[record.id] = line_no
        records.append(record)

    logger.info(f"[INGEST] {len(records)} Tweets lidos ({fmt})")
    return records


def parse_sales(stream: Stream) -> List[SalesRecord]:
    """Lê vendas: CSV week_start,country,units."""
    records: List[SalesRecord] = []
    for line_no, row in _csv_rows(_read_text(stream), SALES_FIELDS):
        try:
            records.append(SalesRecord.model_validate({name: row[name] for name in SALES_FIELDS}))
        except ValidationError as e:
            raise ParseError(line_no, _validation_detail(e))
    logger.info(f"[INGEST] {len(records)} registros de vendas lidos")
    return records


def parse_labels(stream: Stream) -> List[LabelRecord]:
    """Lê rótulos manuais: CSV tweet_id,rater_id,tweet_type,user_type,sentiment."""
    records: List[LabelRecord] = []
    for line_no, row in _csv_rows(_read_text(stream), LABEL_FIELDS):
        try:
            records.append(LabelRecord.model_validate({name: row[name] for name in LABEL_FIELDS}))
        except ValidationError as e:
            raise ParseError(line_no, _validation_detail(e))
    logger.info(f"[INGEST] {len(records)} avaliações manuais lidas")
    return records


def _open_for_parse(path: Union[str, Path]):
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: file not found")
    try:
        return path.read_bytes()
    except OSError as e:
        raise InputError(f"{path}: cannot read ({e.strerror})")


def read_tweets(path: Union[str, Path], format: Optional[str] = None) -> List[TweetRecord]:
    """parse_tweets a partir de arquivo; formato inferido pela extensão."""
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonlines")
    try:
        return parse_tweets(_open_for_parse(path), fmt)
    except ParseError as e:
        raise e.with_path(str(path))


def read_sales(path: Union[str, Path]) -> List[SalesRecord]:
    try:
        return parse_sales(_open_for_parse(path))
    except ParseError as e:
        raise e.with_path(str(path))


def read_labels(path: Union[str, Path]) -> List[LabelRecord]:
    try:
        return parse_labels(_open_for_parse(path))
    except ParseError as e:
        raise e.with_path(str(path))


# ============================================================================
# FILTRO DE PAÍS
# ============================================================================


def filter_country(tweets: Sequence[TweetRecord], spec: CountrySpec) -> List[TweetRecord]:
    """Mantém Tweets com idioma == spec.language E fuso == spec.capital (sem caixa)."""
    language = spec.language.casefold()
    capital = spec.capital.casefold()
    kept = [
        t for t in tweets
        if t.language.casefold() == language and t.user_timezone.casefold() == capital
    ]
    logger.info(f"[FILTER] {spec.name}: {len(kept)} de {len(tweets)} Tweets mantidos")
    return kept


def country_summary(tweets: Sequence[TweetRecord], specs: Iterable[CountrySpec]) -> pd.DataFrame:
    """Número de Tweets por país, com linha OVERALL."""
    rows = [{"country": spec.name, "n_tweets": len(filter_country(tweets, spec))} for spec in specs]
    rows.append({"country": "OVERALL", "n_tweets": sum(r["n_tweets"] for r in rows)})
    return pd.DataFrame(rows, columns=["country", "n_tweets"])


# ============================================================================
# AGREGAÇÃO SEMANAL
# ============================================================================


def monday_of(day: Union[date, datetime]) -> date:
    if isinstance(day, datetime):
        day = day.astimezone(timezone.utc).date() if day.tzinfo else day.date()
    return day - timedelta(days=day.weekday())


def week_range(start: date, end: date) -> Tuple[date, int]:
    """Primeira segunda-feira e número de semanas ISO que cobrem [start, end]."""
    if start > end:
        raise InputError(f"range start {start.isoformat()} is after end {end.isoformat()}")
    first = monday_of(start)
    n_weeks = (monday_of(end) - first).days // 7 + 1
    return first, n_weeks


def _utc_ns(timestamps: Sequence[datetime]) -> np.ndarray:
    if len(timestamps) == 0:
        return np.array([], dtype=np.int64)
    index = pd.DatetimeIndex(pd.to_datetime(list(timestamps), utc=True))
    return index.asi8.astype(np.int64)


def aggregate_weekly(timestamps: Sequence[datetime], start: date, end: date, label: str = "tweets") -> WeeklySeries:
    """
    Contagem por semana ISO (segunda 00:00 UTC inclusive até a próxima segunda exclusiva).

    O intervalo vale em semanas inteiras: da segunda-feira de start até o fim da
    semana de end. Timestamps fora dele são ignorados e contados em n_out_of_range.
    """
    first, n_weeks = week_range(start, end)
    ns = _utc_ns(timestamps)

    lower = pd.Timestamp(first, tz="UTC").value
    upper = pd.Timestamp(first + timedelta(weeks=n_weeks), tz="UTC").value
    in_range = (ns >= lower) & (ns < upper)
    n_out = int((~in_range).sum())

    week_ns = pd.Timedelta(weeks=1).value
    offsets = (ns[in_range] - lower) // week_ns
    counts = np.bincount(offsets.astype(np.int64), minlength=n_weeks).astype(float)

    if n_out:
        logger.warning(f"[WEEKLY] {n_out} timestamps fora do intervalo {start}..{end} ignorados")
    return WeeklySeries(first, counts[:n_weeks], label, n_out_of_range=n_out)


def weekly_tweet_counts(tweets: Sequence[TweetRecord], start: date, end: date, label: str = "tweets") -> WeeklySeries:
    return aggregate_weekly([t.created_at for t in tweets], start, end, label)


def aggregate_sales(
    records: Sequence[SalesRecord],
    start: date,
    end: date,
    country: Optional[str] = None,
    label: str = "sales",
) -> WeeklySeries:
    """Soma unidades por semana; semanas sem registro ficam ausentes (NaN)."""
    first, n_weeks = week_range(start, end)
    values = np.full(n_weeks, np.nan)
    n_out = 0

    for record in records:
        if country is not None and record.country.casefold() != country.casefold():
            continue
        k = (record.week_start - first).days // 7
        if k < 0 or k >= n_weeks:
            n_out += 1
            continue
        values[k] = record.units if math.isnan(values[k]) else values[k] + record.units

    if n_out:
        logger.warning(f"[WEEKLY] {n_out} registros de vendas fora do intervalo {start}..{end}")
    return WeeklySeries(first, values, label, n_out_of_range=n_out)


def normalize_series(s: WeeklySeries) -> WeeklySeries:
    """Divide pelo máximo não-ausente (saída com máximo 1.0)."""
    if np.isnan(s.values).all():
        raise DegenerateStatisticsError("cannot normalize: all values missing")
    peak = float(np.nanmax(s.values))
    if peak <= 0:
        raise DegenerateStatisticsError("cannot normalize: non-positive maximum")
    return s.with_values(s.values / peak)


def align(a: WeeklySeries, b: WeeklySeries) -> Tuple[WeeklySeries, WeeklySeries]:
    """Recorta as duas séries para a interseção das semanas."""
    start = max(a.start_week, b.start_week)
    end = min(a.end_week, b.end_week)
    if start > end:
        raise AlignmentError(
            f"no overlap between {a.label or 'a'} ({a.start_week}..{a.end_week}) "
            f"and {b.label or 'b'} ({b.start_week}..{b.end_week})"
        )
    return a.slice_weeks(start, end), b.slice_weeks(start, end)


def is_aligned(a: WeeklySeries, b: WeeklySeries) -> bool:
    return a.start_week == b.start_week and len(a) == len(b)
