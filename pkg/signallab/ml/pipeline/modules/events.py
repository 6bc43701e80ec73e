"""
Estudo de eventos sobre semanas de pico de Tweets.

Entrada: série semanal de Tweets (filtro de classe) + série de vendas alinhada
Saída: EventStudyResult, RobustnessGrid, ReachStats

Responsabilidades:
  - Seleção das top-k semanas (k = floor((1-q)·n)), com fusão de semanas adjacentes
  - Vendas normais = média da janela de estimação; AR, CAR e teste t
  - Grade de robustez sobre (q, w, L)
  - Comparação de alcance (seguidores) entre semanas de pico e demais

Não faz: modelo de mercado, bootstrap, identificação causal
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from datetime import date
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field, ValidationError, field_validator

from signallab.errors import DegenerateStatisticsError, InputError, SignalLabError
from signallab.ml.pipeline.modules.distributions import t_sf, t_two_sided
from signallab.ml.pipeline.modules.ingest import ONE_WEEK, TweetRecord, WeeklySeries, align, is_aligned, monday_of

logger = logging.getLogger(__name__)

DEFAULT_Q_SET: Tuple[float, ...] = (0.80, 0.85, 0.90, 0.95)
DEFAULT_W_RANGE: Tuple[int, ...] = tuple(range(0, 6))
DEFAULT_L_RANGE: Tuple[int, ...] = tuple(range(1, 11))
MIN_PEAK_SERIES_LENGTH = 10

# Tolerância para considerar o desvio-padrão dos CARs nulo
CAR_SD_TOLERANCE = 1e-12


class EventStudyConfig(BaseModel):
    quantile: float = Field(default=0.90, gt=0.0, lt=1.0)
    event_window: int = Field(default=3, ge=0)
    estimation_window: int = Field(default=6, ge=1)
    merge_adjacent: bool = True
    one_sided: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "EventStudyConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise InputError(f"invalid event study config: {e.errors()[0]['msg']}")


class Event(BaseModel):
    week: int
    tweet_value: float
    week_start: Optional[date] = None
    usable: bool = True
    exclusion_reason: Optional[str] = None


class EventStudyResult(BaseModel):
    """
    outcome = "tested": t e p calculados normalmente.
    outcome = "uniform_effect": todos os CARs iguais e não nulos (sd = 0);
    t = ±inf e p = 0 (ou 1) por convenção.
    """

    config: EventStudyConfig
    events: List[Event]
    abnormal_sales: List[List[float]]
    cars: List[float]
    mean_car: float
    sd_car: float
    t_statistic: float
    p_value: float
    n_usable: int
    n_excluded: int
    n_overlapping_pairs: int = 0
    outcome: str = "tested"

    @field_validator("outcome")
    @classmethod
    def _known_outcome(cls, v: str) -> str:
        if v not in ("tested", "uniform_effect"):
            raise ValueError(f"unknown outcome {v!r}")
        return v

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


# ============================================================================
# PICOS
# ============================================================================


def peak_count(n: int, q: float) -> int:
    """k = max(1, floor((1-q)·n)); tolerância evita 0.1*90 = 8.999..."""
    return max(1, int(math.floor((1.0 - q) * n + 1e-9)))


def detect_peak_weeks(tweets: WeeklySeries, q: float = 0.90, merge_adjacent: bool = True) -> List[Event]:
    """
    Top-k semanas por valor; empates resolvidos para a semana mais cedo.

    Com merge_adjacent, semanas selecionadas consecutivas viram um único
    evento na primeira semana da sequência. Semanas ausentes nunca são picos.
    """
    if not 0.0 < q < 1.0:
        raise InputError(f"quantile must be in (0, 1), got {q}")
    values = tweets.values
    n = len(tweets)
    if n < MIN_PEAK_SERIES_LENGTH:
        logger.warning(f"[EVENTS] Série curta para detecção de picos ({n} < {MIN_PEAK_SERIES_LENGTH} semanas)")

    present = ~np.isnan(values)
    if not present.any() or np.unique(values[present]).size == 1:
        raise DegenerateStatisticsError("no peaks distinguishable (all values equal)")

    k = min(peak_count(n, q), int(present.sum()))
    # ordem: valor decrescente, depois semana crescente
    ranked = np.lexsort((np.arange(n), -np.where(present, values, -np.inf)))
    selected = sorted(int(i) for i in ranked[:k])

    weeks: List[int] = []
    for i in selected:
        if merge_adjacent and weeks and i == last + 1:
            last = i
            continue
        weeks.append(i)
        last = i

    events = [Event(week=i, tweet_value=float(values[i]), week_start=tweets.start_week + ONE_WEEK * i) for i in weeks]
    logger.info(f"[EVENTS] {k} semanas de pico (q={q}) -> {len(events)} eventos")
    return events


# ============================================================================
# ESTUDO DE EVENTOS
# ============================================================================


def _mark_usability(events: Sequence[Event], sales: np.ndarray, cfg: EventStudyConfig) -> List[Event]:
    n = sales.size
    w, L = cfg.event_window, cfg.estimation_window
    marked = []
    for e in events:
        reason = None
        if e.week - L < 0:
            reason = f"estimation window starts before the series (needs {L} weeks, has {e.week})"
        elif e.week + w >= n:
            reason = f"event window runs past the series end (needs {w + 1} weeks, has {n - e.week})"
        elif np.isnan(sales[e.week - L : e.week]).any():
            reason = "missing sales in estimation window"
        elif np.isnan(sales[e.week : e.week + w + 1]).any():
            reason = "missing sales in event window"
        marked.append(e.model_copy(update={"usable": reason is None, "exclusion_reason": reason}))
    return marked


def overlap_count(events: Sequence[Event], cfg: EventStudyConfig) -> int:
    """Pares de eventos utilizáveis cujas janelas [e-L, e+w] se sobrepõem."""
    spans = [(e.week - cfg.estimation_window, e.week + cfg.event_window) for e in events if e.usable]
    return sum(
        1
        for i in range(len(spans))
        for j in range(i + 1, len(spans))
        if spans[i][0] <= spans[j][1] and spans[j][0] <= spans[i][1]
    )


def event_study(sales: WeeklySeries, events: Sequence[Event], cfg: Optional[EventStudyConfig] = None) -> EventStudyResult:
    """
    N_e = média(sales[e-L .. e-1]); AR_e[τ] = sales[e+τ] - N_e, τ = 0..w;
    CAR_e = Σ AR_e. t = média(CAR)·√n / sd(CAR) (sd amostral), gl = n - 1.
    """
    cfg = cfg or EventStudyConfig()
    y = sales.values
    w, L = cfg.event_window, cfg.estimation_window

    marked = _mark_usability(events, y, cfg)
    usable = [e for e in marked if e.usable]
    n_usable = len(usable)
    if n_usable < 2:
        raise DegenerateStatisticsError(f"insufficient events ({n_usable} usable, need at least 2)")

    abnormal: List[List[float]] = []
    for e in usable:
        normal = float(y[e.week - L : e.week].mean())
        abnormal.append([float(v) for v in y[e.week : e.week + w + 1] - normal])

    cars = np.array([math.fsum(ar) for ar in abnormal])
    mean_car = float(cars.mean())
    sd_car = float(cars.std(ddof=1))
    scale = max(1.0, float(np.abs(cars).max()))

    outcome = "tested"
    if sd_car <= CAR_SD_TOLERANCE * scale:
        if abs(mean_car) <= CAR_SD_TOLERANCE * scale:
            raise DegenerateStatisticsError("degenerate CARs (zero variance, zero mean)")
        outcome = "uniform_effect"
        t_stat = math.copysign(math.inf, mean_car)
        if cfg.one_sided:
            p_value = 0.0 if mean_car > 0 else 1.0
        else:
            p_value = 0.0
        logger.warning(f"[EVENTS] CARs idênticos ({mean_car:.4g}): efeito uniforme reportado")
    else:
        t_stat = mean_car * math.sqrt(n_usable) / sd_car
        df = n_usable - 1
        p_value = t_sf(t_stat, df) if cfg.one_sided else t_two_sided(t_stat, df)

    overlaps = overlap_count(marked, cfg)
    if overlaps:
        logger.warning(f"[EVENTS] {overlaps} pares de eventos com janelas sobrepostas")

    result = EventStudyResult(
        config=cfg,
        events=marked,
        abnormal_sales=abnormal,
        cars=[float(c) for c in cars],
        mean_car=mean_car,
        sd_car=sd_car,
        t_statistic=t_stat,
        p_value=p_value,
        n_usable=n_usable,
        n_excluded=len(marked) - n_usable,
        n_overlapping_pairs=overlaps,
        outcome=outcome,
    )
    logger.info(
        f"[EVENTS] q={cfg.quantile} w={w} L={L}: {n_usable} eventos, "
        f"CAR médio {mean_car:.4g}, t={t_stat:.3f}, p={p_value:.4f}"
    )
    return result


def run_event_study(tweets: WeeklySeries, sales: WeeklySeries, cfg: Optional[EventStudyConfig] = None) -> EventStudyResult:
    """Detecção de picos + estudo de eventos sobre as séries alinhadas."""
    cfg = cfg or EventStudyConfig()
    if not is_aligned(tweets, sales):
        tweets, sales = align(tweets, sales)
    events = detect_peak_weeks(tweets, cfg.quantile, cfg.merge_adjacent)
    return event_study(sales, events, cfg)


# ============================================================================
# GRADE DE ROBUSTEZ
# ============================================================================


class RobustnessCell(BaseModel):
    q: float
    w: int
    L: int
    t: Optional[float] = None
    p: Optional[float] = None
    n_usable: int = 0
    significant: bool = False
    error: Optional[str] = None


class RobustnessGrid(BaseModel):
    alpha: float = 0.05
    cells: List[RobustnessCell]

    def cell(self, q: float, w: int, L: int) -> RobustnessCell:
        for c in self.cells:
            if c.q == q and c.w == w and c.L == L:
                return c
        raise KeyError((q, w, L))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [c.model_dump(include={"q", "w", "L", "t", "p", "n_usable", "significant"}) for c in self.cells],
            columns=["q", "w", "L", "t", "p", "n_usable", "significant"],
        )


def _sweep_cell(tweets: WeeklySeries, sales: WeeklySeries, q: float, w: int, L: int, alpha: float, one_sided: bool) -> RobustnessCell:
    cfg = EventStudyConfig(quantile=q, event_window=w, estimation_window=L, one_sided=one_sided)
    try:
        result = run_event_study(tweets, sales, cfg)
    except SignalLabError as e:
        return RobustnessCell(q=q, w=w, L=L, error=str(e))
    return RobustnessCell(
        q=q, w=w, L=L,
        t=result.t_statistic,
        p=result.p_value,
        n_usable=result.n_usable,
        significant=result.significant(alpha),
    )


def robustness_sweep(
    tweets: WeeklySeries,
    sales: WeeklySeries,
    q_set: Sequence[float] = DEFAULT_Q_SET,
    w_range: Sequence[int] = DEFAULT_W_RANGE,
    L_range: Sequence[int] = DEFAULT_L_RANGE,
    alpha: float = 0.05,
    one_sided: bool = True,
    n_jobs: int = 1,
) -> RobustnessGrid:
    """Uma célula por (q, w, L); erros ficam registrados na célula."""
    combos = list(product(q_set, w_range, L_range))
    if not is_aligned(tweets, sales):
        tweets, sales = align(tweets, sales)

    cells = Parallel(n_jobs=n_jobs)(
        delayed(_sweep_cell)(tweets, sales, q, w, L, alpha, one_sided) for q, w, L in combos
    ) if combos else []

    n_sig = sum(c.significant for c in cells)
    n_err = sum(c.error is not None for c in cells)
    logger.info(f"[SWEEP] {len(cells)} células: {n_sig} significativas, {n_err} sem teste")
    return RobustnessGrid(alpha=alpha, cells=list(cells))


def significant_region(grid: RobustnessGrid) -> Dict[float, Optional[Tuple[int, int]]]:
    """
    Para cada q, o maior (w, L) tal que toda célula com w' <= w e L' <= L
    (dentro da grade) é significativa; None quando nem o canto mínimo é.

    Entre retângulos válidos escolhe o de maior área, depois maior w.
    """
    region: Dict[float, Optional[Tuple[int, int]]] = {}
    for q in sorted({c.q for c in grid.cells}):
        cells = {(c.w, c.L): c.significant for c in grid.cells if c.q == q}
        ws = sorted({w for w, _ in cells})
        Ls = sorted({L for _, L in cells})
        best: Optional[Tuple[int, int]] = None
        best_key = (-1, -1)
        for i, w in enumerate(ws):
            for j, L in enumerate(Ls):
                if all(cells.get((ww, ll), False) for ww in ws[: i + 1] for ll in Ls[: j + 1]):
                    key = ((i + 1) * (j + 1), w)
                    if key > best_key:
                        best, best_key = (w, L), key
        region[q] = best
    return region


# ============================================================================
# ALCANCE
# ============================================================================


class ReachStats(BaseModel):
    mean_followers_peak_weeks: float
    mean_followers_average_weeks: float
    ratio: Optional[float] = None
    ratio_defined: bool = True
    n_peak_weeks: int
    n_average_weeks: int


def reach_stats(
    tweets: Sequence[TweetRecord],
    peak_weeks: Sequence[int],
    start_week: date,
    n_weeks: int,
) -> ReachStats:
    """
    Soma de seguidores dos Tweets por semana, média dentro das semanas de pico
    e dentro das demais semanas (com e sem Tweets).
    """
    if start_week.weekday() != 0:
        raise InputError(f"start_week {start_week.isoformat()} is not a Monday")
    peaks = {int(w) for w in peak_weeks if 0 <= int(w) < n_weeks}
    if not peaks:
        raise InputError("reach comparison needs at least one peak week")
    others = [w for w in range(n_weeks) if w not in peaks]
    if not others:
        raise InputError("no comparison group: every week is a peak week")

    followers: Counter = Counter()
    for t in tweets:
        k = (monday_of(t.created_at) - start_week).days // 7
        if 0 <= k < n_weeks:
            followers[k] += t.followers

    peak_mean = float(np.mean([followers[w] for w in sorted(peaks)]))
    other_mean = float(np.mean([followers[w] for w in others]))
    defined = other_mean > 0
    stats = ReachStats(
        mean_followers_peak_weeks=peak_mean,
        mean_followers_average_weeks=other_mean,
        ratio=peak_mean / other_mean if defined else None,
        ratio_defined=defined,
        n_peak_weeks=len(peaks),
        n_average_weeks=len(others),
    )
    if not defined:
        logger.warning("[EVENTS] Razão de alcance indefinida (média das semanas comuns = 0)")
    else:
        logger.info(f"[EVENTS] Alcance: pico {peak_mean:,.0f} vs comum {other_mean:,.0f} (x{stats.ratio:.2f})")
    return stats
