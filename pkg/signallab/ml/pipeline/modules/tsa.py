"""
Análise de séries temporais Tweets x vendas.

Entrada: séries semanais alinhadas (WeeklySeries)
Saída: CorrelationMatrix, AdfResult, GrangerResult

Responsabilidades:
  - Correlação de Pearson com defasagens -4..+4 (tabela por filtro de classe)
  - Diferença de primeira ordem e série de fração
  - Dickey-Fuller aumentado (constante, sem tendência)
  - Teste de Granger por F aninhado, com varredura de defasagens

Não faz: seleção de modelo VAR, cointegração, ajuste sazonal
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel

from signallab.errors import AlignmentError, DegenerateStatisticsError, InputError, SignalLabError
from signallab.ml.pipeline.modules.distributions import f_sf, t_two_sided
from signallab.ml.pipeline.modules.ingest import ONE_WEEK, WeeklySeries, align, is_aligned

logger = logging.getLogger(__name__)

DEFAULT_LAGS: Tuple[int, ...] = tuple(range(-4, 5))
MODERATE_CORRELATION = 0.3

# Valores críticos assintóticos de Dickey-Fuller, caso com constante e sem tendência
ADF_CRITICAL_VALUES: Dict[str, float] = {"1%": -3.43, "5%": -2.86, "10%": -2.57}
DEFAULT_ADF_LAG_ORDER = 1

# Fração mínima da série coberta pela maior sequência contígua sem ausentes
MIN_CONTIGUOUS_SHARE = 0.8

# ============================================================================
# CORRELAÇÃO
# ============================================================================


def _as_array(values) -> np.ndarray:
    if isinstance(values, WeeklySeries):
        return values.values
    return np.asarray(values, dtype=float)


def pearson(x, y) -> float:
    """r de Pearson com remoção par-a-par de ausentes."""
    x, y = _as_array(x), _as_array(y)
    if x.shape != y.shape:
        raise InputError(f"pearson needs equal lengths, got {x.size} and {y.size}")

    keep = ~(np.isnan(x) | np.isnan(y))
    x, y = x[keep], y[keep]
    if x.size < 3:
        raise DegenerateStatisticsError(f"need at least 3 paired observations, got {x.size}")

    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateStatisticsError("degenerate series (zero variance)")

    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def pearson_p_value(r: float, n: int) -> float:
    """p bilateral do teste t com n-2 graus de liberdade."""
    if n < 3:
        raise DegenerateStatisticsError(f"need at least 3 paired observations, got {n}")
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return t_two_sided(t, n - 2)


@dataclass(frozen=True)
class LagCorrelation:
    """Correlação em uma defasagem; r/p ausentes quando indisponível."""

    lag: int
    r: Optional[float]
    p: Optional[float]
    n: int
    reason: Optional[str] = None

    @property
    def available(self) -> bool:
        return self.r is not None


def _shifted_pairs(x: np.ndarray, y: np.ndarray, lag: int) -> Tuple[np.ndarray, np.ndarray]:
    """Pares (x[t], y[t+lag])."""
    n = x.size
    if abs(lag) >= n:
        return x[:0], y[:0]
    if lag >= 0:
        return x[: n - lag], y[lag:]
    return x[-lag:], y[: n + lag]


def lagged_correlation(
    tweets: WeeklySeries,
    sales: WeeklySeries,
    lags: Sequence[int] = DEFAULT_LAGS,
) -> Dict[int, LagCorrelation]:
    """
    Correlação de tweets[t] com sales[t+lag] para cada defasagem.

    lag positivo = vendas depois dos Tweets. Defasagens com menos de 3 pares
    (ou variância zero) ficam marcadas como indisponíveis.
    """
    if not is_aligned(tweets, sales):
        tweets, sales = align(tweets, sales)

    x, y = tweets.values, sales.values
    result: Dict[int, LagCorrelation] = {}
    for lag in lags:
        xs, ys = _shifted_pairs(x, y, lag)
        n = int((~(np.isnan(xs) | np.isnan(ys))).sum())
        try:
            r = pearson(xs, ys)
            result[lag] = LagCorrelation(lag, r, pearson_p_value(r, n), n)
        except DegenerateStatisticsError as e:
            result[lag] = LagCorrelation(lag, None, None, n, reason=str(e))
    return result


class CorrelationRow(BaseModel):
    """Uma linha da tabela: um filtro de classe, nove defasagens."""

    filter: str
    correlations: Dict[int, Optional[float]]
    p_values: Dict[int, Optional[float]]
    n: int
    flags: List[int]
    degenerate: bool = False
    unavailable: Dict[int, str] = {}


class CorrelationMatrix(BaseModel):
    rows: List[CorrelationRow]
    n_weeks: int
    lags: List[int]
    threshold: float = MODERATE_CORRELATION

    def to_frame(self) -> pd.DataFrame:
        """Formato da tabela: filter, lag_-4..lag_4, n, flags."""
        records = []
        for row in self.rows:
            record: Dict[str, object] = {"filter": row.filter}
            for lag in self.lags:
                record[f"lag_{lag}"] = row.correlations.get(lag)
            record["n"] = row.n
            record["flags"] = "degenerate" if row.degenerate else ";".join(str(lag) for lag in row.flags)
            records.append(record)
        columns = ["filter"] + [f"lag_{lag}" for lag in self.lags] + ["n", "flags"]
        return pd.DataFrame(records, columns=columns)


def _correlation_row(description: str, series: WeeklySeries, sales: WeeklySeries, lags: Sequence[int], threshold: float) -> CorrelationRow:
    cells = lagged_correlation(series, sales, lags)
    correlations = {lag: cells[lag].r for lag in lags}
    flags = [lag for lag in lags if cells[lag].available and abs(cells[lag].r) >= threshold]
    unavailable = {lag: cells[lag].reason for lag in lags if not cells[lag].available}
    zero_lag = cells.get(0)
    return CorrelationRow(
        filter=description,
        correlations=correlations,
        p_values={lag: cells[lag].p for lag in lags},
        n=zero_lag.n if zero_lag is not None else max(c.n for c in cells.values()),
        flags=flags,
        degenerate=len(unavailable) == len(lags),
        unavailable=unavailable,
    )


def correlation_table(
    series_by_filter: Mapping[str, WeeklySeries],
    sales: WeeklySeries,
    lags: Sequence[int] = DEFAULT_LAGS,
    threshold: float = MODERATE_CORRELATION,
    n_jobs: int = 1,
) -> CorrelationMatrix:
    """Uma linha por filtro (ordem de entrada); |r| >= threshold marcado como moderado."""
    items = list(series_by_filter.items())
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_correlation_row)(description, series, sales, list(lags), threshold)
        for description, series in items
    )
    for row in rows:
        if row.degenerate:
            logger.warning(f"[TSA] Linha '{row.filter}' degenerada: nenhuma defasagem disponível")
        elif row.flags:
            logger.info(f"[TSA] Linha '{row.filter}': correlação moderada nas defasagens {row.flags}")

    n_weeks = len(align(items[0][1], sales)[0]) if items else len(sales)
    return CorrelationMatrix(rows=list(rows), n_weeks=n_weeks, lags=list(lags), threshold=threshold)


# ============================================================================
# TRANSFORMAÇÕES
# ============================================================================


def difference(s: WeeklySeries) -> WeeklySeries:
    """out[k] = s[k+1] - s[k]; ausentes propagam para as diferenças vizinhas."""
    if len(s) < 2:
        raise InputError("difference needs a series of length >= 2")
    return WeeklySeries(
        s.start_week + ONE_WEEK,
        np.diff(s.values),
        f"diff({s.label})" if s.label else "diff",
    )


def fraction_series(numerator: WeeklySeries, denominator: WeeklySeries) -> WeeklySeries:
    """num/den por semana; den == 0 vira ausente. num > den é violação de subconjunto."""
    if not is_aligned(numerator, denominator):
        raise AlignmentError("fraction_series needs aligned series")

    num, den = numerator.values, denominator.values
    both = ~(np.isnan(num) | np.isnan(den))
    violations = np.flatnonzero(both & (num > den))
    if violations.size:
        week = numerator.weeks()[violations[0]].date()
        raise InputError(f"numerator exceeds denominator at week {week.isoformat()} (subset violation)")

    out = np.full(num.size, np.nan)
    ok = both & (den != 0)
    out[ok] = num[ok] / den[ok]
    return numerator.with_values(out, label=f"{numerator.label}/{denominator.label}")


def longest_contiguous_run(s: WeeklySeries, warn: bool = True) -> WeeklySeries:
    """Maior trecho sem ausentes; aviso se cobrir menos de 80% da série."""
    valid = ~np.isnan(s.values)
    best_start, best_len, start = 0, 0, None
    for i, ok in enumerate(np.append(valid, False)):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if i - start > best_len:
                best_start, best_len = start, i - start
            start = None

    if best_len == 0:
        raise DegenerateStatisticsError("too few observations: series has no non-missing values")
    if warn and best_len < MIN_CONTIGUOUS_SHARE * len(s):
        logger.warning(
            f"[TSA] Série '{s.label}': maior trecho contíguo cobre {best_len}/{len(s)} semanas (< 80%)"
        )
    first = s.weeks()[best_start].date()
    return WeeklySeries(first, s.values[best_start : best_start + best_len], s.label)


# ============================================================================
# REGRESSÃO
# ============================================================================


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    rss: float
    n: int
    k: int
    residuals: np.ndarray
    xtx_inv: np.ndarray

    @property
    def df_resid(self) -> int:
        return self.n - self.k

    def standard_errors(self) -> np.ndarray:
        sigma2 = self.rss / self.df_resid
        return np.sqrt(sigma2 * np.diag(self.xtx_inv))


def ols_fit(y, X) -> OlsFit:
    """Mínimos quadrados; X já inclui a coluna de intercepto."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise InputError(f"design has {n} rows but y has shape {y.shape}")
    if n <= k:
        raise DegenerateStatisticsError(f"too few observations: {n} rows for {k} regressors")
    if np.linalg.matrix_rank(X) < k:
        raise DegenerateStatisticsError("collinear regressors: design matrix is rank deficient")

    coefficients, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ coefficients
    rss = float(np.dot(residuals, residuals))
    return OlsFit(
        coefficients=coefficients,
        rss=rss,
        n=n,
        k=k,
        residuals=residuals,
        xtx_inv=np.linalg.inv(X.T @ X),
    )


def _lag_matrix(values: np.ndarray, lags: int, start: int) -> np.ndarray:
    """Colunas values[t-1], ..., values[t-lags] para t = start..len-1."""
    n = values.size
    return np.column_stack([values[start - i : n - i] for i in range(1, lags + 1)]) if lags else np.empty((n - start, 0))


# ============================================================================
# ESTACIONARIEDADE
# ============================================================================


class AdfResult(BaseModel):
    statistic: float
    lag_order: int
    reject: Dict[str, bool]
    critical_values: Dict[str, float]
    n_obs: int
    label: str = ""

    @property
    def stationary_at_5(self) -> bool:
        return self.reject["5%"]


def adf_test(s: WeeklySeries, lag_order: int = DEFAULT_ADF_LAG_ORDER) -> AdfResult:
    """
    Dickey-Fuller aumentado com constante, sem tendência:

        dy_t = a + b*y_{t-1} + sum_{i=1..p} g_i*dy_{t-i} + e

    Estatística = b / se(b); rejeita raiz unitária no nível l se estatística < crítico(l).
    """
    if lag_order < 0:
        raise InputError(f"lag order must be >= 0, got {lag_order}")

    run = longest_contiguous_run(s)
    y = run.values
    if y.size < lag_order + 10:
        raise DegenerateStatisticsError(
            f"too few observations: {y.size} contiguous values for lag order {lag_order} (need {lag_order + 10})"
        )
    if np.ptp(y) == 0:
        raise DegenerateStatisticsError("degenerate series (constant)")

    dy = np.diff(y)
    target = dy[lag_order:]
    n_obs = target.size
    X = np.column_stack([
        np.ones(n_obs),
        y[lag_order : lag_order + n_obs],
        _lag_matrix(dy, lag_order, lag_order),
    ])
    fit = ols_fit(target, X)
    if fit.rss == 0.0:
        raise DegenerateStatisticsError("degenerate series (perfect fit)")

    statistic = float(fit.coefficients[1] / fit.standard_errors()[1])
    reject = {level: statistic < critical for level, critical in ADF_CRITICAL_VALUES.items()}
    logger.info(f"[ADF] '{s.label}' p={lag_order}: estatística={statistic:.3f}, rejeita a 5%: {reject['5%']}")
    return AdfResult(
        statistic=statistic,
        lag_order=lag_order,
        reject=reject,
        critical_values=dict(ADF_CRITICAL_VALUES),
        n_obs=n_obs,
        label=s.label,
    )


def stationarity_report(s: WeeklySeries, lag_order: int = DEFAULT_ADF_LAG_ORDER) -> Dict[str, AdfResult]:
    """ADF em nível e na primeira diferença."""
    return {"levels": adf_test(s, lag_order), "difference": adf_test(difference(s), lag_order)}


# ============================================================================
# GRANGER
# ============================================================================


class GrangerResult(BaseModel):
    lags: int
    F: Optional[float] = None
    p_value: Optional[float] = None
    n_obs: int = 0
    rss_restricted: Optional[float] = None
    rss_unrestricted: Optional[float] = None
    degenerate_fit: bool = False
    error: Optional[str] = None

    @property
    def df_resid(self) -> int:
        return self.n_obs - 2 * self.lags - 1

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value is not None and self.p_value < alpha


def _joint_run(x: WeeklySeries, y: WeeklySeries) -> Tuple[np.ndarray, np.ndarray]:
    both = x.with_values(np.where(np.isnan(y.values), np.nan, x.values), label=f"{x.label}&{y.label}")
    run = longest_contiguous_run(both)
    offset = x.week_offset(run.start_week)
    return x.values[offset : offset + len(run)], y.values[offset : offset + len(run)]


def granger_test(x: WeeklySeries, y: WeeklySeries, lags: int) -> GrangerResult:
    """
    H0: x não Granger-causa y.

    Irrestrito: y_t ~ 1 + y_{t-1..t-k} + x_{t-1..t-k}
    Restrito:   y_t ~ 1 + y_{t-1..t-k}
    F = ((RSS_r - RSS_u)/k) / (RSS_u/(n_eff - 2k - 1))
    """
    if lags < 1:
        raise InputError(f"granger lags must be >= 1, got {lags}")
    if not is_aligned(x, y):
        raise AlignmentError("granger_test needs aligned series")

    xv, yv = _joint_run(x, y)
    n_eff = xv.size - lags
    df_resid = n_eff - 2 * lags - 1
    if df_resid < 5:
        raise DegenerateStatisticsError(
            f"too few observations: {xv.size} contiguous weeks leave {df_resid} residual degrees of freedom for k={lags}"
        )

    target = yv[lags:]
    y_lags = _lag_matrix(yv, lags, lags)
    x_lags = _lag_matrix(xv, lags, lags)
    ones = np.ones((n_eff, 1))

    restricted = ols_fit(target, np.hstack([ones, y_lags]))
    unrestricted = ols_fit(target, np.hstack([ones, y_lags, x_lags]))
    rss_r, rss_u = restricted.rss, min(unrestricted.rss, restricted.rss)

    total = float(np.sum((target - target.mean()) ** 2))
    if rss_u <= 1e-12 * max(total, 1e-300):
        logger.warning(f"[GRANGER] k={lags}: ajuste perfeito (RSS irrestrito = 0)")
        return GrangerResult(
            lags=lags, F=math.inf, p_value=0.0, n_obs=n_eff,
            rss_restricted=rss_r, rss_unrestricted=rss_u, degenerate_fit=True,
        )

    F = max(0.0, ((rss_r - rss_u) / lags) / (rss_u / df_resid))
    return GrangerResult(
        lags=lags,
        F=F,
        p_value=f_sf(F, lags, df_resid),
        n_obs=n_eff,
        rss_restricted=rss_r,
        rss_unrestricted=rss_u,
    )


def _granger_cell(x: WeeklySeries, y: WeeklySeries, k: int) -> GrangerResult:
    try:
        return granger_test(x, y, k)
    except SignalLabError as e:
        return GrangerResult(lags=k, error=str(e))


def granger_sweep(
    x: WeeklySeries,
    y: WeeklySeries,
    k_range: Sequence[int] = tuple(range(1, 9)),
    transform: str = "count",
    difference_first: bool = True,
    total: Optional[WeeklySeries] = None,
    n_jobs: int = 1,
) -> List[GrangerResult]:
    """
    Um GrangerResult por k; erros por k ficam registrados e a varredura continua.

    transform='fraction' usa x/total (Tweets positivos de pessoas sobre o total).
    """
    k_values = list(k_range)
    if not k_values:
        return []

    if transform == "fraction":
        if total is None:
            raise InputError("fraction transform needs the total tweet series")
        x, total = align(x, total)
        x = fraction_series(x, total)
    elif transform != "count":
        raise InputError(f"unknown transform {transform!r}; expected count or fraction")

    if not is_aligned(x, y):
        x, y = align(x, y)
    if difference_first:
        x, y = difference(x), difference(y)

    results = Parallel(n_jobs=n_jobs)(delayed(_granger_cell)(x, y, k) for k in k_values)
    significant = [r.lags for r in results if r.significant()]
    logger.info(
        f"[GRANGER] transform={transform}, diferença={difference_first}: "
        f"k significativos a 5% = {significant or 'nenhum'}"
    )
    return list(results)


def granger_frame(results: Sequence[GrangerResult], alpha: float = 0.05) -> pd.DataFrame:
    """CSV da varredura: k, F, p, n_eff, flag."""
    rows = []
    for r in results:
        if r.error:
            flag = "error: " + r.error
        elif r.degenerate_fit:
            flag = "degenerate_fit"
        else:
            flag = "significant" if r.significant(alpha) else ""
        rows.append({"k": r.lags, "F": r.F, "p": r.p_value, "n_eff": r.n_obs if not r.error else None, "flag": flag})
    return pd.DataFrame(rows, columns=["k", "F", "p", "n_eff", "flag"])


def granger_protocol(
    source: WeeklySeries,
    total: WeeklySeries,
    sales: WeeklySeries,
    k_range: Sequence[int] = tuple(range(1, 9)),
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Protocolo completo: contagem diferenciada, fração diferenciada e fração em nível.

    Retorna tabela longa: transform, difference, k, F, p, n_eff, flag.
    """
    frames = []
    for transform, diff in (("count", True), ("fraction", True), ("fraction", False)):
        results = granger_sweep(source, sales, k_range, transform=transform, difference_first=diff, total=total, n_jobs=n_jobs)
        frame = granger_frame(results)
        frame.insert(0, "difference", diff)
        frame.insert(0, "transform", transform)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)
