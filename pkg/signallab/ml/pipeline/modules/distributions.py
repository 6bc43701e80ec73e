"""
Caudas das distribuições t de Student e F via beta incompleta regularizada.

  P(T > t | df)       = 0.5 * I_{df/(df+t^2)}(df/2, 1/2)            (t >= 0)
  P(F > f | d1, d2)   = I_{d2/(d2+d1 f)}(d2/2, d1/2)
"""

from __future__ import annotations

import math

from scipy.special import betainc

from signallab.errors import InputError


def _check_df(*dfs: float) -> None:
    for df in dfs:
        if not df > 0:
            raise InputError(f"degrees of freedom must be positive, got {df}")


def t_sf(t: float, df: float) -> float:
    """Cauda superior P(T > t)."""
    _check_df(df)
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return tail if t >= 0 else 1.0 - tail


def t_two_sided(t: float, df: float) -> float:
    """P(|T| > |t|)."""
    _check_df(df)
    if math.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def f_sf(f: float, d1: float, d2: float) -> float:
    """Cauda superior P(F > f)."""
    _check_df(d1, d2)
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)))
