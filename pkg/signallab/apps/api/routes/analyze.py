"""
Correlação com defasagens para ferramentas externas que já têm as séries.

Endpoint:
  POST /api/v1/analyze/correlation
"""

from fastapi import APIRouter, HTTPException

from signallab.apps.api.models.schemas import CorrelationRequest, CorrelationResponse
from signallab.errors import SignalLabError
from signallab.ml.pipeline.modules.ingest import WeeklySeries
from signallab.ml.pipeline.modules.tsa import lagged_correlation

router = APIRouter(prefix="/api/v1/analyze", tags=["analyze"])


def _values(values):
    return [float("nan") if v is None else v for v in values]


@router.post("/correlation", response_model=CorrelationResponse)
def correlation(request: CorrelationRequest):
    if len(request.tweets) != len(request.sales):
        raise HTTPException(
            status_code=400,
            detail=f"tweets and sales must have equal lengths, got {len(request.tweets)} and {len(request.sales)}",
        )
    try:
        tweets = WeeklySeries(request.start_week, _values(request.tweets), label="tweets")
        sales = WeeklySeries(request.start_week, _values(request.sales), label="sales")
        result = lagged_correlation(tweets, sales, request.lags)
    except SignalLabError as e:
        raise HTTPException(status_code=400, detail=str(e))

    return {
        "n_weeks": len(tweets),
        "lags": {lag: {"r": c.r, "p": c.p, "n": c.n, "reason": c.reason} for lag, c in result.items()},
    }
