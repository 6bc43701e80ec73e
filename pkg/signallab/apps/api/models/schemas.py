"""
Esquemas Pydantic para a API.
"""

from datetime import date
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from signallab.ml.pipeline.modules.tsa import DEFAULT_LAGS


class HealthCheck(BaseModel):
    """
    Modelo para verificação de saúde da API.
    """
    status: str
    version: str


class PipelineRunRequest(BaseModel):
    """Requisição para executar o pipeline sobre um dataset sintético."""
    seed: int = Field(0, description="Semente do gerador sintético")
    n_weeks: int = Field(91, ge=20, description="Número de semanas geradas")
    out_dir: Optional[str] = Field(None, description="Diretório da execução (padrão: <data_root>/run_seed<N>)")
    sweep: bool = Field(False, description="Inclui a grade de robustez do estudo de eventos")
    force_all: bool = False

    model_config = {
        "json_schema_extra": {
            "example": {"seed": 7, "n_weeks": 91}
        }
    }


class PipelineStatusResponse(BaseModel):
    """Documento de status persistido pelo orquestrador."""
    status: str
    current_stage: str
    completed_stages: List[str]
    errors: List[str]
    failed_stage: Optional[str] = None
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    run_dir: Optional[str] = None


class CorrelationRequest(BaseModel):
    """Duas séries semanais já alinhadas (None = semana ausente)."""
    tweets: List[Optional[float]] = Field(..., min_length=1)
    sales: List[Optional[float]] = Field(..., min_length=1)
    lags: List[int] = Field(default_factory=lambda: list(DEFAULT_LAGS))
    start_week: date = Field(date(2012, 1, 2), description="Segunda-feira da primeira semana")

    @field_validator("start_week")
    @classmethod
    def validate_monday(cls, v: date) -> date:
        if v.weekday() != 0:
            raise ValueError(f"start_week {v.isoformat()} is not a Monday")
        return v

    model_config = {
        "json_schema_extra": {
            "example": {"tweets": [10, 12, 30, 8, 9, 11], "sales": [100, 98, 102, 140, 101, 99], "lags": [0, 1, 2]}
        }
    }


class LagCorrelationOutput(BaseModel):
    r: Optional[float] = None
    p: Optional[float] = None
    n: int
    reason: Optional[str] = None


class CorrelationResponse(BaseModel):
    n_weeks: int
    lags: Dict[int, LagCorrelationOutput]
