"""
Endpoints da API para orquestração do pipeline.

Endpoints:
  POST /api/v1/pipeline/run          - Executa o pipeline (síncrono)
  GET  /api/v1/pipeline/status       - Status atual
  GET  /api/v1/pipeline/stages       - Lista de estágios
"""

from typing import Any, Dict, List

from fastapi import APIRouter, Depends, HTTPException

from signallab.apps.api.models.schemas import PipelineRunRequest, PipelineStatusResponse
from signallab.apps.api.services.pipeline_service import PipelineService, http_status_for
from signallab.errors import InputError
from signallab.ml.pipeline.orchestrator import STAGE_ORDER

router = APIRouter(prefix="/api/v1/pipeline", tags=["pipeline"])


def get_pipeline_service() -> PipelineService:
    return PipelineService()


def _status_response(status: Dict[str, Any]) -> PipelineStatusResponse:
    return PipelineStatusResponse(
        status=status.get("status", "unknown"),
        current_stage=status.get("current_stage", "idle"),
        completed_stages=status.get("completed_stages", []),
        errors=status.get("errors", []),
        failed_stage=status.get("failed_stage"),
        started_at=status.get("started_at"),
        finished_at=status.get("finished_at"),
        run_dir=status.get("run_dir"),
    )


# ============================================================================
# ENDPOINTS
# ============================================================================

@router.post("/run", response_model=PipelineStatusResponse)
def run_pipeline(request: PipelineRunRequest, service: PipelineService = Depends(get_pipeline_service)):
    """
    Executa synth -> ingest -> train -> predict -> analyze e devolve o status.

    Raises:
        HTTPException 409: pipeline já em execução
        HTTPException 400/422/500: estágio falhou (entrada, estatística, outro)
    """
    if service.is_running():
        raise HTTPException(status_code=409, detail="Pipeline já está em execução. Aguarde conclusão.")

    try:
        ok, status, error = service.run(request.seed, request.n_weeks, request.out_dir, request.sweep, request.force_all)
    except InputError as e:
        raise HTTPException(status_code=400, detail=str(e))

    if not ok:
        raise HTTPException(
            status_code=http_status_for(error),
            detail={"error": str(error), "failed_stage": status.get("failed_stage")},
        )
    return _status_response(status)


@router.get("/status", response_model=PipelineStatusResponse)
def pipeline_status(service: PipelineService = Depends(get_pipeline_service)):
    return _status_response(service.status())


@router.get("/stages")
async def pipeline_stages() -> Dict[str, List[str]]:
    return {"stages": [stage.value for stage in STAGE_ORDER]}
