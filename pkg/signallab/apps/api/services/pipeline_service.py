"""
Serviço que executa o orquestrador para a API e traduz falhas em status HTTP.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from signallab.config import DEFAULT_SYNTH_CONFIG_PATH, Settings, get_settings
from signallab.errors import AlignmentError, DegenerateStatisticsError, InputError
from signallab.ml.pipeline.modules.synth import SynthConfig
from signallab.ml.pipeline.orchestrator import PipelineOrchestrator, PipelineStatus, read_status

logger = logging.getLogger(__name__)


def http_status_for(error: Optional[Exception]) -> int:
    if isinstance(error, InputError):
        return 400
    if isinstance(error, (AlignmentError, DegenerateStatisticsError)):
        return 422
    return 500


class PipelineService:
    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    @property
    def data_root(self) -> Path:
        return Path(self.settings.data_root)

    def status(self) -> Dict[str, Any]:
        return read_status(self.data_root)

    def is_running(self) -> bool:
        return self.status().get("status") == PipelineStatus.RUNNING.value

    def run(
        self,
        seed: int,
        n_weeks: int,
        out_dir: Optional[str] = None,
        sweep: bool = False,
        force_all: bool = False,
    ) -> Tuple[bool, Dict[str, Any], Optional[Exception]]:
        """Executa de forma síncrona; devolve (ok, status, erro)."""
        base = SynthConfig.load(DEFAULT_SYNTH_CONFIG_PATH)
        cfg = SynthConfig.from_dict({**base.model_dump(), "seed": seed, "n_weeks": n_weeks})

        orchestrator = PipelineOrchestrator(self.data_root, self.settings)
        ok = orchestrator.run(cfg, run_dir=Path(out_dir) if out_dir else None, sweep=sweep, force_all=force_all)
        if not ok:
            logger.error(f"[API] Pipeline falhou: {orchestrator.last_error}")
        return ok, orchestrator.status, orchestrator.last_error
