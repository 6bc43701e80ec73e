"""
Orquestrador central do pipeline.

Fluxo linear:
  1. Geração sintética (dataset/tweets.jsonl, sales.csv, labels.csv)
  2. Ingestão (series/weekly_series.csv, filtered_tweets.jsonl)
  3. Treinamento dos classificadores (models/tree_*.json)
  4. Classificação (series/predictions.csv, classified_series.csv)
  5. Análise (reports/correlation.csv, adf.json, granger.csv, eventstudy.json, robustness.csv)

Responsabilidades:
  - Orquestração linear dos estágios
  - Validação de pré-requisitos
  - Status tracking (pipeline_status.json, lido pela API)
  - Tratamento de erros por estágio
"""

from __future__ import annotations

import json
import logging
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from signallab import __version__
from signallab.config import Settings, get_settings
from signallab.ml.pipeline.analyze import run_analyze
from signallab.ml.pipeline.make_synthetic import run_synth
from signallab.ml.pipeline.modules.synth import SynthConfig
from signallab.ml.pipeline.prepare_dataset import FILTERED_TWEETS_NAME, WEEKLY_SERIES_NAME, run_ingest
from signallab.ml.pipeline.train_model import CLASSIFIED_SERIES_NAME, TRAIN_REPORT_NAME, run_classify

logger = logging.getLogger(__name__)

STATUS_NAME = "pipeline_status.json"

# ============================================================================
# ENUMS
# ============================================================================


class PipelineStage(Enum):
    IDLE = "idle"
    GERACAO_SINTETICA = "geracao_sintetica"
    INGESTAO = "ingestao"
    TREINAMENTO_CLASSIFICADOR = "treinamento_classificador"
    CLASSIFICACAO = "classificacao"
    ANALISE = "analise"
    COMPLETED = "completed"
    ERROR = "error"


class PipelineStatus(Enum):
    NOT_STARTED = "not_started"
    RUNNING = "running"
    SUCCESS = "success"
    FAILED = "failed"


STAGE_ORDER = (
    PipelineStage.GERACAO_SINTETICA,
    PipelineStage.INGESTAO,
    PipelineStage.TREINAMENTO_CLASSIFICADOR,
    PipelineStage.CLASSIFICACAO,
    PipelineStage.ANALISE,
)


def default_status() -> Dict[str, Any]:
    return {
        "version": __version__,
        "status": PipelineStatus.NOT_STARTED.value,
        "started_at": None,
        "finished_at": None,
        "current_stage": PipelineStage.IDLE.value,
        "completed_stages": [],
        "failed_stage": None,
        "errors": [],
        "config": None,
        "run_dir": None,
    }


def read_status(data_root: Path) -> Dict[str, Any]:
    """Status persistido (ou o padrão not_started)."""
    status = default_status()
    path = Path(data_root) / STATUS_NAME
    if path.exists():
        try:
            status.update(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"[INIT] Erro ao carregar status anterior: {e}")
    return status


# ============================================================================
# ORCHESTRATOR
# ============================================================================


class PipelineOrchestrator:
    """Executa synth -> ingest -> train -> predict -> analyze em um diretório de execução."""

    def __init__(self, data_root: Optional[Path] = None, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.data_root = Path(data_root or self.settings.data_root)
        self.data_root.mkdir(parents=True, exist_ok=True)
        self.status_file = self.data_root / STATUS_NAME
        self.status = read_status(self.data_root)
        self.last_error: Optional[Exception] = None
        if self.status["status"] != PipelineStatus.NOT_STARTED.value:
            logger.info("[INIT] Status anterior carregado")

    def _save_status(self) -> None:
        try:
            self.status_file.write_text(json.dumps(self.status, indent=2, default=str), encoding="utf-8")
        except OSError as e:
            logger.error(f"[SAVE_STATUS] Erro ao salvar status: {e}")

    # ------------------------------------------------------------------------

    def run(self, cfg: SynthConfig, run_dir: Optional[Path] = None, sweep: bool = True, force_all: bool = False) -> bool:
        """
        Executa o pipeline completo. Estágios já completos com a mesma
        configuração (e arquivos presentes) são pulados, salvo force_all.
        """
        run_dir = Path(run_dir) if run_dir else self.data_root / f"run_seed{cfg.seed}"
        config = {"synth": cfg.model_dump(mode="json"), "sweep": sweep, "run_dir": str(run_dir)}
        if self.status.get("config") != config:
            self.status["completed_stages"] = []

        self.status.update({
            "status": PipelineStatus.RUNNING.value,
            "started_at": datetime.now().isoformat(),
            "finished_at": None,
            "failed_stage": None,
            "errors": [],
            "config": config,
            "run_dir": str(run_dir),
        })
        self._save_status()
        logger.info(f"[PIPELINE] Pipeline iniciado (seed={cfg.seed}, n_weeks={cfg.n_weeks}) em {run_dir}")

        stages: Dict[PipelineStage, Callable[[], Any]] = {
            PipelineStage.GERACAO_SINTETICA: lambda: self._stage_synth(cfg, run_dir),
            PipelineStage.INGESTAO: lambda: self._stage_ingest(cfg, run_dir),
            PipelineStage.TREINAMENTO_CLASSIFICADOR: lambda: self._stage_train(cfg, run_dir),
            PipelineStage.CLASSIFICACAO: lambda: self._stage_predict(run_dir),
            PipelineStage.ANALISE: lambda: self._stage_analyze(run_dir, sweep),
        }

        for stage in STAGE_ORDER:
            done = stage.value in self.status["completed_stages"]
            if done and not force_all and self._outputs_ok(stage, run_dir):
                logger.info(f"[PIPELINE] Estágio {stage.value} já completo, pulando...")
                continue
            if done:
                self.status["completed_stages"].remove(stage.value)
            if not self._run_stage(stage, stages[stage]):
                return False

        self.status["status"] = PipelineStatus.SUCCESS.value
        self.status["finished_at"] = datetime.now().isoformat()
        self.status["current_stage"] = PipelineStage.COMPLETED.value
        self._save_status()
        logger.info(f"[PIPELINE] ✓ Pipeline concluído: {', '.join(self.status['completed_stages'])}")
        return True

    def _run_stage(self, stage: PipelineStage, stage_func: Callable[[], Any]) -> bool:
        try:
            self.status["current_stage"] = stage.value
            logger.info(f"[PIPELINE] Iniciando estágio: {stage.value}")
            self._save_status()

            stage_func()

            self.status["completed_stages"].append(stage.value)
            logger.info(f"[PIPELINE] ✓ Estágio concluído: {stage.value}")
            self._save_status()
            return True

        except Exception as e:
            error_msg = f"Erro no estágio {stage.value}: {e}"
            self.last_error = e
            logger.error(f"[PIPELINE] {error_msg}")
            self.status["errors"].append(error_msg)
            self.status["failed_stage"] = stage.value
            self.status["status"] = PipelineStatus.FAILED.value
            self.status["current_stage"] = PipelineStage.ERROR.value
            self.status["finished_at"] = datetime.now().isoformat()
            self._save_status()
            return False

    def _outputs_ok(self, stage: PipelineStage, run_dir: Path) -> bool:
        """Arquivo principal produzido por cada estágio."""
        expected = {
            PipelineStage.GERACAO_SINTETICA: run_dir / "dataset" / "tweets.jsonl",
            PipelineStage.INGESTAO: run_dir / "series" / WEEKLY_SERIES_NAME,
            PipelineStage.TREINAMENTO_CLASSIFICADOR: run_dir / "models" / TRAIN_REPORT_NAME,
            PipelineStage.CLASSIFICACAO: run_dir / "series" / CLASSIFIED_SERIES_NAME,
            PipelineStage.ANALISE: run_dir / "reports" / "manifest_analyze_all.json",
        }[stage]
        if not expected.exists():
            logger.warning(f"[PIPELINE] Estágio {stage.value} marcado como completo, mas {expected} não existe. Re-executando.")
            return False
        return True

    # ========================================================================
    # ESTÁGIOS
    # ========================================================================

    def _stage_synth(self, cfg: SynthConfig, run_dir: Path) -> None:
        run_synth(cfg, run_dir / "dataset", self.settings.lexicon_path)

    def _stage_ingest(self, cfg: SynthConfig, run_dir: Path) -> None:
        dataset = run_dir / "dataset"
        run_ingest(dataset / "tweets.jsonl", dataset / "sales.csv", cfg.country, run_dir / "series")

    def _stage_train(self, cfg: SynthConfig, run_dir: Path) -> None:
        run_classify(
            "train",
            run_dir / "series" / FILTERED_TWEETS_NAME,
            run_dir / "models",
            self.settings.lexicon_path,
            labels_path=run_dir / "dataset" / "labels.csv",
            n_jobs=self.settings.n_jobs,
        )

    def _stage_predict(self, run_dir: Path) -> None:
        run_classify(
            "predict",
            run_dir / "series" / FILTERED_TWEETS_NAME,
            run_dir / "series",
            self.settings.lexicon_path,
            model_dir=run_dir / "models",
        )

    def _stage_analyze(self, run_dir: Path, sweep: bool) -> None:
        run_analyze(run_dir / "series", "all", out_dir=run_dir / "reports", sweep=sweep, n_jobs=self.settings.n_jobs)

    def reset(self) -> None:
        """Reseta o status do pipeline para recomeçar do zero."""
        self.status = default_status()
        self._save_status()
        logger.info("[PIPELINE] Pipeline resetado")
