"""
Configuração via variáveis de ambiente (.env suportado).

Variáveis (ver config/env.template):
  SIGNALLAB_LEXICON     - léxico de primeiros nomes (um por linha)
  SIGNALLAB_DATA_ROOT   - diretório raiz dos artefatos do pipeline/API
  SIGNALLAB_LOG_LEVEL   - nível de log (INFO)
  SIGNALLAB_LOG_FILE    - arquivo de log opcional
  SIGNALLAB_N_JOBS      - paralelismo joblib para varreduras e árvores
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

PACKAGE_ROOT = Path(__file__).resolve().parent
RESOURCES_DIR = PACKAGE_ROOT / "ml" / "resources"
DEFAULT_LEXICON_PATH = RESOURCES_DIR / "first_names.txt"
DEFAULT_SYNTH_CONFIG_PATH = RESOURCES_DIR / "synth_default.json"

# Heurística de viabilidade: abaixo de ~40 Tweets/semana a relação com vendas
# dificilmente aparece.
MIN_WEEKLY_TWEETS = 40


class Settings(BaseModel):
    """Configuração resolvida do ambiente."""

    lexicon_path: Path = DEFAULT_LEXICON_PATH
    data_root: Path = Path("signallab_data")
    log_level: str = "INFO"
    log_file: Optional[Path] = None
    n_jobs: int = Field(default=1, ge=1)


def get_settings() -> Settings:
    """Lê .env (se existir) e monta Settings."""
    load_dotenv()

    values = {}
    if os.environ.get("SIGNALLAB_LEXICON"):
        values["lexicon_path"] = Path(os.environ["SIGNALLAB_LEXICON"])
    if os.environ.get("SIGNALLAB_DATA_ROOT"):
        values["data_root"] = Path(os.environ["SIGNALLAB_DATA_ROOT"])
    if os.environ.get("SIGNALLAB_LOG_LEVEL"):
        values["log_level"] = os.environ["SIGNALLAB_LOG_LEVEL"]
    if os.environ.get("SIGNALLAB_LOG_FILE"):
        values["log_file"] = Path(os.environ["SIGNALLAB_LOG_FILE"])
    if os.environ.get("SIGNALLAB_N_JOBS"):
        values["n_jobs"] = int(os.environ["SIGNALLAB_N_JOBS"])

    return Settings(**values)
