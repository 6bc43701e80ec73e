"""
Configuração de logging compartilhada.

Mesmo formato dos scripts de pipeline: arquivo (opcional) + console,
mensagens com tag do estágio entre colchetes ([INGEST], [TSA], ...).
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(message)s'


def setup_logging(log_file: Optional[Union[str, Path]] = None, level: Union[int, str] = logging.INFO) -> logging.Logger:
    """Configura logging para arquivo e console."""
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.insert(0, logging.FileHandler(log_file, encoding='utf-8'))

    if isinstance(level, str):
        level = logging.getLevelName(level.upper())

    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    return logging.getLogger("signallab")
