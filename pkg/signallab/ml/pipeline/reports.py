"""
Persistência de relatórios: manifesto da execução, JSON e CSV determinísticos.

Floats em CSV usam formato fixo para que reexecuções gerem arquivos idênticos.
O único campo não determinístico é RunManifest.created_at.
"""

from __future__ import annotations

import json
import logging
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from signallab import __version__
from signallab.errors import InputError
from signallab.ml.pipeline.modules.ingest import WeeklySeries

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


class RunManifest(BaseModel):
    subcommand: str
    inputs: Dict[str, str] = {}
    config: Dict[str, Any] = {}
    seed: Optional[int] = None
    tool_version: str = __version__
    outputs: List[str] = []
    warnings: List[str] = []
    created_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"))

    @property
    def filename(self) -> str:
        """Um manifesto por subcomando: manifest_ingest.json, manifest_classify_predict.json..."""
        return "manifest_" + self.subcommand.replace(":", "_") + ".json"

    def add_output(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        if path.name not in self.outputs:
            self.outputs.append(path.name)
        return path

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)


def _plain(value: Any) -> Any:
    """Converte modelos/numpy/datas para tipos JSON (inf vira Infinity)."""
    if isinstance(value, BaseModel):
        return _plain(value.model_dump(mode="python"))
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (date, datetime)):
        return value.isoformat()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and np.isnan(value):
        return None
    return value


def write_json(payload: Any, path: Union[str, Path], manifest: Optional[RunManifest] = None) -> Path:
    """Grava JSON com chave 'manifest' apontando para o manifesto do diretório."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = _plain(payload)
    if manifest is not None:
        data = {"manifest": manifest.filename, **(data if isinstance(data, dict) else {"report": data})}
        manifest.add_output(path)
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    logger.info(f"[SAVE] {path}")
    return path


def read_json(path: Union[str, Path]) -> dict:
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: file not found")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e.msg})")


def write_csv(df: pd.DataFrame, path: Union[str, Path], manifest: Optional[RunManifest] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    if manifest is not None:
        manifest.add_output(path)
    logger.info(f"[SAVE] {path} ({len(df)} linhas)")
    return path


def write_manifest(manifest: RunManifest, out_dir: Union[str, Path]) -> Path:
    path = Path(out_dir) / manifest.filename
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


# ============================================================================
# SÉRIES SEMANAIS
# ============================================================================


def series_frame(series: Mapping[str, WeeklySeries]) -> pd.DataFrame:
    """Formato largo: week_start + uma coluna por série (vazio = ausente)."""
    if not series:
        raise InputError("no series to write")
    items = list(series.items())
    first = items[0][1]
    for name, s in items[1:]:
        if s.start_week != first.start_week or len(s) != len(first):
            raise InputError(f"series {name} is not aligned with {items[0][0]}")
    frame = pd.DataFrame({"week_start": [d.date().isoformat() for d in first.weeks()]})
    for name, s in items:
        frame[name] = s.values
    return frame


def write_weekly_series(series: Mapping[str, WeeklySeries], path: Union[str, Path], manifest: Optional[RunManifest] = None) -> Path:
    return write_csv(series_frame(series), path, manifest)


def read_weekly_series(path: Union[str, Path]) -> Dict[str, WeeklySeries]:
    """Lê o CSV largo de volta para WeeklySeries (uma por coluna)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: file not found")
    df = pd.read_csv(path, dtype={"week_start": str})
    if "week_start" not in df.columns or df.empty:
        raise InputError(f"{path}: expected a week_start column and at least one week")
    start = date.fromisoformat(df["week_start"].iloc[0])
    return {
        str(column): WeeklySeries(start, df[column].to_numpy(dtype=float), label=str(column))
        for column in df.columns
        if column != "week_start"
    }
