"""
Geração do dataset sintético (estágio synth).

Entrada: SynthConfig (JSON) + léxico de primeiros nomes
Saída: tweets.jsonl, sales.csv, labels.csv, ground_truth.json, manifest_synth.json
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Union

from signallab.ml.pipeline.modules.classify import load_lexicon
from signallab.ml.pipeline.modules.synth import SynthConfig, generate_dataset, generate_labels, write_dataset
from signallab.ml.pipeline.reports import RunManifest, write_manifest

logger = logging.getLogger(__name__)


def run_synth(cfg: SynthConfig, out_dir: Union[str, Path], lexicon_path: Union[str, Path]) -> RunManifest:
    out = Path(out_dir)
    manifest = RunManifest(
        subcommand="synth",
        inputs={"lexicon": str(lexicon_path)},
        config=cfg.model_dump(mode="json"),
        seed=cfg.seed,
    )

    tweets, sales, truth = generate_dataset(cfg, load_lexicon(lexicon_path))
    labels = generate_labels(tweets, truth, cfg)
    for path in write_dataset(tweets, sales, labels, truth, out).values():
        manifest.add_output(path)

    write_manifest(manifest, out)
    logger.info(f"[SYNTH] {len(tweets)} Tweets, {len(sales)} semanas de vendas, {len(labels)} avaliações em {out}")
    return manifest
