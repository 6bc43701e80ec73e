"""
Linha de comando do signallab.

Subcomandos:
  synth     - gera dataset sintético com efeito conhecido
  ingest    - filtra o país e agrega Tweets/vendas por semana
  classify  - treina árvores, classifica Tweets ou mede concordância manual
  analyze   - correlação, ADF, Granger e estudo de eventos
  pipeline  - synth -> ingest -> classify -> analyze em um diretório

Códigos de saída: 0 sucesso, 2 entrada/uso, 3 alinhamento, 4 estatística degenerada.

Uso:
  python -m signallab.apps.cli.main synth --seed 7 --out data/
  python -m signallab.apps.cli.main ingest --tweets data/tweets.jsonl --sales data/sales.csv --country netherlands --out series/
  python -m signallab.apps.cli.main analyze --series-dir series/ --analysis correlate --lags=-4..4
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import date
from pathlib import Path
from typing import List, Optional, Sequence

from signallab import __version__
from signallab.config import DEFAULT_SYNTH_CONFIG_PATH, MIN_WEEKLY_TWEETS, Settings, get_settings
from signallab.errors import InputError, SignalLabError
from signallab.logging_config import setup_logging
from signallab.ml.pipeline.analyze import ANALYSES, run_analyze
from signallab.ml.pipeline.make_synthetic import run_synth
from signallab.ml.pipeline.modules.classify import POSITIVE_PERSONAL, TreeParams
from signallab.ml.pipeline.modules.events import EventStudyConfig
from signallab.ml.pipeline.modules.ingest import resolve_country
from signallab.ml.pipeline.modules.synth import SynthConfig
from signallab.ml.pipeline.orchestrator import PipelineOrchestrator
from signallab.ml.pipeline.prepare_dataset import run_ingest
from signallab.ml.pipeline.train_model import CLASSIFY_MODES, run_classify

logger = logging.getLogger(__name__)

# ============================================================================
# PARSING DE ARGUMENTOS
# ============================================================================


def parse_int_range(text: str) -> List[int]:
    """'-4..4' -> [-4, ..., 4]; '1,3,5' -> [1, 3, 5]."""
    try:
        if ".." in text:
            lo, hi = (int(part) for part in text.split("..", 1))
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer range {text!r} (use a..b or a,b,c)")


def parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid date {text!r} (use YYYY-MM-DD)")


def _add_country_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--country", help="País conhecido (france, germany, spain, netherlands).")
    parser.add_argument("--lang", help="Código de idioma dos Tweets (sobrescreve o país).")
    parser.add_argument("--capital", help="Capital usada como fuso horário (sobrescreve o país).")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signallab",
        description="Pipeline Tweets x vendas: classificação, séries semanais, Granger e estudo de eventos.",
    )
    parser.add_argument("--version", action="version", version=f"signallab {__version__}")
    parser.add_argument("--log-level", help="Nível de log (padrão: SIGNALLAB_LOG_LEVEL ou INFO).")
    parser.add_argument("--log-file", type=Path, help="Arquivo de log adicional.")
    sub = parser.add_subparsers(dest="command", required=True)

    # synth
    p = sub.add_parser("synth", help="Gera dataset sintético.")
    p.add_argument("--config", type=Path, default=DEFAULT_SYNTH_CONFIG_PATH, help="SynthConfig em JSON.")
    p.add_argument("--seed", type=int, help="Sobrescreve a semente do config.")
    p.add_argument("--n-weeks", type=int, help="Sobrescreve o número de semanas.")
    p.add_argument("--lexicon", type=Path, help="Léxico de primeiros nomes.")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_synth)

    # ingest
    p = sub.add_parser("ingest", help="Filtra o país e gera as séries semanais.")
    p.add_argument("--tweets", type=Path, required=True)
    p.add_argument("--sales", type=Path, required=True)
    _add_country_args(p)
    p.add_argument("--from", dest="start", type=parse_date)
    p.add_argument("--to", dest="end", type=parse_date)
    p.add_argument("--tweet-format", choices=["jsonlines", "csv"], help="Padrão: pela extensão do arquivo.")
    p.add_argument("--min-weekly-tweets", type=int, default=MIN_WEEKLY_TWEETS)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_ingest)

    # classify
    p = sub.add_parser("classify", help="Treina, aplica ou avalia a classificação.")
    p.add_argument("--mode", choices=CLASSIFY_MODES, required=True)
    p.add_argument("--tweets", type=Path, help="Tweets (obrigatório em train/predict).")
    p.add_argument("--labels", type=Path, help="Avaliações manuais (obrigatório em train/agreement).")
    p.add_argument("--lexicon", type=Path)
    p.add_argument("--model-dir", type=Path, help="Diretório das árvores (padrão: --out).")
    p.add_argument("--series-dir", type=Path, help="Diretório com weekly_series.csv (semanas das séries por classe).")
    p.add_argument("--max-depth", type=int, default=TreeParams().max_depth)
    p.add_argument("--min-leaf", type=int, default=TreeParams().min_leaf)
    p.add_argument("--seed", type=int, default=0, help="Semente da divisão 80/20.")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_classify)

    # analyze
    p = sub.add_parser("analyze", help="Análises estatísticas sobre as séries.")
    p.add_argument("--series-dir", type=Path, required=True)
    p.add_argument("--analysis", choices=list(ANALYSES) + ["all"], default="all")
    p.add_argument("--source", default=POSITIVE_PERSONAL.description, help="Filtro fonte usuário/tipo/sentimento.")
    p.add_argument("--lags", type=parse_int_range, default=list(range(-4, 5)), help="Defasagens da correlação (use --lags=-4..4).")
    p.add_argument("--k-range", type=parse_int_range, default=list(range(1, 9)), help="Defasagens do Granger (1..8).")
    p.add_argument("--fraction", action="store_true", help="Granger sobre a fração fonte/total.")
    p.add_argument("--difference", action="store_true", help="Diferença de primeira ordem antes do Granger.")
    p.add_argument("--adf-lags", type=int, default=1)
    p.add_argument("--q", type=float, default=0.90, help="Quantil dos picos.")
    p.add_argument("--window", type=int, default=3, help="Janela do evento (semanas).")
    p.add_argument("--est-window", type=int, default=6, help="Janela de estimação (semanas).")
    p.add_argument("--no-merge", action="store_true", help="Não funde semanas de pico adjacentes.")
    p.add_argument("--two-sided", action="store_true")
    p.add_argument("--sweep", action="store_true", help="Grade de robustez q x w x L.")
    p.add_argument("--min-weekly-tweets", type=int, default=MIN_WEEKLY_TWEETS)
    p.add_argument("--out", type=Path, help="Padrão: --series-dir.")
    p.set_defaults(handler=cmd_analyze)

    # pipeline
    p = sub.add_parser("pipeline", help="Executa todos os estágios sobre um dataset sintético.")
    p.add_argument("--config", type=Path, default=DEFAULT_SYNTH_CONFIG_PATH)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-weeks", type=int)
    p.add_argument("--data-root", type=Path)
    p.add_argument("--out", type=Path, help="Diretório da execução (padrão: <data_root>/run_seed<N>).")
    p.add_argument("--no-sweep", action="store_true")
    p.add_argument("--force-all", action="store_true")
    p.set_defaults(handler=cmd_pipeline)

    return parser


# ============================================================================
# SUBCOMANDOS
# ============================================================================


def _synth_config(args: argparse.Namespace) -> SynthConfig:
    cfg = SynthConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.n_weeks is not None:
        overrides["n_weeks"] = args.n_weeks
    if overrides:
        cfg = SynthConfig.from_dict({**cfg.model_dump(), **overrides})
    return cfg


def cmd_synth(args: argparse.Namespace, settings: Settings) -> None:
    manifest = run_synth(_synth_config(args), args.out, args.lexicon or settings.lexicon_path)
    print(f"[OK] Dataset sintético: {', '.join(manifest.outputs)} em {args.out}")


def cmd_ingest(args: argparse.Namespace, settings: Settings) -> None:
    country = resolve_country(args.country, args.lang, args.capital)
    manifest = run_ingest(
        args.tweets,
        args.sales,
        country,
        args.out,
        start=args.start,
        end=args.end,
        tweet_format=args.tweet_format,
        min_weekly_tweets=args.min_weekly_tweets,
    )
    print(f"[OK] Séries semanais ({country.name}) em {args.out}")
    for warning in manifest.warnings:
        print(f"[WARN] {warning}")


def cmd_classify(args: argparse.Namespace, settings: Settings) -> None:
    if args.mode != "agreement" and args.tweets is None:
        raise InputError(f"classify --mode {args.mode} needs --tweets")
    params = TreeParams(max_depth=args.max_depth, min_leaf=args.min_leaf, split_seed=args.seed)
    manifest = run_classify(
        args.mode,
        args.tweets or "",
        args.out,
        args.lexicon or settings.lexicon_path,
        labels_path=args.labels,
        model_dir=args.model_dir,
        series_dir=args.series_dir,
        params=params,
        n_jobs=settings.n_jobs,
    )
    print(f"[OK] classify {args.mode}: {', '.join(manifest.outputs)}")


def cmd_analyze(args: argparse.Namespace, settings: Settings) -> None:
    cfg = EventStudyConfig.from_dict({
        "quantile": args.q,
        "event_window": args.window,
        "estimation_window": args.est_window,
        "merge_adjacent": not args.no_merge,
        "one_sided": not args.two_sided,
    })
    manifest = run_analyze(
        args.series_dir,
        args.analysis,
        out_dir=args.out,
        source=args.source,
        lags=args.lags,
        fraction=args.fraction,
        difference=args.difference,
        k_range=args.k_range,
        adf_lag_order=args.adf_lags,
        event_config=cfg,
        sweep=args.sweep,
        min_weekly_tweets=args.min_weekly_tweets,
        n_jobs=settings.n_jobs,
    )
    print(f"[OK] analyze {args.analysis}: {', '.join(manifest.outputs)}")
    for warning in manifest.warnings:
        print(f"[WARN] {warning}")


def cmd_pipeline(args: argparse.Namespace, settings: Settings) -> int:
    orchestrator = PipelineOrchestrator(args.data_root, settings)
    ok = orchestrator.run(_synth_config(args), run_dir=args.out, sweep=not args.no_sweep, force_all=args.force_all)
    if ok:
        print(f"[OK] Pipeline concluído em {orchestrator.status['run_dir']}")
        return 0
    error = orchestrator.last_error
    print(f"error: {error}", file=sys.stderr)
    return getattr(error, "exit_code", 1)


# ============================================================================
# MAIN
# ============================================================================


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    setup_logging(args.log_file or settings.log_file, args.log_level or settings.log_level)

    try:
        code = args.handler(args, settings)
        return code or 0
    except SignalLabError as e:
        logger.error(f"[CLI] {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"[CLI] {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
