"""
Fixtures compartilhadas: geradores semeados, Tweets de exemplo e datasets sintéticos pequenos.
"""

from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np
import pytest

from signallab.config import DEFAULT_LEXICON_PATH
from signallab.ml.pipeline.make_synthetic import run_synth
from signallab.ml.pipeline.modules.classify import load_lexicon
from signallab.ml.pipeline.modules.ingest import TweetRecord, WeeklySeries
from signallab.ml.pipeline.modules.synth import SynthConfig

START = date(2012, 1, 2)


def make_series(values, start: date = START, label: str = "s") -> WeeklySeries:
    return WeeklySeries(start, np.asarray(values, dtype=float), label)


def make_tweet(**overrides) -> TweetRecord:
    fields = {
        "id": "t1",
        "text": "",
        "created_at": datetime(2012, 1, 4, 12, 0, tzinfo=timezone.utc),
        "user_name": "",
        "user_screen_name": "x9",
        "followers": 100,
        "friends": 50,
        "statuses_count": 500,
        "retweet_count": 0,
        "is_retweet": False,
        "user_timezone": "Amsterdam",
        "language": "nl",
    }
    fields.update(overrides)
    return TweetRecord(**fields)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(DEFAULT_LEXICON_PATH)


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory) -> Path:
    """Dataset sintético padrão (91 semanas, seed 1) gravado uma vez por sessão."""
    out = tmp_path_factory.mktemp("synth")
    run_synth(SynthConfig(seed=1), out, DEFAULT_LEXICON_PATH)
    return out


@pytest.fixture
def small_config() -> SynthConfig:
    return SynthConfig(seed=5, n_weeks=30, spam_spikes=[])
