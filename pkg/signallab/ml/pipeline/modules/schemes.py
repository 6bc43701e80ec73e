"""
Vocabulários de classificação manual (esquema bruto) e revisado.

Esquema bruto: 10 tipos de Tweet, 3 tipos de usuário, 3 sentimentos.
Esquema revisado: classes agregadas após medir a concordância entre avaliadores.
"""

from __future__ import annotations

from typing import Dict, Tuple

from signallab.errors import InputError

DIMENSIONS: Tuple[str, ...] = ("tweet_type", "user_type", "sentiment")

RAW_TWEET_TYPES: Tuple[str, ...] = (
    "job_advert",
    "product_advert",
    "customer_experience",
    "response_to_experience",
    "chatter",
    "what_was_bought",
    "information_request",
    "advice",
    "news",
    "other",
)
RAW_USER_TYPES: Tuple[str, ...] = ("person", "company", "other_organizations")
RAW_SENTIMENTS: Tuple[str, ...] = ("positive", "neutral", "negative")

REVISED_TWEET_TYPES: Tuple[str, ...] = ("job_advert", "product_advert", "personal", "other")
REVISED_USER_TYPES: Tuple[str, ...] = ("person", "organization")
REVISED_SENTIMENTS: Tuple[str, ...] = ("positive", "not_positive")

RAW_CLASSES: Dict[str, Tuple[str, ...]] = {
    "tweet_type": RAW_TWEET_TYPES,
    "user_type": RAW_USER_TYPES,
    "sentiment": RAW_SENTIMENTS,
}
REVISED_CLASSES: Dict[str, Tuple[str, ...]] = {
    "tweet_type": REVISED_TWEET_TYPES,
    "user_type": REVISED_USER_TYPES,
    "sentiment": REVISED_SENTIMENTS,
}
SCHEMES: Dict[str, Dict[str, Tuple[str, ...]]] = {"raw": RAW_CLASSES, "revised": REVISED_CLASSES}

# Agregação bruto -> revisado
REVISION_MAP: Dict[str, Dict[str, str]] = {
    "tweet_type": {
        "job_advert": "job_advert",
        "product_advert": "product_advert",
        "customer_experience": "personal",
        "response_to_experience": "personal",
        "chatter": "personal",
        "what_was_bought": "personal",
        "information_request": "personal",
        "advice": "personal",
        "news": "other",
        "other": "other",
    },
    "user_type": {
        "person": "person",
        "company": "organization",
        "other_organizations": "organization",
    },
    "sentiment": {
        "positive": "positive",
        "neutral": "not_positive",
        "negative": "not_positive",
    },
}


def normalize_class_name(value: str) -> str:
    """'Customer Experience' / 'customer-experience' -> 'customer_experience'."""
    return "_".join(str(value).strip().lower().replace("-", " ").split())


def check_dimension(dimension: str) -> str:
    if dimension not in DIMENSIONS:
        raise InputError(f"unknown label dimension {dimension!r}; expected one of {list(DIMENSIONS)}")
    return dimension
