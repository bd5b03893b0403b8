"""Trainable character n-gram naive Bayes language identifier.

Models hold add-alpha-smoothed log probabilities for n-grams of a few
orders (default 1..3) over lowercased NFC text. Scores are summed over
all orders with equal weight and divided by the total gram count, so
margins are comparable across sentence lengths.

Scoring accumulates per language in order-major, position-inner sequence;
the batch kernel and the pure fallback follow the same sequence and
produce identical floats.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import _scoring
from .core import normalize_line

MODEL_VERSION = 1


class TrainingError(ValueError):
    pass


class UndecidableTextError(ValueError):
    """Text has no n-grams to score (empty after normalization)."""


class ModelError(ValueError):
    pass


class ModelVersionError(ModelError):
    pass


class ModelFormatError(ModelError):
    pass


class ModelFieldError(ModelError):
    pass


@dataclass
class LangIdModel:
    """languages order doubles as tie-break priority in identify."""

    languages: list[str]
    orders: list[int]
    alpha: float
    log_probs: dict = field(repr=False)  # lang -> order -> gram -> log prob
    unseen: dict = field(repr=False)     # lang -> order -> log prob
    version: int = MODEL_VERSION


@dataclass(frozen=True, slots=True)
class LangIdVerdict:
    language: str
    margin: float
    score: float


def _gram_counts(texts, order):
    c = Counter()
    for t in texts:
        if len(t) >= order:
            c.update(t[i : i + order] for i in range(len(t) - order + 1))
    return c


def train(samples: Mapping[str, Iterable[str]], orders=(1, 2, 3), alpha=0.5) -> LangIdModel:
    """Estimate per-language smoothed n-gram log probabilities.

    The smoothing vocabulary is the language's distinct observed grams
    plus one shared unseen bucket, so observed probabilities plus the
    unseen mass sum to exactly 1 per (language, order).
    """
    orders = [int(o) for o in orders]
    if not orders or any(o < 1 for o in orders) or len(set(orders)) != len(orders):
        raise TrainingError("orders must be a non-empty list of distinct integers >= 1")
    if not alpha > 0:
        raise TrainingError("alpha must be positive")
    if not samples:
        raise TrainingError("no languages given")

    languages = list(samples)
    log_probs = {}
    unseen = {}
    for lang in languages:
        texts = [normalize_line(s).lower() for s in samples[lang]]
        if not any(texts):
            raise TrainingError("language %r has no non-empty samples" % lang)
        log_probs[lang] = {}
        unseen[lang] = {}
        for o in orders:
            counts = _gram_counts(texts, o)
            n = sum(counts.values())
            v = len(counts) + 1
            denom = n + alpha * v
            log_probs[lang][o] = {
                g: math.log((c + alpha) / denom) for g, c in counts.items()
            }
            unseen[lang][o] = math.log(alpha / denom)
    return LangIdModel(languages, orders, alpha, log_probs, unseen)


class Identifier:
    """Reusable scorer for one model; holds packed lookup tables.

    Models with orders exactly [1, 2, 3] get the batched JIT path; any
    other order set falls back to plain dict scoring.
    """

    def __init__(self, model: LangIdModel):
        self.model = model
        self.languages = list(model.languages)
        self.orders = tuple(model.orders)
        self.fast = self.orders == (1, 2, 3)
        if self.fast:
            self._tables = []
            for o in (1, 2, 3):
                per_lang = [model.log_probs[lang][o] for lang in self.languages]
                misses = [model.unseen[lang][o] for lang in self.languages]
                self._tables.append(_scoring.build_gram_table(per_lang, misses))

    def _gram_total(self, lengths):
        total = np.zeros(len(lengths), dtype=np.int64)
        arr = np.asarray(lengths, dtype=np.int64)
        for o in self.orders:
            total += np.maximum(0, arr - o + 1)
        return total

    def _score_pure(self, t):
        n_grams = sum(max(0, len(t) - o + 1) for o in self.orders)
        if n_grams == 0:
            return None
        out = np.empty(len(self.languages))
        for j, lang in enumerate(self.languages):
            total = 0.0
            for o in self.orders:
                tbl = self.model.log_probs[lang][o]
                miss = self.model.unseen[lang][o]
                for i in range(len(t) - o + 1):
                    total += tbl.get(t[i : i + o], miss)
            out[j] = total / n_grams
        return out

    def scores_batch(self, texts, normalized=False):
        """(n_texts, n_languages) length-normalized scores; NaN rows where
        the text yields no grams.

        With normalized=True the texts are taken as already NFC-normalized
        (they are still lowercased here).
        """
        if normalized:
            lowered = [t.lower() for t in texts]
        else:
            lowered = [normalize_line(t).lower() for t in texts]
        k = len(self.languages)
        if not self.fast:
            out = np.full((len(lowered), k), np.nan)
            for i, t in enumerate(lowered):
                row = self._score_pure(t)
                if row is not None:
                    out[i] = row
            return out
        flat, offs = _scoring.pack_texts(lowered)
        sums = np.empty((len(lowered), k), dtype=np.float64)
        (tk1, tv1, m1), (tk2, tv2, m2), (tk3, tv3, m3) = self._tables
        _scoring.score_batch_123(flat, offs, tk1, tv1, m1, tk2, tv2, m2,
                                 tk3, tv3, m3, sums)
        totals = self._gram_total(np.diff(offs))
        out = np.full((len(lowered), k), np.nan)
        nz = totals > 0
        out[nz] = sums[nz] / totals[nz, None]
        return out

    def verdict_from_row(self, row) -> LangIdVerdict:
        if math.isnan(row[0]):
            raise UndecidableTextError("no n-grams to score")
        best_idx = int(np.argmax(row))
        best = float(row[best_idx])
        if len(row) == 1:
            margin = math.inf
        else:
            rest = np.delete(row, best_idx)
            margin = best - float(rest.max())
        return LangIdVerdict(self.languages[best_idx], margin, best)

    def verdict(self, text, normalized=False) -> LangIdVerdict:
        row = self.scores_batch([text], normalized=normalized)[0]
        return self.verdict_from_row(row)


def get_identifier(model: LangIdModel) -> Identifier:
    """Identifier for a model, cached on the model object."""
    ident = getattr(model, "_identifier", None)
    if ident is None:
        ident = Identifier(model)
        model._identifier = ident
    return ident


def identify(model: LangIdModel, text: str) -> LangIdVerdict:
    """Best-language verdict for one text.

    Raises UndecidableTextError for text that is empty after
    normalization; callers in the filter chain treat that as keep.
    """
    return get_identifier(model).verdict(text)


def save_model(model: LangIdModel, path) -> None:
    obj = {
        "version": model.version,
        "orders": list(model.orders),
        "alpha": model.alpha,
        "languages": {
            lang: {str(o): model.log_probs[lang][o] for o in model.orders}
            for lang in model.languages
        },
        "unseen": {
            lang: {str(o): model.unseen[lang][o] for o in model.orders}
            for lang in model.languages
        },
    }
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(obj, f, ensure_ascii=False, separators=(",", ":"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path) -> LangIdModel:
    """Parse and validate a model file; see save_model for the schema."""
    try:
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelFormatError("not a valid model file: %s" % e) from None
    if not isinstance(obj, dict):
        raise ModelFormatError("model file must contain a JSON object")
    missing = [k for k in ("version", "orders", "alpha", "languages", "unseen")
               if k not in obj]
    if missing:
        raise ModelFieldError("model file missing fields: %s" % ", ".join(missing))
    if obj["version"] != MODEL_VERSION:
        raise ModelVersionError(
            "model file version %r, expected %d" % (obj["version"], MODEL_VERSION)
        )
    orders = obj["orders"]
    if (not isinstance(orders, list) or not orders
            or not all(isinstance(o, int) and o >= 1 for o in orders)):
        raise ModelFieldError("orders must be a non-empty list of integers >= 1")
    if not isinstance(obj["languages"], dict) or not obj["languages"]:
        raise ModelFieldError("languages must be a non-empty object")
    languages = list(obj["languages"])
    log_probs = {}
    unseen = {}
    for lang in languages:
        tables = obj["languages"][lang]
        miss = obj["unseen"].get(lang)
        if not isinstance(tables, dict) or not isinstance(miss, dict):
            raise ModelFieldError("incomplete tables for language %r" % lang)
        log_probs[lang] = {}
        unseen[lang] = {}
        for o in orders:
            key = str(o)
            if key not in tables or key not in miss:
                raise ModelFieldError(
                    "language %r is missing order-%d tables" % (lang, o)
                )
            log_probs[lang][o] = {str(g): float(p) for g, p in tables[key].items()}
            unseen[lang][o] = float(miss[key])
    return LangIdModel(languages, orders, float(obj["alpha"]), log_probs, unseen,
                       int(obj["version"]))
