"""The eight cleaning filters plus a Moses-style length/ratio filter.

Each filter is a decision function over a SentencePair: stateless ones are
pure, the dedup/multi-alignment ones update a DedupState as they go and
follow keep-first semantics. The *_rejects helpers hold the actual
decision arithmetic; the pipeline calls them directly on precomputed
counts and tokens, the filter_* wrappers compute what they need so the
functions stand alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ._scoring import DigestMap, DigestSet
from .core import AlphaCount, SentencePair, count_alpha, fingerprint, tokenize
from .langid import UndecidableTextError, get_identifier


class FilterId(str, Enum):
    UNIQUE = "unique"
    SRC_EQ_TGT = "src_eq_tgt"
    MULTI_SRC_ONE_TGT = "multi_src_one_tgt"
    MULTI_TGT_ONE_SRC = "multi_tgt_one_src"
    NONALPHA_MAJORITY = "nonalpha_majority"
    NONALPHA_MISMATCH = "nonalpha_mismatch"
    REPEATING_TOKENS = "repeating_tokens"
    LANGUAGE_MISMATCH = "language_mismatch"
    LENGTH_RATIO = "length_ratio"


# Reserved reason for undecodable input lines; claimed before any filter
# runs, never part of a filter chain.
DECODE_ERROR = "decode_error"


@dataclass(frozen=True, slots=True)
class FilterDecision:
    verdict: str                       # "keep" | "reject"
    filter_id: FilterId | None = None

    @property
    def kept(self) -> bool:
        return self.filter_id is None


KEEP = FilterDecision("keep")
_REJECTS = {fid: FilterDecision("reject", fid) for fid in FilterId}


def reject(fid: FilterId) -> FilterDecision:
    return _REJECTS[fid]


@dataclass(frozen=True, slots=True)
class FilterParams:
    nonalpha_majority_threshold: float = 0.5
    mismatch_ratio: float = 3.0
    mismatch_min_count: int = 6
    repeat_min_run: int = 3
    langid_min_chars: int = 20
    langid_min_margin: float = 0.0
    len_min: int = 1
    len_max: int = 100
    len_ratio_max: float = 9.0

    def __post_init__(self):
        if not 0 < self.nonalpha_majority_threshold < 1:
            raise ValueError("nonalpha_majority_threshold must be in (0, 1)")
        if self.mismatch_ratio < 1:
            raise ValueError("mismatch_ratio must be >= 1")
        if self.repeat_min_run < 2:
            raise ValueError("repeat_min_run must be >= 2")
        if self.langid_min_margin < 0:
            raise ValueError("langid_min_margin must be >= 0")


class DedupState:
    """Digest tables for the stateful filters.

    Default storage is compact open-addressing tables over 128-bit
    fingerprints (a few dozen bytes per unique line). exact=True switches
    to plain Python sets/dicts of the actual strings, trading memory for
    immunity to fingerprint collisions.
    """

    __slots__ = ("exact", "seen_pairs", "seen_tgt_for_src", "seen_src_for_tgt")

    def __init__(self, exact=False):
        self.exact = exact
        if exact:
            self.seen_pairs = set()
            self.seen_tgt_for_src = {}
            self.seen_src_for_tgt = {}
        else:
            self.seen_pairs = DigestSet()
            self.seen_tgt_for_src = DigestMap()
            self.seen_src_for_tgt = DigestMap()


def filter_unique(pair: SentencePair, state: DedupState) -> FilterDecision:
    """Keep the first occurrence of each exact (src, tgt) pair."""
    if state.exact:
        key = (pair.src.text, pair.tgt.text)
        if key in state.seen_pairs:
            return reject(FilterId.UNIQUE)
        state.seen_pairs.add(key)
        return KEEP
    if state.seen_pairs.add(fingerprint((pair.src.text, pair.tgt.text))):
        return KEEP
    return reject(FilterId.UNIQUE)


def filter_src_eq_tgt(pair: SentencePair) -> FilterDecision:
    if pair.src.text == pair.tgt.text:
        return reject(FilterId.SRC_EQ_TGT)
    return KEEP


def filter_multi_alignment(pair: SentencePair, state: DedupState,
                           direction: str) -> FilterDecision:
    """Keep-first multi-alignment check.

    direction "src_to_tgt" keys on the source text and rejects later pairs
    whose target differs (multi_src_one_tgt); "tgt_to_src" mirrors it.
    The first mapping is recorded even when a later filter removes the
    pair, matching sequential chain semantics.
    """
    if direction == "src_to_tgt":
        key_text, val_text = pair.src.text, pair.tgt.text
        fid = FilterId.MULTI_SRC_ONE_TGT
    elif direction == "tgt_to_src":
        key_text, val_text = pair.tgt.text, pair.src.text
        fid = FilterId.MULTI_TGT_ONE_SRC
    else:
        raise ValueError("direction must be src_to_tgt or tgt_to_src")
    if state.exact:
        table = (state.seen_tgt_for_src if direction == "src_to_tgt"
                 else state.seen_src_for_tgt)
        if key_text in table:
            return reject(fid) if table[key_text] != val_text else KEEP
        table[key_text] = val_text
        return KEEP
    table = (state.seen_tgt_for_src if direction == "src_to_tgt"
             else state.seen_src_for_tgt)
    if table.conflicts(fingerprint((key_text,)), fingerprint((val_text,))):
        return reject(fid)
    return KEEP


def majority_rejects(counts: AlphaCount, threshold: float) -> bool:
    total = counts.total
    return total > 0 and counts.non_alpha > threshold * total


def filter_nonalpha_majority(pair: SentencePair, params: FilterParams,
                             counts=None) -> FilterDecision:
    """Reject when either side is over the non-alphabetical threshold
    (strictly over, so an exact 50/50 split survives the default)."""
    cs, ct = counts or (count_alpha(pair.src.text), count_alpha(pair.tgt.text))
    thr = params.nonalpha_majority_threshold
    if majority_rejects(cs, thr) or majority_rejects(ct, thr):
        return reject(FilterId.NONALPHA_MAJORITY)
    return KEEP


def mismatch_rejects(na_src: int, na_tgt: int, ratio: float, min_count: int) -> bool:
    m = max(na_src, na_tgt)
    n = min(na_src, na_tgt)
    return m >= ratio * max(n, 1) and m >= min_count


def filter_nonalpha_mismatch(pair: SentencePair, params: FilterParams,
                             counts=None) -> FilterDecision:
    cs, ct = counts or (count_alpha(pair.src.text), count_alpha(pair.tgt.text))
    if mismatch_rejects(cs.non_alpha, ct.non_alpha,
                        params.mismatch_ratio, params.mismatch_min_count):
        return reject(FilterId.NONALPHA_MISMATCH)
    return KEEP


def repeat_rejects(tokens, min_run: int) -> bool:
    """A run of min_run identical tokens (case-folded), where the token has
    at least one letter. Letterless runs like "- - - -" are left for the
    non-alpha filters."""
    prev = None
    run = 1
    for tok in tokens:
        cur = tok.casefold()
        if cur == prev:
            run += 1
            if run >= min_run and any(map(str.isalpha, cur)):
                return True
        else:
            run = 1
            prev = cur
    return False


def filter_repeating_tokens(pair: SentencePair, params: FilterParams,
                            tokens=None) -> FilterDecision:
    ts, tt = tokens or (tokenize(pair.src.text), tokenize(pair.tgt.text))
    if repeat_rejects(ts, params.repeat_min_run) or repeat_rejects(tt, params.repeat_min_run):
        return reject(FilterId.REPEATING_TOKENS)
    return KEEP


def language_side_rejects(verdict, declared: str, min_margin: float) -> bool:
    return verdict.language != declared and verdict.margin >= min_margin


def filter_language(pair: SentencePair, model, declared, params: FilterParams,
                    counts=None) -> FilterDecision:
    """Reject when an identifiable side comes back as a different language.

    Sides with fewer than langid_min_chars letters are never rejected
    here; undecidable text is kept.
    """
    src_lang, tgt_lang = declared
    cs, ct = counts or (count_alpha(pair.src.text), count_alpha(pair.tgt.text))
    ident = get_identifier(model)
    for text, c, lang in ((pair.src.text, cs, src_lang),
                          (pair.tgt.text, ct, tgt_lang)):
        if c.alpha < params.langid_min_chars:
            continue
        try:
            v = ident.verdict(text, normalized=True)
        except UndecidableTextError:
            continue
        if language_side_rejects(v, lang, params.langid_min_margin):
            return reject(FilterId.LANGUAGE_MISMATCH)
    return KEEP


def length_bound_rejects(n_tokens: int, params: FilterParams) -> bool:
    return n_tokens < params.len_min or n_tokens > params.len_max


def filter_length_ratio(pair: SentencePair, params: FilterParams,
                        tokens=None) -> FilterDecision:
    ts, tt = tokens or (tokenize(pair.src.text), tokenize(pair.tgt.text))
    ls, lt = len(ts), len(tt)
    if length_bound_rejects(ls, params) or length_bound_rejects(lt, params):
        return reject(FilterId.LENGTH_RATIO)
    if max(ls, lt) / max(min(ls, lt), 1) > params.len_ratio_max:
        return reject(FilterId.LENGTH_RATIO)
    return KEEP
