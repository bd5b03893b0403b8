"""Ordered filter-chain execution over streamed corpora.

The engine reads both sides in chunks, runs each configured filter as a
stage over the chunk, and attributes every removed pair to the first
filter that rejected it, so per-filter counts sum exactly to the total
removed. Stage order equals chain order and stateful stages see
survivors in input order, which makes the chunked run equivalent to
judging pairs one at a time.

Dedup state lives in compact digest tables, so memory scales with unique
lines, not with corpus text.
"""

from __future__ import annotations

import contextlib
import mmap
import os
from dataclasses import dataclass, field
from itertools import islice
from typing import Iterable

import numpy as np

from .core import count_alpha, fingerprint, normalize_line, tokenize
from .filters import (
    DECODE_ERROR,
    DedupState,
    FilterId,
    FilterParams,
    length_bound_rejects,
    majority_rejects,
    mismatch_rejects,
    repeat_rejects,
)
from .langid import get_identifier, load_model

DEFAULT_PARALLEL_CHAIN = (
    "unique",
    "src_eq_tgt",
    "multi_src_one_tgt",
    "multi_tgt_one_src",
    "nonalpha_majority",
    "nonalpha_mismatch",
    "repeating_tokens",
    "language_mismatch",
    "length_ratio",
)

DEFAULT_MONO_CHAIN = (
    "unique",
    "nonalpha_majority",
    "repeating_tokens",
    "language_mismatch",
    "length_ratio",
)

PAIR_ONLY_FILTERS = frozenset(
    ("src_eq_tgt", "multi_src_one_tgt", "multi_tgt_one_src", "nonalpha_mismatch")
)

_KNOWN_FILTERS = frozenset(f.value for f in FilterId)


class PipelineConfigError(ValueError):
    pass


class AlignmentError(ValueError):
    def __init__(self, src_count, tgt_count):
        super().__init__(
            "line counts differ: source has %d lines, target has %d lines"
            % (src_count, tgt_count)
        )
        self.src_count = src_count
        self.tgt_count = tgt_count


class TooManyBadLines(ValueError):
    def __init__(self, count, limit):
        super().__init__(
            "%d undecodable lines exceeds --max-bad-lines %d" % (count, limit)
        )
        self.count = count
        self.limit = limit


class ReportFormatError(ValueError):
    pass


@dataclass
class PipelineConfig:
    """filter_order=None resolves to the default chain for the mode."""

    filter_order: tuple | None = None
    params: FilterParams = field(default_factory=FilterParams)
    src_lang: str | None = None
    tgt_lang: str | None = None
    langid_model_path: str | None = None
    mode: str = "parallel"
    exact_dedup: bool = False
    max_bad_lines: int | None = None
    threads: int = 1
    chunk_size: int = 4096

    def resolved_chain(self) -> tuple:
        if self.filter_order is not None:
            return tuple(self.filter_order)
        return DEFAULT_MONO_CHAIN if self.mode == "monolingual" else DEFAULT_PARALLEL_CHAIN

    def validate(self):
        if self.mode not in ("parallel", "monolingual"):
            raise PipelineConfigError("mode must be parallel or monolingual")
        chain = self.resolved_chain()
        unknown = [f for f in chain if f not in _KNOWN_FILTERS]
        if unknown:
            raise PipelineConfigError("unknown filters: %s" % ", ".join(unknown))
        if len(set(chain)) != len(chain):
            raise PipelineConfigError("filter_order has duplicates")
        if self.mode == "monolingual":
            bad = [f for f in chain if f in PAIR_ONLY_FILTERS]
            if bad:
                raise PipelineConfigError(
                    "pair-only filters in monolingual mode: %s" % ", ".join(bad)
                )
        if self.threads < 1:
            raise PipelineConfigError("threads must be >= 1")
        if self.chunk_size < 1:
            raise PipelineConfigError("chunk_size must be >= 1")
        if self.max_bad_lines is not None and self.max_bad_lines < 0:
            raise PipelineConfigError("max_bad_lines must be >= 0")
        return self


@dataclass
class FilterReport:
    corpus_size: int
    per_filter: list            # ordered (filter_id, removed, pct_of_original)
    total_removed: int
    remaining: int
    pct_remaining: float

    @classmethod
    def from_counts(cls, corpus_size, ordered_counts):
        """ordered_counts: sequence of (filter_id, removed)."""
        total = sum(c for _, c in ordered_counts)
        remaining = corpus_size - total
        per_filter = [
            (fid, c, _pct(c, corpus_size)) for fid, c in ordered_counts
        ]
        return cls(corpus_size, per_filter, total, remaining,
                   _pct(remaining, corpus_size))


@dataclass
class AggregateReport:
    per_corpus: list
    combined_size: int
    combined_remaining: int
    combined_pct: float


def _pct(n, d):
    return 100.0 * n / d if d else 0.0


def aggregate(reports) -> AggregateReport:
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    size = sum(r.corpus_size for r in reports)
    remaining = sum(r.remaining for r in reports)
    return AggregateReport(reports, size, remaining, _pct(remaining, size))


# --- report serialization and rendering ------------------------------------

def report_to_json(report: FilterReport, src=None, tgt=None) -> dict:
    return {
        "corpus": {"src": src, "tgt": tgt, "size": report.corpus_size},
        "filters": [
            {"id": fid, "removed": removed, "pct": pct}
            for fid, removed, pct in report.per_filter
        ],
        "total_removed": report.total_removed,
        "remaining": report.remaining,
        "pct_remaining": report.pct_remaining,
    }


def report_from_json(obj) -> tuple:
    """(FilterReport, src_path, tgt_path) from a report JSON object."""
    try:
        corpus = obj["corpus"]
        per_filter = [
            (str(row["id"]), int(row["removed"]), float(row["pct"]))
            for row in obj["filters"]
        ]
        report = FilterReport(
            int(corpus["size"]), per_filter, int(obj["total_removed"]),
            int(obj["remaining"]), float(obj["pct_remaining"]),
        )
        return report, corpus.get("src"), corpus.get("tgt")
    except (KeyError, TypeError, ValueError) as e:
        raise ReportFormatError("malformed report: %s" % e) from None


DISPLAY_LABELS = {
    "unique": "Unique",
    "src_eq_tgt": "src == tgt",
    "multi_src_one_tgt": "* sources 1 target",
    "multi_tgt_one_src": "* targets 1 source",
    "nonalpha_majority": "> 50% non-alpha",
    "nonalpha_mismatch": "Non-alpha mismatch",
    "repeating_tokens": "Repeating tokens",
    "language_mismatch": "Language mismatch",
    "length_ratio": "Length / ratio",
    DECODE_ERROR: "Undecodable",
}


def render_table(entries) -> str:
    """Aligned-column table over (title, FilterReport) entries.

    One column per corpus; per-filter rows show count and percent of the
    original size, the sum row shows the percentage at both two-decimal
    and whole-number precision.
    """
    entries = list(entries)
    row_ids = []
    for _, rep in entries:
        for fid, _, _ in rep.per_filter:
            if fid not in row_ids:
                row_ids.append(fid)
    rows = [["", *(title for title, _ in entries)],
            ["Corpus size", *(str(r.corpus_size) for _, r in entries)]]
    for fid in row_ids:
        cells = [DISPLAY_LABELS.get(fid, fid)]
        for _, rep in entries:
            got = next(((c, p) for f, c, p in rep.per_filter if f == fid), None)
            cells.append("-" if got is None else "%d (%.2f%%)" % got)
        rows.append(cells)
    rows.append(["Σ removed",
                 *("%d (%.2f%% / %.0f%%)" % (r.total_removed,
                                             _pct(r.total_removed, r.corpus_size),
                                             _pct(r.total_removed, r.corpus_size))
                   for _, r in entries)])
    rows.append(["Remaining",
                 *("%d (%.2f%%)" % (r.remaining, r.pct_remaining)
                   for _, r in entries)])
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells += [row[c].rjust(widths[c]) for c in range(1, len(row))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


# --- reject record format ---------------------------------------------------

def escape_field(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t")


def unescape_field(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s) and s[i + 1] in ("t", "\\"):
            out.append("\t" if s[i + 1] == "t" else "\\")
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def format_reject_record(line_no: int, reason: str, src: str, tgt: str = "") -> str:
    return "%d\t%s\t%s\t%s" % (line_no, reason, escape_field(src), escape_field(tgt))


def parse_reject_record(line: str):
    parts = line.split("\t")
    if len(parts) != 4:
        raise ValueError("reject record must have 4 fields")
    return (int(parts[0]), parts[1], unescape_field(parts[2]), unescape_field(parts[3]))


# --- input streaming --------------------------------------------------------

def _read_file_lines(path):
    with open(path, "rb") as f:
        rem = b""
        while True:
            block = f.read(1 << 20)
            if not block:
                if rem:
                    yield rem
                return
            if rem:
                block = rem + block
            lines = block.split(b"\n")
            rem = lines.pop()
            yield from lines


def _line_iter(source):
    if isinstance(source, (str, os.PathLike)):
        return _read_file_lines(source)
    return iter(source)


# --- the engine -------------------------------------------------------------

class _Chunk:
    __slots__ = ("base", "n", "s", "t", "claims", "alive",
                 "counts_s", "counts_t", "toks_s", "toks_t", "dig")

    def __init__(self, base, n):
        self.base = base            # line_no of the first pair
        self.n = n
        self.s = [None] * n
        self.t = [None] * n
        self.claims = [None] * n
        self.alive = np.ones(n, dtype=np.uint8)
        self.counts_s = [None] * n
        self.counts_t = [None] * n
        self.toks_s = [None] * n
        self.toks_t = [None] * n
        self.dig = None


class _Run:
    def __init__(self, config: PipelineConfig, model=None):
        config.validate()
        self.config = config
        self.params = config.params
        self.mono = config.mode == "monolingual"
        self.chain = config.resolved_chain()
        self.state = DedupState(exact=config.exact_dedup)
        self.counters = {DECODE_ERROR: 0}
        for fid in self.chain:
            self.counters[fid] = 0
        self.identifier = None
        if "language_mismatch" in self.chain:
            if model is None:
                if config.langid_model_path is None:
                    raise PipelineConfigError(
                        "language_mismatch filter needs a language model"
                    )
                model = load_model(config.langid_model_path)
            self.identifier = get_identifier(model)
            declared = [config.src_lang] if self.mono else [config.src_lang,
                                                            config.tgt_lang]
            known = set(model.languages)
            missing = [l for l in declared if l not in known]
            if missing:
                raise PipelineConfigError(
                    "declared languages not in model: %s" % ", ".join(missing)
                )
        self._stages = {
            "unique": self._stage_unique,
            "src_eq_tgt": self._stage_src_eq_tgt,
            "multi_src_one_tgt": self._stage_multi,
            "multi_tgt_one_src": self._stage_multi,
            "nonalpha_majority": self._stage_majority,
            "nonalpha_mismatch": self._stage_mismatch,
            "repeating_tokens": self._stage_repeating,
            "language_mismatch": self._stage_language,
            "length_ratio": self._stage_length,
        }

    # claims[i] is None iff alive[i]; _claim keeps them in sync
    def _claim(self, chunk, i, fid):
        chunk.claims[i] = fid
        chunk.alive[i] = 0

    def _count_s(self, chunk, i):
        c = chunk.counts_s[i]
        if c is None:
            c = count_alpha(chunk.s[i])
            chunk.counts_s[i] = c
        return c

    def _count_t(self, chunk, i):
        c = chunk.counts_t[i]
        if c is None:
            c = count_alpha(chunk.t[i])
            chunk.counts_t[i] = c
        return c

    def _toks_s(self, chunk, i):
        tk = chunk.toks_s[i]
        if tk is None:
            tk = tokenize(chunk.s[i])
            chunk.toks_s[i] = tk
        return tk

    def _toks_t(self, chunk, i):
        tk = chunk.toks_t[i]
        if tk is None:
            tk = tokenize(chunk.t[i])
            chunk.toks_t[i] = tk
        return tk

    def _ensure_digests(self, chunk):
        """Pair/src/tgt fingerprints as uint64 columns for alive rows."""
        if chunk.dig is not None:
            return
        buf = bytearray()
        alive_idx = []
        s, t = chunk.s, chunk.t
        claims = chunk.claims
        if self.mono:
            for i in range(chunk.n):
                if claims[i] is None:
                    buf += fingerprint((s[i],))
                    alive_idx.append(i)
            cols = 2
        else:
            for i in range(chunk.n):
                if claims[i] is None:
                    buf += fingerprint((s[i], t[i]))
                    buf += fingerprint((s[i],))
                    buf += fingerprint((t[i],))
                    alive_idx.append(i)
            cols = 6
        dig = np.zeros((chunk.n, cols), dtype=np.uint64)
        if alive_idx:
            rows = np.frombuffer(bytes(buf), dtype="<u8").reshape(-1, cols)
            dig[np.asarray(alive_idx)] = rows
        chunk.dig = dig

    def _stage_unique(self, chunk, fid):
        if self.config.exact_dedup:
            seen = self.state.seen_pairs
            for i in range(chunk.n):
                if chunk.claims[i] is not None:
                    continue
                key = chunk.s[i] if self.mono else (chunk.s[i], chunk.t[i])
                if key in seen:
                    self._claim(chunk, i, fid)
                else:
                    seen.add(key)
            return
        self._ensure_digests(chunk)
        dup = np.zeros(chunk.n, dtype=np.uint8)
        self.state.seen_pairs.add_batch(
            np.ascontiguousarray(chunk.dig[:, 0]),
            np.ascontiguousarray(chunk.dig[:, 1]),
            chunk.alive, dup,
        )
        for i in np.flatnonzero(dup):
            self._claim(chunk, int(i), fid)

    def _stage_src_eq_tgt(self, chunk, fid):
        s, t, claims = chunk.s, chunk.t, chunk.claims
        for i in range(chunk.n):
            if claims[i] is None and s[i] == t[i]:
                self._claim(chunk, i, fid)

    def _stage_multi(self, chunk, fid):
        src_to_tgt = fid == "multi_src_one_tgt"
        if self.config.exact_dedup:
            table = (self.state.seen_tgt_for_src if src_to_tgt
                     else self.state.seen_src_for_tgt)
            for i in range(chunk.n):
                if chunk.claims[i] is not None:
                    continue
                key, val = ((chunk.s[i], chunk.t[i]) if src_to_tgt
                            else (chunk.t[i], chunk.s[i]))
                if key in table:
                    if table[key] != val:
                        self._claim(chunk, i, fid)
                else:
                    table[key] = val
            return
        self._ensure_digests(chunk)
        if src_to_tgt:
            table = self.state.seen_tgt_for_src
            k0, k1, v0, v1 = 2, 3, 4, 5
        else:
            table = self.state.seen_src_for_tgt
            k0, k1, v0, v1 = 4, 5, 2, 3
        diff = np.zeros(chunk.n, dtype=np.uint8)
        table.check_batch(
            np.ascontiguousarray(chunk.dig[:, k0]),
            np.ascontiguousarray(chunk.dig[:, k1]),
            np.ascontiguousarray(chunk.dig[:, v0]),
            np.ascontiguousarray(chunk.dig[:, v1]),
            chunk.alive, diff,
        )
        for i in np.flatnonzero(diff):
            self._claim(chunk, int(i), fid)

    def _stage_majority(self, chunk, fid):
        thr = self.params.nonalpha_majority_threshold
        claims = chunk.claims
        for i in range(chunk.n):
            if claims[i] is not None:
                continue
            if majority_rejects(self._count_s(chunk, i), thr):
                self._claim(chunk, i, fid)
            elif not self.mono and majority_rejects(self._count_t(chunk, i), thr):
                self._claim(chunk, i, fid)

    def _stage_mismatch(self, chunk, fid):
        ratio = self.params.mismatch_ratio
        min_count = self.params.mismatch_min_count
        claims = chunk.claims
        for i in range(chunk.n):
            if claims[i] is not None:
                continue
            if mismatch_rejects(self._count_s(chunk, i).non_alpha,
                                self._count_t(chunk, i).non_alpha,
                                ratio, min_count):
                self._claim(chunk, i, fid)

    def _stage_repeating(self, chunk, fid):
        min_run = self.params.repeat_min_run
        claims = chunk.claims
        for i in range(chunk.n):
            if claims[i] is not None:
                continue
            if repeat_rejects(self._toks_s(chunk, i), min_run):
                self._claim(chunk, i, fid)
            elif not self.mono and repeat_rejects(self._toks_t(chunk, i), min_run):
                self._claim(chunk, i, fid)

    def _stage_language(self, chunk, fid):
        min_chars = self.params.langid_min_chars
        min_margin = self.params.langid_min_margin
        src_lang = self.config.src_lang
        tgt_lang = self.config.tgt_lang
        claims = chunk.claims
        texts = []
        pos = []
        for i in range(chunk.n):
            if claims[i] is not None:
                continue
            if self._count_s(chunk, i).alpha >= min_chars:
                texts.append(chunk.s[i])
                pos.append((i, src_lang))
            if not self.mono and self._count_t(chunk, i).alpha >= min_chars:
                texts.append(chunk.t[i])
                pos.append((i, tgt_lang))
        if not texts:
            return
        ident = self.identifier
        langs = ident.languages
        k = len(langs)
        scores = ident.scores_batch(texts, normalized=True).tolist()
        for (i, declared), vals in zip(pos, scores):
            if claims[i] is not None:
                continue
            best = vals[0]
            if best != best:        # NaN: no grams, keep
                continue
            best_j = 0
            for j in range(1, k):
                if vals[j] > best:
                    best, best_j = vals[j], j
            if langs[best_j] == declared:
                continue
            if k == 1:
                self._claim(chunk, i, fid)
                continue
            second = -np.inf
            for j in range(k):
                if j != best_j and vals[j] > second:
                    second = vals[j]
            if best - second >= min_margin:
                self._claim(chunk, i, fid)

    def _stage_length(self, chunk, fid):
        params = self.params
        claims = chunk.claims
        for i in range(chunk.n):
            if claims[i] is not None:
                continue
            ls = len(self._toks_s(chunk, i))
            if length_bound_rejects(ls, params):
                self._claim(chunk, i, fid)
                continue
            if self.mono:
                continue
            lt = len(self._toks_t(chunk, i))
            if length_bound_rejects(lt, params):
                self._claim(chunk, i, fid)
            elif max(ls, lt) / max(min(ls, lt), 1) > params.len_ratio_max:
                self._claim(chunk, i, fid)

    def _prepare(self, base, items_s, items_t):
        n = len(items_s)
        chunk = _Chunk(base, n)
        s, t, claims = chunk.s, chunk.t, chunk.claims
        for i in range(n):
            raw_s = items_s[i]
            raw_t = items_t[i]
            bad = False
            if isinstance(raw_s, bytes):
                try:
                    raw_s = raw_s.decode("utf-8")
                except UnicodeDecodeError:
                    raw_s = raw_s.decode("utf-8", "backslashreplace")
                    bad = True
            if isinstance(raw_t, bytes):
                try:
                    raw_t = raw_t.decode("utf-8")
                except UnicodeDecodeError:
                    raw_t = raw_t.decode("utf-8", "backslashreplace")
                    bad = True
            if bad:
                s[i] = raw_s
                t[i] = raw_t
                claims[i] = DECODE_ERROR
                chunk.alive[i] = 0
            else:
                s[i] = normalize_line(raw_s)
                t[i] = normalize_line(raw_t)
        return chunk

    def run(self, src, tgt, keep_sink, reject_sink) -> FilterReport:
        config = self.config
        counters = self.counters
        chunk_size = config.chunk_size
        it_s = _line_iter(src)
        it_t = _line_iter(tgt) if not self.mono else iter(())
        stages = [(fid, self._stages[fid]) for fid in self.chain]
        corpus_size = 0
        kept = 0
        mono = self.mono
        while True:
            items_s = list(islice(it_s, chunk_size))
            if mono:
                items_t = [""] * len(items_s)
            else:
                items_t = list(islice(it_t, chunk_size))
                if len(items_s) != len(items_t):
                    n_src = corpus_size + len(items_s) + sum(1 for _ in it_s)
                    n_tgt = corpus_size + len(items_t) + sum(1 for _ in it_t)
                    raise AlignmentError(n_src, n_tgt)
            if not items_s:
                break
            chunk = self._prepare(corpus_size + 1, items_s, items_t)
            corpus_size += chunk.n
            for fid, stage in stages:
                if chunk.alive.any():
                    stage(chunk, fid)
            s, t, claims = chunk.s, chunk.t, chunk.claims
            base = chunk.base
            for i in range(chunk.n):
                fid = claims[i]
                if fid is None:
                    kept += 1
                    if keep_sink is not None:
                        keep_sink(s[i], t[i])
                else:
                    counters[fid] += 1
                    if reject_sink is not None:
                        reject_sink(base + i, fid, s[i], t[i])
            if (config.max_bad_lines is not None
                    and counters[DECODE_ERROR] > config.max_bad_lines):
                raise TooManyBadLines(counters[DECODE_ERROR], config.max_bad_lines)
        rows = [(DECODE_ERROR, counters[DECODE_ERROR])]
        rows += [(fid, counters[fid]) for fid in self.chain]
        report = FilterReport.from_counts(corpus_size, rows)
        assert kept == report.remaining
        return report


def run_parallel(config: PipelineConfig, src, tgt, keep_sink=None,
                 reject_sink=None, model=None) -> FilterReport:
    """Filter a line-aligned pair of corpora.

    src/tgt are paths or iterables of lines (str, or bytes to be decoded
    as UTF-8; undecodable lines claim the reserved decode_error reason).
    keep_sink(src_text, tgt_text) receives survivors in input order;
    reject_sink(line_no, reason, src_text, tgt_text) the removals.
    Returns the sequential-accounting FilterReport.
    """
    if config.mode != "parallel":
        raise PipelineConfigError("run_parallel needs mode='parallel'")
    return _Run(config, model).run(src, tgt, keep_sink, reject_sink)


def run_mono(config: PipelineConfig, stream, keep_sink=None,
             reject_sink=None, model=None) -> FilterReport:
    """Monolingual variant; keep_sink(text, "") and reject records carry an
    empty target column."""
    if config.mode != "monolingual":
        raise PipelineConfigError("run_mono needs mode='monolingual'")
    return _Run(config, model).run(stream, None, keep_sink, reject_sink)


# --- combine and shuffle ----------------------------------------------------

def _line_offsets(path, stack):
    """(data, starts, ends) with line k = data[starts[k]:ends[k]].

    data is an open mmap (or bytes for an empty file) so only the offset
    arrays are resident; slicing it copies single lines out on demand.
    The scan view over the map is dropped before returning, the mmap
    itself stays open on the given ExitStack.
    """
    f = stack.enter_context(open(path, "rb"))
    size = os.fstat(f.fileno()).st_size
    if size == 0:
        empty = np.empty(0, np.int64)
        return b"", empty, empty
    mm = stack.enter_context(mmap.mmap(f.fileno(), 0, access=mmap.ACCESS_READ))
    view = np.frombuffer(mm, dtype=np.uint8)
    nl = np.flatnonzero(view == 10)
    del view
    if nl.shape[0] == 0 or nl[-1] != size - 1:
        starts = np.concatenate(([0], nl + 1))
        ends = np.concatenate((nl, [size]))
    else:
        starts = np.concatenate(([0], nl[:-1] + 1))
        ends = nl
    return mm, starts, ends


def combine_shuffle(corpora, seed: int, out_src, out_tgt):
    """Concatenate aligned corpora and emit one seeded permutation of the
    pairs to out_src/out_tgt.

    corpora is a list of (src_path, tgt_path). Lines pass through as raw
    bytes; the same permutation is applied to both sides so pair i of the
    output always comes from one input pair. Returns (out_src, out_tgt).
    """
    with contextlib.ExitStack() as stack:
        sides = []  # per corpus: ((data_s, starts_s, ends_s), (data_t, ...))
        sizes = []
        for src_path, tgt_path in corpora:
            s = _line_offsets(src_path, stack)
            t = _line_offsets(tgt_path, stack)
            if s[1].shape[0] != t[1].shape[0]:
                raise AlignmentError(s[1].shape[0], t[1].shape[0])
            sides.append((s, t))
            sizes.append(s[1].shape[0])
        total = int(sum(sizes))
        perm = np.random.Generator(np.random.PCG64(seed)).permutation(total)
        starts = np.zeros(len(sizes) + 1, dtype=np.int64)
        np.cumsum(np.asarray(sizes, dtype=np.int64), out=starts[1:])
        corpus_of = np.searchsorted(starts, perm, side="right") - 1
        local = perm - starts[corpus_of]
        for side, out_path in ((0, out_src), (1, out_tgt)):
            with open(out_path, "wb") as f:
                write = f.write
                tables = [sides[c][side] for c in range(len(sides))]
                for k in range(total):
                    data, st, en = tables[corpus_of[k]]
                    j = local[k]
                    write(data[st[j]:en[j]])
                    write(b"\n")
    return out_src, out_tgt
