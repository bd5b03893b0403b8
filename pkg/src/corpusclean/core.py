"""Text primitives shared by every filter: line normalization, token
splitting, alphabetic/non-alphabetic counting, and stable 128-bit
fingerprints for memory-bounded deduplication.

All functions are pure and safe to call from any number of workers.
"""

from __future__ import annotations

import hashlib
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable


@dataclass(frozen=True, slots=True)
class Sentence:
    """One input line. text must be newline-free; line_no is 1-based."""

    text: str
    line_no: int


@dataclass(frozen=True, slots=True)
class SentencePair:
    """A line-aligned source/target pair; both sides share line_no."""

    src: Sentence
    tgt: Sentence


@dataclass(frozen=True, slots=True)
class AlphaCount:
    """Counts of letter and other non-whitespace code points."""

    alpha: int
    non_alpha: int

    @property
    def total(self) -> int:
        return self.alpha + self.non_alpha


class DecodeError(ValueError):
    """A line of input was not valid UTF-8."""

    def __init__(self, line_no, byte_offset):
        super().__init__(
            "line %d is not valid UTF-8 (byte offset %d)" % (line_no, byte_offset)
        )
        self.line_no = line_no
        self.byte_offset = byte_offset


def decode_line(raw: bytes, line_no: int) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DecodeError(line_no, e.start) from None


def normalize_line(raw: str) -> str:
    """Trim, NFC-compose, and collapse interior whitespace to single spaces.

    Idempotent; after this the only whitespace character left is U+0020,
    which count_alpha relies on.
    """
    if not raw.isascii() and not unicodedata.is_normalized("NFC", raw):
        raw = unicodedata.normalize("NFC", raw)
    return " ".join(raw.split())


# ASCII punctuation per Unicode category P (note: $ + < = > ^ ` | ~ are
# symbols, not punctuation).
_ASCII_PUNCT = frozenset(
    c for c in map(chr, range(128)) if unicodedata.category(c).startswith("P")
)


@lru_cache(maxsize=4096)
def _wide_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _is_punct(ch: str) -> bool:
    return ch in _ASCII_PUNCT if ch < "\x80" else _wide_punct(ch)


def tokenize(text: str) -> list[str]:
    """Split normalized text on spaces, peeling leading/trailing punctuation
    marks off each chunk into tokens of their own.

    Interior punctuation stays attached, so "don't" and "a,b" are single
    tokens while "maailm!" becomes ["maailm", "!"].
    """
    out = []
    for chunk in text.split():
        if chunk.isalnum():
            out.append(chunk)
            continue
        i, j = 0, len(chunk)
        while i < j and _is_punct(chunk[i]):
            out.append(chunk[i])
            i += 1
        trail = []
        while j > i and _is_punct(chunk[j - 1]):
            trail.append(chunk[j - 1])
            j -= 1
        if i < j:
            out.append(chunk[i:j])
        out.extend(reversed(trail))
    return out


def count_alpha(text: str) -> AlphaCount:
    """Letter vs other non-whitespace counts for normalized text.

    str.isalpha is exactly Unicode category L. The non_alpha arithmetic
    assumes the only whitespace present is U+0020 (normalize_line's
    postcondition); do not call this on raw unnormalized lines.
    """
    alpha = sum(map(str.isalpha, text))
    return AlphaCount(alpha, len(text) - alpha - text.count(" "))


def fingerprint(parts: Iterable[str]) -> bytes:
    """Stable 128-bit digest of length-prefixed UTF-8 parts.

    Length prefixes keep ("ab", "") distinct from ("a", "b"). blake2b is
    fast, seedless, and identical across runs and platforms.
    """
    h = hashlib.blake2b(digest_size=16)
    for p in parts:
        b = p.encode("utf-8")
        h.update(len(b).to_bytes(8, "little"))
        h.update(b)
    return h.digest()
