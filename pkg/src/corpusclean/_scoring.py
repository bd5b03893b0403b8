"""JIT kernels and compact hash tables behind the language identifier and
the dedup filters.

Two families live here:

* n-gram scoring over batches of texts, with each gram packed into a
  single int64 key (code points are < 2^21, so three of them fit);
* open-addressing tables over 128-bit fingerprints stored as uint64
  halves, used by DedupState so dedup memory stays a few dozen bytes per
  unique line instead of a Python object per line.

Table layouts are built in Python with the same probe arithmetic the
kernels use; keep the two in sync.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Multiplicative hash constant (64-bit golden ratio), as signed int64.
_MUL = np.int64(-7046029254386353131)

# Packed-key tables must stay small enough that bits 40..63 of the hash
# product cover the slot index. Charset^3 keeps real models far below this.
MAX_GRAM_TABLE_BITS = 23


def pack_texts(texts):
    """Flatten texts into one int64 code-point array plus offsets."""
    bufs = [t.encode("utf-32-le") for t in texts]
    offs = np.zeros(len(bufs) + 1, dtype=np.int64)
    if bufs:
        np.cumsum(
            np.fromiter((len(b) >> 2 for b in bufs), np.int64, len(bufs)),
            out=offs[1:],
        )
    flat = np.frombuffer(b"".join(bufs), dtype=np.uint32).astype(np.int64)
    return flat, offs


def pack_gram(gram: str) -> int:
    key = 0
    for ch in gram:
        key = (key << 21) | ord(ch)
    return key


def _hash_slot(key: int, mask: int) -> int:
    h = (key * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    return (h >> 40) & mask


def build_gram_table(per_lang: list[dict], misses: list[float]):
    """One order's lookup table over the union of all languages' grams.

    per_lang[k] maps gram string to log prob for language k; misses[k] is
    that language's unseen log prob, used both as the fill value for grams
    another language observed and as the kernel's miss vector.
    """
    union = {}
    for tbl in per_lang:
        for g in tbl:
            union.setdefault(g, None)
    n = len(union)
    size = 1
    while size < max(2 * n, 1):
        size *= 2
    if size > 1 << MAX_GRAM_TABLE_BITS:
        raise ValueError("gram table too large: %d entries" % n)
    k = len(per_lang)
    tk = np.full(size, -1, dtype=np.int64)
    tv = np.empty((size, k), dtype=np.float64)
    mask = size - 1
    for g in union:
        key = pack_gram(g)
        p = _hash_slot(key, mask)
        while tk[p] != -1:
            p = (p + 1) & mask
        tk[p] = key
        for j, tbl in enumerate(per_lang):
            tv[p, j] = tbl.get(g, misses[j])
    return tk, tv, np.asarray(misses, dtype=np.float64)


@njit(cache=True)
def score_batch_123(flat, offs, tk1, tv1, m1, tk2, tv2, m2, tk3, tv3, m3, out):
    """Summed log probs for orders (1, 2, 3) over a packed text batch.

    Accumulates per language in order-major, position-inner sequence; the
    pure-Python scorer follows the same sequence so both produce identical
    floats. out has shape (n_texts, n_languages) and receives raw sums
    (length normalization happens in the caller).
    """
    nt = offs.shape[0] - 1
    k = out.shape[1]
    mask1 = np.int64(tk1.shape[0] - 1)
    mask2 = np.int64(tk2.shape[0] - 1)
    mask3 = np.int64(tk3.shape[0] - 1)
    acc = np.empty(k, dtype=np.float64)
    for t in range(nt):
        lo = offs[t]
        hi = offs[t + 1]
        for j in range(k):
            acc[j] = 0.0
        for i in range(lo, hi):
            key = flat[i]
            p = (key * _MUL >> 40) & mask1
            while True:
                cur = tk1[p]
                if cur == key:
                    for j in range(k):
                        acc[j] += tv1[p, j]
                    break
                if cur == -1:
                    for j in range(k):
                        acc[j] += m1[j]
                    break
                p = (p + 1) & mask1
        for i in range(lo, hi - 1):
            key = (flat[i] << 21) | flat[i + 1]
            p = (key * _MUL >> 40) & mask2
            while True:
                cur = tk2[p]
                if cur == key:
                    for j in range(k):
                        acc[j] += tv2[p, j]
                    break
                if cur == -1:
                    for j in range(k):
                        acc[j] += m2[j]
                    break
                p = (p + 1) & mask2
        for i in range(lo, hi - 2):
            key = (flat[i] << 42) | (flat[i + 1] << 21) | flat[i + 2]
            p = (key * _MUL >> 40) & mask3
            while True:
                cur = tk3[p]
                if cur == key:
                    for j in range(k):
                        acc[j] += tv3[p, j]
                    break
                if cur == -1:
                    for j in range(k):
                        acc[j] += m3[j]
                    break
                p = (p + 1) & mask3
        for j in range(k):
            out[t, j] = acc[j]


# ---------------------------------------------------------------------------
# 128-bit digest tables. Digests come out of blake2b already uniform, so the
# low half doubles as the hash; linear probing, insert-only, no tombstones.

@njit(cache=True)
def _set_add_batch(slo, shi, occ, dlo, dhi, alive, dup_out):
    """Insert alive rows into the set; dup_out[i]=1 where already present.

    Returns the number of new insertions. Capacity must be ensured by the
    caller; this never grows.
    """
    mask = np.uint64(slo.shape[0] - 1)
    one = np.uint64(1)
    inserted = 0
    for i in range(dlo.shape[0]):
        if not alive[i]:
            continue
        lo = dlo[i]
        hi = dhi[i]
        p = lo & mask
        while True:
            if occ[p] == 0:
                occ[p] = 1
                slo[p] = lo
                shi[p] = hi
                dup_out[i] = 0
                inserted += 1
                break
            if slo[p] == lo and shi[p] == hi:
                dup_out[i] = 1
                break
            p = (p + one) & mask
    return inserted


@njit(cache=True)
def _map_check_batch(klo, khi, vlo, vhi, occ, dklo, dkhi, dvlo, dvhi, alive, diff_out):
    """For alive rows: insert key->value if the key is new, else compare.

    diff_out[i]=1 where the key was present with a different value. First
    mapping wins; conflicting rows do not overwrite.
    """
    mask = np.uint64(klo.shape[0] - 1)
    one = np.uint64(1)
    inserted = 0
    for i in range(dklo.shape[0]):
        if not alive[i]:
            continue
        lo = dklo[i]
        hi = dkhi[i]
        p = lo & mask
        while True:
            if occ[p] == 0:
                occ[p] = 1
                klo[p] = lo
                khi[p] = hi
                vlo[p] = dvlo[i]
                vhi[p] = dvhi[i]
                diff_out[i] = 0
                inserted += 1
                break
            if klo[p] == lo and khi[p] == hi:
                diff_out[i] = 0 if (vlo[p] == dvlo[i] and vhi[p] == dvhi[i]) else 1
                break
            p = (p + one) & mask
    return inserted


@njit(cache=True)
def _rehash_set(slo, shi, occ, nlo, nhi, nocc):
    mask = np.uint64(nlo.shape[0] - 1)
    one = np.uint64(1)
    for p in range(slo.shape[0]):
        if occ[p] == 0:
            continue
        lo = slo[p]
        q = lo & mask
        while nocc[q] != 0:
            q = (q + one) & mask
        nocc[q] = 1
        nlo[q] = lo
        nhi[q] = shi[p]


@njit(cache=True)
def _rehash_map(klo, khi, vlo, vhi, occ, nklo, nkhi, nvlo, nvhi, nocc):
    mask = np.uint64(nklo.shape[0] - 1)
    one = np.uint64(1)
    for p in range(klo.shape[0]):
        if occ[p] == 0:
            continue
        lo = klo[p]
        q = lo & mask
        while nocc[q] != 0:
            q = (q + one) & mask
        nocc[q] = 1
        nklo[q] = lo
        nkhi[q] = khi[p]
        nvlo[q] = vlo[p]
        nvhi[q] = vhi[p]


_LOAD_FACTOR = 0.55

_ONE_ALIVE = np.ones(1, dtype=np.uint8)


def _digest_cols(digest: bytes):
    return (
        np.frombuffer(digest[:8], dtype="<u8"),
        np.frombuffer(digest[8:], dtype="<u8"),
    )


class DigestSet:
    """Insert-only set of 16-byte digests (about 17 bytes per slot)."""

    __slots__ = ("lo", "hi", "occ", "count")

    def __init__(self, capacity=1 << 12):
        size = 1
        while size < capacity:
            size *= 2
        self.lo = np.zeros(size, dtype=np.uint64)
        self.hi = np.zeros(size, dtype=np.uint64)
        self.occ = np.zeros(size, dtype=np.uint8)
        self.count = 0

    def __len__(self):
        return self.count

    def ensure(self, extra):
        while (self.count + extra) > _LOAD_FACTOR * self.lo.shape[0]:
            nlo = np.zeros(self.lo.shape[0] * 2, dtype=np.uint64)
            nhi = np.zeros_like(nlo)
            nocc = np.zeros(nlo.shape[0], dtype=np.uint8)
            _rehash_set(self.lo, self.hi, self.occ, nlo, nhi, nocc)
            self.lo, self.hi, self.occ = nlo, nhi, nocc

    def add_batch(self, dlo, dhi, alive, dup_out):
        self.ensure(dlo.shape[0])
        self.count += _set_add_batch(self.lo, self.hi, self.occ, dlo, dhi, alive, dup_out)

    def add(self, digest: bytes) -> bool:
        """True if the digest was new."""
        dlo, dhi = _digest_cols(digest)
        dup = np.zeros(1, dtype=np.uint8)
        self.add_batch(dlo, dhi, _ONE_ALIVE, dup)
        return not bool(dup[0])


class DigestMap:
    """Insert-only digest-to-digest map with first-mapping-wins semantics."""

    __slots__ = ("klo", "khi", "vlo", "vhi", "occ", "count")

    def __init__(self, capacity=1 << 12):
        size = 1
        while size < capacity:
            size *= 2
        self.klo = np.zeros(size, dtype=np.uint64)
        self.khi = np.zeros(size, dtype=np.uint64)
        self.vlo = np.zeros(size, dtype=np.uint64)
        self.vhi = np.zeros(size, dtype=np.uint64)
        self.occ = np.zeros(size, dtype=np.uint8)
        self.count = 0

    def __len__(self):
        return self.count

    def ensure(self, extra):
        while (self.count + extra) > _LOAD_FACTOR * self.klo.shape[0]:
            n = self.klo.shape[0] * 2
            nklo = np.zeros(n, dtype=np.uint64)
            nkhi = np.zeros(n, dtype=np.uint64)
            nvlo = np.zeros(n, dtype=np.uint64)
            nvhi = np.zeros(n, dtype=np.uint64)
            nocc = np.zeros(n, dtype=np.uint8)
            _rehash_map(self.klo, self.khi, self.vlo, self.vhi, self.occ,
                        nklo, nkhi, nvlo, nvhi, nocc)
            self.klo, self.khi, self.vlo, self.vhi, self.occ = nklo, nkhi, nvlo, nvhi, nocc

    def check_batch(self, dklo, dkhi, dvlo, dvhi, alive, diff_out):
        self.ensure(dklo.shape[0])
        self.count += _map_check_batch(
            self.klo, self.khi, self.vlo, self.vhi, self.occ,
            dklo, dkhi, dvlo, dvhi, alive, diff_out,
        )

    def conflicts(self, key_digest: bytes, val_digest: bytes) -> bool:
        """True if key is already mapped to a different value; records the
        mapping when the key is new."""
        dklo, dkhi = _digest_cols(key_digest)
        dvlo, dvhi = _digest_cols(val_digest)
        diff = np.zeros(1, dtype=np.uint8)
        self.check_batch(dklo, dkhi, dvlo, dvhi, _ONE_ALIVE, diff)
        return bool(diff[0])


def warmup():
    """Force-compile every kernel (first call in a process is slow)."""
    flat, offs = pack_texts(["ab"])
    tk = np.full(2, -1, dtype=np.int64)
    tv = np.zeros((2, 1), dtype=np.float64)
    m = np.zeros(1, dtype=np.float64)
    out = np.zeros((1, 1), dtype=np.float64)
    score_batch_123(flat, offs, tk, tv, m, tk, tv, m, tk, tv, m, out)
    s = DigestSet(4)
    s.add(b"\x00" * 16)
    s.ensure(1 << 13)
    mp = DigestMap(4)
    mp.conflicts(b"\x00" * 16, b"\x01" * 16)
    mp.ensure(1 << 13)
