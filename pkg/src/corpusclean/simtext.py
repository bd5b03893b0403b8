"""Synthetic text and corpora for benchmarks, fixtures, and the test
harness.

Three Latin-script vocabularies (en, et, fi) with Zipf-like word
frequencies. Corpus builders can plant defects of every filter class and
return a manifest of what went where; with verify=True each planted pair
is checked against the real filter chain (and redrawn on accident), so a
fixture's manifest counts are exact by construction.
"""

from __future__ import annotations

import numpy as np

from .core import count_alpha, normalize_line, tokenize
from .filters import (
    DECODE_ERROR,
    FilterParams,
    length_bound_rejects,
    majority_rejects,
    mismatch_rejects,
    repeat_rejects,
)
from .langid import UndecidableTextError, get_identifier

_EN_WORDS = """
the of and to in that it was for as with his they this have from one had
word but not what all were when your can said there use each which she
how their time will way about many then them write would like these her
long make thing see him two has look more day could come did number
sound most people over know water than call first who may down side been
now find house picture again change animal point mother world near build
self earth father head stand page should country found answer school
grow study still learn plant cover food sun between state keep eye never
last let thought city tree cross farm hard start might story example
paper often always music those both mark book letter until mile river
car feet care second group carry took rain eat room friend began idea
fish mountain stop once base hear horse cut sure watch color face wood
main open seem together next white children begin got walk spell air
away road bird soon body dog family direct leave song measure door
product black short class wind question happen complete ship area half
rock order fire south problem piece told knew pass since top whole king
space heard best hour better true during hundred five remember step
early hold west ground interest reach fast verb sing listen six table
travel less morning ten simple several vowel toward war lay against
pattern slow center love person money serve appear road map rain rule
govern pull cold notice voice unit power town fine certain fly fall lead
cry dark machine note wait plan figure star box noun field rest correct
able pound done beauty drive stood contain front teach week final gave
green oh quick develop ocean warm free minute strong special mind behind
clear tail produce fact street inch multiply nothing course stay wheel
full force blue object decide surface deep moon island foot system busy
test record boat common gold possible plane stead dry wonder laugh
thousand ago ran check game shape equate hot miss brought heat snow tire
bring yes distant fill east paint language among
""".split()

_ET_STEMS = """
ja on ei see tema mis kui aga oli ka siis välja üle pärast ainult linn
maja päev aasta inimene riik keel töö kool laps vesi mets tee käsi silm
pea süda öö õhtu hommik nädal kuu talv suvi kevad sügis raamat laud tool
uks aken sein lill puu lind kala koer kass hobune lehm siga kana muna
leib piim liha sool suhkur tuli tuul lumi vihm pilv taevas meri järv
jõgi saar mägi org küla turg pood raha hind number sõna lause sõber
võti selg jalg juus hammas keha pere ema isa vend õde poeg tütar mees
naine vanem noor suur väike pikk lühike lai kitsas uus vana hea halb
""".split()

_ET_SUFFIXES = ("", "d", "de", "le", "ga", "st", "s", "ni", "ta")

_FI_STEMS = """
ja on ei se hän mikä kun mutta oli myös sitten vain kaupunki talo päivä
vuosi ihminen valtio kieli työ koulu lapsi vesi metsä tie käsi silmä pää
sydän yö ilta aamu viikko kuukausi talvi kesä kevät syksy kirja pöytä
tuoli ovi ikkuna seinä kukka puu lintu kala koira kissa hevonen lehmä
sika kana muna leipä maito liha suola sokeri tuli tuuli lumi sade pilvi
taivas meri järvi joki saari vuori laakso kylä tori kauppa raha hinta
numero sana lause ystävä avain selkä jalka hius hammas keho perhe äiti
isä veli sisko poika tytär mies nainen vanha nuori suuri pieni pitkä
lyhyt leveä kapea uusi hyvä paha
""".split()

_FI_SUFFIXES = ("", "t", "n", "a", "ssa", "lla", "sta", "lle", "kin")

PARALLEL_DEFECTS = (
    "unique", "src_eq_tgt", "multi_src_one_tgt", "multi_tgt_one_src",
    "nonalpha_majority", "nonalpha_mismatch", "repeating_tokens",
    "language_mismatch", "length_ratio", DECODE_ERROR,
)

MONO_DEFECTS = (
    "unique", "nonalpha_majority", "repeating_tokens", "language_mismatch",
    "length_ratio", DECODE_ERROR,
)

_VOCAB_CACHE = {}


def vocab(lang):
    v = _VOCAB_CACHE.get(lang)
    if v is not None:
        return v
    if lang == "en":
        forms = _EN_WORDS
    elif lang == "et":
        forms = [s + suf for s in _ET_STEMS for suf in _ET_SUFFIXES]
    elif lang == "fi":
        forms = [s + suf for s in _FI_STEMS for suf in _FI_SUFFIXES]
    else:
        raise ValueError("no vocabulary for language %r" % lang)
    v = list(dict.fromkeys(forms))[:400]
    probs = 1.0 / (np.arange(len(v), dtype=np.float64) + 2.0)
    probs /= probs.sum()
    _VOCAB_CACHE[lang] = (v, probs)
    return _VOCAB_CACHE[lang]


def languages():
    return ("en", "et", "fi")


def make_lines(rng, lang, n_lines, min_words=4, max_words=16):
    """n_lines sentences; no immediately repeated words, so clean lines
    never trip the repeating-tokens rule."""
    v, probs = vocab(lang)
    nv = len(v)
    lens = rng.integers(min_words, max_words + 1, size=n_lines)
    flat = rng.choice(nv, size=int(lens.sum()), p=probs)
    lines = []
    pos = 0
    for n in lens:
        idx = flat[pos:pos + n]
        pos += n
        words = []
        prev = -1
        for j in idx:
            if j == prev:
                j = (j + 1) % nv
            words.append(v[j])
            prev = j
        words[0] = words[0].capitalize()
        if n >= 9:
            words[n // 2 - 1] += ","
        lines.append(" ".join(words) + ".")
    return lines


def make_line(rng, lang, min_words=4, max_words=16):
    return make_lines(rng, lang, 1, min_words, max_words)[0]


def seed_samples(rng, lang, target_bytes=100_000):
    """Training sample lines totalling roughly target_bytes of UTF-8."""
    lines = []
    size = 0
    while size < target_bytes:
        batch = make_lines(rng, lang, 256)
        for line in batch:
            lines.append(line)
            size += len(line.encode("utf-8")) + 1
            if size >= target_bytes:
                break
    return lines


# --- defect construction ----------------------------------------------------

def _junk_line(rng, i):
    # digits and symbols, clearly >50% non-alphabetical
    parts = ["%d%%" % rng.integers(10, 99) for _ in range(int(rng.integers(4, 9)))]
    return "[%d] " % i + " ".join(parts) + " ###"


def _mismatch_suffix(rng):
    return " (%d-%d) [%d%%] ##" % (rng.integers(1000, 9999),
                                   rng.integers(1000, 9999),
                                   rng.integers(10, 99))


def _repeat_line(rng, lang):
    words = make_line(rng, lang, 6, 10)[:-1].split()
    # bare word: trailing punctuation would break the token run apart
    w = words[int(rng.integers(1, len(words)))].strip(",.").lower()
    k = int(rng.integers(1, len(words) - 1))
    return " ".join(words[:k] + [w, w, w] + words[k:]) + "."


def _overlong_line(rng, lang, n_words=110):
    return make_line(rng, lang, n_words, n_words + 20)


def _bad_bytes(i):
    return b"\xc3\x28 broken line %d \xff" % i


class _VerifyState:
    """Exact-string mirror of the runtime chain, used to confirm that a
    planted pair really is claimed by the intended filter (and a clean
    pair by none)."""

    def __init__(self, params, model, src_lang, tgt_lang, mono):
        self.params = params
        self.ident = get_identifier(model) if model is not None else None
        self.src_lang = src_lang
        self.tgt_lang = tgt_lang
        self.mono = mono
        self.pairs = set()
        self.tgt_for_src = {}
        self.src_for_tgt = {}

    def _wrong_language(self, text, declared):
        if self.ident is None:
            return False
        c = count_alpha(text)
        if c.alpha < self.params.langid_min_chars:
            return False
        try:
            v = self.ident.verdict(text, normalized=True)
        except UndecidableTextError:
            return False
        return v.language != declared and v.margin >= self.params.langid_min_margin

    def first_claim(self, s, t):
        if isinstance(s, bytes) or isinstance(t, bytes):
            return DECODE_ERROR
        p = self.params
        s = normalize_line(s)
        t = normalize_line(t)
        key = s if self.mono else (s, t)
        if key in self.pairs:
            return "unique"
        self.pairs.add(key)
        if not self.mono:
            if s == t:
                return "src_eq_tgt"
            prev = self.tgt_for_src.get(s)
            if prev is None:
                self.tgt_for_src[s] = t
            elif prev != t:
                return "multi_src_one_tgt"
            prev = self.src_for_tgt.get(t)
            if prev is None:
                self.src_for_tgt[t] = s
            elif prev != s:
                return "multi_tgt_one_src"
        cs = count_alpha(s)
        ct = count_alpha(t)
        thr = p.nonalpha_majority_threshold
        if majority_rejects(cs, thr) or (not self.mono and majority_rejects(ct, thr)):
            return "nonalpha_majority"
        if not self.mono and mismatch_rejects(cs.non_alpha, ct.non_alpha,
                                              p.mismatch_ratio, p.mismatch_min_count):
            return "nonalpha_mismatch"
        ts = tokenize(s)
        tt = tokenize(t) if not self.mono else []
        if repeat_rejects(ts, p.repeat_min_run) or repeat_rejects(tt, p.repeat_min_run):
            return "repeating_tokens"
        if self._wrong_language(s, self.src_lang):
            return "language_mismatch"
        if not self.mono and self._wrong_language(t, self.tgt_lang):
            return "language_mismatch"
        if length_bound_rejects(len(ts), p):
            return "length_ratio"
        if not self.mono:
            if length_bound_rejects(len(tt), p):
                return "length_ratio"
            if max(len(ts), len(tt)) / max(min(len(ts), len(tt)), 1) > p.len_ratio_max:
                return "length_ratio"
        return None


def _other_lang(lang):
    for cand in ("fi", "et", "en"):
        if cand != lang:
            return cand
    raise AssertionError


def make_parallel_corpus(rng, n_pairs, src_lang="en", tgt_lang="et",
                         defect_rate=0.10, classes=PARALLEL_DEFECTS,
                         model=None, verify=False, params=None):
    """(src_lines, tgt_lines, manifest) with manifest = [(line_no, class)].

    Lines are str except planted undecodable ones, which are bytes.
    With verify=True (needs model when language_mismatch is planted) each
    emitted pair is replayed through the exact filter chain and redrawn
    until its claim matches the manifest, so counts are exact.
    """
    params = params or FilterParams()
    wrong = _other_lang(tgt_lang)
    if verify and model is None and "language_mismatch" in classes:
        raise ValueError("verify=True with language_mismatch planted needs a model")
    state = _VerifyState(params, model, src_lang, tgt_lang, mono=False) if verify else None
    seen_src = set()
    seen_tgt = set()
    src_out = []
    tgt_out = []
    manifest = []
    clean_idx = []

    def fresh(lang, seen, lo=4, hi=16):
        for _ in range(64):
            line = make_line(rng, lang, lo, hi)
            if line not in seen:
                return line
        raise RuntimeError("vocabulary exhausted for %s" % lang)

    is_defect = rng.random(n_pairs) < defect_rate
    kinds = rng.integers(0, len(classes), size=n_pairs)

    for i in range(n_pairs):
        cls = classes[kinds[i]] if is_defect[i] else None
        if cls in ("unique", "multi_src_one_tgt", "multi_tgt_one_src") and not clean_idx:
            cls = None
        for _attempt in range(64):
            if cls is None:
                s = fresh(src_lang, seen_src)
                t = fresh(tgt_lang, seen_tgt)
            elif cls == "unique":
                j = clean_idx[int(rng.integers(0, len(clean_idx)))]
                s, t = src_out[j], tgt_out[j]
            elif cls == "src_eq_tgt":
                s = fresh(src_lang, seen_src)
                t = s
            elif cls == "multi_src_one_tgt":
                j = clean_idx[int(rng.integers(0, len(clean_idx)))]
                s = src_out[j]
                t = fresh(tgt_lang, seen_tgt)
            elif cls == "multi_tgt_one_src":
                j = clean_idx[int(rng.integers(0, len(clean_idx)))]
                s = fresh(src_lang, seen_src)
                t = tgt_out[j]
            elif cls == "nonalpha_majority":
                s = fresh(src_lang, seen_src)
                t = _junk_line(rng, i)
            elif cls == "nonalpha_mismatch":
                s = fresh(src_lang, seen_src)
                t = fresh(tgt_lang, seen_tgt, 8, 16) + _mismatch_suffix(rng)
            elif cls == "repeating_tokens":
                s = fresh(src_lang, seen_src)
                t = _repeat_line(rng, tgt_lang)
            elif cls == "language_mismatch":
                s = fresh(src_lang, seen_src)
                t = make_line(rng, wrong, 12, 18)
            elif cls == "length_ratio":
                if rng.random() < 0.5:
                    s = fresh(src_lang, seen_src)
                    t = _overlong_line(rng, tgt_lang)
                else:
                    s = make_line(rng, src_lang, 40, 48)
                    t = make_line(rng, tgt_lang, 4, 4)
            elif cls == DECODE_ERROR:
                s = fresh(src_lang, seen_src)
                t = _bad_bytes(i)
            else:
                raise ValueError("unknown defect class %r" % cls)
            if state is None:
                break
            probe = _VerifyState(params, model, src_lang, tgt_lang, False)
            probe.pairs = set(state.pairs)
            probe.tgt_for_src = dict(state.tgt_for_src)
            probe.src_for_tgt = dict(state.src_for_tgt)
            if probe.first_claim(s, t) == cls:
                state.first_claim(s, t)
                break
        else:
            raise RuntimeError("could not realize defect %r at line %d" % (cls, i + 1))
        src_out.append(s)
        tgt_out.append(t)
        if cls is None:
            clean_idx.append(i)
            if isinstance(s, str):
                seen_src.add(s)
            if isinstance(t, str):
                seen_tgt.add(t)
        else:
            manifest.append((i + 1, cls))
            if isinstance(s, str):
                seen_src.add(s)
            if isinstance(t, str):
                seen_tgt.add(t)
    return src_out, tgt_out, manifest


def make_mono_corpus(rng, n_lines, lang="et", defect_rate=0.10,
                     classes=MONO_DEFECTS, model=None, verify=False,
                     params=None):
    """Monolingual counterpart of make_parallel_corpus."""
    params = params or FilterParams()
    wrong = _other_lang(lang)
    if verify and model is None and "language_mismatch" in classes:
        raise ValueError("verify=True with language_mismatch planted needs a model")
    state = _VerifyState(params, model, lang, None, mono=True) if verify else None
    seen = set()
    out = []
    manifest = []
    clean_idx = []

    def fresh(lo=4, hi=16):
        for _ in range(64):
            line = make_line(rng, lang, lo, hi)
            if line not in seen:
                return line
        raise RuntimeError("vocabulary exhausted for %s" % lang)

    is_defect = rng.random(n_lines) < defect_rate
    kinds = rng.integers(0, len(classes), size=n_lines)

    for i in range(n_lines):
        cls = classes[kinds[i]] if is_defect[i] else None
        if cls == "unique" and not clean_idx:
            cls = None
        for _attempt in range(64):
            if cls is None:
                s = fresh()
            elif cls == "unique":
                s = out[clean_idx[int(rng.integers(0, len(clean_idx)))]]
            elif cls == "nonalpha_majority":
                s = _junk_line(rng, i)
            elif cls == "repeating_tokens":
                s = _repeat_line(rng, lang)
            elif cls == "language_mismatch":
                s = make_line(rng, wrong, 12, 18)
            elif cls == "length_ratio":
                s = _overlong_line(rng, lang)
            elif cls == DECODE_ERROR:
                s = _bad_bytes(i)
            else:
                raise ValueError("unknown defect class %r" % cls)
            if state is None:
                break
            probe = _VerifyState(params, model, lang, None, True)
            probe.pairs = set(state.pairs)
            if probe.first_claim(s, "") == cls:
                state.first_claim(s, "")
                break
        else:
            raise RuntimeError("could not realize defect %r at line %d" % (cls, i + 1))
        out.append(s)
        if cls is None:
            clean_idx.append(i)
            seen.add(s)
        else:
            manifest.append((i + 1, cls))
            if isinstance(s, str):
                seen.add(s)
    return out, manifest


def write_corpus(path, lines):
    """One line per entry; str encoded as UTF-8, bytes written raw."""
    with open(path, "wb") as f:
        for line in lines:
            f.write(line if isinstance(line, bytes) else line.encode("utf-8"))
            f.write(b"\n")
    return path
