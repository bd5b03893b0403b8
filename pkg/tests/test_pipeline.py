"""Engine-level tests: chunking, state, accounting, shuffle, serialization."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpusclean.filters import DECODE_ERROR, FilterParams
from corpusclean.pipeline import (
    AlignmentError,
    FilterReport,
    PipelineConfig,
    PipelineConfigError,
    ReportFormatError,
    TooManyBadLines,
    aggregate,
    combine_shuffle,
    escape_field,
    format_reject_record,
    parse_reject_record,
    render_table,
    report_from_json,
    report_to_json,
    run_mono,
    run_parallel,
    unescape_field,
)
from corpusclean.simtext import make_parallel_corpus, write_corpus

import numpy as np


def collect(config, src, tgt=None, model=None):
    """Run and gather (kept, rejects, report)."""
    kept, rejects = [], []
    if config.mode == "monolingual":
        rep = run_mono(config, src,
                       lambda s, t: kept.append(s),
                       lambda n, f, s, t: rejects.append((n, f, s, t)),
                       model=model)
    else:
        rep = run_parallel(config, src, tgt,
                           lambda s, t: kept.append((s, t)),
                           lambda n, f, s, t: rejects.append((n, f, s, t)),
                           model=model)
    return kept, rejects, rep


def no_lang_chain():
    return ("unique", "src_eq_tgt", "multi_src_one_tgt", "multi_tgt_one_src",
            "nonalpha_majority", "nonalpha_mismatch", "repeating_tokens",
            "length_ratio")


class TestRunParallel:
    def test_tiny_corpus_decisions(self):
        src = [
            "A fine first line here",          # keep
            "A fine first line here",          # src_eq_tgt? no: unique vs pair
            "1 2 3 4 5 6 7 8",                 # nonalpha_majority
            "same both sides",                 # src_eq_tgt
            "la la la is a song",              # repeating_tokens
        ]
        tgt = [
            "Esimene korralik rida siin",
            "Esimene korralik rida siin",      # duplicate pair -> unique
            "numbrid reas siin",
            "same both sides",
            "laul on siin",
        ]
        cfg = PipelineConfig(filter_order=no_lang_chain())
        kept, rejects, rep = collect(cfg, src, tgt)
        assert kept == [(src[0], tgt[0])]
        claims = {n: f for n, f, _, _ in rejects}
        assert claims == {2: "unique", 3: "nonalpha_majority", 4: "src_eq_tgt",
                          5: "repeating_tokens"}
        assert rep.corpus_size == 5
        assert rep.remaining == 1
        assert rep.total_removed == 4

    def test_single_filter_chain(self):
        cfg = PipelineConfig(filter_order=("repeating_tokens",))
        kept, rejects, rep = collect(cfg, ["la la la is a song"], ["tekst siin"])
        assert kept == []
        assert rejects[0][1] == "repeating_tokens"

    def test_conservation_and_claim_partition(self, model3):
        rng = np.random.default_rng(11)
        src, tgt, _ = make_parallel_corpus(rng, 400, defect_rate=0.3)
        cfg = PipelineConfig(src_lang="en", tgt_lang="et")
        kept, rejects, rep = collect(cfg, src, tgt, model=model3)
        assert rep.corpus_size == 400
        assert rep.total_removed + rep.remaining == 400
        assert len(kept) == rep.remaining
        assert len(rejects) == rep.total_removed
        # every line claimed at most once, claims and keeps partition the input
        claimed = [n for n, _, _, _ in rejects]
        assert len(set(claimed)) == len(claimed)
        assert len(claimed) + len(kept) == 400
        # report row counts match the reject stream
        by_filter = {}
        for _, f, _, _ in rejects:
            by_filter[f] = by_filter.get(f, 0) + 1
        for fid, count, _ in rep.per_filter:
            assert by_filter.get(fid, 0) == count

    def test_keeps_preserve_input_order(self, model3):
        rng = np.random.default_rng(12)
        src, tgt, _ = make_parallel_corpus(rng, 200, defect_rate=0.2)
        cfg = PipelineConfig(src_lang="en", tgt_lang="et")
        kept, rejects, _ = collect(cfg, src, tgt, model=model3)
        pos = {}
        for i, k in enumerate(zip(src, tgt)):
            pos.setdefault(k, i)
        order = [pos[k] for k in kept if k in pos]
        assert order == sorted(order)

    def test_decode_error_row_first(self):
        src = [b"\xff\xfe broken", "good line here"]
        tgt = ["tekst üks", "tekst kaks"]
        # byte inputs come through the iterable path undecoded
        cfg = PipelineConfig(filter_order=no_lang_chain())
        kept, rejects, rep = collect(cfg, src, tgt)
        assert rep.per_filter[0][0] == DECODE_ERROR
        assert rep.per_filter[0][1] == 1
        assert rejects[0][1] == DECODE_ERROR
        assert len(kept) == 1

    def test_alignment_error(self):
        cfg = PipelineConfig(filter_order=no_lang_chain())
        with pytest.raises(AlignmentError) as ei:
            run_parallel(cfg, ["a", "b", "c"], ["x", "y"])
        assert ei.value.src_count == 3
        assert ei.value.tgt_count == 2
        assert "3" in str(ei.value) and "2" in str(ei.value)

    def test_max_bad_lines(self):
        src = [b"\xff one", b"\xff two", b"\xff three", "fine line"]
        tgt = ["a b", "c d", "e f", "g h"]
        cfg = PipelineConfig(filter_order=no_lang_chain(), max_bad_lines=2)
        with pytest.raises(TooManyBadLines) as ei:
            run_parallel(cfg, src, tgt)
        assert ei.value.limit == 2
        ok = PipelineConfig(filter_order=no_lang_chain(), max_bad_lines=3)
        rep = run_parallel(ok, src, tgt)
        assert rep.per_filter[0][1] == 3

    def test_zero_bad_lines_allowed_when_unset(self):
        src = [b"\xff one", "fine line here"]
        tgt = ["a b", "c d"]
        cfg = PipelineConfig(filter_order=no_lang_chain())
        rep = run_parallel(cfg, src, tgt)
        assert rep.per_filter[0][1] == 1

    def test_language_filter_needs_model(self):
        cfg = PipelineConfig(src_lang="en", tgt_lang="et")
        with pytest.raises(PipelineConfigError):
            run_parallel(cfg, ["a"], ["b"])

    def test_declared_language_must_be_known(self, model3):
        cfg = PipelineConfig(src_lang="en", tgt_lang="xx")
        with pytest.raises(PipelineConfigError):
            run_parallel(cfg, ["a"], ["b"], model=model3)


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(77)
    return make_parallel_corpus(rng, 500, defect_rate=0.25)[:2]


class TestEquivalences:
    """Different execution shapes must give byte-identical results."""

    def run_with(self, corpus, model3, **kw):
        cfg = PipelineConfig(src_lang="en", tgt_lang="et", **kw)
        return collect(cfg, list(corpus[0]), list(corpus[1]), model=model3)

    @pytest.mark.parametrize("chunk_size", [1, 3, 64])
    def test_chunk_size_invariance(self, corpus, model3, chunk_size):
        base = self.run_with(corpus, model3)
        got = self.run_with(corpus, model3, chunk_size=chunk_size)
        assert got[0] == base[0]
        assert got[1] == base[1]
        assert got[2] == base[2]

    def test_exact_dedup_equivalence(self, corpus, model3):
        base = self.run_with(corpus, model3)
        got = self.run_with(corpus, model3, exact_dedup=True)
        assert got[0] == base[0]
        assert got[1] == base[1]
        assert got[2] == base[2]

    def test_threads_flag_is_accepted(self, corpus, model3):
        base = self.run_with(corpus, model3)
        got = self.run_with(corpus, model3, threads=4)
        assert got[0] == base[0]
        assert got[2] == base[2]

    def test_file_and_iterable_inputs_agree(self, corpus, model3, tmp_path):
        src_path = tmp_path / "c.src"
        tgt_path = tmp_path / "c.tgt"
        write_corpus(src_path, corpus[0])
        write_corpus(tgt_path, corpus[1])
        base = self.run_with(corpus, model3)
        cfg = PipelineConfig(src_lang="en", tgt_lang="et")
        kept, rejects = [], []
        rep = run_parallel(cfg, str(src_path), str(tgt_path),
                           lambda s, t: kept.append((s, t)),
                           lambda n, f, s, t: rejects.append((n, f, s, t)),
                           model=model3)
        assert kept == base[0]
        assert rejects == base[1]
        assert rep == base[2]


class TestRunMono:
    def test_basic(self):
        lines = [
            "A clean line of text here",
            "A clean line of text here",      # duplicate
            "%%% 123 &&&",                    # majority
            "ha ha ha very funny",            # repeating
            "Another decent line",
        ]
        cfg = PipelineConfig(mode="monolingual",
                             filter_order=("unique", "nonalpha_majority",
                                           "repeating_tokens", "length_ratio"))
        kept, rejects, rep = collect(cfg, lines)
        assert kept == ["A clean line of text here", "Another decent line"]
        claims = {n: f for n, f, _, _ in rejects}
        assert claims == {2: "unique", 3: "nonalpha_majority",
                          4: "repeating_tokens"}
        # reject records carry an empty target field
        assert all(t == "" for _, _, _, t in rejects)
        assert rep.remaining == 2

    def test_pair_filters_rejected_in_mono(self):
        cfg = PipelineConfig(mode="monolingual",
                             filter_order=("unique", "src_eq_tgt"))
        with pytest.raises(PipelineConfigError):
            cfg.validate()

    def test_mono_needs_mono_mode(self):
        with pytest.raises(PipelineConfigError):
            run_mono(PipelineConfig(), ["a"])
        with pytest.raises(PipelineConfigError):
            run_parallel(PipelineConfig(mode="monolingual"), ["a"], ["b"])


class TestStatelessPermutation:
    """Chains of stateless filters give the same survivor set in any order;
    only the attribution moves."""

    ORDERS = [
        ("nonalpha_majority", "nonalpha_mismatch", "repeating_tokens", "length_ratio"),
        ("length_ratio", "repeating_tokens", "nonalpha_mismatch", "nonalpha_majority"),
        ("repeating_tokens", "length_ratio", "nonalpha_majority", "nonalpha_mismatch"),
    ]

    def test_survivors_stable(self):
        rng = np.random.default_rng(5)
        src, tgt, _ = make_parallel_corpus(
            rng, 300, defect_rate=0.4,
            classes=("nonalpha_majority", "nonalpha_mismatch",
                     "repeating_tokens", "length_ratio"))
        kept_sets = []
        totals = []
        for order in self.ORDERS:
            cfg = PipelineConfig(filter_order=order)
            kept, _, rep = collect(cfg, src, tgt)
            kept_sets.append(kept)
            totals.append(rep.total_removed)
        assert kept_sets[0] == kept_sets[1] == kept_sets[2]
        assert totals[0] == totals[1] == totals[2]


class TestConfigValidation:
    def test_unknown_filter(self):
        with pytest.raises(PipelineConfigError, match="unknown"):
            PipelineConfig(filter_order=("unique", "despamify")).validate()

    def test_duplicate_filter(self):
        with pytest.raises(PipelineConfigError, match="duplicate"):
            PipelineConfig(filter_order=("unique", "unique")).validate()

    def test_bad_mode(self):
        with pytest.raises(PipelineConfigError, match="mode"):
            PipelineConfig(mode="bilingual").validate()

    def test_bad_threads(self):
        with pytest.raises(PipelineConfigError):
            PipelineConfig(threads=0).validate()

    def test_bad_chunk_size(self):
        with pytest.raises(PipelineConfigError):
            PipelineConfig(chunk_size=0).validate()

    def test_bad_max_bad_lines(self):
        with pytest.raises(PipelineConfigError):
            PipelineConfig(max_bad_lines=-1).validate()

    def test_default_chains(self):
        par = PipelineConfig().resolved_chain()
        mono = PipelineConfig(mode="monolingual").resolved_chain()
        assert par == ("unique", "src_eq_tgt", "multi_src_one_tgt",
                       "multi_tgt_one_src", "nonalpha_majority",
                       "nonalpha_mismatch", "repeating_tokens",
                       "language_mismatch", "length_ratio")
        assert mono == ("unique", "nonalpha_majority", "repeating_tokens",
                        "language_mismatch", "length_ratio")


class TestCombineShuffle:
    def make_corpora(self, tmp_path, sizes, trailing=True):
        paths = []
        for c, n in enumerate(sizes):
            src = tmp_path / ("c%d.src" % c)
            tgt = tmp_path / ("c%d.tgt" % c)
            s_lines = ["c%d line %d src" % (c, i) for i in range(n)]
            t_lines = ["c%d line %d tgt" % (c, i) for i in range(n)]
            write_corpus(src, s_lines)
            write_corpus(tgt, t_lines)
            if not trailing and n:
                raw = src.read_bytes()
                src.write_bytes(raw[:-1])
            paths.append((str(src), str(tgt)))
        return paths

    def read(self, path):
        return open(path, encoding="utf-8").read().splitlines()

    def test_pairs_stay_aligned(self, tmp_path):
        corpora = self.make_corpora(tmp_path, [20, 5, 13])
        out_s = str(tmp_path / "all.src")
        out_t = str(tmp_path / "all.tgt")
        combine_shuffle(corpora, 99, out_s, out_t)
        s = self.read(out_s)
        t = self.read(out_t)
        assert len(s) == len(t) == 38
        for a, b in zip(s, t):
            assert a.replace(" src", "") == b.replace(" tgt", "")
        # multiset equals the union of inputs
        want = {"c%d line %d src" % (c, i)
                for c, n in enumerate([20, 5, 13]) for i in range(n)}
        assert set(s) == want and len(set(s)) == len(s)

    def test_same_seed_is_deterministic(self, tmp_path):
        corpora = self.make_corpora(tmp_path, [30, 30])
        a_s, a_t = str(tmp_path / "a.src"), str(tmp_path / "a.tgt")
        b_s, b_t = str(tmp_path / "b.src"), str(tmp_path / "b.tgt")
        combine_shuffle(corpora, 1234, a_s, a_t)
        combine_shuffle(corpora, 1234, b_s, b_t)
        assert open(a_s, "rb").read() == open(b_s, "rb").read()
        assert open(a_t, "rb").read() == open(b_t, "rb").read()

    def test_different_seed_reorders(self, tmp_path):
        corpora = self.make_corpora(tmp_path, [64])
        a_s, a_t = str(tmp_path / "a.src"), str(tmp_path / "a.tgt")
        b_s, b_t = str(tmp_path / "b.src"), str(tmp_path / "b.tgt")
        combine_shuffle(corpora, 1, a_s, a_t)
        combine_shuffle(corpora, 2, b_s, b_t)
        assert sorted(self.read(a_s)) == sorted(self.read(b_s))
        assert self.read(a_s) != self.read(b_s)

    def test_shuffle_actually_moves_lines(self, tmp_path):
        corpora = self.make_corpora(tmp_path, [64])
        out_s, out_t = str(tmp_path / "o.src"), str(tmp_path / "o.tgt")
        combine_shuffle(corpora, 7, out_s, out_t)
        original = ["c0 line %d src" % i for i in range(64)]
        assert self.read(out_s) != original

    def test_missing_trailing_newline(self, tmp_path):
        corpora = self.make_corpora(tmp_path, [7], trailing=False)
        out_s, out_t = str(tmp_path / "o.src"), str(tmp_path / "o.tgt")
        combine_shuffle(corpora, 3, out_s, out_t)
        assert sorted(self.read(out_s)) == sorted(
            "c0 line %d src" % i for i in range(7))
        assert open(out_s, "rb").read().endswith(b"\n")

    def test_empty_corpus_contributes_nothing(self, tmp_path):
        corpora = self.make_corpora(tmp_path, [0, 4])
        out_s, out_t = str(tmp_path / "o.src"), str(tmp_path / "o.tgt")
        combine_shuffle(corpora, 3, out_s, out_t)
        assert len(self.read(out_s)) == 4

    def test_misaligned_corpus_raises(self, tmp_path):
        (src, tgt), = self.make_corpora(tmp_path, [4])
        write_corpus(tgt, ["only", "three", "lines"])
        with pytest.raises(AlignmentError):
            combine_shuffle([(src, tgt)], 1,
                            str(tmp_path / "o.src"), str(tmp_path / "o.tgt"))

    def test_bytes_pass_through_unmodified(self, tmp_path):
        # combine-shuffle must not normalize or re-encode anything
        src = tmp_path / "w.src"
        tgt = tmp_path / "w.tgt"
        src.write_bytes(b"caf\xc3\xa9  double  space\n\xff raw bytes\n")
        tgt.write_bytes(b"rida \xc3\xbcks\nrida kaks\n")
        out_s, out_t = str(tmp_path / "o.src"), str(tmp_path / "o.tgt")
        combine_shuffle([(str(src), str(tgt))], 5, out_s, out_t)
        got = sorted(open(out_s, "rb").read().split(b"\n"))
        want = sorted(b"caf\xc3\xa9  double  space\n\xff raw bytes\n".split(b"\n"))
        assert got == want


class TestReportSerde:
    def make_report(self):
        return FilterReport.from_counts(
            1000, [(DECODE_ERROR, 3), ("unique", 100), ("src_eq_tgt", 0),
                   ("length_ratio", 17)])

    def test_round_trip(self):
        rep = self.make_report()
        obj = report_to_json(rep, "a.src", "a.tgt")
        back, src, tgt = report_from_json(json.loads(json.dumps(obj)))
        assert back == rep
        assert (src, tgt) == ("a.src", "a.tgt")

    def test_mono_target_is_null(self):
        obj = report_to_json(self.make_report(), "a.txt", None)
        assert obj["corpus"]["tgt"] is None
        _, _, tgt = report_from_json(obj)
        assert tgt is None

    def test_from_counts_accounting(self):
        rep = self.make_report()
        assert rep.total_removed == 120
        assert rep.remaining == 880
        assert rep.pct_remaining == pytest.approx(88.0)
        ids = [fid for fid, _, _ in rep.per_filter]
        assert ids[0] == DECODE_ERROR

    @pytest.mark.parametrize("mutate", [
        lambda o: o.pop("corpus"),
        lambda o: o.pop("filters"),
        lambda o: o["filters"].append({"id": "x"}),
        lambda o: o.__setitem__("remaining", "lots"),
        lambda o: o["corpus"].pop("size"),
    ])
    def test_malformed_raises(self, mutate):
        obj = report_to_json(self.make_report(), "a", "b")
        obj = json.loads(json.dumps(obj))
        mutate(obj)
        with pytest.raises(ReportFormatError):
            report_from_json(obj)

    def test_aggregate(self):
        r1 = FilterReport.from_counts(100, [("unique", 40)])
        r2 = FilterReport.from_counts(300, [("unique", 60)])
        agg = aggregate([r1, r2])
        assert agg.combined_size == 400
        assert agg.combined_remaining == 300
        assert agg.combined_pct == pytest.approx(75.0)
        with pytest.raises(ValueError):
            aggregate([])


class TestRejectRecords:
    def test_escape_examples(self):
        assert escape_field("a\tb") == "a\\tb"
        assert escape_field("a\\tb") == "a\\\\tb"
        assert unescape_field(escape_field("x\t\\y\\t")) == "x\t\\y\\t"

    def test_format_and_parse(self):
        rec = format_reject_record(17, "unique", "source\ttext", "tgt \\ here")
        assert rec.count("\t") == 3
        n, reason, s, t = parse_reject_record(rec)
        assert (n, reason, s, t) == (17, "unique", "source\ttext", "tgt \\ here")

    def test_mono_record_has_empty_target(self):
        rec = format_reject_record(3, "nonalpha_majority", "%%%")
        assert rec.endswith("\t")
        assert parse_reject_record(rec)[3] == ""

    @given(st.integers(1, 10**9),
           st.sampled_from(["unique", "length_ratio", DECODE_ERROR]),
           st.text(st.characters(exclude_characters="\n\r"), max_size=50),
           st.text(st.characters(exclude_characters="\n\r"), max_size=50))
    def test_round_trip_property(self, n, reason, s, t):
        rec = format_reject_record(n, reason, s, t)
        assert "\n" not in rec
        assert parse_reject_record(rec) == (n, reason, s, t)


class TestRenderTable:
    def test_single_report(self):
        rep = FilterReport.from_counts(
            200, [(DECODE_ERROR, 0), ("unique", 25), ("src_eq_tgt", 5)])
        out = render_table([("demo", rep)])
        lines = out.splitlines()
        assert lines[1].startswith("Corpus size")
        assert "200" in lines[1]
        assert any("Unique" in ln and "25 (12.50%)" in ln for ln in lines)
        assert any("src == tgt" in ln and "5 (2.50%)" in ln for ln in lines)
        assert any("Undecodable" in ln for ln in lines)
        assert any("Σ removed" in ln and "30 (15.00% / 15%)" in ln for ln in lines)
        assert any("Remaining" in ln and "170 (85.00%)" in ln for ln in lines)
        assert all(ln == ln.rstrip() for ln in lines)

    def test_multi_column_with_missing_rows(self):
        r1 = FilterReport.from_counts(100, [("unique", 10), ("length_ratio", 2)])
        r2 = FilterReport.from_counts(50, [("unique", 5)])
        out = render_table([("one", r1), ("two", r2)])
        row = next(ln for ln in out.splitlines() if "Length / ratio" in ln)
        assert row.rstrip().endswith("-")

    def test_display_labels(self):
        counts = [("unique", 1), ("src_eq_tgt", 1), ("multi_src_one_tgt", 1),
                  ("multi_tgt_one_src", 1), ("nonalpha_majority", 1),
                  ("nonalpha_mismatch", 1), ("repeating_tokens", 1),
                  ("language_mismatch", 1), ("length_ratio", 1)]
        out = render_table([("x", FilterReport.from_counts(9, counts))])
        for label in ["Unique", "src == tgt", "* sources 1 target",
                      "* targets 1 source", "> 50% non-alpha",
                      "Non-alpha mismatch", "Repeating tokens",
                      "Language mismatch", "Length / ratio"]:
            assert label in out
