#!/usr/bin/env python
"""Throughput benchmark: full default chain over a synthetic parallel
corpus, single-threaded, with the language filter enabled.

Generates the corpus and a model, warms the compiled kernels on a small
run, then times the real run and reports pairs/second and resident
memory growth.
"""

import argparse
import os
import sys
import tempfile
import time

import numpy as np

from corpusclean import PipelineConfig, run_parallel, train
from corpusclean._scoring import warmup
from corpusclean.simtext import make_parallel_corpus, seed_samples, write_corpus


def rss_bytes():
    with open("/proc/self/status") as f:
        for line in f:
            if line.startswith("VmRSS:"):
                return int(line.split()[1]) * 1024
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=1_000_000)
    ap.add_argument("--defect-rate", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--keep-output", action="store_true",
                    help="write survivors to files instead of discarding")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    print("training model ...", flush=True)
    samples = {code: seed_samples(rng, code) for code in ("en", "et", "fi")}
    model = train(samples)

    print("generating %d pairs ..." % args.pairs, flush=True)
    t0 = time.perf_counter()
    src, tgt, manifest = make_parallel_corpus(
        rng, args.pairs, defect_rate=args.defect_rate)
    print("  %.1fs, %d planted defects" % (time.perf_counter() - t0, len(manifest)),
          flush=True)

    with tempfile.TemporaryDirectory() as d:
        src_path = write_corpus(os.path.join(d, "bench.src"), src)
        tgt_path = write_corpus(os.path.join(d, "bench.tgt"), tgt)
        del src, tgt

        config = PipelineConfig(src_lang="en", tgt_lang="et")
        print("warming up ...", flush=True)
        warmup()
        warm = make_parallel_corpus(np.random.default_rng(1), 2000)
        run_parallel(config, warm[0], warm[1], model=model)

        sinks = {}
        if args.keep_output:
            f_s = open(os.path.join(d, "out.src"), "w", encoding="utf-8")
            f_t = open(os.path.join(d, "out.tgt"), "w", encoding="utf-8")
            sinks["keep_sink"] = lambda s, t: (f_s.write(s + "\n"),
                                               f_t.write(t + "\n"))

        config = PipelineConfig(src_lang="en", tgt_lang="et")
        rss0 = rss_bytes()
        t0 = time.perf_counter()
        report = run_parallel(config, src_path, tgt_path, model=model, **sinks)
        dt = time.perf_counter() - t0
        rss1 = rss_bytes()
        if args.keep_output:
            f_s.close()
            f_t.close()

    print("pairs           %d" % report.corpus_size)
    print("removed         %d" % report.total_removed)
    print("time            %.2f s" % dt)
    print("throughput      %d pairs/s" % int(report.corpus_size / dt))
    print("rss growth      %.1f MB" % ((rss1 - rss0) / 1e6))
    return 0


if __name__ == "__main__":
    sys.exit(main())
