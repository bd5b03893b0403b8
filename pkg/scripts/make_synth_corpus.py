#!/usr/bin/env python
"""Generate a synthetic corpus with planted defects and a manifest.

Writes <prefix>.src / <prefix>.tgt (or <prefix>.txt for --mono) plus
<prefix>.manifest.tsv listing line_no and planted defect class. With
--verify a language model is trained on the fly and every planted defect
is confirmed against the real filter chain, so manifest counts are
exact.
"""

import argparse
import sys

import numpy as np

from corpusclean import train
from corpusclean.simtext import (
    languages,
    make_mono_corpus,
    make_parallel_corpus,
    seed_samples,
    write_corpus,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=1000)
    ap.add_argument("--src-lang", default="en", choices=languages())
    ap.add_argument("--tgt-lang", default="et", choices=languages())
    ap.add_argument("--defect-rate", type=float, default=0.10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mono", action="store_true")
    ap.add_argument("--verify", action="store_true")
    ap.add_argument("--prefix", required=True)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    model = None
    if args.verify:
        samples = {code: seed_samples(rng, code) for code in languages()}
        model = train(samples)

    if args.mono:
        lines, manifest = make_mono_corpus(
            rng, args.pairs, lang=args.src_lang, defect_rate=args.defect_rate,
            model=model, verify=args.verify)
        write_corpus(args.prefix + ".txt", lines)
    else:
        src, tgt, manifest = make_parallel_corpus(
            rng, args.pairs, src_lang=args.src_lang, tgt_lang=args.tgt_lang,
            defect_rate=args.defect_rate, model=model, verify=args.verify)
        write_corpus(args.prefix + ".src", src)
        write_corpus(args.prefix + ".tgt", tgt)

    with open(args.prefix + ".manifest.tsv", "w", encoding="utf-8") as f:
        for line_no, cls in manifest:
            f.write("%d\t%s\n" % (line_no, cls))
    print("wrote %d lines, %d planted defects" % (args.pairs, len(manifest)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
