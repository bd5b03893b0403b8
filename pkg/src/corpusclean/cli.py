"""Command-line front end.

Subcommands: clean-parallel, clean-mono, langid-train, langid-id, report,
combine-shuffle. Exit codes: 0 success, 1 usage error, 2 data error
(alignment, decoding, malformed files), 3 I/O error.

A JSON config file (same field names as PipelineConfig, params as a
nested object) seeds the configuration; command-line flags override it
field by field. All file outputs go through a temp-file-then-rename step
so interrupted runs never leave truncated files.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import os
import sys
import tempfile

from . import __version__
from .filters import FilterParams
from .langid import (
    ModelError,
    TrainingError,
    UndecidableTextError,
    get_identifier,
    load_model,
    save_model,
    train,
)
from .pipeline import (
    AlignmentError,
    PipelineConfig,
    PipelineConfigError,
    ReportFormatError,
    TooManyBadLines,
    aggregate,
    combine_shuffle,
    format_reject_record,
    render_table,
    report_from_json,
    report_to_json,
    run_mono,
    run_parallel,
)

_PARAM_FIELDS = [f.name for f in dataclasses.fields(FilterParams)]


class ConfigFileError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


@contextlib.contextmanager
def _atomic_text(path):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=os.path.basename(path) + ".", suffix=".tmp")
    f = os.fdopen(fd, "w", encoding="utf-8", newline="\n")
    try:
        yield f
        f.close()
        os.replace(tmp, path)
    except BaseException:
        f.close()
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigFileError("config %s is not valid JSON: %s" % (path, e)) from None
    if not isinstance(obj, dict):
        raise ConfigFileError("config %s must be a JSON object" % path)
    return obj


def _build_config(args, mode):
    cfg = _load_config_file(args.config) if args.config else {}
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigFileError("unknown config fields: %s" % ", ".join(sorted(unknown)))

    params_obj = cfg.get("params", {})
    if not isinstance(params_obj, dict):
        raise ConfigFileError("config field params must be an object")
    bad = set(params_obj) - set(_PARAM_FIELDS)
    if bad:
        raise ConfigFileError("unknown params fields: %s" % ", ".join(sorted(bad)))
    merged = dict(params_obj)
    for name in _PARAM_FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            merged[name] = v
    try:
        params = FilterParams(**merged)
    except ValueError as e:
        raise PipelineConfigError(str(e)) from None

    if getattr(args, "filters", None):
        order = tuple(s.strip() for s in args.filters.split(",") if s.strip())
    elif cfg.get("filter_order") is not None:
        order = tuple(cfg["filter_order"])
    else:
        order = None

    def pick(flag, field, default):
        if flag is not None:
            return flag
        return cfg.get(field, default)

    config = PipelineConfig(
        filter_order=order,
        params=params,
        src_lang=getattr(args, "src_lang", None) or cfg.get("src_lang"),
        tgt_lang=getattr(args, "tgt_lang", None) or cfg.get("tgt_lang"),
        langid_model_path=pick(getattr(args, "langid_model", None),
                               "langid_model_path", None),
        mode=mode,
        exact_dedup=bool(pick(getattr(args, "exact_dedup", None) or None,
                              "exact_dedup", False)),
        max_bad_lines=pick(getattr(args, "max_bad_lines", None),
                           "max_bad_lines", None),
        threads=int(pick(getattr(args, "threads", None), "threads", 1)),
        chunk_size=int(pick(getattr(args, "chunk_size", None), "chunk_size", 4096)),
    )
    config.validate()
    return config


def _clean_out_names(src, tgt):
    s = os.path.basename(src)
    t = os.path.basename(tgt)
    if s == t:
        return s + ".src.clean", t + ".tgt.clean"
    return s + ".clean", t + ".clean"


def _write_report_json(path, report, src, tgt):
    with _atomic_text(path) as f:
        json.dump(report_to_json(report, src, tgt), f, ensure_ascii=False, indent=2)
        f.write("\n")


def cmd_clean_parallel(args):
    config = _build_config(args, "parallel")
    os.makedirs(args.out_dir, exist_ok=True)
    src_name, tgt_name = _clean_out_names(args.src, args.tgt)
    with contextlib.ExitStack() as stack:
        f_src = stack.enter_context(_atomic_text(os.path.join(args.out_dir, src_name)))
        f_tgt = stack.enter_context(_atomic_text(os.path.join(args.out_dir, tgt_name)))

        def keep_sink(s, t):
            f_src.write(s + "\n")
            f_tgt.write(t + "\n")

        reject_sink = None
        if args.rejects:
            f_rej = stack.enter_context(_atomic_text(args.rejects))

            def reject_sink(line_no, reason, s, t):
                f_rej.write(format_reject_record(line_no, reason, s, t) + "\n")

        report = run_parallel(config, args.src, args.tgt, keep_sink, reject_sink)
    if args.report:
        _write_report_json(args.report, report, args.src, args.tgt)
    title = "%s / %s" % (os.path.basename(args.src), os.path.basename(args.tgt))
    print(render_table([(title, report)]))
    return 0


def cmd_clean_mono(args):
    config = _build_config(args, "monolingual")
    os.makedirs(args.out_dir, exist_ok=True)
    out_name = os.path.basename(getattr(args, "in")) + ".clean"
    with contextlib.ExitStack() as stack:
        f_out = stack.enter_context(_atomic_text(os.path.join(args.out_dir, out_name)))

        def keep_sink(s, _t):
            f_out.write(s + "\n")

        reject_sink = None
        if args.rejects:
            f_rej = stack.enter_context(_atomic_text(args.rejects))

            def reject_sink(line_no, reason, s, t):
                f_rej.write(format_reject_record(line_no, reason, s, t) + "\n")

        report = run_mono(config, getattr(args, "in"), keep_sink, reject_sink)
    if args.report:
        _write_report_json(args.report, report, getattr(args, "in"), None)
    print(render_table([(os.path.basename(getattr(args, "in")), report)]))
    return 0


def cmd_langid_train(args):
    names = sorted(n for n in os.listdir(args.samples) if n.endswith(".txt"))
    if not names:
        print("error: no <code>.txt sample files in %s" % args.samples,
              file=sys.stderr)
        return 2
    samples = {}
    for name in names:
        code = name[:-4]
        with open(os.path.join(args.samples, name), "r", encoding="utf-8") as f:
            samples[code] = f.read().splitlines()
    try:
        orders = tuple(int(s) for s in args.orders.split(","))
    except ValueError:
        print("error: --orders wants comma-separated integers, got %r"
              % args.orders, file=sys.stderr)
        return 1
    model = train(samples, orders=orders, alpha=args.alpha)
    save_model(model, args.out)
    print("wrote model for %s to %s" % (", ".join(model.languages), args.out))
    return 0


def cmd_langid_id(args):
    model = load_model(args.model)
    ident = get_identifier(model)
    src = getattr(args, "in")
    with contextlib.ExitStack() as stack:
        if src:
            lines = stack.enter_context(open(src, "r", encoding="utf-8"))
        else:
            lines = sys.stdin
        for line in lines:
            line = line.rstrip("\n")
            try:
                v = ident.verdict(line)
                print("%s\t%.4f" % (v.language, v.margin))
            except UndecidableTextError:
                # und is reserved: never a trainable language code here
                print("und\t0.0000")
    return 0


def cmd_report(args):
    entries = []
    reports = []
    for path in args.inputs:
        try:
            with open(path, "r", encoding="utf-8") as f:
                obj = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ReportFormatError("%s is not valid JSON: %s" % (path, e)) from None
        report, src, _tgt = report_from_json(obj)
        title = os.path.basename(src) if src else os.path.basename(path)
        entries.append((title, report))
        reports.append(report)
    print(render_table(entries))
    if args.aggregate:
        agg = aggregate(reports)
        print()
        print("Combined size       %d" % agg.combined_size)
        print("Combined remaining  %d (%.2f%%)" % (agg.combined_remaining,
                                                   agg.combined_pct))
    return 0


def cmd_combine_shuffle(args):
    corpora = [tuple(p) for p in args.pair]
    d_src = os.path.dirname(os.path.abspath(args.out_src))
    d_tgt = os.path.dirname(os.path.abspath(args.out_tgt))
    fd_s, tmp_s = tempfile.mkstemp(dir=d_src, suffix=".tmp")
    fd_t, tmp_t = tempfile.mkstemp(dir=d_tgt, suffix=".tmp")
    os.close(fd_s)
    os.close(fd_t)
    try:
        combine_shuffle(corpora, args.seed, tmp_s, tmp_t)
        os.replace(tmp_s, args.out_src)
        os.replace(tmp_t, args.out_tgt)
    except BaseException:
        for tmp in (tmp_s, tmp_t):
            with contextlib.suppress(OSError):
                os.unlink(tmp)
        raise
    return 0


def _add_param_flags(p):
    g = p.add_argument_group("filter parameters")
    g.add_argument("--nonalpha-majority-threshold", type=float, default=None)
    g.add_argument("--mismatch-ratio", type=float, default=None)
    g.add_argument("--mismatch-min-count", type=int, default=None)
    g.add_argument("--repeat-min-run", type=int, default=None)
    g.add_argument("--langid-min-chars", type=int, default=None)
    g.add_argument("--langid-min-margin", type=float, default=None)
    g.add_argument("--len-min", type=int, default=None)
    g.add_argument("--len-max", type=int, default=None)
    g.add_argument("--len-ratio-max", type=float, default=None)


def _add_clean_common(p):
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--langid-model", help="language model file")
    p.add_argument("--rejects", help="write reject TSV here")
    p.add_argument("--report", help="write JSON report here")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--filters", help="comma-separated filter order override")
    p.add_argument("--max-bad-lines", type=int, default=None)
    p.add_argument("--exact-dedup", action="store_true", default=None,
                   help="dedup on exact strings instead of fingerprints")
    p.add_argument("--chunk-size", type=int, default=None)
    _add_param_flags(p)


def build_parser():
    parser = _Parser(prog="corpusclean",
                     description="Parallel and monolingual corpus cleaning.")
    parser.add_argument("--version", action="version",
                        version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="subcommand", metavar="COMMAND")

    p = sub.add_parser("clean-parallel", help="filter a line-aligned corpus pair")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    _add_clean_common(p)
    p.set_defaults(func=cmd_clean_parallel)

    p = sub.add_parser("clean-mono", help="filter a monolingual corpus")
    p.add_argument("--in", required=True)
    p.add_argument("--lang", dest="src_lang", required=True)
    _add_clean_common(p)
    p.set_defaults(func=cmd_clean_mono)

    p = sub.add_parser("langid-train", help="train a language model")
    p.add_argument("--samples", required=True,
                   help="directory of <code>.txt sample files")
    p.add_argument("--out", required=True)
    p.add_argument("--orders", default="1,2,3")
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_langid_train)

    p = sub.add_parser("langid-id", help="identify the language of each line")
    p.add_argument("--model", required=True)
    p.add_argument("--in", default=None, help="input file (default stdin)")
    p.set_defaults(func=cmd_langid_id)

    p = sub.add_parser("report", help="render report JSON as a table")
    p.add_argument("--in", dest="inputs", action="append", required=True,
                   metavar="REPORT.json")
    p.add_argument("--aggregate", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("combine-shuffle",
                       help="concatenate corpora and shuffle with a seed")
    p.add_argument("--pair", nargs=2, action="append", required=True,
                   metavar=("SRC", "TGT"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-src", required=True)
    p.add_argument("--out-tgt", required=True)
    p.set_defaults(func=cmd_combine_shuffle)

    for sp in sub.choices.values():
        sp.add_argument("--version", action="version",
                        version="%(prog)s " + __version__)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits for usage errors, --version and --help; keep the
        # in-process contract a plain return code
        code = e.code
        return code if isinstance(code, int) else (0 if code is None else 1)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (AlignmentError, TooManyBadLines, ReportFormatError, ModelError,
            TrainingError, ConfigFileError, UnicodeDecodeError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except PipelineConfigError as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
