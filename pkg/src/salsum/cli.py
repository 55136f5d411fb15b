"""Command-line entry points: synth, train, summarize, salience, evaluate, compare, report, self-check.

Exit codes: 0 success, 1 self-check failure, 2 configuration error,
3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from .config import ConfigError, RunConfig, require_file, require_parent, resolve

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4

log = logging.getLogger("salsum")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int)


def _add_profile(p):
    p.add_argument("--profile", choices=["cnndm", "samsum", "edt", "custom"])
    p.add_argument("--max-src", type=int, dest="max_src")
    p.add_argument("--max-tgt", type=int, dest="max_tgt")


def _add_decode(p):
    p.add_argument("--beam", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--block-n", type=int, dest="block_n")
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--temperature", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="salsum", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic copy-the-lead corpus")
    _add_common(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--sentences", type=int, default=4)
    p.add_argument("--output", required=True)
    p.add_argument("--embeddings", help="also write random embeddings for every token")
    p.add_argument("--dim", type=int, default=16)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    _add_common(p)
    _add_profile(p)
    p.add_argument("--corpus")
    p.add_argument("--checkpoint")
    for name, kind in [("epochs", int), ("lr", float), ("batch-size", int), ("vocab-cap", int),
                       ("d-model", int), ("n-heads", int), ("enc-layers", int), ("dec-layers", int),
                       ("ffn-dim", int), ("lambda-sal", float), ("thresholds", str)]:
        p.add_argument(f"--{name}", type=kind, dest=name.replace("-", "_"))

    p = sub.add_parser("summarize", help="decode summaries with a trained checkpoint")
    _add_common(p)
    p.add_argument("--max-src", type=int, dest="max_src")
    p.add_argument("--max-tgt", type=int, dest="max_tgt")
    _add_decode(p)
    p.add_argument("--corpus")
    p.add_argument("--checkpoint")
    p.add_argument("--output")

    p = sub.add_parser("salience", help="emit oracle salience scores and levels")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--output")
    p.add_argument("--thresholds")

    p = sub.add_parser("evaluate", help="score system outputs against references")
    _add_common(p)
    p.add_argument("--outputs", required=True, help="JSON lines of {id, summary}")
    p.add_argument("--references", required=True, help="corpus JSON lines with reference summaries")
    p.add_argument("--embeddings")
    p.add_argument("--idf")
    p.add_argument("--use-idf", action="store_true")
    p.add_argument("--name", help="system name (default: outputs file stem)")
    p.add_argument("--dataset")
    p.add_argument("--output", help="write the report JSON here")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("compare", help="side-by-side table of several reports")
    _add_common(p)
    p.add_argument("reports", nargs="+")
    p.add_argument("--source", help="corpus with source documents for hallucination flags")
    p.add_argument("--system-outputs", nargs="*", default=[], metavar="NAME=PATH")

    p = sub.add_parser("report", help="render reports as a score table")
    _add_common(p)
    p.add_argument("reports", nargs="*")
    p.add_argument("--published", action="store_true", help="render the published reference scores")
    p.add_argument("--output")

    p = sub.add_parser("self-check", help="run the oracle comparison suite")
    _add_common(p)
    return parser


@contextmanager
def _as_config_error():
    """Parameter validation failures (ValueError) become configuration errors."""
    try:
        yield
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _settings(args) -> RunConfig:
    skip = {"command", "config", "verbose", "reports", "published", "n", "sentences", "dim", "outputs",
            "references", "use_idf", "name", "dataset", "jobs", "source", "system_outputs"}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    return resolve(args.config, overrides)


# -- commands ----------------------------------------------------------------

def cmd_synth(args) -> int:
    from .data import synthetic_corpus, write_jsonl, write_synthetic_embeddings
    from .textcore import tokenize

    cfg = _settings(args)
    corpus = synthetic_corpus(args.n, seed=cfg.seed, n_sentences=args.sentences)
    write_jsonl(args.output, ({"id": e.id, "document": e.document, "summary": e.summary} for e in corpus))
    if args.embeddings:
        tokens = {t for e in corpus for t in tokenize(e.document + " " + e.summary)}
        write_synthetic_embeddings(args.embeddings, tokens | {"<unk>"}, dim=args.dim, seed=cfg.seed)
    return EXIT_OK


def cmd_train(args) -> int:
    from .checkpoint import save_checkpoint
    from .data import CorpusError, build_vocab, get_profile, load_corpus, preprocess, unk_rate
    from .model import ModelConfig
    from .train import TrainConfig, train

    cfg = _settings(args)
    corpus_path = require_file(cfg.corpus, "corpus")
    ckpt_path = require_parent(cfg.checkpoint, "checkpoint")
    with _as_config_error():
        profile = get_profile(cfg.profile, cfg.max_src, cfg.max_tgt)
        thresholds = cfg.threshold_values
        model_cfg = ModelConfig(
            d_model=cfg.d_model, n_heads=cfg.n_heads, enc_layers=cfg.enc_layers, dec_layers=cfg.dec_layers,
            ffn_dim=cfg.ffn_dim, vocab_size=6, K=len(thresholds) + 1, lambda_sal=cfg.lambda_sal,
            max_src_len=profile.max_src_tokens, max_tgt_len=profile.max_tgt_tokens, seed=cfg.seed,
        )
        train_cfg = TrainConfig(epochs=cfg.epochs, lr=cfg.lr, batch_size=cfg.batch_size, seed=cfg.seed)

    corpus = load_corpus(corpus_path)
    if not corpus:
        raise CorpusError(f"corpus {corpus_path} is empty")
    vocab = build_vocab(corpus, cfg.vocab_cap)
    prepared = [preprocess(e, profile, vocab, thresholds) for e in corpus]
    print(f"examples={len(prepared)} vocab={len(vocab)} unk_rate={unk_rate(prepared):.4f}")
    model_cfg = ModelConfig.from_dict({**model_cfg.to_dict(), "vocab_size": len(vocab)})
    model, history = train(prepared, model_cfg, train_cfg)
    for e in history:
        print(f"epoch {e.epoch} nll={e.nll:.4f} sal_ce={e.sal_ce:.4f} total={e.total:.4f}")
    meta = {
        "profile": {"name": profile.name, "max_src": profile.max_src_tokens, "max_tgt": profile.max_tgt_tokens},
        "thresholds": list(thresholds),
        "history": [vars(e) for e in history],
    }
    save_checkpoint(ckpt_path, model, vocab, meta)
    return EXIT_OK


def cmd_summarize(args) -> int:
    from .checkpoint import load_checkpoint
    from .data import DatasetProfile, EOS, Example, detokenize, load_corpus, preprocess, write_jsonl
    from .decode import DecodeConfig, beam_search, strip_eos

    cfg = _settings(args)
    corpus_path = require_file(cfg.corpus, "corpus")
    ckpt_path = require_file(cfg.checkpoint, "checkpoint")
    out_path = require_parent(cfg.output, "output")
    model, vocab, meta = load_checkpoint(ckpt_path)
    prof = meta["profile"]
    with _as_config_error():
        profile = DatasetProfile(prof["name"], cfg.max_src or prof["max_src"], cfg.max_tgt or prof["max_tgt"])
        if profile.max_src_tokens > model.cfg.max_src_len:
            raise ConfigError(f"max_src {profile.max_src_tokens} exceeds the model's {model.cfg.max_src_len}")
        max_len = cfg.max_len or profile.max_tgt_tokens - 2
        max_len = max(1, min(max_len, profile.max_tgt_tokens))
        dcfg = DecodeConfig(cfg.beam, cfg.alpha, cfg.block_n, max_len, cfg.temperature)

    records = []
    for ex in load_corpus(corpus_path, require_summary=False):
        prep = preprocess(Example(ex.id, ex.document), profile, vocab)
        step = model.stepper(prep.input_ids, temperature=dcfg.temperature)
        hyp = beam_search(step, dcfg, EOS)
        records.append({"id": ex.id, "summary": detokenize(vocab.decode(strip_eos(hyp, EOS)))})
    write_jsonl(out_path, records)
    return EXIT_OK


def cmd_salience(args) -> int:
    from .data import load_corpus, write_jsonl
    from .salience import allocate
    from .textcore import split_sentences, tokenize

    cfg = _settings(args)
    corpus_path = require_file(cfg.corpus, "corpus")
    with _as_config_error():
        thresholds = cfg.threshold_values
    records = []
    for ex in load_corpus(corpus_path):
        sentences = [t for t in (tokenize(s) for s in split_sentences(ex.document)) if t]
        alloc = allocate(sentences, tokenize(ex.summary), thresholds)
        records.append({"id": ex.id, "scores": alloc.scores, "levels": alloc.levels})
    if cfg.output:
        write_jsonl(require_parent(cfg.output, "output"), records)
    else:
        for rec in records:
            print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


def _read_outputs(path) -> dict[str, str]:
    from .data import load_corpus
    from .report import ReportError

    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ReportError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or not isinstance(rec.get("id"), str) or not isinstance(rec.get("summary"), str):
                raise ReportError(f"{path}:{lineno}: expected {{id, summary}} strings")
            if rec["id"] in out:
                raise ReportError(f"{path}:{lineno}: duplicate id {rec['id']!r}")
            out[rec["id"]] = rec["summary"]
    return out


def cmd_evaluate(args) -> int:
    from .data import load_corpus, load_embeddings
    from .report import evaluate, render_table

    cfg = _settings(args)
    outputs_path = require_file(args.outputs, "system outputs")
    refs_path = require_file(args.references, "references")
    emb = None
    if cfg.embeddings:
        emb = load_embeddings(require_file(cfg.embeddings, "embeddings"), cfg.idf)
    else:
        log.warning("no embedding file given; skipping bertscore and moverscore")
    outputs = _read_outputs(outputs_path)
    refs = {e.id: e.summary for e in load_corpus(refs_path)}
    scores = evaluate(outputs, refs, emb, use_idf=args.use_idf, jobs=args.jobs)
    name = args.name or Path(outputs_path).stem
    report = {"dataset": args.dataset, "systems": {name: scores}}
    if cfg.output:
        Path(require_parent(cfg.output, "output")).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(render_table([report]))
    return EXIT_OK


def cmd_compare(args) -> int:
    from .data import load_corpus
    from .report import hallucination_lines, load_report, merge_for_comparison, render_table

    merged = merge_for_comparison([load_report(require_file(p, "report")) for p in args.reports])
    sys.stdout.write(render_table([merged]))
    if args.system_outputs:
        if not args.source:
            raise ConfigError("--system-outputs needs --source")
        sources = {e.id: e.document for e in load_corpus(require_file(args.source, "source corpus"),
                                                          require_summary=False)}
        systems = {}
        for spec in args.system_outputs:
            name, sep, path = spec.partition("=")
            if not sep:
                raise ConfigError(f"expected NAME=PATH, got {spec!r}")
            systems[name] = _read_outputs(require_file(path, "system outputs"))
        print("\nnovel n-grams against the source ([x] = unigram not in source)")
        for ex_id in sorted(sources):
            outs = {n: o[ex_id] for n, o in systems.items() if ex_id in o}
            if outs:
                print(f"{ex_id}:")
                print("\n".join(hallucination_lines(sources[ex_id], outs)))
    return EXIT_OK


def cmd_report(args) -> int:
    from .published import published_reports
    from .report import load_report, render_table

    reports = published_reports() if args.published else []
    reports += [load_report(require_file(p, "report")) for p in args.reports]
    if not reports:
        raise ConfigError("give report files or --published")
    text = render_table(reports)
    cfg = _settings(args)
    if cfg.output:
        Path(require_parent(cfg.output, "output")).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_self_check(args) -> int:
    from .selfcheck import run

    cfg = _settings(args)
    return EXIT_OK if run(cfg.seed) else EXIT_CHECK


COMMANDS = {
    "synth": cmd_synth, "train": cmd_train, "summarize": cmd_summarize, "salience": cmd_salience,
    "evaluate": cmd_evaluate, "compare": cmd_compare, "report": cmd_report, "self-check": cmd_self_check,
}


def main(argv=None) -> int:
    from .checkpoint import CheckpointError
    from .data import CorpusError
    from .metrics import EmbeddingFileError
    from .report import ReportError
    from .train import TrainingDiverged

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CorpusError, EmbeddingFileError, CheckpointError, ReportError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingDiverged as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
