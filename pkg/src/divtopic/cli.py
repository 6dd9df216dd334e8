"""Command-line pipeline: ingest -> train -> select -> eval -> export.

Every run resolves its configuration from flags (highest precedence), an
optional key=value ``--config`` file, and built-in defaults, then writes a
JSON manifest recording the resolved config, the seed, input/output digests
and wall-clock time. Sequential runs (--threads 1) with the same manifest
inputs reproduce outputs bit for bit.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__, divlda, divplsa, evaluation, lda, model_io, plsa, selection
from . import network as tn
from .corpus import load_bow, load_holdout, save_bow, save_holdout, split_holdout
from .errors import DataError, DivtopicError


class UsageError(DivtopicError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _opt(parser, spec, name, default, type=str, help="", action=None):
    """Register an option whose default lives in ``spec`` so that a config
    file can fill values the command line left out."""
    key = name.lstrip("-").replace("-", "_")
    spec[key] = (default, type)
    kwargs = dict(default=argparse.SUPPRESS, help=help)
    if action:
        parser.add_argument(name, action=action, **kwargs)
    else:
        parser.add_argument(name, type=type, **kwargs)


def _parse_config_file(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise DataError(f"{path}: line {lineno}: expected "
                                    "key=value")
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise DataError(f"cannot read config file: {exc}") from exc
    return values


def _resolve(args, spec):
    """flags > config file > defaults."""
    given = vars(args)
    from_file = {}
    if given.get("config"):
        from_file = _parse_config_file(given["config"])
    resolved = {}
    for key, (default, typ) in spec.items():
        if key in given:
            resolved[key] = given[key]
        elif key in from_file:
            raw = from_file[key]
            try:
                resolved[key] = (raw.lower() in ("1", "true", "yes")
                                 if typ is bool else typ(raw))
            except ValueError:
                raise UsageError(f"config value {key}={raw!r} is not a valid "
                                 f"{typ.__name__}") from None
        else:
            resolved[key] = default
    return resolved


def _require(cfg, *keys):
    for key in keys:
        if cfg.get(key) is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")


def _pick_seed(cfg):
    if cfg.get("seed") is None:
        cfg["seed"] = int(np.random.SeedSequence().entropy % (2 ** 32))
    return cfg["seed"]


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(path, subcommand, cfg, inputs, outputs, started):
    manifest = {
        "subcommand": subcommand,
        "config": {k: v for k, v in sorted(cfg.items())},
        "seed": cfg.get("seed"),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "wall_clock_sec": round(time.monotonic() - started, 3),
        "version": __version__,
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _write_trace_csv(path, likelihood, active_count):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "likelihood", "active_count"])
        for i, (ll, ac) in enumerate(zip(likelihood, active_count)):
            writer.writerow([i, repr(float(ll)), ac])


def _write_ranking_csv(path, ranking, model, vocabulary, top_words=20):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "topic_id", "score", "proportion",
                         "top_words"])
        for rank, (topic, score, prop) in enumerate(ranking.entries, 1):
            words = model.top_words(topic, top_words, vocabulary)
            writer.writerow([rank, topic, repr(float(score)),
                             repr(float(prop)), " ".join(words)])


def _read_ranking_ids(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise DataError(f"cannot read ranking: {exc}") from exc
    if not rows or "topic_id" not in rows[0]:
        raise DataError(f"{path}: not a ranking CSV (no topic_id column)")
    return [int(r["topic_id"]) for r in rows]


# ---------------------------------------------------------------- ingest

def _cmd_ingest(args):
    spec = args._spec
    cfg = _resolve(args, spec)
    _require(cfg, "docs", "vocab")
    started = time.monotonic()
    corpus = load_bow(cfg["docs"], cfg["vocab"])
    out_dir = cfg["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    outputs = []

    print(f"loaded {corpus.num_docs} documents, vocabulary {corpus.vocab_size}, "
          f"{corpus.token_total} tokens "
          f"({corpus.n_dropped_empty} empty documents dropped)")

    train_path = os.path.join(out_dir, "train.bow")
    if cfg["holdout_docs"] and cfg["holdout_docs"] > 0:
        _pick_seed(cfg)
        frac = cfg["holdout_docs"] / corpus.num_docs
        train, splits = split_holdout(corpus, frac, cfg["word_fraction"],
                                      cfg["seed"])
        save_bow(train, train_path)
        holdout_path = os.path.join(out_dir, "holdout.txt")
        save_holdout(splits, corpus.vocab_size, holdout_path)
        outputs += [train_path, holdout_path]
        print(f"held out {len(splits)} documents "
              f"(observed fraction {cfg['word_fraction']}) -> {holdout_path}")
    else:
        save_bow(corpus, train_path)
        outputs.append(train_path)
    print(f"training corpus -> {train_path}")

    _write_manifest(os.path.join(out_dir, "manifest.json"), "ingest", cfg,
                    [cfg["docs"], cfg["vocab"]], outputs, started)
    return 0


# ---------------------------------------------------------------- train

def _trace_from_plsa(ll_trace, K):
    return ll_trace, [K] * len(ll_trace)


def _cmd_train(args):
    cfg = _resolve(args, args._spec)
    _require(cfg, "model", "docs", "vocab", "out")
    if cfg["model"] not in ("plsa", "lda", "divplsa", "divlda"):
        raise UsageError(f"unknown model {cfg['model']!r}; choose "
                         "plsa|lda|divplsa|divlda")
    started = time.monotonic()
    _pick_seed(cfg)
    corpus = load_bow(cfg["docs"], cfg["vocab"])
    kind = cfg["model"]
    trace_cols = None
    keep_theta = bool(cfg["keep_theta"])

    if kind == "plsa":
        _require(cfg, "topics", "iters")
        state, ll_trace = plsa.train(corpus, cfg["topics"], cfg["iters"],
                                     cfg["seed"], tol=cfg["tol"],
                                     threads=cfg["threads"])
        sizes = plsa.topic_sizes(corpus, state)
        model = model_io.from_plsa(state, sizes, corpus.token_total,
                                   iteration=len(ll_trace) - 1,
                                   likelihood=ll_trace[-1],
                                   keep_theta=keep_theta)
        trace_cols = _trace_from_plsa(ll_trace, state.K)
    elif kind == "divplsa":
        _require(cfg, "start_topics")
        if cfg["warmup"] is None:
            cfg["warmup"] = 50
        if cfg["refresh_every"] is None:
            cfg["refresh_every"] = 10
        config = divplsa.DivPlsaConfig(
            start_topics=cfg["start_topics"], walk_alpha=cfg["walk_alpha"],
            gamma=cfg["gamma"], warmup_iters=cfg["warmup"],
            network_refresh_every=cfg["refresh_every"],
            active_patience=cfg["patience"], max_iters=cfg["max_iters"],
            seed=cfg["seed"], tol=cfg["tol"],
            active_threshold=cfg["threshold"], threads=cfg["threads"])
        state, trace, net = divplsa.train(corpus, config)
        sizes = trace.sizes[-1][net.active]
        model = model_io.from_plsa(state, sizes, corpus.token_total,
                                   iteration=len(trace.likelihood) - 1,
                                   likelihood=trace.likelihood[-1],
                                   topic_ids=np.nonzero(net.active)[0].tolist(),
                                   keep_theta=keep_theta)
        model.kind = "divplsa"
        trace_cols = (trace.likelihood, trace.active_count)
    elif kind == "lda":
        _require(cfg, "topics", "sweeps")
        if cfg["trace"]:
            raise UsageError("--trace is only recorded for plsa, divplsa and "
                             "divlda runs")
        state = lda.train(corpus, cfg["topics"], cfg["sweeps"],
                          cfg["burn_in"], cfg["seed"], alpha0=cfg["alpha0"],
                          beta=cfg["beta"])
        ll = lda.log_likelihood(corpus, state)
        model = model_io.from_lda(state, corpus.token_total,
                                  iteration=cfg["sweeps"], likelihood=ll,
                                  keep_theta=keep_theta)
    else:  # divlda
        _require(cfg, "start_topics", "sweeps")
        if cfg["warmup"] is None:
            cfg["warmup"] = 500
        if cfg["refresh_every"] is None:
            cfg["refresh_every"] = 50
        config = divlda.DivLdaConfig(
            start_topics=cfg["start_topics"], walk_alpha=cfg["walk_alpha"],
            gamma=cfg["gamma"], warmup_sweeps=cfg["warmup"],
            network_refresh_every=cfg["refresh_every"],
            total_sweeps=cfg["sweeps"], seed=cfg["seed"], beta=cfg["beta"],
            alpha0=cfg["alpha0"], active_patience=cfg["patience"])
        state, trace, net = divlda.train(corpus, config)
        model = model_io.from_lda(state, corpus.token_total,
                                  iteration=len(trace.likelihood) - 1,
                                  likelihood=trace.likelihood[-1],
                                  topic_ids=np.nonzero(net.active)[0].tolist(),
                                  keep_theta=keep_theta, kind="divlda")
        trace_cols = (trace.likelihood, trace.active_count)

    model_io.save_model(model, cfg["out"])
    outputs = [cfg["out"]]
    if cfg["trace"] and trace_cols is not None:
        _write_trace_csv(cfg["trace"], *trace_cols)
        outputs.append(cfg["trace"])
    print(f"trained {kind}: {model.K} topics, likelihood "
          f"{model.likelihood:.6g} -> {cfg['out']}")
    _write_manifest(cfg["manifest"] or cfg["out"] + ".manifest.json", "train",
                    cfg, [cfg["docs"], cfg["vocab"]], outputs, started)
    return 0


# ---------------------------------------------------------------- select

DEFAULT_MMR_LAMBDA = "0.5"
DEFAULT_DR_ALPHA = "0.25"
DEFAULT_DR_LAMBDA = "0.9"


def _parse_grid(text):
    try:
        return [float(x) for x in str(text).split(",")]
    except ValueError:
        raise UsageError(f"bad grid value list {text!r}") from None


def _cmd_select(args):
    cfg = _resolve(args, args._spec)
    _require(cfg, "model", "vocab", "method", "k", "out")
    started = time.monotonic()
    model = model_io.load_model(cfg["model"])
    from .corpus import load_vocabulary
    vocab = load_vocabulary(cfg["vocab"])
    if vocab.size != model.V:
        raise DataError(f"vocabulary has {vocab.size} terms but model "
                        f"expects {model.V}")

    method = cfg["method"]
    outputs = []

    def emit(ranking, path):
        _write_ranking_csv(path, ranking, model, vocab,
                           top_words=cfg["top_words"])
        outputs.append(path)
        print(f"{ranking.method}: topics {ranking.topic_ids()} -> {path}")

    if cfg["grid"]:  # sweep default grids unless explicit lists were given
        if method == "mmr" and cfg["lambda"] == DEFAULT_MMR_LAMBDA:
            cfg["lambda"] = "0.1,0.3,0.5,0.7,0.9"
        if method == "divrank":
            if cfg["alpha_dr"] == DEFAULT_DR_ALPHA:
                cfg["alpha_dr"] = "0.1,0.25,0.5"
            if cfg["lambda_dr"] == DEFAULT_DR_LAMBDA:
                cfg["lambda_dr"] = "0.7,0.85,0.95"

    if method == "topk":
        emit(selection.top_k_by_size(model, cfg["k"]), cfg["out"])
    elif method == "mmr":
        lams = _parse_grid(cfg["lambda"])
        for lam in lams:
            path = (cfg["out"] if len(lams) == 1
                    else _suffixed(cfg["out"], f"lambda={lam:g}"))
            emit(selection.mmr_select(model, cfg["k"], lam), path)
    elif method == "divrank":
        alphas = _parse_grid(cfg["alpha_dr"])
        lams = _parse_grid(cfg["lambda_dr"])
        single = len(alphas) == 1 and len(lams) == 1
        for a in alphas:
            for lam in lams:
                path = (cfg["out"] if single
                        else _suffixed(cfg["out"], f"alpha={a:g}_lambda={lam:g}"))
                emit(selection.divrank_select(model, cfg["k"], a, lam,
                                              iters=cfg["iters"]), path)
    else:
        raise UsageError(f"unknown method {method!r}; choose topk|mmr|divrank")

    _write_manifest(cfg["manifest"] or cfg["out"] + ".manifest.json", "select",
                    cfg, [cfg["model"], cfg["vocab"]], outputs, started)
    return 0


def _suffixed(path, suffix):
    root, ext = os.path.splitext(path)
    return f"{root}.{suffix}{ext}"


# ---------------------------------------------------------------- eval

def _cmd_eval(args):
    cfg = _resolve(args, args._spec)
    _require(cfg, "metric", "model", "out")
    started = time.monotonic()
    model = model_io.load_model(cfg["model"])
    inputs = [cfg["model"]]
    if cfg["selection"]:
        ids = _read_ranking_ids(cfg["selection"])
        ranking = selection.TopicRanking(
            entries=[(t, 0.0, 0.0) for t in ids], method="file")
        model = selection.restrict_model(model, ranking)
        inputs.append(cfg["selection"])

    metric = cfg["metric"]
    rows = []
    if metric == "pmi":
        _require(cfg, "reference", "reference_vocab")
        reference = load_bow(cfg["reference"], cfg["reference_vocab"])
        if reference.vocab_size != model.V:
            raise DataError("reference corpus vocabulary size "
                            f"{reference.vocab_size} != model V {model.V}")
        report = evaluation.pmi_coherence(model.phi, reference,
                                          top_n=cfg["top_n"])
        inputs += [cfg["reference"], cfg["reference_vocab"]]
        for t, score in enumerate(report.per_topic_pmi):
            rows.append(["pmi_topic", model.topic_ids[t], repr(score)])
        rows.append(["pmi_mean", "", repr(report.mean_pmi)])
        rows.append(["zero_pair_count", "", report.zero_pair_count])
        print(f"mean PMI over {report.k_used} topics "
              f"(top {cfg['top_n']} words): {report.mean_pmi:.4f}")
    elif metric == "perplexity":
        _require(cfg, "holdout")
        holdout = load_holdout(cfg["holdout"])
        report = evaluation.perplexity(model.phi, holdout,
                                       fold_in_iters=cfg["fold_in_iters"])
        inputs.append(cfg["holdout"])
        rows.append(["perplexity", "", repr(report.perplexity)])
        rows.append(["floored_tokens", "", report.floored_tokens])
        print(f"perplexity of {model.K} selected topics on "
              f"{len(holdout)} held-out documents: {report.perplexity:.4f}")
    else:
        raise UsageError(f"unknown metric {metric!r}; choose pmi|perplexity")

    with open(cfg["out"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "topic_id", "value"])
        writer.writerows(rows)
    _write_manifest(cfg["manifest"] or cfg["out"] + ".manifest.json", "eval",
                    cfg, inputs, [cfg["out"]], started)
    return 0


# ---------------------------------------------------------------- exports

def _cmd_export_topics(args):
    cfg = _resolve(args, args._spec)
    _require(cfg, "model", "vocab", "out")
    started = time.monotonic()
    model = model_io.load_model(cfg["model"])
    from .corpus import load_vocabulary
    vocab = load_vocabulary(cfg["vocab"])
    if cfg["selection"]:
        ids = _read_ranking_ids(cfg["selection"])
        for t in ids:
            if not 0 <= t < model.K:
                raise DataError(f"ranking references unknown topic {t}")
        ranking = selection.TopicRanking(
            entries=[(t, float(model.sizes[t]),
                      float(model.sizes[t] / model.token_total)) for t in ids])
    else:
        ranking = selection.top_k_by_size(model, model.K)

    with open(cfg["out"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "topic_id", "proportion", "top_words"])
        for rank, (t, _score, prop) in enumerate(ranking.entries, 1):
            words = model.top_words(t, cfg["top_words"], vocab)
            writer.writerow([rank, t, repr(float(prop)), " ".join(words)])
    print(f"wrote {len(ranking)} topics -> {cfg['out']}")
    _write_manifest(cfg["manifest"] or cfg["out"] + ".manifest.json",
                    "export-topics", cfg, [cfg["model"], cfg["vocab"]],
                    [cfg["out"]], started)
    return 0


def _cmd_export_network(args):
    cfg = _resolve(args, args._spec)
    _require(cfg, "model", "vocab", "out_edges", "out_nodes")
    started = time.monotonic()
    model = model_io.load_model(cfg["model"])
    from .corpus import load_vocabulary
    vocab = load_vocabulary(cfg["vocab"])
    active = model.sizes > 0
    W = tn.similarity_matrix(model.phi, active)
    idx = np.nonzero(active)[0]

    with open(cfg["out_edges"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "weight"])
        for a in range(idx.size):
            for b in range(a + 1, idx.size):
                i, j = int(idx[a]), int(idx[b])
                writer.writerow([i, j, repr(float(W[i, j]))])
    with open(cfg["out_nodes"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic_id", "size", "top_words"])
        for i in idx:
            words = model.top_words(int(i), 10, vocab)
            writer.writerow([int(i), repr(float(model.sizes[i])),
                             " ".join(words)])
    print(f"wrote {idx.size} nodes, {idx.size * (idx.size - 1) // 2} edges")
    _write_manifest(cfg["manifest"] or cfg["out_edges"] + ".manifest.json",
                    "export-network", cfg, [cfg["model"], cfg["vocab"]],
                    [cfg["out_edges"], cfg["out_nodes"]], started)
    return 0


def _cmd_report(args):
    cfg = _resolve(args, args._spec)
    _require(cfg, "trace")
    try:
        with open(cfg["trace"], newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise DataError(f"cannot read trace: {exc}") from exc
    needed = {"iteration", "likelihood", "active_count"}
    if not rows or not needed.issubset(rows[0].keys()):
        raise DataError(f"{cfg['trace']}: trace CSV must have columns "
                        f"{sorted(needed)}")
    for lineno, row in enumerate(rows, 2):
        try:
            it = int(row["iteration"])
            ll = float(row["likelihood"])
            ac = int(row["active_count"])
        except ValueError as exc:
            raise DataError(f"{cfg['trace']}: line {lineno}: {exc}") from exc
        print(f"{it}\t{ll!r}\t{ac}")
    finals = rows[-1]
    print(f"# {len(rows)} iterations, final likelihood "
          f"{float(finals['likelihood']):.6g}, final active count "
          f"{finals['active_count']}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- parser

def _add_common(sub, spec):
    _opt(sub, spec, "--config", None, str, "key=value config file; flags override")
    _opt(sub, spec, "--manifest", None, str, "manifest output path")


def build_parser():
    parser = _Parser(prog="divtopic",
                     description="Diverse topic modeling pipeline")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand")

    p = subs.add_parser("ingest", help="validate a corpus and split a holdout")
    spec = {}
    p.set_defaults(func=_cmd_ingest, _spec=spec)
    _opt(p, spec, "--docs", None, str, "bag-of-words docs file")
    _opt(p, spec, "--vocab", None, str, "vocabulary file, one term per line")
    _opt(p, spec, "--holdout-docs", 0, int, "number of documents to hold out")
    _opt(p, spec, "--word-fraction", 0.8, float,
         "observed fraction of each held-out document")
    _opt(p, spec, "--seed", None, int, "RNG seed (generated if omitted)")
    _opt(p, spec, "--out-dir", ".", str, "output directory")
    _add_common(p, spec)

    p = subs.add_parser("train", help="train a topic model")
    spec = {}
    p.set_defaults(func=_cmd_train, _spec=spec)
    _opt(p, spec, "--model", None, str, "plsa|lda|divplsa|divlda")
    _opt(p, spec, "--docs", None, str, "bag-of-words docs file")
    _opt(p, spec, "--vocab", None, str, "vocabulary file")
    _opt(p, spec, "--out", None, str, "model output path")
    _opt(p, spec, "--trace", None, str, "trace CSV output path")
    _opt(p, spec, "--seed", None, int, "RNG seed (generated if omitted)")
    _opt(p, spec, "--topics", None, int, "topic count (plsa/lda)")
    _opt(p, spec, "--start-topics", None, int,
         "starting topic count (divplsa/divlda)")
    _opt(p, spec, "--iters", 200, int, "EM iterations (plsa)")
    _opt(p, spec, "--max-iters", 300, int, "EM iteration cap (divplsa)")
    _opt(p, spec, "--sweeps", None, int, "Gibbs sweeps (lda/divlda)")
    _opt(p, spec, "--burn-in", 50, int,
         "sweeps before alpha optimization starts (lda)")
    _opt(p, spec, "--tol", 1e-6, float, "relative likelihood tolerance")
    _opt(p, spec, "--gamma", 1.0, float, "size-reinforcement exponent")
    _opt(p, spec, "--walk-alpha", 0.1, float,
         "probability of leaving the current topic per walk step")
    _opt(p, spec, "--warmup", None, int,
         "iterations/sweeps before the walk starts (default 50 EM / 500 sweeps)")
    _opt(p, spec, "--refresh-every", None, int,
         "network refresh period (default 10 EM / 50 sweeps)")
    _opt(p, spec, "--patience", 3, int,
         "refreshes with stable active count before stopping")
    _opt(p, spec, "--threshold", 0.5, float,
         "active-topic size threshold (divplsa)")
    _opt(p, spec, "--beta", 0.01, float, "topic-word concentration (lda/divlda)")
    _opt(p, spec, "--alpha0", None, float,
         "initial document-topic concentration (default 50/K)")
    _opt(p, spec, "--threads", 1, int, "worker threads for the EM pass")
    _opt(p, spec, "--keep-theta", False, bool,
         "embed document mixtures in the model file", action="store_true")
    _add_common(p, spec)

    p = subs.add_parser("select", help="select top-K topics from a model")
    spec = {}
    p.set_defaults(func=_cmd_select, _spec=spec)
    _opt(p, spec, "--model", None, str, "model file")
    _opt(p, spec, "--vocab", None, str, "vocabulary file")
    _opt(p, spec, "--method", None, str, "topk|mmr|divrank")
    _opt(p, spec, "--k", None, int, "number of topics to select")
    _opt(p, spec, "--lambda", DEFAULT_MMR_LAMBDA, str,
         "MMR relevance weight; comma-separated values sweep a grid")
    _opt(p, spec, "--alpha-dr", DEFAULT_DR_ALPHA, str,
         "divrank self-loop weight; comma-separated grid")
    _opt(p, spec, "--lambda-dr", DEFAULT_DR_LAMBDA, str,
         "divrank walk weight; comma-separated grid")
    _opt(p, spec, "--grid", False, bool,
         "sweep built-in parameter grids, one ranking file per point",
         action="store_true")
    _opt(p, spec, "--iters", 200, int, "divrank iteration cap")
    _opt(p, spec, "--top-words", 20, int, "words per topic in the ranking CSV")
    _opt(p, spec, "--out", None, str, "ranking CSV output path")
    _add_common(p, spec)

    p = subs.add_parser("eval", help="score a model or selection")
    spec = {}
    p.set_defaults(func=_cmd_eval, _spec=spec)
    _opt(p, spec, "--metric", None, str, "pmi|perplexity")
    _opt(p, spec, "--model", None, str, "model file")
    _opt(p, spec, "--selection", None, str, "ranking CSV restricting the model")
    _opt(p, spec, "--reference", None, str, "reference docs file for PMI")
    _opt(p, spec, "--reference-vocab", None, str, "reference vocabulary file")
    _opt(p, spec, "--holdout", None, str, "holdout split file for perplexity")
    _opt(p, spec, "--top-n", 20, int, "top words per topic for PMI")
    _opt(p, spec, "--fold-in-iters", 50, int, "EM iterations per held-out doc")
    _opt(p, spec, "--out", None, str, "report CSV output path")
    _add_common(p, spec)

    p = subs.add_parser("export-topics", help="write the topic table")
    spec = {}
    p.set_defaults(func=_cmd_export_topics, _spec=spec)
    _opt(p, spec, "--model", None, str, "model file")
    _opt(p, spec, "--vocab", None, str, "vocabulary file")
    _opt(p, spec, "--selection", None, str, "ranking CSV to export")
    _opt(p, spec, "--top-words", 20, int, "words per topic")
    _opt(p, spec, "--out", None, str, "topic table CSV path")
    _add_common(p, spec)

    p = subs.add_parser("export-network",
                        help="write the topic similarity graph")
    spec = {}
    p.set_defaults(func=_cmd_export_network, _spec=spec)
    _opt(p, spec, "--model", None, str, "model file")
    _opt(p, spec, "--vocab", None, str, "vocabulary file")
    _opt(p, spec, "--out-edges", None, str, "edge list CSV path")
    _opt(p, spec, "--out-nodes", None, str, "node table CSV path")
    _add_common(p, spec)

    p = subs.add_parser("report", help="validate and print a trace CSV")
    spec = {}
    p.set_defaults(func=_cmd_report, _spec=spec)
    _opt(p, spec, "--trace", None, str, "trace CSV from a training run")
    _add_common(p, spec)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "subcommand", None):
            raise UsageError(parser.format_usage())
        return args.func(args)
    except UsageError as exc:
        print(f"divtopic: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"divtopic: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"divtopic: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
