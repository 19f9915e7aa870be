"""Command-line entry point tying the pipeline together.

Subcommands cover the full path from raw JSONL to evaluation reports:
ingest, preprocess, split, train, predict, evaluate, kappa,
annotate-round, serve, report, plus synth for generating demo corpora.

Exit codes: 0 success, 1 usage error, 2 data error. Every run that
produces files also writes a .manifest.json sidecar next to its primary
output; reports themselves are byte-stable across reruns.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import (CorpusError, SplitConfig, balance, deduplicate,
                     filter_relevant, load_corpus, save_corpus, split)
from .features import TfidfModel, TfidfParams, to_matrix
from .labels import DRUG_CLASSES, SymptomVocabulary, default_vocabulary
from .lexicon import LexiconError, SlangLexicon, compile_lexicon, seed_lexicon
from .manifest import RunManifest
from .metrics import (evaluate_multiclass, evaluate_multilabel, fleiss_kappa,
                      multilabel_kappa, render_eval_table)
from .normalize import NormalizeConfig, Normalizer, load_stopwords, \
    tokenize_and_reduce

ALGO_NAMES = {
    "lr": "logistic_regression",
    "nb": "naive_bayes",
    "knn": "knn",
    "dt": "decision_tree",
    "rf": "random_forest",
}
ALGO_LABELS = {"lr": "LR", "nb": "NB", "knn": "KNN", "dt": "DT", "rf": "RF"}

VECTORIZER_VERSION = 1


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ helpers

def _norm_cfg(args) -> NormalizeConfig:
    return NormalizeConfig(
        strip_mentions=not getattr(args, "keep_mentions", False),
        stemmer="none" if getattr(args, "no_stem", False) else "porter_like",
        stopword_list=getattr(args, "stopwords", "english"),
    )


def _load_lexicon(args) -> SlangLexicon:
    path = getattr(args, "lexicon", None)
    if path:
        return compile_lexicon(path)
    return seed_lexicon()


def _tokens_for(texts, cfg: NormalizeConfig) -> list[list[str]]:
    stop = load_stopwords(cfg.stopword_list)
    return [tokenize_and_reduce(t, cfg, stop) for t in texts]


def _save_vectorizer(path: str, cfg: NormalizeConfig, model: TfidfModel) -> None:
    doc = {
        "version": VECTORIZER_VERSION,
        "normalize": {"strip_mentions": cfg.strip_mentions,
                      "stemmer": cfg.stemmer,
                      "stopword_list": cfg.stopword_list},
        "tfidf": model.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, sort_keys=True)
        f.write("\n")


def _load_vectorizer(path: str) -> tuple[NormalizeConfig, TfidfModel]:
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    cfg = NormalizeConfig(**doc["normalize"])
    return cfg, TfidfModel.from_dict(doc["tfidf"])


def _default_vectorizer_path(model_path: str) -> str:
    return str(model_path) + ".vectorizer.json"


def _parse_hypers(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise UsageError(f"--hyper expects KEY=VALUE, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        out[key.strip()] = value
    return out


def _vectorize_posts(posts, cfg: NormalizeConfig, model: TfidfModel):
    texts = [p.text for p in posts]
    return to_matrix(model.transform_many(_tokens_for(texts, cfg)))


def _write_json(path: str, payload: dict) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _ensure_parents(*paths) -> None:
    """Create parent directories for declared output paths."""
    for p in paths:
        if p:
            Path(p).parent.mkdir(parents=True, exist_ok=True)


# -------------------------------------------------------------- subcommands

def cmd_ingest(args) -> int:
    manifest = RunManifest("ingest", {"inputs": args.input,
                                      "labeled": args.labeled,
                                      "drop_irrelevant": args.drop_irrelevant,
                                      "balance": args.balance,
                                      "seed": args.seed})
    vocab = default_vocabulary()
    items = []
    for path in args.input:
        manifest.add_input(path)
        items.extend(load_corpus(path, labeled=args.labeled,
                                 vocab=vocab if args.labeled else None))
    loaded = len(items)
    items = deduplicate(items)
    deduped = len(items)
    if args.drop_irrelevant:
        items = filter_relevant(items, _load_lexicon(args), vocab)
    relevant = len(items)
    if args.balance != "none":
        if not args.labeled:
            raise UsageError("--balance requires --labeled input")
        items = balance(items, strategy=args.balance, seed=args.seed)
    _ensure_parents(args.output)
    save_corpus(args.output, items)
    manifest.add_output(args.output)
    manifest.notes.update({"loaded": loaded, "after_dedup": deduped,
                           "after_filter": relevant, "written": len(items)})
    manifest.write()
    print(f"ingest: {loaded} read, {deduped} after dedup, "
          f"{relevant} after filter, {len(items)} written -> {args.output}")
    return 0


def cmd_preprocess(args) -> int:
    manifest = RunManifest("preprocess", {"input": args.input,
                                          "no_stem": args.no_stem,
                                          "stopwords": args.stopwords,
                                          "keep_mentions": args.keep_mentions})
    manifest.add_input(args.input)
    posts = load_corpus(args.input, labeled=args.labeled)
    if args.labeled:
        posts = [lp.post for lp in posts]
    normalizer = Normalizer(_norm_cfg(args), _load_lexicon(args),
                            default_vocabulary())
    _ensure_parents(args.output)
    with open(args.output, "w", encoding="utf-8") as f:
        for post in posts:
            doc = normalizer(post)
            f.write(json.dumps(doc.to_dict(), ensure_ascii=False, sort_keys=True))
            f.write("\n")
    manifest.add_output(args.output)
    manifest.write()
    print(f"preprocess: {len(posts)} documents -> {args.output}")
    return 0


def cmd_split(args) -> int:
    manifest = RunManifest("split", {"input": args.input,
                                     "fraction": args.fraction,
                                     "seed": args.seed,
                                     "stratify": not args.no_stratify})
    manifest.add_input(args.input)
    corpus = load_corpus(args.input, labeled=True, vocab=default_vocabulary())
    cfg = SplitConfig(train_fraction=args.fraction, seed=args.seed,
                      stratify_by_drug=not args.no_stratify)
    result = split(corpus, cfg)
    _ensure_parents(args.train, args.test)
    save_corpus(args.train, result.train)
    save_corpus(args.test, result.test)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    manifest.add_output(args.train)
    manifest.add_output(args.test)
    manifest.notes.update({"train": len(result.train), "test": len(result.test),
                           "warnings": list(result.warnings)})
    manifest.write()
    print(f"split: {len(corpus)} -> {len(result.train)} train / "
          f"{len(result.test)} test")
    return 0


def cmd_train(args) -> int:
    from .classifiers import ModelSpec, fit, ovr_fit, save_bundle, save_model

    manifest = RunManifest("train", {"task": args.task, "algo": args.algo,
                                     "train": args.train, "seed": args.seed,
                                     "min_df": args.min_df,
                                     "max_features": args.max_features,
                                     "tau": args.tau,
                                     "hyper": _parse_hypers(args.hyper)})
    manifest.add_input(args.train)
    vocab = default_vocabulary()
    corpus = load_corpus(args.train, labeled=True, vocab=vocab)
    norm_cfg = _norm_cfg(args)
    tokens = _tokens_for([lp.post.text for lp in corpus], norm_cfg)
    tfidf = TfidfModel.fit(tokens, TfidfParams(min_df=args.min_df,
                                               max_features=args.max_features))
    X = to_matrix(tfidf.transform_many(tokens))
    spec = ModelSpec(algorithm=ALGO_NAMES[args.algo],
                     hyperparameters=_parse_hypers(args.hyper),
                     seed=args.seed)
    _ensure_parents(args.model, args.vectorizer
                    or _default_vectorizer_path(args.model))
    if args.task == "drug":
        y = [lp.drug for lp in corpus]
        model = fit(spec, X, y, class_list=list(DRUG_CLASSES))
        save_model(model, args.model)
    else:
        Y = [set(lp.symptoms) for lp in corpus]
        bundle = ovr_fit(spec, X, Y, vocab, tau=args.tau)
        save_bundle(bundle, args.model)
        if bundle.degenerate:
            print("note: constant labels trained as fixed-negative stubs: "
                  + ", ".join(bundle.degenerate), file=sys.stderr)
    vec_path = args.vectorizer or _default_vectorizer_path(args.model)
    _save_vectorizer(vec_path, norm_cfg, tfidf)
    manifest.add_output(args.model)
    manifest.add_output(vec_path)
    manifest.notes.update({"n_train": len(corpus), "dim": tfidf.dim})
    manifest.write()
    print(f"train: {args.task}/{args.algo} on {len(corpus)} posts "
          f"(dim {tfidf.dim}) -> {args.model}")
    return 0


def _load_task_model(args):
    from .classifiers import load_bundle, load_model

    vec_path = args.vectorizer or _default_vectorizer_path(args.model)
    norm_cfg, tfidf = _load_vectorizer(vec_path)
    if args.task == "drug":
        model = load_model(args.model)
    else:
        model = load_bundle(args.model)
    return norm_cfg, tfidf, model, vec_path


def cmd_predict(args) -> int:
    from .classifiers import ovr_predict_matrix, ovr_proba_matrix

    manifest = RunManifest("predict", {"task": args.task, "model": args.model,
                                       "input": args.input,
                                       "with_proba": args.with_proba})
    norm_cfg, tfidf, model, vec_path = _load_task_model(args)
    manifest.add_input(args.model)
    manifest.add_input(vec_path)
    manifest.add_input(args.input)
    posts = load_corpus(args.input, labeled=args.labeled)
    if args.labeled:
        posts = [lp.post for lp in posts]
    X = _vectorize_posts(posts, norm_cfg, tfidf)
    _ensure_parents(args.output)
    with open(args.output, "w", encoding="utf-8") as f:
        if args.task == "drug":
            idx = model.predict_matrix(X)
            proba = model.predict_proba_matrix(X) if args.with_proba else None
            for i, post in enumerate(posts):
                row = {"id": post.id, "drug": model.class_list[idx[i]]}
                if proba is not None:
                    row["proba"] = {c: round(float(p), 6) for c, p in
                                    zip(model.class_list, proba[i])}
                f.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
                f.write("\n")
        else:
            sets = ovr_predict_matrix(model, X)
            proba = ovr_proba_matrix(model, X) if args.with_proba else None
            for i, post in enumerate(posts):
                row = {"id": post.id,
                       "symptoms": [model.labels[j] for j in sorted(sets[i])]}
                if proba is not None:
                    row["proba"] = {lab: round(float(p), 6) for lab, p in
                                    zip(model.labels, proba[i])}
                f.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
                f.write("\n")
    manifest.add_output(args.output)
    manifest.write()
    print(f"predict: {len(posts)} posts -> {args.output}")
    return 0


def cmd_evaluate(args) -> int:
    from .classifiers import ovr_predict_matrix

    manifest = RunManifest("evaluate", {"task": args.task, "model": args.model,
                                        "test": args.test})
    norm_cfg, tfidf, model, vec_path = _load_task_model(args)
    manifest.add_input(args.model)
    manifest.add_input(vec_path)
    manifest.add_input(args.test)
    vocab = default_vocabulary()
    corpus = load_corpus(args.test, labeled=True, vocab=vocab)
    X = _vectorize_posts([lp.post for lp in corpus], norm_cfg, tfidf)
    model_label = ALGO_LABELS.get(args.algo_label, args.algo_label) \
        if args.algo_label else _model_label(model)
    if args.task == "drug":
        gold = [lp.drug for lp in corpus]
        idx = model.predict_matrix(X)
        pred = [model.class_list[i] for i in idx]
        report = evaluate_multiclass(gold, pred, model.class_list)
    else:
        gold = [set(lp.symptoms) for lp in corpus]
        pred = ovr_predict_matrix(model, X)
        report = evaluate_multilabel(gold, pred, vocab)
    table = render_eval_table(report, model_label)
    print(table)
    payload = {"model": model_label, "report": report.to_dict()}
    if args.report:
        _write_json(args.report, payload)
        manifest.add_output(args.report)
        manifest.write(args.report + ".manifest.json")
    return 0


def _model_label(model) -> str:
    from .classifiers import OvrBundle

    if isinstance(model, OvrBundle):
        spec = next((m.spec for m in model.members if m is not None), None)
    else:
        spec = model.spec
    if spec is None:
        return "constant"
    inverse = {v: k for k, v in ALGO_NAMES.items()}
    return ALGO_LABELS.get(inverse.get(spec.algorithm, ""), spec.algorithm)


def cmd_kappa(args) -> int:
    manifest = RunManifest("kappa", {"annotations": args.annotations})
    vocab = default_vocabulary()
    per_annotator = []
    for path in args.annotations:
        manifest.add_input(path)
        rows = {}
        with open(path, encoding="utf-8") as f:
            for i, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as e:
                    raise CorpusError(f"{path}: line {i}: invalid JSON: {e}") from e
                for key in ("id", "drug"):
                    if key not in row:
                        raise CorpusError(f"{path}: line {i}: missing field {key}")
                rows[row["id"]] = (row["drug"], frozenset(row.get("symptoms", ())))
        per_annotator.append((path, rows))
    ids = sorted(per_annotator[0][1])
    for path, rows in per_annotator[1:]:
        if sorted(rows) != ids:
            raise CorpusError(
                f"inconsistent item coverage: {path} does not rate the same "
                f"ids as {per_annotator[0][0]}")
    from .labels import DRUG_INDEX, canonical_drug

    table = []
    for pid in ids:
        row = [0] * len(DRUG_CLASSES)
        for path, rows in per_annotator:
            canon = canonical_drug(rows[pid][0])
            if canon is None:
                raise CorpusError(f"{path}: unknown drug class "
                                  f"{rows[pid][0]!r} for id {pid!r}")
            row[DRUG_INDEX[canon]] += 1
        table.append(row)
    drug_report = fleiss_kappa(table, len(per_annotator))
    symptom_report = multilabel_kappa(
        [[rows[pid][1] for pid in ids] for _, rows in per_annotator], vocab)
    print(f"drug kappa:     {drug_report.kappa:.4f}  "
          f"({drug_report.interpretation})")
    if symptom_report.macro_kappa is None:
        print("symptom kappa:  undefined (no label varied)")
    else:
        print(f"symptom kappa:  {symptom_report.macro_kappa:.4f}  "
              f"({symptom_report.interpretation})")
    payload = {"drug": drug_report.to_dict(),
               "symptoms": symptom_report.to_dict(),
               "n_items": len(ids), "n_annotators": len(per_annotator)}
    if args.report:
        _write_json(args.report, payload)
        manifest.add_output(args.report)
        manifest.write()
    return 0


def cmd_annotate_round(args) -> int:
    from .annotate import (AcceptReviewer, AnnotationQueue, AnnotatorConfig,
                           AutoReviewer, MockProvider, run_round)

    manifest = RunManifest("annotate-round", {
        "corpus": args.corpus, "store": args.store, "round": args.round,
        "provider": args.provider, "auto_review": args.auto_review,
        "accept": args.accept})
    manifest.add_input(args.corpus)
    vocab = default_vocabulary()
    lexicon = _load_lexicon(args)
    posts = load_corpus(args.corpus, labeled=False)
    cfg = AnnotatorConfig(endpoint=args.endpoint, model=args.llm_model,
                          max_retries=args.max_retries,
                          backoff_base=args.backoff_base)
    if args.provider == "mock":
        provider = MockProvider.rule_based(lexicon, vocab,
                                           fail_every=args.fail_every,
                                           garble_every=args.garble_every)
    else:
        provider = None  # run_round builds an HttpProvider from cfg
    queue = AnnotationQueue(args.store, vocab=vocab,
                            required_decisions=args.required_decisions,
                            merge_mode=args.merge_mode)
    _ensure_parents(args.gold)
    reviewer = None
    if args.auto_review:
        manifest.add_input(args.auto_review)
        truth_corpus = load_corpus(args.auto_review, labeled=True, vocab=vocab)
        truth = {lp.post.id: {"drug": lp.drug, "symptoms": lp.symptoms,
                              "flags": lp.flags} for lp in truth_corpus}
        reviewer = AutoReviewer(truth)
    elif args.accept:
        reviewer = AcceptReviewer()
    report = run_round(posts, cfg, queue, args.round, lexicon,
                       provider=provider, reviewer=reviewer,
                       gold_path=args.gold)
    if report is None:
        print(f"annotate-round: round {args.round} enqueued with "
              f"{len(posts)} posts; review it over the service, then close")
    else:
        print(f"annotate-round: round {report.round} closed: "
              f"{report.decided}/{report.suggested} decided, "
              f"{report.corrected} corrected "
              f"(rate {report.correction_rate:.3f})")
        if args.gold:
            manifest.add_output(args.gold)
    manifest.notes["report"] = None if report is None else report.to_dict()
    manifest.write(str(Path(args.store) / "annotate-round.manifest.json"))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .annotate import AnnotationQueue
    from .service import create_app

    queue = AnnotationQueue(args.store, required_decisions=args.required_decisions,
                            merge_mode=args.merge_mode)
    app = create_app(queue, lexicon=_load_lexicon(args),
                     static_dir=args.static)
    manifest = RunManifest("serve", {"store": args.store, "host": args.host,
                                     "port": args.port, "static": args.static})
    manifest.write(str(Path(args.store) / "serve.manifest.json"))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_report(args) -> int:
    manifest = RunManifest("report", {"inputs": args.inputs})
    blocks = []
    for path in args.inputs:
        manifest.add_input(path)
        with open(path, encoding="utf-8") as f:
            blocks.append(json.load(f))
    header = ["Class", "Model", "Precision", "Recall", "F1-Score", "Accuracy"]
    rows = []
    classes = blocks[0]["report"]["classes"]
    for c in classes:
        for b in blocks:
            m = b["report"]["per_class"].get(c)
            if m is None:
                continue
            rows.append([c, b["model"], f"{m['precision']:.4f}",
                         f"{m['recall']:.4f}", f"{m['f1']:.4f}",
                         f"{m['accuracy']:.4f}"])
    for b in blocks:
        r = b["report"]
        rows.append(["micro avg", b["model"], f"{r['micro']['precision']:.4f}",
                     f"{r['micro']['recall']:.4f}", f"{r['micro']['f1']:.4f}",
                     f"{r['accuracy']:.4f}"])
    widths = [max(len(h), *(len(row[i]) for row in rows))
              for i, h in enumerate(header)]
    lines = [" | ".join(h.ljust(widths[i]) for i, h in enumerate(header)),
             "-+-".join("-" * w for w in widths)]
    lines += [" | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
              for row in rows]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.output:
        _ensure_parents(args.output)
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
        manifest.add_output(args.output)
        manifest.write()
    return 0


def cmd_synth(args) -> int:
    from .synth import SynthConfig, generate_labeled, generate_posts

    manifest = RunManifest("synth", {"mode": args.mode, "output": args.output,
                                     "docs_per_class": args.docs_per_class,
                                     "count": args.count, "seed": args.seed})
    if args.mode == "labeled":
        corpus = generate_labeled(SynthConfig(
            docs_per_class=args.docs_per_class, seed=args.seed))
        _ensure_parents(args.output)
        save_corpus(args.output, corpus)
        print(f"synth: {len(corpus)} labeled posts -> {args.output}")
    else:
        posts, truth = generate_posts(args.count, seed=args.seed)
        truth_path = args.truth or (str(args.output) + ".truth.jsonl")
        _ensure_parents(args.output, truth_path)
        save_corpus(args.output, posts)
        with open(truth_path, "w", encoding="utf-8") as f:
            for p in posts:
                t = truth[p.id]
                f.write(json.dumps({
                    "id": p.id, "text": p.text, "source": "synthetic",
                    "created_at": None, "drug": t["drug"],
                    "symptoms": list(t["symptoms"]),
                    "flags": list(t["flags"])}, ensure_ascii=False,
                    sort_keys=True))
                f.write("\n")
        manifest.add_output(truth_path)
        print(f"synth: {len(posts)} posts -> {args.output} "
              f"(truth -> {truth_path})")
    manifest.add_output(args.output)
    manifest.write(str(args.output) + ".manifest.json")
    return 0


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="drugwatch",
                     description="Drug-mention and overdose-symptom "
                                 "classification toolkit")
    parser.add_argument("--version", action="version",
                        version=f"drugwatch {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def norm_flags(p):
        p.add_argument("--no-stem", action="store_true",
                       help="skip suffix stripping")
        p.add_argument("--stopwords", default="english",
                       help="stopword list: english, none, or a file path")
        p.add_argument("--keep-mentions", action="store_true",
                       help="keep @user mentions in the token stream")

    p = sub.add_parser("ingest", help="validate, dedup, and filter raw JSONL")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--labeled", action="store_true")
    p.add_argument("--drop-irrelevant", action="store_true",
                   help="keep only posts with a drug or symptom mention")
    p.add_argument("--balance", choices=["downsample_to_min", "none"],
                   default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("preprocess", help="normalize posts to token streams")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--labeled", action="store_true")
    p.add_argument("--lexicon")
    norm_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("split", help="stratified train/test split")
    p.add_argument("--input", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-stratify", action="store_true")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="fit TF-IDF + a classifier")
    p.add_argument("--task", choices=["drug", "symptoms"], required=True)
    p.add_argument("--algo", choices=sorted(ALGO_NAMES), required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--vectorizer", help="vectorizer output path "
                                        "(default: MODEL.vectorizer.json)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--max-features", type=int, default=None)
    p.add_argument("--tau", type=float, default=0.5,
                   help="decision threshold for the symptoms task")
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE",
                   help="algorithm hyperparameter override, repeatable")
    norm_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label new posts with a trained model")
    p.add_argument("--task", choices=["drug", "symptoms"], required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--vectorizer")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--labeled", action="store_true",
                   help="input is labeled JSONL; labels are ignored")
    p.add_argument("--with-proba", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a model on labeled data")
    p.add_argument("--task", choices=["drug", "symptoms"], required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--vectorizer")
    p.add_argument("--test", required=True)
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--algo-label", help="model name shown in the table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("kappa", help="inter-annotator agreement")
    p.add_argument("--annotations", nargs="+", required=True,
                   help="one JSONL file per annotator: {id, drug, symptoms}")
    p.add_argument("--report")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("annotate-round",
                       help="suggest labels for a batch and run one round")
    p.add_argument("--corpus", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--round", type=int, required=True)
    p.add_argument("--provider", choices=["mock", "http"], default="mock")
    p.add_argument("--endpoint", default="mock://local")
    p.add_argument("--llm-model", default="suggest-small")
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--backoff-base", type=float, default=0.5)
    p.add_argument("--fail-every", type=int, default=0)
    p.add_argument("--garble-every", type=int, default=0)
    p.add_argument("--required-decisions", type=int, default=1)
    p.add_argument("--merge-mode", choices=["adjudicate", "majority"],
                   default="adjudicate")
    p.add_argument("--auto-review", metavar="TRUTH_JSONL",
                   help="auto-decide every record from this labeled file")
    p.add_argument("--accept", action="store_true",
                   help="auto-accept every ok suggestion")
    p.add_argument("--gold", help="export the round's corrected gold here")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_annotate_round)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", help="directory with the built review UI")
    p.add_argument("--required-decisions", type=int, default=1)
    p.add_argument("--merge-mode", choices=["adjudicate", "majority"],
                   default="adjudicate")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="combine evaluation JSONs into a table")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic demo corpus")
    p.add_argument("--mode", choices=["labeled", "batch"], default="labeled")
    p.add_argument("--output", required=True)
    p.add_argument("--docs-per-class", type=int, default=200)
    p.add_argument("--count", type=int, default=100,
                   help="posts to generate in batch mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", help="truth sidecar path in batch mode")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help/--version exit through argparse
        return 0 if not e.code else 1
    if not getattr(args, "func", None):
        parser.print_help()
        return 1
    try:
        return args.func(args) or 0
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (CorpusError, LexiconError, FileNotFoundError, IsADirectoryError,
            PermissionError, json.JSONDecodeError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
