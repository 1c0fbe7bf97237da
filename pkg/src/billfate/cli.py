"""``billfate`` command line.

    billfate <stats|train|evaluate|predict|importance|synth|ablation>
             --config PATH [--model PATH] [--out PATH] [--seed INT] [--input PATH]

Exit status: 0 success, 1 unexpected error, 2 usage/config error, 3 corpus or
data error, 4 numeric failure, 5 integrity failure (model file or schema).
"""

import argparse
import json
import sys
from pathlib import Path

from . import config as cfgmod
from .corpus import (SynthSpec, corpus_stats, generate_synthetic_corpus, kenya_shaped_spec, parse_corpus,
                     serialize_corpus, synthetic_vocabulary)
from .embeddings import generate_synthetic_embeddings, save_embeddings
from .errors import BillfateError, IntegrityError
from .evaluation import format_table, permutation_importance, weight_mass
from .features import GROUP_TITLES, apply_scaler, fit_scaler
from .pipeline import (MODEL_NAMES, TrainedPipeline, _digest, ablation_oversampling, atomic_write,
                       evaluate_pipeline, load_table, prepare, split_records, stage, train_pipeline)

COMMANDS = ("stats", "train", "evaluate", "predict", "importance", "synth", "ablation")


def _dump(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _emit(text, out_path=None):
    sys.stdout.write(text)
    if out_path:
        atomic_write(out_path, text)


def _text_path(path):
    return str(Path(path).with_suffix(".txt"))


def _load_model(path, cfg, check_data=True):
    pipe = TrainedPipeline.load(path)
    if check_data and pipe.data_digest() != _digest(cfgmod.data_view(cfg)):
        raise IntegrityError("model was trained with a different feature/split configuration than --config")
    return pipe


def _test_matrix(pipe, cfg):
    with stage("parse"):
        records = parse_corpus(cfg["corpus"])
    with stage("split"):
        _, test_records = split_records(records, cfg)
    with stage("embeddings"):
        table = load_table(cfg)
    with stage("featurize"):
        return pipe.features(test_records, table)


# -- subcommands ------------------------------------------------------------------

def cmd_stats(cfg, args):
    with stage("parse"):
        records = parse_corpus(cfg["corpus"])
    st = corpus_stats(records)
    d = st.to_dict()
    d["category_percentages"] = {k: {"share": a, "enacted": b, "not_enacted": c}
                                 for k, (a, b, c) in st.category_percentages().items()}
    peak = max(st.per_year.items(), key=lambda kv: (kv[1], -kv[0]))
    d["busiest_year"] = {"year": peak[0], "count": peak[1]}
    out = args.out or cfg["outputs"]["stats"]
    atomic_write(out, _dump(d))
    lines = [f"bills: {st.total}  enacted: {st.enacted}  not enacted: {st.not_enacted}  unknown: {st.unknown}",
             f"top sponsor: {st.top_sponsor[0]} ({100 * st.top_sponsor[1]:.1f}% of bills)",
             f"busiest year: {peak[0]} ({peak[1]} bills)", "", "year  bills"]
    lines += [f"{y}  {n:5d}" for y, n in st.per_year.items()]
    lines += ["", "label  share%  enacted%  not_enacted%"]
    lines += [f"{k:5s}  {a:6.1f}  {b:8.1f}  {c:12.1f}" for k, (a, b, c) in st.category_percentages().items()]
    sys.stdout.write("\n".join(lines) + "\n")
    return d


def cmd_train(cfg, args):
    with stage("parse"):
        records = parse_corpus(cfg["corpus"])
    with stage("embeddings"):
        table = load_table(cfg)
    pipe, test = train_pipeline(records, cfg, table)
    out = args.model or cfg["outputs"]["model"]
    with stage("save"):
        pipe.save(out)
    summary = {
        "model": str(out),
        "representation": pipe.representation,
        "width": pipe.schema.width,
        "groups": pipe.schema.to_list(),
        "n_train": len(pipe.train_predictions),
        "n_test": test.n,
        "iterations": {"logistic": pipe.stack.lr.n_iter, "svm": pipe.stack.svm.n_iter,
                       "meta": pipe.stack.meta.n_iter},
        "final_loss": {"logistic": pipe.stack.lr.final_loss, "svm": pipe.stack.svm.final_loss,
                       "meta": pipe.stack.meta.final_loss},
        "svm_calibration": list(pipe.stack.svm.calibration),
        "effective_config": pipe.config,
    }
    sys.stdout.write(_dump(summary))
    return summary


def cmd_evaluate(cfg, args):
    pipe = _load_model(args.model or cfg["outputs"]["model"], cfg)
    test = _test_matrix(pipe, cfg)
    digest = _digest(cfgmod.portable(cfg))
    reports = evaluate_pipeline(pipe, test, float(cfg["threshold"]), digest)
    out = args.out or cfg["outputs"]["report"]
    doc = {"reports": [r.to_dict() for r in reports], "model_digest": pipe.to_dict()["digest"]}
    table = format_table(reports)
    atomic_write(out, _dump(doc))
    atomic_write(_text_path(out), table)
    sys.stdout.write(table)
    return reports


def cmd_predict(cfg, args):
    pipe = _load_model(args.model or cfg["outputs"]["model"], cfg, check_data=False)
    source = args.input or cfg["corpus"]
    with stage("parse"):
        records = parse_corpus(source)
    with stage("embeddings"):
        table = load_table(dict(pipe.config, embeddings=cfg["embeddings"]))
    with stage("featurize"):
        m = pipe.features(records, table, with_labels=False)
    probs = pipe.predict(m)
    threshold = float(cfg["threshold"])
    lines = ["id\tprobability\tlabel"]
    lines += [f"{r.id}\t{float(p)!r}\t{'enacted' if p >= threshold else 'not_enacted'}" for r, p in zip(records, probs)]
    _emit("\n".join(lines) + "\n", args.out or cfg["outputs"]["predictions"])
    return list(zip([r.id for r in records], probs))


def cmd_importance(cfg, args):
    pipe = _load_model(args.model or cfg["outputs"]["model"], cfg)
    test = _test_matrix(pipe, cfg)
    ranked, base = permutation_importance(pipe.stack, test, metric=cfg["importance"]["metric"],
                                          n_repeats=int(cfg["importance"]["n_repeats"]),
                                          seed=cfg["seeds"]["importance"])
    doc = {
        "metric": cfg["importance"]["metric"],
        "baseline": base,
        "n_repeats": int(cfg["importance"]["n_repeats"]),
        "seed": cfg["seeds"]["importance"],
        "permutation": [{"group": g.group, "title": GROUP_TITLES.get(g.group, g.group),
                         "importance": g.mean, "std": g.std} for g in ranked],
        "weight_mass": weight_mass(pipe.stack, pipe.schema),
    }
    atomic_write(args.out or cfg["outputs"]["importance"], _dump(doc))
    lines = [f"baseline {doc['metric']}: {base:.4f}", "", "rank  group  importance     std  feature"]
    lines += [f"{i:4d}  {g.group:5s}  {g.mean:10.4f}  {g.std:6.4f}  {GROUP_TITLES.get(g.group, g.group)}"
              for i, g in enumerate(ranked, 1)]
    sys.stdout.write("\n".join(lines) + "\n")
    return doc


def cmd_ablation(cfg, args):
    with stage("parse"):
        records = parse_corpus(cfg["corpus"])
    with stage("embeddings"):
        table = load_table(cfg)
    with stage("split"):
        train_records, test_records = split_records(records, cfg)
    raw_train, raw_test, _ = prepare(train_records, test_records, cfg, table)
    with stage("scale"):
        scaler = fit_scaler(raw_train)
        train, test = apply_scaler(scaler, raw_train), apply_scaler(scaler, raw_test)
    result = ablation_oversampling(train, test, cfg)
    doc = {
        "with_smote": [r.to_dict() for r in result["with_smote"]],
        "without_smote": [r.to_dict() for r in result["without_smote"]],
        "deltas": result["deltas"],
    }
    out = args.out or cfg["outputs"]["ablation"]
    atomic_write(out, _dump(doc))
    text = ["With SMOTE", format_table(result["with_smote"]), "Without SMOTE",
            format_table(result["without_smote"]), "Delta (with - without)"]
    cols = list(next(iter(result["deltas"].values())))
    text.append("Model".ljust(24) + "  ".join(c.rjust(10) for c in cols[:6]))
    for name in MODEL_NAMES:
        text.append(name.ljust(24) + "  ".join(f"{result['deltas'][name][c]:+10.4f}" for c in cols[:6]))
    table = "\n".join(text) + "\n"
    atomic_write(_text_path(out), table)
    sys.stdout.write(table)
    return result


def cmd_synth(cfg, args):
    raw = dict(cfg["synth"])
    shaped = raw.pop("kenya_shaped", True)
    emb = raw.pop("embeddings", None)
    spec = kenya_shaped_spec(**raw) if shaped else SynthSpec.from_dict(raw)
    seed = cfg["seeds"]["synth"]
    with stage("synth"):
        records = generate_synthetic_corpus(spec, seed)
    out = args.out or cfg["corpus"]
    atomic_write(out, serialize_corpus(records))
    if emb is not None:
        dim = int(emb.get("dim", cfg["embeddings"]["dim"]))
        path = Path(args.config).parent / emb["path"] if "path" in emb else Path(cfg["embeddings"]["path"])
        table = generate_synthetic_embeddings(synthetic_vocabulary(spec), dim, int(emb.get("seed", seed)))
        save_embeddings(table, path)
    st = corpus_stats(records)
    sys.stdout.write(f"wrote {len(records)} bills ({st.enacted} enacted) to {out}\n")
    return records


HANDLERS = {"stats": cmd_stats, "train": cmd_train, "evaluate": cmd_evaluate, "predict": cmd_predict,
            "importance": cmd_importance, "synth": cmd_synth, "ablation": cmd_ablation}


def build_parser():
    p = argparse.ArgumentParser(prog="billfate", description="Predict whether parliamentary bills are enacted.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="run configuration (JSON)")
    p.add_argument("--model", help="model file (default: outputs.model)")
    p.add_argument("--out", help="output file (default: the matching outputs.* entry)")
    p.add_argument("--seed", type=int, help="override every seed in the config")
    p.add_argument("--input", help="bills to score (predict; default: corpus)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config)
        if args.seed is not None:
            cfg = cfgmod.override_seeds(cfg, args.seed)
        HANDLERS[args.command](cfg, args)
    except BillfateError as exc:
        sys.stderr.write(f"billfate {args.command}: {exc}\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
