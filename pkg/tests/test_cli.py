import json
import shutil

import pytest

from billfate.cli import main
from billfate.corpus import parse_corpus, record_to_dict, serialize_corpus

FAST = {"max_iters": 1500}


def write_config(path, **over):
    raw = {"embeddings": {"path": "emb.txt", "dim": 8},
           "models": {"logistic": FAST, "svm": FAST, "meta": FAST},
           "synth": {"kenya_shaped": True, "embeddings": {"dim": 8, "seed": 3}}}
    raw.update(over)
    path.write_text(json.dumps(raw))
    return str(path)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg = write_config(d / "cfg.json")
    assert main(["synth", "--config", cfg]) == 0
    assert main(["train", "--config", cfg]) == 0
    return d


def clone(workspace, tmp_path):
    for name in ("corpus.jsonl", "emb.txt", "model.json", "cfg.json"):
        shutil.copy(workspace / name, tmp_path / name)
    return str(tmp_path / "cfg.json")


def test_stats_kenya_shape(workspace, tmp_path, capsys):
    cfg = clone(workspace, tmp_path)
    assert main(["stats", "--config", cfg]) == 0
    d = json.loads((tmp_path / "stats.json").read_text())
    assert d["total"] == 460 and d["enacted"] == 65
    assert d["busiest_year"] == {"year": 2012, "count": 88}
    assert abs(sum(v["share"] for v in d["category_percentages"].values()) - 100) <= 0.1
    assert "busiest year: 2012" in capsys.readouterr().out


def test_stats_single_record(workspace, tmp_path):
    cfg = clone(workspace, tmp_path)
    one = parse_corpus(tmp_path / "corpus.jsonl")[:1]
    (tmp_path / "corpus.jsonl").write_text(serialize_corpus(one), encoding="utf-8")
    assert main(["stats", "--config", cfg]) == 0
    d = json.loads((tmp_path / "stats.json").read_text())
    assert len(d["per_year"]) == 1


def test_train_and_evaluate_are_byte_identical(workspace, tmp_path):
    cfg = clone(workspace, tmp_path)
    assert main(["train", "--config", cfg, "--model", str(tmp_path / "again.json")]) == 0
    assert (tmp_path / "again.json").read_bytes() == (workspace / "model.json").read_bytes()
    assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / "r1.json")]) == 0
    assert main(["evaluate", "--config", cfg, "--out", str(tmp_path / "r2.json")]) == 0
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()
    assert (tmp_path / "r1.txt").read_bytes() == (tmp_path / "r2.txt").read_bytes()


def test_evaluate_noise_free_macro_f1(workspace, tmp_path):
    cfg = clone(workspace, tmp_path)
    assert main(["evaluate", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    stack = [r for r in doc["reports"] if r["model_id"] == "Stacked Ensemble"][0]
    assert stack["macro"]["f1"] >= 0.95
    header = (tmp_path / "report.txt").read_text().splitlines()[0]
    assert header.split() == ["Model", "F1", "Precision", "Recall", "AUC", "Brier", "Loss", "Accuracy"]


def test_truncated_model_is_integrity_error(workspace, tmp_path, capsys):
    cfg = clone(workspace, tmp_path)
    text = (tmp_path / "model.json").read_text()
    (tmp_path / "model.json").write_text(text[: len(text) // 2])
    assert main(["evaluate", "--config", cfg]) == 5
    assert not (tmp_path / "report.json").exists()
    assert "truncated" in capsys.readouterr().err


def test_tampered_model_digest(workspace, tmp_path):
    cfg = clone(workspace, tmp_path)
    d = json.loads((tmp_path / "model.json").read_text())
    d["stack"]["meta"]["bias"] += 1.0
    (tmp_path / "model.json").write_text(json.dumps(d))
    assert main(["predict", "--config", cfg]) == 5


def test_config_mismatch_refused(workspace, tmp_path):
    clone(workspace, tmp_path)
    cfg = write_config(tmp_path / "cfg.json", split={"ratio": 0.6})
    assert main(["evaluate", "--config", cfg]) == 5


def test_missing_embeddings_stage_error(workspace, tmp_path, capsys):
    cfg = clone(workspace, tmp_path)
    (tmp_path / "emb.txt").unlink()
    assert main(["train", "--config", cfg, "--model", str(tmp_path / "m.json")]) == 3
    assert "embeddings" in capsys.readouterr().err
    assert not (tmp_path / "m.json").exists()


def test_predict_batch_order_and_training_rows(workspace, tmp_path, capsys):
    cfg = clone(workspace, tmp_path)
    records = parse_corpus(tmp_path / "corpus.jsonl")
    model = json.loads((tmp_path / "model.json").read_text())
    stored = model["train_predictions"]
    chosen = [r for r in records if r.id in stored][:3][::-1]
    (tmp_path / "new.jsonl").write_text(serialize_corpus(chosen), encoding="utf-8")
    before = (tmp_path / "new.jsonl").read_bytes()
    assert main(["predict", "--config", cfg, "--input", str(tmp_path / "new.jsonl")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "id\tprobability\tlabel" and len(lines) == 4
    for rec, line in zip(chosen, lines[1:]):
        rid, prob, label = line.split("\t")
        assert rid == rec.id
        assert float(prob) == stored[rec.id]
        assert label == ("enacted" if float(prob) >= 0.5 else "not_enacted")
    assert (tmp_path / "new.jsonl").read_bytes() == before


def test_predict_unknown_outcome_allowed(workspace, tmp_path, capsys):
    cfg = clone(workspace, tmp_path)
    rec = record_to_dict(parse_corpus(tmp_path / "corpus.jsonl")[0])
    rec["enacted"] = None
    (tmp_path / "new.jsonl").write_text(json.dumps(rec) + "\n", encoding="utf-8")
    assert main(["predict", "--config", cfg, "--input", str(tmp_path / "new.jsonl")]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_predict_rejects_empty_title(workspace, tmp_path, capsys):
    cfg = clone(workspace, tmp_path)
    rec = record_to_dict(parse_corpus(tmp_path / "corpus.jsonl")[0])
    rec["title"] = ""
    (tmp_path / "new.jsonl").write_text(json.dumps(rec) + "\n", encoding="utf-8")
    assert main(["predict", "--config", cfg, "--input", str(tmp_path / "new.jsonl")]) == 3
    err = capsys.readouterr().err
    assert "title" in err and "line 1" in err


def test_importance_has_eleven_groups(workspace, tmp_path):
    cfg = clone(workspace, tmp_path)
    assert main(["importance", "--config", cfg, "--out", str(tmp_path / "i1.json")]) == 0
    assert main(["importance", "--config", cfg, "--out", str(tmp_path / "i2.json")]) == 0
    doc = json.loads((tmp_path / "i1.json").read_text())
    assert sorted(g["group"] for g in doc["permutation"]) == sorted(f"F{i}" for i in range(1, 12))
    assert set(doc["weight_mass"]) == {"logistic", "svm", "meta"}
    assert (tmp_path / "i1.json").read_bytes() == (tmp_path / "i2.json").read_bytes()


def test_bow_model_width(workspace, tmp_path):
    clone(workspace, tmp_path)
    cfg = write_config(tmp_path / "cfg.json", representation="bow")
    assert main(["train", "--config", cfg]) == 0
    d = json.loads((tmp_path / "model.json").read_text())
    groups = {g: (s, e) for g, s, e in d["feature_schema"]}
    assert set(groups) == {f"F{i}" for i in range(1, 11) if i != 8} | {"BOW"}
    assert groups["BOW"][1] == 16 + len(d["bow_vocabulary"])


def test_ablation_emits_paired_reports(workspace, tmp_path):
    cfg = clone(workspace, tmp_path)
    assert main(["ablation", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "ablation.json").read_text())
    assert len(doc["with_smote"]) == len(doc["without_smote"]) == 3
    for d in doc["deltas"].values():
        assert {"F1", "Precision", "Recall", "AUC", "Brier Loss", "Accuracy"} <= set(d)
    text = (tmp_path / "ablation.txt").read_text()
    assert "With SMOTE" in text and "Without SMOTE" in text and "Delta" in text


def test_seed_override(workspace, tmp_path):
    cfg = clone(workspace, tmp_path)
    assert main(["train", "--config", cfg, "--seed", "4", "--model", str(tmp_path / "m4.json")]) == 0
    d = json.loads((tmp_path / "m4.json").read_text())
    assert set(d["seeds"].values()) == {4}


@pytest.mark.parametrize("raw, code", [("{", 2), ('{"bogus": 1}', 2), ('{"split": {"ratio": 1.5}}', 2),
                                       ('{"seeds": {"split": -1}}', 2)])
def test_config_errors(tmp_path, raw, code):
    (tmp_path / "cfg.json").write_text(raw)
    assert main(["stats", "--config", str(tmp_path / "cfg.json")]) == code


def test_corpus_parse_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json")
    (tmp_path / "corpus.jsonl").write_text('{"id": "x"}\nnot json\n')
    assert main(["stats", "--config", cfg]) == 3
    err = capsys.readouterr().err
    assert "line 1" in err and "line 2" in err
