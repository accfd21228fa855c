import csv
import json

import pytest

from factories import separable_events
from rumorgtb.cli import main
from rumorgtb.data import Dataset, save_dataset
from rumorgtb.datasets import make_synthetic_corpus
from rumorgtb.persistence import load_model

FAST = ["--trees", "10", "--max-depth", "2", "--quiet"]


@pytest.fixture
def four(tmp_path):
    p = tmp_path / "four.jsonl"
    save_dataset(Dataset(tuple(separable_events())), p)
    return p


@pytest.fixture
def corpus(tmp_path):
    p = tmp_path / "corpus.jsonl"
    save_dataset(make_synthetic_corpus(40, seed=1), p)
    return p


def _rows(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_extract_shape_and_manifest(four, tmp_path):
    three = tmp_path / "three.jsonl"
    save_dataset(Dataset(tuple(separable_events()[:3])), three)
    out = tmp_path / "f.csv"
    assert main(["extract", str(three), "--deadline", "0", "-o", str(out), "--quiet"]) == 0
    rows = _rows(out)
    assert len(rows) == 4 and len(rows[0]) == 24 and rows[0][-1] == "label"
    man = json.loads((tmp_path / "f.csv.manifest.json").read_text())
    assert man["command"] == "extract" and man["config"]["deadline"] == "0"
    assert set(man["inputs"]) == {str(three)} and len(man["inputs"][str(three)]) == 64


@pytest.mark.parametrize("argv", [
    ["extract", "{data}", "--deadline", "-1", "-o", "{out}"],
    ["train", "{data}", "--trees", "0", "-o", "{out}"],
    ["train", "{data}", "--learning-rate", "0", "-o", "{out}"],
    ["select", "{data}", "--keep", "0", "-o", "{out}"],
    ["evaluate", "{data}", "--folds", "1", "-o", "{out}"],
    ["sweep", "{data}", "-o", "{out}"],
    ["sweep", "{data}", "--deadlines", "0,4", "--grid", "10", "2", "0.2", "-o", "{out}"],
    ["sweep", "{data}", "--grid", "10", "x", "0.2", "-o", "{out}"],
    [],
])
def test_usage_errors(argv, four, tmp_path, capsys):
    argv = [a.format(data=four, out=tmp_path / "o") for a in argv]
    assert main(argv) == 2


def test_train_reload_and_determinism(four, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["train", str(four), "-o", str(a), "--quiet"]) == 0
    assert main(["train", str(four), "-o", str(b), "--quiet"]) == 0
    assert a.read_bytes() == b.read_bytes()
    man = json.loads((tmp_path / "a.json.manifest.json").read_text())
    assert man["config"]["trees"] == 500 and "training_mse" in man
    pred = tmp_path / "p.csv"
    assert main(["predict", str(a), str(four), "-o", str(pred), "--quiet"]) == 0
    rows = _rows(pred)
    assert rows[0] == ["event_id", "p_rumor", "p_nonrumor", "label"]
    assert [r[3] for r in rows[1:]] == ["rumor", "rumor", "nonrumor", "nonrumor"]
    for r in rows[1:]:
        assert abs(float(r[1]) + float(r[2]) - 1.0) <= 1e-12
    assert load_model(a).n_features_in_ == 23


def test_predict_schema_mismatch(four, tmp_path):
    m = tmp_path / "m.json"
    assert main(["train", str(four), "--schema", "all34", "-o", str(m)] + FAST) == 0
    assert main(["predict", str(m), str(four), "-o", str(tmp_path / "p.csv"), "--quiet"]) == 3


def test_data_errors_exit_3(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"event_id": "x"}\n', encoding="utf-8")
    assert main(["extract", str(bad), "-o", str(tmp_path / "f.csv"), "--quiet"]) == 3
    assert main(["extract", str(tmp_path / "missing.jsonl"), "-o", str(tmp_path / "f.csv"),
                 "--quiet"]) == 3


def test_select_keep_all_and_too_many(corpus, tmp_path, capsys):
    out = tmp_path / "imp.csv"
    assert main(["select", str(corpus), "--candidates", "selected", "--keep", "23",
                 "-o", str(out)] + FAST) == 0
    rows = _rows(out)
    assert rows[0] == ["rank", "feature", "split_count", "importance", "selected"]
    assert len(rows) == 24 and all(r[4] == "1" for r in rows[1:])
    man = json.loads((tmp_path / "imp.csv.manifest.json").read_text())
    assert len(man["selected"]) == 23
    assert main(["select", str(corpus), "--candidates", "selected", "--keep", "24",
                 "-o", str(out)] + FAST) == 3


def test_select_all34_to_23(corpus, tmp_path):
    out = tmp_path / "imp.csv"
    assert main(["select", str(corpus), "--candidates", "all34", "--keep", "23",
                 "-o", str(out)] + FAST) == 0
    rows = _rows(out)[1:]
    assert len(rows) == 34 and sum(r[4] == "1" for r in rows) == 23


def test_evaluate_summary(corpus, tmp_path, capsys):
    out = tmp_path / "cv.csv"
    assert main(["evaluate", str(corpus), "--folds", "2", "--repeats", "2",
                 "-o", str(out), "--trees", "10", "--max-depth", "2"]) == 0
    assert "accuracy=" in capsys.readouterr().out
    rows = _rows(out)
    assert len(rows) == 1 + 4 + 2
    man = json.loads((tmp_path / "cv.csv.manifest.json").read_text())
    acc = [float(r[8]) for r in rows[1:5]]
    assert abs(man["mean"]["accuracy"] - sum(acc) / 4) <= 1e-12


def test_evaluate_single_class_is_data_error(tmp_path):
    p = tmp_path / "one.jsonl"
    save_dataset(Dataset(tuple(separable_events()[:2])), p)
    assert main(["evaluate", str(p), "--folds", "2", "--repeats", "1",
                 "-o", str(tmp_path / "cv.csv")] + FAST) == 3


def test_sweep_deadlines_and_grid(corpus, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", str(corpus), "--deadlines", "0,4,all", "--folds", "2",
                 "--repeats", "1", "-o", str(out)] + FAST) == 0
    rows = list(csv.DictReader(open(out, encoding="utf-8")))
    assert [r["deadline"] for r in rows] == ["0", "4", "all"]
    assert main(["sweep", str(corpus), "--grid", "10", "2", "0.2", "--folds", "2",
                 "--repeats", "1", "-o", str(out), "--quiet"]) == 0
    rows = list(csv.DictReader(open(out, encoding="utf-8")))
    assert len(rows) == 1 and rows[0]["trees"] == "10"
