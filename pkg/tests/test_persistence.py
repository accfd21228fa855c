import json

import numpy as np
import pytest

from rumorgtb.boosting import RumorDetector
from rumorgtb.errors import CorruptModel, UnsupportedVersion
from rumorgtb.persistence import dumps_model, load_model, loads_model, save_model


@pytest.fixture(scope="module")
def fitted():
    rng = np.random.default_rng(11)
    X = rng.random((80, 5))
    y = np.where(X[:, 1] * X[:, 3] > 0.25, "rumor", "nonrumor")
    names = [f"f{i}" for i in range(5)]
    return RumorDetector(n_estimators=15, max_depth=4, feature_names=names).fit(X, y), X, y


def test_round_trip_bit_exact(fitted, tmp_path):
    model, _, _ = fitted
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    Q = np.random.default_rng(0).normal(size=(50, 5)) * 3
    assert np.array_equal(model.predict_proba(Q), back.predict_proba(Q))
    assert list(back.predict(Q)) == list(model.predict(Q))
    assert back.feature_names == model.feature_names
    assert back.get_params() == model.get_params()


def test_deterministic_bytes(fitted):
    model, X, y = fitted
    again = RumorDetector(**model.get_params()).fit(X, y)
    assert dumps_model(model) == dumps_model(again)
    assert dumps_model(loads_model(dumps_model(model))) == dumps_model(model)


def test_file_layout(fitted):
    obj = json.loads(dumps_model(fitted[0]))
    assert obj["format_version"] == 1
    assert obj["config"] == {"trees": 15, "max_depth": 4, "learning_rate": 0.2,
                             "min_region_size": 2, "seed": 0}
    assert set(obj["models"]) == {"rumor", "nonrumor"}
    assert len(obj["models"]["rumor"]["stages"]) == 15


def test_truncated_file(fitted, tmp_path):
    text = dumps_model(fitted[0])
    path = tmp_path / "cut.json"
    path.write_text(text[: len(text) // 2], encoding="utf-8")
    with pytest.raises(CorruptModel):
        load_model(path)


def test_structurally_broken(fitted):
    obj = json.loads(dumps_model(fitted[0]))
    del obj["models"]["nonrumor"]
    with pytest.raises(CorruptModel):
        loads_model(json.dumps(obj))
    obj = json.loads(dumps_model(fitted[0]))
    obj["models"]["rumor"]["stages"][0]["tree"] = obj["models"]["rumor"]["stages"][0]["tree"][:1]
    with pytest.raises(CorruptModel):
        loads_model(json.dumps(obj))
    with pytest.raises(CorruptModel):
        loads_model("[1, 2]")


def test_unsupported_version(fitted):
    obj = json.loads(dumps_model(fitted[0]))
    obj["format_version"] = "999"
    with pytest.raises(UnsupportedVersion):
        loads_model(json.dumps(obj))
