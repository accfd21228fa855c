"""Versioned JSON model files.

Floats are written with ``repr`` precision, which round-trips exactly, and
keys are emitted in a fixed order, so equal models give byte-identical files.
"""

import json

import numpy as np

from .boosting import CLASSES, RumorDetector, ScoreModel
from .errors import CorruptModel, UnsupportedVersion
from .tree import RegressionTree

FORMAT_VERSION = 1


def _score_to_dict(score):
    return {
        "base_score": score.base_score,
        "stages": [{"gamma": g, "tree": t.to_preorder()}
                   for t, g in zip(score.trees, score.gammas)],
    }


def model_to_dict(model):
    names = model.feature_names
    return {
        "format_version": FORMAT_VERSION,
        "schema": list(names) if names is not None else None,
        "n_features": int(model.n_features_in_),
        "config": {
            "trees": int(model.n_estimators),
            "max_depth": int(model.max_depth),
            "learning_rate": float(model.learning_rate),
            "min_region_size": int(model.min_region_size),
            "seed": int(model.seed),
        },
        "models": {
            CLASSES[0].value: _score_to_dict(model.score_rumor_),
            CLASSES[1].value: _score_to_dict(model.score_nonrumor_),
        },
    }


def dumps_model(model):
    return json.dumps(model_to_dict(model), sort_keys=True, indent=1,
                      allow_nan=False) + "\n"


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))


def _score_from_dict(obj, n_features, cfg):
    score = ScoreModel(base_score=float(obj["base_score"]),
                       learning_rate=float(cfg["learning_rate"]))
    for stage in obj["stages"]:
        score.gammas.append(float(stage["gamma"]))
        score.trees.append(RegressionTree.from_preorder(
            stage["tree"], n_features, cfg["max_depth"], cfg["min_region_size"]))
    return score


def model_from_dict(obj):
    if not isinstance(obj, dict) or "format_version" not in obj:
        raise CorruptModel("model file lacks format_version")
    if str(obj["format_version"]) != str(FORMAT_VERSION):
        raise UnsupportedVersion(
            f"model format_version {obj['format_version']!r} is not supported "
            f"(expected {FORMAT_VERSION})")
    try:
        cfg = obj["config"]
        n_features = int(obj["n_features"])
        model = RumorDetector(n_estimators=int(cfg["trees"]),
                              max_depth=int(cfg["max_depth"]),
                              learning_rate=float(cfg["learning_rate"]),
                              min_region_size=int(cfg["min_region_size"]),
                              seed=int(cfg["seed"]),
                              feature_names=obj["schema"])
        models = obj["models"]
        model.score_rumor_ = _score_from_dict(models[CLASSES[0].value], n_features, cfg)
        model.score_nonrumor_ = _score_from_dict(models[CLASSES[1].value], n_features, cfg)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptModel(f"malformed model file: {exc}") from None
    model.n_features_in_ = n_features
    model.classes_ = np.array(CLASSES, dtype=object)
    return model


def loads_model(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(obj)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())
