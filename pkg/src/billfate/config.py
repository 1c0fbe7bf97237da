"""Run configuration: a JSON file merged over ``DEFAULTS``.

Relative paths are resolved against the directory holding the config file.
Every run echoes the fully-defaulted ("effective") config, and its digest is
written into models and reports.
"""

import copy
import json
from pathlib import Path

from .errors import ConfigError
from .features import REPRESENTATIONS, FeatureConfig
from .models import Hyper
from .resampling import SmoteConfig

_HYPER = {"learning_rate": 0.1, "l2_lambda": 0.01, "max_iters": 5000, "tolerance": 1e-7,
          "seed": 0, "batch_size": None}

DEFAULTS = {
    "corpus": "corpus.jsonl",
    "embeddings": {"path": "embeddings.txt", "dim": 100},
    "representation": "engineered+wordvec",
    "features": {"election_years": [2013, 2017], "reference_year": 2019,
                 "top_sponsor": "Aden Duale", "bow_min_freq": 2, "bow_max_vocab": 5000},
    "split": {"ratio": 0.7, "stratified": True},
    "smote": {"enabled": True, "k_neighbors": 5},
    "models": {"logistic": dict(_HYPER), "svm": dict(_HYPER), "meta": dict(_HYPER)},
    "stack": {"folds": 5},
    "threshold": 0.5,
    "importance": {"n_repeats": 10, "metric": "macro_f1"},
    "seeds": {"split": 0, "smote": 0, "stack": 0, "importance": 0, "synth": 0},
    "synth": {"kenya_shaped": True},
    "outputs": {"model": "model.json", "report": "report.json", "stats": "stats.json",
                "importance": "importance.json", "ablation": "ablation.json",
                "predictions": "predictions.tsv"},
}

PATH_KEYS = (("corpus",), ("embeddings", "path")) + tuple(("outputs", k) for k in DEFAULTS["outputs"])


def _merge(base, override, where=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where}{key}")
        if isinstance(base[key], dict) and key not in ("synth",):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where}{key} must be an object")
            out[key] = _merge(base[key], val, f"{where}{key}.")
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve(raw, base_dir=None):
    """Merge ``raw`` over the defaults, resolve paths, validate; returns a plain dict."""
    cfg = _merge(DEFAULTS, raw)
    if base_dir is not None:
        for path in PATH_KEYS:
            node = cfg
            for k in path[:-1]:
                node = node[k]
            if node[path[-1]] is not None:
                node[path[-1]] = str(Path(base_dir, node[path[-1]]))
    validate(cfg)
    return cfg


def load_config(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return resolve(raw, path.parent)


def validate(cfg):
    if cfg["representation"] not in REPRESENTATIONS:
        raise ConfigError(f"representation must be one of {', '.join(REPRESENTATIONS)}")
    if not 0.0 < float(cfg["split"]["ratio"]) < 1.0:
        raise ConfigError("split.ratio must lie in (0, 1)")
    for name, seed in cfg["seeds"].items():
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ConfigError(f"seeds.{name} must be a non-negative integer")
    if int(cfg["embeddings"]["dim"]) < 1:
        raise ConfigError("embeddings.dim must be positive")
    if int(cfg["stack"]["folds"]) < 2:
        raise ConfigError("stack.folds must be >= 2")
    if not 0.0 < float(cfg["threshold"]) < 1.0:
        raise ConfigError("threshold must lie in (0, 1)")
    try:
        feature_config(cfg)
        smote_config(cfg)
        for k in ("logistic", "svm", "meta"):
            hyper(cfg, k)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def override_seeds(cfg, seed):
    cfg = copy.deepcopy(cfg)
    for k in cfg["seeds"]:
        cfg["seeds"][k] = int(seed)
    validate(cfg)
    return cfg


def feature_config(cfg):
    f = cfg["features"]
    return FeatureConfig(election_years=tuple(int(y) for y in f["election_years"]),
                         reference_year=int(f["reference_year"]), top_sponsor=str(f["top_sponsor"]),
                         bow_min_freq=int(f["bow_min_freq"]), bow_max_vocab=int(f["bow_max_vocab"]))


def smote_config(cfg):
    return SmoteConfig(k_neighbors=int(cfg["smote"]["k_neighbors"]), seed=cfg["seeds"]["smote"])


def hyper(cfg, which):
    return Hyper.from_dict(cfg["models"][which])


def data_view(cfg):
    """The config keys that decide how a corpus becomes a feature matrix."""
    return {"representation": cfg["representation"], "features": cfg["features"],
            "embedding_dim": cfg["embeddings"]["dim"], "split": cfg["split"],
            "split_seed": cfg["seeds"]["split"]}


def portable(cfg):
    """Config with file-system paths removed (so digests do not depend on where files live)."""
    out = copy.deepcopy(cfg)
    out.pop("corpus")
    out["embeddings"].pop("path")
    out.pop("outputs")
    return out
