"""Python front end for the geointent C++ core."""

import json
import os

from . import _geointent
from ._geointent import (
    NumericalFailure,
    ca_block,
    ct3d_block,
    cv_block,
    hct_block,
    loss_afl,
    loss_cce,
    softmax,
)

STATE_COLUMNS = ["t", "x", "vx", "ax", "y", "vy", "ay", "z", "vz", "az"]


def _dump(config):
    return config if isinstance(config, str) else json.dumps(config)


def default_config(dim=2, per_intent=20):
    return json.loads(_geointent.default_config(dim, per_intent))


def load_config(path):
    with open(path) as f:
        return json.loads(_geointent.normalize_config(f.read()))


def generate_trajectory(config, intent, index):
    """Truth and track rows use STATE_COLUMNS."""
    out = _geointent.generate_trajectory(_dump(config), intent, index)
    out["record"] = json.loads(out["record"])
    return out


def generate_dataset(config, out_dir):
    return json.loads(_geointent.generate_dataset(_dump(config), os.fspath(out_dir)))


def run_experiment(config, dataset_dir, window, out_dir=None):
    out = "" if out_dir is None else os.fspath(out_dir)
    return json.loads(_geointent.run_experiment(_dump(config), os.fspath(dataset_dir), window, out))


def predict(model_path, window):
    return _geointent.predict(os.fspath(model_path), window)


def infer_detections(config, model_path, detections_csv):
    """Returns (labels, rows of [tau, p_0, ..., p_{n-1}])."""
    return _geointent.infer_detections(_dump(config), os.fspath(model_path), os.fspath(detections_csv))
