"""Experiment configuration: schema validation and object construction.

Unknown keys are rejected with a diagnostic naming the offending key; every
run then either completes or fails with a typed error.
"""

import json

import numpy as np

from .errors import ConfigError
from .kernels import kernel_from_config
from .manifolds import manifold_for
from .models import expfam_for, model_from_config

_SCHEMA = {
    "manifold": {"kind", "N", "r"},
    "kernel": {"family", "tau", "beta", "gamma"},
    "family": {"kind", "F", "A", "mean", "sigma", "V", "r"},
    "sampler": {"method", "n", "step", "burn_in", "thin"},
    "estimator": {"kind"},
    "gof": {"beta", "n_sim"},
    "sweep": {"n_values", "replicates", "f_scales"},
    "seed": None,
    "output": {"dir", "formats"},
}


def validate_config(doc):
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for key, val in doc.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        allowed = _SCHEMA[key]
        if allowed is None:
            continue
        if not isinstance(val, dict):
            raise ConfigError(f"config block {key!r} must be an object")
        for sub in val:
            if sub not in allowed:
                raise ConfigError(f"unknown config key {key!r}.{sub!r}")
    return doc


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate_config(doc)


def build_manifold(doc):
    blk = doc.get("manifold")
    if not blk or "kind" not in blk or "N" not in blk:
        raise ConfigError("config needs a manifold block with kind and N")
    return manifold_for(blk["kind"], int(blk["N"]), int(blk.get("r", blk["N"])))


def build_kernel(doc):
    return kernel_from_config(doc.get("kernel", {}))


def build_model(doc, manifold=None):
    manifold = manifold or build_manifold(doc)
    blk = doc.get("family")
    if not blk:
        raise ConfigError("config needs a family block")
    return model_from_config(manifold, blk)


def build_expfam(doc, manifold=None):
    manifold = manifold or build_manifold(doc)
    blk = doc.get("family")
    if not blk:
        raise ConfigError("config needs a family block")
    return expfam_for(blk["kind"], manifold)


def get_seed(doc, override=None):
    if override is not None:
        return int(override)
    return int(doc.get("seed", 0))


def matrix_e1(scale=1.0):
    """(1,0;1,0;1,0) scaled; the first reference direction of the studies."""
    return scale * np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])


def matrix_e2(scale=1.0):
    """(1,1;1,1;1,1) scaled; the second reference direction."""
    return scale * np.ones((3, 2))
