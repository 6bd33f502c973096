"""Python access to the odrslab rounding core."""

import json

from ._odrslab import (
    ParamError,
    ValidationError,
    lb_bound,
    lb_root,
    offline_pivotal,
    online_round,
    ratio_bound,
    selection_probability,
    threshold_round,
)
from . import _odrslab as _core


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def optimize_params(variant="matching"):
    return json.loads(_core._optimize_params(variant))


def crs(dist, v):
    """dist uses the same JSON layout as `odrs-lab crs --dist`."""
    return json.loads(_core._crs(_dump(dist), list(v)))


def round_instance(instance, alg="odrs", runs=0, seed=1):
    """Exact edge probabilities when runs <= 0, else a Monte Carlo estimate."""
    return json.loads(_core._round(_dump(instance), alg, runs, seed))


def exact_ratio(instance, alg="odrs"):
    return _core._exact_ratio(_dump(instance), alg)


def validate(instance):
    """List of violations; empty when the instance is valid."""
    return json.loads(_core._validate(_dump(instance)))


__all__ = [
    "ParamError", "ValidationError", "crs", "exact_ratio", "lb_bound", "lb_root",
    "offline_pivotal", "online_round", "optimize_params", "ratio_bound", "round_instance",
    "selection_probability", "threshold_round", "validate",
]
