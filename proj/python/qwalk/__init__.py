"""Electric-network quantum walk search.

Instances are plain dicts in the same JSON layout the ``qwalk`` command line
reads and writes::

    {"vertices": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]],
     "partition": None, "sigma": {"0": 1.0}, "marked": [2]}
"""

import json as _json

from . import _qwalk
from ._qwalk import (
    DisconnectedSourceError,
    DomainError,
    EmptyGraphError,
    InvalidFlowError,
    InvalidInstance,
    IoError,
    PreconditionError,
    QwalkError,
    ScaleExceededError,
    UnnormalizedStateError,
)

__all__ = [
    "QwalkError", "InvalidInstance", "PreconditionError", "EmptyGraphError", "DisconnectedSourceError",
    "InvalidFlowError", "UnnormalizedStateError", "DomainError", "ScaleExceededError", "IoError",
    "validate_instance", "electric", "commute_time", "detect", "walk_operator", "generate", "kdist",
    "or_star_complexity", "run_suite",
]


def _dump(instance):
    return instance if isinstance(instance, str) else _json.dumps(instance)


def validate_instance(instance):
    _qwalk.validate_instance(_dump(instance))


def electric(instance):
    """Total weight, and for a marked instance the electric flow, R and the hitting time."""
    return _json.loads(_qwalk.electric(_dump(instance)))


def commute_time(instance, u, v):
    return _qwalk.commute_time(_dump(instance), u, v)


def detect(instance, resistance=None, c1=8.0, c2=4.0, models=("ideal-threshold", "qpe-kernel")):
    """One result dict per model. Without ``resistance`` the bound is R of the instance itself."""
    return _json.loads(_qwalk.detect(_dump(instance), resistance, c1, c2, list(models)))


def walk_operator(instance, resistance, c1=8.0, c2=4.0):
    """(U, start state, basis labels) on the walk-ready instance."""
    return _qwalk.walk_operator(_dump(instance), resistance, c1, c2)


def generate(family, size=4, width=0, positive=True, variant=0, x=(), k=3, r=(), seed=1):
    """(id, instance dict, doubled) for a named family."""
    ident, text, doubled = _qwalk.generate(family, size, width, positive, variant, list(x), k, list(r), seed)
    return ident, _json.loads(text), doubled


def kdist(x, k=3, r=(1, 1), c1=8.0, c2=4.0, models=("ideal-threshold", "qpe-kernel")):
    return _json.loads(_qwalk.kdist(list(x), k, list(r), c1, c2, list(models)))


def or_star_complexity(n):
    return _qwalk.or_star_complexity(n)


def run_suite(config=None, out="qwalk-out"):
    """Runs an experiment config (the acceptance suite by default) and writes artifacts under ``out``."""
    return _json.loads(_qwalk.run_suite(None if config is None else _dump(config), str(out)))
