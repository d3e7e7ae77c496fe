"""Python access to the costrec reductions and audits."""

import json

from . import _core
from ._core import ConfigError, Error, config_hash, harmonic_inequality, log_h_constant, sample_count

__all__ = [
    "ConfigError",
    "Error",
    "audit",
    "config_hash",
    "harmonic_inequality",
    "log_h_constant",
    "lower_bound",
    "run",
    "sample_count",
]


def run(yaml, seed=None, mode=None, jobs=1):
    """Run a YAML config. Returns (summary dict, schedule csv, profiles csv)."""
    summary, schedule, profiles = _core.run(yaml, seed, mode, jobs)
    return json.loads(summary), schedule, profiles


def audit(yaml, seed=None, mode=None, jobs=1):
    """Audit a YAML config. Returns (all passed, list of report dicts)."""
    ok, reports = _core.audit(yaml, seed, mode, jobs)
    return ok, json.loads(reports)


def lower_bound(h=16.0, agents=1024, samples=100000, seed=1, jobs=1):
    return json.loads(_core.lower_bound(h, agents, samples, seed, jobs))
