"""Cardinality-constrained portfolio selection: spectral clustering,
QUBO/Ising encoding, BF-DCQO state-vector emulation and swap local search."""

import json as _json

from ._cardopt import (
    CapExceeded,
    CardoptError,
    ConfigError,
    DataError,
    DegenerateInstance,
    build_qubo,
    get_clusters,
    local_search,
    mp_split,
    qubo_energy,
    qubo_to_ising,
    returns_moments,
    run_bf_dcqo,
    solve_exact,
    synth_universe,
)
from ._cardopt import run_pipeline_json as _run_pipeline_json

__all__ = [
    "CapExceeded",
    "CardoptError",
    "ConfigError",
    "DataError",
    "DegenerateInstance",
    "build_qubo",
    "get_clusters",
    "local_search",
    "mp_split",
    "qubo_energy",
    "qubo_to_ising",
    "returns_moments",
    "run_bf_dcqo",
    "run_pipeline",
    "solve_exact",
    "synth_universe",
]


def run_pipeline(config):
    """Run the full pipeline. `config` is a dict in the run-config JSON shape;
    returns the report as a dict."""
    return _json.loads(_run_pipeline_json(_json.dumps(config)))
