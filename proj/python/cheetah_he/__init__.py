"""Python front end for the cheetah core: BFV layer runs, HE parameter tuning, accelerator DSE."""
import json

from ._core import (
    ConfigOutOfBounds,
    HeParams,
    InvalidGrid,
    LayerSpec,
    NoFeasibleParams,
    NoiseEstimate,
    OpCounts,
    Schedule,
    UnknownModel,
    builtin_names,
    network_layers,
    noise_model,
    perf_model,
    run_trial,
    table_counts,
)
from . import _core

__all__ = [
    "ConfigOutOfBounds",
    "HeParams",
    "InvalidGrid",
    "LayerSpec",
    "NoFeasibleParams",
    "NoiseEstimate",
    "OpCounts",
    "Schedule",
    "UnknownModel",
    "builtin_names",
    "dse",
    "network_layers",
    "noise_model",
    "perf_model",
    "run_trial",
    "table_counts",
    "tune",
]


def tune(model, schedule=Schedule.pa, n=None, t_bits=None, q_bits=None, enforce_security=True):
    """Per-layer parameters for a builtin name, a network JSON path or a list of LayerSpec."""
    return json.loads(_core.tune_json(model, schedule, n, t_bits, q_bits, enforce_security))


def dse(model, pes=(2, 1024), lanes=(4, 8192), node_nm=5):
    """Pareto frontier over PEs x lanes, ordered by latency."""
    return json.loads(_core.dse_json(model, tuple(pes), tuple(lanes), node_nm))
