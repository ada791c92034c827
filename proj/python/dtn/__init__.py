"""Multi-drone delivery over transit networks."""
import csv
import io
import json

from ._dtn import (
    Error,
    InfeasibleError,
    InputError,
    SearchTimeout,
    ValidationError,
    distance,
    halton_sites,
    merge_split_tours,
    solve_mct,
)
from . import _dtn

__all__ = [
    "Error",
    "InfeasibleError",
    "InputError",
    "SearchTimeout",
    "ValidationError",
    "distance",
    "halton_sites",
    "merge_split_tours",
    "solve_mct",
    "run_pipeline",
    "bench",
]


def run_pipeline(config, stage="simulate", base_dir=""):
    """Run the pipeline up to `stage` from a config dict. JSON outputs come back parsed."""
    out = _dtn.run_pipeline(json.dumps(config), stage, str(base_dir))
    for key in ("scenario", "allocation", "routes"):
        if key in out:
            out[key] = json.loads(out[key])
    if "log" in out:
        out["log"] = [json.loads(line) for line in out["log"].splitlines()]
    return out


def bench(spec, base_dir=""):
    """Run a bench matrix and return the aggregate rows as dicts."""
    text = _dtn.bench(json.dumps(spec), str(base_dir))
    return list(csv.DictReader(io.StringIO(text)))
