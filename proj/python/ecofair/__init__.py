"""Lightweight-first routed inference simulator.

The native core handles routing signals, metadata risk scoring, energy
accounting, classification/fairness metrics, Pareto extraction and the
cross-validation harness. This package adds dict-friendly wrappers around
the JSON-string entry points.
"""

import json as _json

from ._ecofair import (  # noqa: F401
    ClassTaxonomy,
    EcofairError,
    FairnessReport,
    RiskModel,
    RoutingConfig,
    __version__,
    account,
    aggregate_folds,
    ambiguity,
    balanced_accuracy,
    breakeven_rate,
    calibrate_risk,
    cli,
    confusion,
    entropy,
    fairness,
    fairness_delta,
    macro_f1,
    malignant_recall,
    norm_entropy,
    pareto_indices,
    route,
    routing_score,
    safe_danger_gap,
    validate_distribution,
)
from ._ecofair import run as _run_json
from ._ecofair import synth as _synth_json


def run(config):
    """Run the cross-validation protocol.

    ``config`` may be a dict or a JSON string; returns the report as a dict.
    Output files are written to the configured ``output_dir``.
    """
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(_run_json(config))


def synth(spec, out_dir):
    """Generate a synthetic dataset export; returns the number of files written."""
    if not isinstance(spec, str):
        spec = _json.dumps(spec)
    return _synth_json(spec, str(out_dir))
