"""Python bindings for the block-encoding simulator."""

import json

from ._blockenc import (
    BlockEncoding,
    BlockencError,
    KPTree,
    amplify,
    block_ham_sim,
    complement,
    effective_resistance,
    exact_encode,
    fidelity,
    from_kp,
    gls_solve,
    lcu,
    max_qubits,
    naive_inverse_state,
    negative_power,
    positive_power,
    product,
    pseudoinverse,
    qls_norm_estimate,
    qls_solve,
    spectral_norm,
    wls_solve,
)
from ._blockenc import _run_experiment, _scaling_sweep


def run_experiment(config):
    """Run one experiment from a config dict and return the report dict."""
    return json.loads(_run_experiment(json.dumps(config)))


def scaling_sweep(config):
    """Run a sweep; returns (csv text, summary dict)."""
    csv, summary = _scaling_sweep(json.dumps(config))
    return csv, json.loads(summary)


def run_experiment_text(config):
    return _run_experiment(json.dumps(config))
