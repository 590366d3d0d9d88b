"""Exact simulator and auditor for low-classical-bit teleportation protocols.

The package splits into four layers: ``qsim`` (dense state vectors,
gates, measurement), ``protocol`` (party-aware drivers producing
auditable event traces), ``analysis`` (exact branch enumeration and the
checks built on it), and ``cli`` (the ``teleportsim`` command).
"""

from .analysis import (
    BranchNode,
    BranchTree,
    NoSignalingReport,
    RegressionReport,
    ancilla_outcome_informativeness,
    enumerate_branches,
    expected_classical_bits,
    no_signaling_check,
    outcome_distribution,
    source_outcome_informativeness,
    state_checkpoint_regression,
)
from .protocol import (
    DESTINATION,
    PROTOCOLS,
    AuditReport,
    EventKind,
    LocalityError,
    Party,
    ProtocolTrace,
    TraceEvent,
    audit_locality,
    format_trace,
    run_protocol1,
    run_protocol1_reversed,
    run_protocol2,
    run_protocol2_variant,
    run_standard,
)
from .qsim import (
    GATES,
    DensityMatrix,
    MeasurementOutcome,
    NormalizationError,
    StateVector,
    apply_cnot,
    apply_single,
    bell_pair,
    chained_xor,
    fidelity,
    ghz,
    measure,
    product_state,
    reduced_density,
)

__version__ = "0.1.0"

__all__ = [
    "BranchNode", "BranchTree", "NoSignalingReport", "RegressionReport",
    "ancilla_outcome_informativeness", "enumerate_branches",
    "expected_classical_bits", "no_signaling_check", "outcome_distribution",
    "source_outcome_informativeness", "state_checkpoint_regression",
    "DESTINATION", "PROTOCOLS", "AuditReport", "EventKind", "LocalityError",
    "Party", "ProtocolTrace", "TraceEvent", "audit_locality", "format_trace",
    "run_protocol1", "run_protocol1_reversed", "run_protocol2",
    "run_protocol2_variant", "run_standard",
    "GATES", "DensityMatrix", "MeasurementOutcome", "NormalizationError",
    "StateVector", "apply_cnot", "apply_single", "bell_pair", "chained_xor",
    "fidelity", "ghz", "measure", "product_state", "reduced_density",
    "__version__",
]
