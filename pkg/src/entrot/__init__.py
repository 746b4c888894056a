"""Entanglement-assisted nonlocal controlled rotations.

Simulate and analyze a two-party protocol that consumes one partially
entangled qubit pair (plus classical communication) to enact the
two-qubit rotation ``cos(theta/2) I + i sin(theta/2) sz x sz`` between
remote data qubits.  The package provides the closed-form optimal
measurement and its success probability, an exact state-vector
simulation of the protocol with explicit messages, batched Monte Carlo
statistics, and the entanglement accounting that locates the gate angle
below which a partial pair is cheaper than a Bell pair.
"""

from .entanglement import (EntanglementReport, average_cost, binary_entropy,
                           min_cost_over_alpha, resource_entropy,
                           threshold_theta)
from .montecarlo import SummaryStats, monte_carlo
from .povm import (CaseLabel, OptimumResult, PovmSet, PovmWeights,
                   ProtocolParams, bell_conversion_prob, build_povm, det_e3,
                   discriminant, optimum, pmax_oracle, povm_vectors, tr_e3)
from .protocol import (RunOutcome, controlled_rotation, run_once, wrap_angle)
from .qmath import StateVector, apply_gate, fidelity, haar_state
from .verify import CheckResult, all_passed, run_checks

__version__ = "0.1.0"

__all__ = [
    "CaseLabel",
    "CheckResult",
    "EntanglementReport",
    "OptimumResult",
    "PovmSet",
    "PovmWeights",
    "ProtocolParams",
    "RunOutcome",
    "StateVector",
    "SummaryStats",
    "all_passed",
    "apply_gate",
    "average_cost",
    "bell_conversion_prob",
    "binary_entropy",
    "build_povm",
    "controlled_rotation",
    "det_e3",
    "discriminant",
    "fidelity",
    "haar_state",
    "min_cost_over_alpha",
    "monte_carlo",
    "optimum",
    "pmax_oracle",
    "povm_vectors",
    "resource_entropy",
    "run_checks",
    "run_once",
    "threshold_theta",
    "tr_e3",
    "wrap_angle",
    "__version__",
]
