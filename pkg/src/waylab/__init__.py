"""Numerical laboratory for quantum measurement under an additive conservation law.

The package builds, validates, optimizes, and simulates measurement
models whose object-apparatus interaction commutes with an additively
conserved quantity (the WAY obstruction): the exact two-outcome
measurement is infeasible for any finite apparatus, the canonical
three-outcome scheme achieves error ``1/(2n - 1)`` with apparatus size
``n``, and an optimized scheme drives the error down like ``1/n^2``.
"""

from .born import (
    Observable,
    Outcome,
    OutcomeDistribution,
    born_distribution,
    sample_outcomes,
    three_outcome_stats,
)
from .generalized import BranchSpec, CaseVerdict, classify, exchange_form, support_check
from .graded import (
    DEFAULT_TOL,
    BlockMap,
    ConstraintReport,
    GradedVector,
    ObjectState,
    charge_expectation,
    check_conserving,
    inner,
    orthogonality_transfer_check,
    split_object_components,
    tensor,
)
from .nogo import (
    ExactSchemeData,
    InfeasibilityCertificate,
    exact_constraint_residual,
    infeasibility_certificate,
    rotated_basis_residual,
)
from .optimize import (
    OptimizationError,
    OptimizerOptions,
    SweepRow,
    SweepTable,
    fit_scaling,
    optimize_scheme,
    sweep,
)
from .scheme import (
    ApproxScheme,
    DerivedPointers,
    apply_interaction,
    build_canonical_scheme,
    canonical_weights,
    derived_pointers,
    interaction_blocks,
    scheme_error,
    validate_scheme,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxScheme",
    "BlockMap",
    "BranchSpec",
    "CaseVerdict",
    "ConstraintReport",
    "DEFAULT_TOL",
    "DerivedPointers",
    "ExactSchemeData",
    "GradedVector",
    "InfeasibilityCertificate",
    "Observable",
    "ObjectState",
    "OptimizationError",
    "OptimizerOptions",
    "Outcome",
    "OutcomeDistribution",
    "SweepRow",
    "SweepTable",
    "apply_interaction",
    "born_distribution",
    "build_canonical_scheme",
    "canonical_weights",
    "charge_expectation",
    "check_conserving",
    "classify",
    "derived_pointers",
    "exact_constraint_residual",
    "exchange_form",
    "fit_scaling",
    "infeasibility_certificate",
    "inner",
    "interaction_blocks",
    "optimize_scheme",
    "orthogonality_transfer_check",
    "rotated_basis_residual",
    "sample_outcomes",
    "scheme_error",
    "split_object_components",
    "support_check",
    "sweep",
    "tensor",
    "three_outcome_stats",
    "validate_scheme",
]
