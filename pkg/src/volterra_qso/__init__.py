"""Quadratic stochastic operators on the simplex, extremal Volterra operators
as tournaments, and numerical diagnostics of their limit behaviour."""

from .simplex import SUM_TOL, make_point, on_face, sample_interior, vertex
from .qso import Permutation, QsoCoefficients, apply, apply_permutation, conjugate
from .volterra import (
    MAX_ENUM_M,
    ExtremalVolterra,
    VolterraMatrix,
    apply_volterra,
    enumerate_extremal,
    extremal_to_matrix,
    qso_from_volterra,
    volterra_from_qso,
)
from .tournament import (
    Tournament,
    canonical_form,
    has_any_cycle,
    has_hamiltonian_cycle,
    partition_into_classes,
    sources_and_sinks,
    tournament_from_extremal,
)
from .dynamics import (
    DiagnosticProtocol,
    GraphClaim,
    cesaro,
    cesaro_from,
    check_invariant_segment,
    classify,
    estimate_omega_set,
    fixed_points_extremal,
    graph_claim,
    iterate,
    numeric_diagnostic,
    restrict_to_face,
)

__version__ = "0.1.0"
