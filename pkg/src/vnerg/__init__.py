"""Mean ergodic theory on matrix algebras: standard forms, CP map duality,
Cesaro/Abel/group averages and their conditional expectations."""

from .algebra import SubspaceBasis, commutant, gram_schmidt, hs_project, is_star_algebra
from .amenable import (
    CyclicGroup,
    DiscreteGroup,
    FiniteByTable,
    FolnerSet,
    Heisenberg3,
    UnitaryAction,
    ZGroup,
    average_map,
    build_action,
    folner_boxes,
    folner_defect,
    group_average,
    invariant_expectation,
    tempered_constant,
    theorem32_profile,
)
from .config import ExperimentConfig, emit, parse_problem
from .cpmaps import (
    ClassReport,
    QuantumMap,
    adjoint_residual,
    choi,
    classify,
    dual_map,
    gns_operator,
    ks_residual,
    modular_commutation_residual,
    tilde_map,
)
from .ergodic import (
    DualityReport,
    ErgodicDecomposition,
    bimodule_residual,
    cesaro_map,
    cesaro_operator_profile,
    conditional_expectation,
    convergence_profile,
    functional_battery,
    mean_projection,
    predual_distance,
    theorem11_certificate,
)
from .errors import (
    DimensionMismatch,
    GroupRelationViolated,
    MemoryGuardExceeded,
    NonFinite,
    NotContraction,
    NotFaithful,
    NotInPHalf,
    NotInvariant,
    NotPSD,
    ParseError,
    SingularMatrix,
    SingularResolvent,
    UnsupportedGroup,
    ValidationError,
    VerificationError,
    VnergError,
)
from .linalg import DEFAULT_TOL, Tolerances
from .semigroup import (
    LindbladGenerator,
    abel_average,
    abel_quadrature_residual,
    evolve,
    semigroup_expectation,
)
from .standard_form import Functional, StandardForm, State, matrix_unit, matrix_units

__version__ = "0.1.0"
