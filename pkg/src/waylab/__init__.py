"""Finite-dimensional measurement toolkit: energy conservation of quantum
measurements, von Neumann-type measurement models and WAY-type checks."""

from waylab.errors import (
    DegenerateObservableError,
    DimensionMismatchError,
    HypothesisViolation,
    InvalidMeasurementError,
    InvalidStateError,
    NotHermitianError,
    NotIsometryError,
    WaylabError,
)
from waylab.explorer import (
    SearchConfig,
    SearchReport,
    random_hermitian,
    random_kraus,
    random_projective,
    search_counterexample,
    sweep_theorem1,
)
from waylab.measurement import (
    KrausMeasurement,
    OutcomeDistribution,
    ProjectiveMeasurement,
    check_conservation,
    commutation_defect,
    conservation_defect,
    expected_value,
    outcome_distribution,
    theorem1_check,
    unconditional_post_state,
    validate,
)
from waylab.operators import (
    DEFAULT_TOL,
    SpectralDecomposition,
    ToleranceConfig,
    commutator,
    is_orthogonal_resolution,
    range_projector,
    spectral_decompose,
    tensor_product,
)
from waylab.verdict import Check, Verdict
from waylab.way_model import (
    AdditiveHamiltonian,
    ApparatusObservable,
    SystemObservable,
    TraditionalSetup,
    WayModel,
    build_additive,
    build_traditional,
    build_way_model,
    derive_system_hamiltonian,
    intertwining_defect,
    proposition1_check,
    range_invariance_defect,
    theorem2_verify,
    theorem3_verify,
)

__version__ = "0.1.0"
