"""Ergodic theory of finite-dimensional C*-dynamical systems."""

__version__ = "0.1.0"

from .algebra import (
    EnergyLevel,
    Interval,
    StarAlgebra,
    State,
    density_state,
    diagonal_algebra,
    full_matrix_algebra,
    is_hermitian,
    is_projection,
    luders_update,
    make_algebra,
    matrix_unit,
    spectral_levels,
    spectral_projection,
    trace_state,
    vector_state,
    weights_state,
)
from .classical import (
    FiniteMeasureSystem,
    conditional_probability,
    cyclic_system,
    embed,
    indicator,
    is_ergodic_classical,
    uniform_system,
)
from .dynamics import (
    CesaroTrajectory,
    DynamicalMap,
    DynamicalSystem,
    ErgodicReport,
    cesaro_correlation,
    cesaro_mean,
    cesaro_operator,
    classical_map,
    fixed_point_projection,
    hamiltonian_step_map,
    induced_contraction,
    is_ergodic,
    is_state_invariant,
    make_system,
    unitary_conjugation_map,
)
from .errors import (
    AlgebraError,
    CertificateError,
    ErgodicError,
    HypothesisError,
    NotHermitianError,
    NotProjectionError,
    StateError,
    ZeroProbabilityError,
)
from .gns import GnsSpace, gns_construct, gram_matrix, is_phi_total, seminorm
from .physics import (
    BoundedQuantumSystem,
    ClassicalMechanicalSystem,
    EnergyProfile,
    NonErgodicityCertificate,
    classical_two_cycle,
    damped_swap_map,
    damped_swap_system,
    energy_profile,
    non_ergodicity_certificate,
    spin_half_bounded,
    spin_half_hamiltonian,
    spin_half_system,
)
from .recurrence import (
    RecurrenceSearch,
    RecurrenceSet,
    ReturnScan,
    additive_recurrence_search,
    center_trace,
    hilbert_recurrence_set,
    is_additive_witness,
    khintchine_pair_set,
    khintchine_set,
    return_probability_scan,
)
