"""Eigenphases of a unitary, solved two independent ways.

The ring route encodes the problem in a constant U(n) gauge potential on a
ring and reads eigenphases off the relocalization peaks of an evolved
packet. The register route runs textbook phase estimation on an exact
statevector. The two agree with each other and with direct
diagonalization, which is the whole point: `compare` checks all three.
"""

from .angles import circular_distance, wrap_to_signed, wrap_to_unit
from .bench import (
    BenchPoint,
    ScalingFit,
    fit_scaling,
    run_scaling_suite,
)
from .encode import (
    EnergyProblem,
    UnitarySpec,
    encode_hamiltonian_as_gauge,
    encode_unitary_as_gauge,
    load_problem,
    phase_to_energy,
    problem_from_json,
    problem_to_json,
    unwrap_phase,
)
from .errors import (
    PhaseAliasingWarning,
    PreconditionError,
    ProblemFormatError,
    ResolutionError,
    ResourceLimitError,
    RingQpeError,
)
from .linalg import (
    EigenDecomposition,
    eig_hermitian,
    expm_dense,
    matrix_from_json,
    matrix_power,
    matrix_to_json,
    unitary_from_hermitian,
)
from .opcount import MacCounter, count_macs
from .qpe import (
    QpeConfig,
    QpeEstimate,
    QpeRegisters,
    Register1Distribution,
    controlled_unitary_all,
    measure_register1,
    qft_inverse,
    qpe_estimate,
    qpe_prepare,
    success_tail_bound,
)
from .ring import (
    VELOCITY_FACTOR,
    GaugeField,
    ModeBlockHamiltonian,
    Peak,
    PeakSet,
    PositionDensity,
    RingPhysicalParams,
    RingState,
    build_hamiltonian,
    estimate_phase_via_ring,
    evolve_block,
    evolve_dense,
    extract_peaks,
    initial_localized_state,
    position_density,
    return_time,
)

__version__ = "0.1.0"

__all__ = [
    "BenchPoint",
    "EigenDecomposition",
    "EnergyProblem",
    "GaugeField",
    "MacCounter",
    "ModeBlockHamiltonian",
    "Peak",
    "PeakSet",
    "PhaseAliasingWarning",
    "PositionDensity",
    "PreconditionError",
    "ProblemFormatError",
    "QpeConfig",
    "QpeEstimate",
    "QpeRegisters",
    "Register1Distribution",
    "ResolutionError",
    "ResourceLimitError",
    "RingPhysicalParams",
    "RingQpeError",
    "RingState",
    "ScalingFit",
    "UnitarySpec",
    "VELOCITY_FACTOR",
    "build_hamiltonian",
    "circular_distance",
    "controlled_unitary_all",
    "count_macs",
    "eig_hermitian",
    "encode_hamiltonian_as_gauge",
    "encode_unitary_as_gauge",
    "estimate_phase_via_ring",
    "evolve_block",
    "evolve_dense",
    "expm_dense",
    "extract_peaks",
    "fit_scaling",
    "initial_localized_state",
    "load_problem",
    "matrix_from_json",
    "matrix_power",
    "matrix_to_json",
    "measure_register1",
    "phase_to_energy",
    "position_density",
    "problem_from_json",
    "problem_to_json",
    "qft_inverse",
    "qpe_estimate",
    "qpe_prepare",
    "return_time",
    "run_scaling_suite",
    "success_tail_bound",
    "unitary_from_hermitian",
    "unwrap_phase",
    "wrap_to_signed",
    "wrap_to_unit",
]
