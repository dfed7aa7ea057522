"""Operational nonclassicality witness for cavity field states probed by
a moving two-level detector, with a truncated-basis oracle for every
closed form."""

from .errors import InvalidParameterError, NumericalFailure, TruncationTooSmall
from .field import CavityConfig, ModeSpec, mode_frequency, mode_function
from .oracle import (
    EndToEndReport,
    OracleCheck,
    TruncatedMode,
    displacement_matrix,
    end_to_end_check,
    evolve_closed_form,
    evolve_trotter,
    overlap_trace,
    run_oracle_suite,
)
from .response import (
    DEFAULT_TOL,
    DELTA_RES,
    ChiBranch,
    ChiValue,
    CouplingSpec,
    chi,
    chi_inertial_analytic,
    chi_mode_sum,
    chi_quadrature,
    chi_series,
    chi_static,
    chi_static_amplitude,
    critical_velocity,
    phase_beta,
)
from .trajectory import TrajectoryKind, TrajectorySpec, position, wall_time
from .witness import (
    BOUND_EPS,
    DetectorState,
    StateFamily,
    StateSpec,
    ViolationMetrics,
    WitnessSeries,
    asymptote_value,
    extract_witness,
    laguerre,
    time_averaged_witness,
    violation_metrics,
    witness_cat,
    witness_coherent,
    witness_fock,
    witness_series,
    witness_series_from_omega,
    witness_thermal,
    witness_value,
)

__version__ = "0.1.0"
