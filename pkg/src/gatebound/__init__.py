"""Numerical laboratory for minimum-energy requirements on gate control systems.

The package stress-tests the conjectured lower bound E ~ hbar/(eps T) on the
energy a control system needs to drive a controlled sign flip in time T with
failure probability below eps: exact and perturbative gate simulations on a
truncated bosonic mode, closed-form field-pulse and squeezed-field bounds,
semiclassical collision chains, and a heuristic single-particle estimate.
"""

from .envelopes import (
    Envelope,
    LinearDrive,
    envelope_drive,
    gaussian,
    multi_envelope_drive,
    piecewise_constant_drive,
    raised_cosine,
    triangle,
)
from .errors import (
    CutoffError,
    DegenerateConfigError,
    DimensionMismatchError,
    IntegrationError,
    NumericalInconsistencyError,
    SamplingError,
    UncertaintyError,
)
from .fock import (
    ControlState,
    OperatorMatrix,
    coherent_required_cutoff,
    coherent_state,
    evolve,
    expectation,
    ladder_operators,
    mean_photon_number,
    number_operator,
    number_state,
    overlap,
    quadrature_variance,
    squeezed_coherent_state,
)
from .gate import (
    GateOutcome,
    GateScenario,
    coherent_drive_scenario,
    counterexample_always_on,
    counterexample_scenario,
    displacement_oracle,
    drive_integrals,
    failure_probability_exact,
    failure_probability_perturbative,
    oscillator_hamiltonian,
    pi_phase_drive,
    switch_off_check,
)
from .heuristic import (
    HeuristicConfig,
    collision_crosscheck,
    displacement_estimates,
    heuristic_energy_bound,
    misoverlap,
    misoverlap_optimal,
    optimal_heuristic_wavepacket,
)
from .collision import (
    FreeCollisionConfig,
    HarmonicCollisionConfig,
    PotentialLaw,
    calibrate_coupling,
    calibrate_coupling_harmonic,
    calibrated,
    calibrated_harmonic,
    classical_return_mismatch,
    dipole_leading_ratio,
    error_variance_free,
    error_variance_harmonic,
    free_energy_bound,
    harmonic_constraint_ratio,
    harmonic_energy_bound,
    harmonic_trajectories,
    mismatch_norm,
    optimal_wavepacket,
    phase_integral_free,
    powerlaw_log_derivative,
    squeezing_consistency_probe,
)
from .pulses import (
    PulseSpec,
    adversarial_pulse_search,
    energy_bound_check,
    field_energy,
    linewidth_combined_bound,
    mean_frequency,
    min_photon_number,
    nonlinear_bound_check,
    nonlinear_reduce,
    optimize_squeezing,
    phase_accumulated,
    photon_number,
    quantum_error,
    random_feasible_pulse,
    single_mode_equality_pulse,
    squeezed_energy,
)
from .report import BoundReport

__version__ = "0.1.0"
