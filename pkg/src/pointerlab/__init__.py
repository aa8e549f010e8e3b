"""Sequential quantum measurement simulator and inverse-problem solver.

Forward direction: path amplitudes for chains of measurements, von Neumann
pointer reading densities at any accuracy, and reproducible Monte Carlo
records.  Inverse direction: recovery of amplitude moduli and relative
phases from interval frequencies, commuting-observable prediction, weak-limit
estimation, and initial-state tomography.
"""

from .inverse import (
    DesignMatrix,
    NonCommutingError,
    RankDeficientError,
    ReconstructionResult,
    SweepRow,
    WeakEstimate,
    amplitudes_from_gram,
    conditioning_sweep,
    interval_design,
    one_step_design,
    pointwise_design,
    predict_commuting,
    predict_commuting_observable,
    reconstruct_from_frequencies,
    reconstruct_initial_state,
    solve_intervals,
    solve_pointwise,
    weak_reconstruct,
)
from .paths import (
    MeasurementChain,
    OutcomeDistribution,
    PathAmplitudeSet,
    PathAmplitudeTable,
    PostselectionError,
    marginalize_last,
    outcome_distribution,
    path_amplitude,
    path_amplitude_table,
    postselected_distribution,
    transition_amplitude,
    two_step_amplitudes,
)
from .pointer import (
    GramMatrix,
    MixedPointerStats,
    PointerConfig,
    ReadingDensity,
    WeakStats,
    arrival_probability,
    arrival_probability_curve,
    density_from_gram_matrix,
    exact_mean_reading,
    interval_probability,
    mixed_reading_density,
    momentum_density,
    normalized_amplitudes,
    post_measurement_state,
    projector_strong_mean,
    reading_density,
    strong_limit_stats,
    unconditional_density,
    unconditional_mean,
    weak_limit_stats,
)
from .qcore import (
    DimensionMismatchError,
    MixedState,
    Observable,
    QuantumState,
    Unitary,
    evolve,
    inner,
    unitary_from_hamiltonian,
)
from .sampler import (
    CountVector,
    IntervalPartition,
    TrialRecord,
    count,
    frequencies,
    sample,
)

__version__ = "1.0.0"

__all__ = [
    "CountVector",
    "DesignMatrix",
    "DimensionMismatchError",
    "GramMatrix",
    "IntervalPartition",
    "MeasurementChain",
    "MixedPointerStats",
    "MixedState",
    "NonCommutingError",
    "Observable",
    "OutcomeDistribution",
    "PathAmplitudeSet",
    "PathAmplitudeTable",
    "PointerConfig",
    "PostselectionError",
    "QuantumState",
    "RankDeficientError",
    "ReadingDensity",
    "ReconstructionResult",
    "SweepRow",
    "TrialRecord",
    "Unitary",
    "WeakEstimate",
    "WeakStats",
    "amplitudes_from_gram",
    "arrival_probability",
    "arrival_probability_curve",
    "conditioning_sweep",
    "count",
    "density_from_gram_matrix",
    "evolve",
    "exact_mean_reading",
    "frequencies",
    "inner",
    "interval_design",
    "interval_probability",
    "marginalize_last",
    "mixed_reading_density",
    "momentum_density",
    "normalized_amplitudes",
    "one_step_design",
    "outcome_distribution",
    "path_amplitude",
    "path_amplitude_table",
    "pointwise_design",
    "post_measurement_state",
    "postselected_distribution",
    "predict_commuting",
    "predict_commuting_observable",
    "projector_strong_mean",
    "reading_density",
    "reconstruct_from_frequencies",
    "reconstruct_initial_state",
    "sample",
    "solve_intervals",
    "solve_pointwise",
    "strong_limit_stats",
    "transition_amplitude",
    "two_step_amplitudes",
    "unconditional_density",
    "unconditional_mean",
    "unitary_from_hamiltonian",
    "weak_limit_stats",
    "weak_reconstruct",
]
