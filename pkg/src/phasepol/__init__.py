"""Masked-DFT phase retrieval via the polarization method.

Builds injective mask ensembles from symmetric low-bias modulation sets,
simulates (optionally noisy) intensity measurements, and reconstructs the
signal up to a global phase through edge-weight polarization, graph
pruning, angular synchronization, and least squares.
"""

from .masks import (
    AuxiliaryMask,
    DiagonalMask,
    MaskEnsemble,
    VertexMaskSet,
    auxiliary_indices,
    build_auxiliary_masks,
    build_ensemble,
    build_vertex_masks,
    check_full_spark,
    ensemble_from_dict,
    ensemble_to_dict,
    load_ensemble,
    mask_count,
    save_ensemble,
)
from .setgen import (
    ModulationSet,
    SetGenConfig,
    draw_B,
    fourier_bias,
    min_size_lower_bound,
    spectral_gap_from_bias,
    symmetrize,
)
from .graph import (
    PolarizationGraph,
    SpectralReport,
    build_graph,
    edge_list_lines,
    largest_component_after_removal,
    spectral_gap_bias_report,
    spectral_gap_eigen,
    write_edge_list,
)
from .measure import (
    MeasurementSet,
    NoiseModel,
    add_noise,
    analyze,
    measure_all,
    read_measurements,
    read_signal,
    write_measurements,
    write_signal,
)
from .recover import (
    RecoveryError,
    RecoveryParams,
    RecoveryResult,
    WeightedPolarizationGraph,
    angular_sync,
    assemble_and_solve,
    edge_weights,
    polarize,
    prune_connectivity,
    prune_reliability,
    recover,
    relative_error,
)
from .bench import (
    CellSummary,
    ExperimentConfig,
    TrialRecord,
    draw_signal,
    emit_plots,
    load_config,
    mix_seed,
    read_records,
    run_experiment,
    summarize,
    write_records,
)

__version__ = "0.1.0"
