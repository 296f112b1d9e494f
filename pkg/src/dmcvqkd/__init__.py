"""Numerics for discrete-modulated CV-QKD.

Truncated Fock-space states for coherent-state constellations, their
convergence to the thermal state with the same energy, purification and
covariance-matrix gaps against the two-mode-squeezed reference, energy-test
security arithmetic, and a Monte Carlo of the prepare-and-measure protocol.
"""

__version__ = "0.1.0"

from .bipartite import (
    BipartiteState,
    ChannelModel,
    CovarianceMatrix,
    EPRReference,
    bipartite_trace_distance,
    cm_distance,
    covariance_matrix,
    covariance_sweep,
    epr_reference,
    purification_checks,
    purify,
    z_channel,
    z_star,
)
from .constellation import (
    Constellation,
    ShapingParams,
    from_json_dict,
    mb_shaped,
    mean_energy,
    qam_grid,
    sample,
    sample_indices,
    shaped_qam,
    solve_nu_for_energy,
    to_json_dict,
    uniform,
)
from .convergence import (
    ConvergenceReport,
    approximation_bound,
    compare_to_thermal,
    constellation_density,
    convergence_sweep,
    eigen_convergence,
    min_dim_for_deficit,
    spectral_distance,
    tail_mass,
    thermal_eigenvalue,
)
from .errors import (
    ConvergenceFailure,
    DegenerateSpectrum,
    DimensionMismatch,
    DMCVQKDError,
    InsufficientTestData,
    InvalidOrder,
    InvalidTarget,
    NonPhysicalInput,
    NotHermitian,
    NotPSD,
    TruncationTooSevere,
    Unreachable,
)
from .fock import (
    DensityMatrix,
    FockVector,
    Spectrum,
    annihilation_op,
    coherent_fock,
    hermitian_eig,
    matrix_sqrt_psd,
    partial_trace,
    tensor_product,
    thermal_state,
    trace_norm,
    trace_norm_distance,
)
from .protocol import (
    EstimationResult,
    ParamEstimate,
    ProtocolRun,
    estimate_params,
    map_estimate,
    md_estimate,
    run_protocol,
    simulate_channel,
)
from .security import SecurityBudget, compose_budget, eps_test, min_dim_for_eps
