"""Pseudo-spectral 2D flow toolkit: nonlinear and tangent-linear solvers on
the periodic box, graded spectral norms, translation-derivative identities,
closed-form oracle flows, and growth-law analysis."""

from .spectral import (
    BOX_MEASURE,
    SpectralField,
    dealias_cutoff,
    dealias_mask,
    grid_analyze,
    grid_evaluate,
    l2_inner_product,
    leray_project,
    nonlinear_term,
    random_scalar_field,
    random_vector_field,
    shift_and_boost,
    sobolev_norm,
    velocity_from_vorticity,
    vorticity_from_velocity,
    wavenumbers,
)
from .solver import (
    INFINITE,
    Diagnostics,
    SimulationBlowupError,
    SimulationState,
    SolverConfig,
    Trajectory,
    diagnostics,
    read_checkpoint,
    run,
    step,
    write_checkpoint,
)
from .tangent import (
    GrowthRecord,
    RemainderRow,
    RemainderTable,
    amplification_curve,
    evolve_pair,
    growth_experiment,
    remainder_experiment,
    tangent_step,
)
from .translation import (
    ScanRow,
    TailSpectrumSpec,
    divergence_scan,
    tail_spectrum_field,
    translation_derivative,
    translation_derivative_normsq_direct,
    translation_derivative_normsq_total,
)
from .oracles import (
    DIVERGENT,
    CouetteModal,
    ShearFamilyParams,
    couette_h0_normsq_modal,
    couette_inviscid_evolve,
    couette_reconstruct,
    couette_viscous_decay,
    couette_viscous_evolve,
    heat_semigroup,
    heat_smoothing_bound,
    is_divergent,
    shear_family_dsigma,
    shear_family_dsigma_h3_norm,
    shear_family_lower_bound,
    shear_family_velocity,
    shear_family_vorticity,
    strip_hk_norm,
)
from .growth import (
    EnvelopeParams,
    FitResult,
    ModelComparison,
    SweepResult,
    SweepRow,
    calibrate_envelope_constant,
    compare_models,
    envelope_margins,
    fit_exponential,
    fit_power_law,
    fit_sqrt_exponential,
    reynolds_sweep,
    turnover_time,
)

__version__ = "0.1.0"
