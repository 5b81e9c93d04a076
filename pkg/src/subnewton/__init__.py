"""Sub-sampled Newton methods for finite-sum minimization.

Sample-size calculators with concentration guarantees, spectral/ridge
regularization of sampled Hessians, six iteration drivers over
unconstrained/l1-ball/box domains, and a diagnostics harness that checks
the implied convergence rates and sampling bounds empirically.
"""

from .errors import (
    CurvatureError,
    DegeneratePilotError,
    ReferenceSolveError,
    SubproblemError,
)
from .geometry import (
    ConeBasis,
    RestrictedSpectrum,
    restricted_condition_number,
    restricted_eigenvalues,
    restricted_matrix_norm,
    restricted_vector_norm,
)
from .harness import (
    ConcentrationReport,
    RateReport,
    envelope_check,
    finite_difference_check,
    fit_rates,
    gradient_concentration,
    hessian_concentration,
    quadratic_phase_check,
    recursion_check,
    reference_minimizer,
    single_step_contraction,
    wilson_lower,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .problems import (
    Dataset,
    GLMOracle,
    QuadraticOracle,
    SvmOracle,
    gradient_bound,
    load_dataset_csv,
    make_oracle,
    make_synthetic,
    save_dataset_csv,
)
from .regularization import ridge_shift, spectral_floor, spectral_threshold
from .sampling import (
    SampleSet,
    draw_sample,
    full_sample,
    gradient_sample_size,
    hessian_sample_size,
    intrinsic_dimension,
)
from .solver import (
    AlgorithmConfig,
    Box,
    IterationTrace,
    L1Ball,
    Unconstrained,
    epsilon_schedule,
    run_algorithm,
    solve_quadratic_model,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmConfig",
    "Box",
    "ConcentrationReport",
    "ConeBasis",
    "CurvatureError",
    "Dataset",
    "DegeneratePilotError",
    "GLMOracle",
    "IterationTrace",
    "KERNEL_BACKEND",
    "L1Ball",
    "QuadraticOracle",
    "RateReport",
    "ReferenceSolveError",
    "RestrictedSpectrum",
    "SampleSet",
    "SubproblemError",
    "SvmOracle",
    "Unconstrained",
    "draw_sample",
    "envelope_check",
    "epsilon_schedule",
    "finite_difference_check",
    "fit_rates",
    "full_sample",
    "gradient_bound",
    "gradient_concentration",
    "gradient_sample_size",
    "hessian_concentration",
    "hessian_sample_size",
    "intrinsic_dimension",
    "load_dataset_csv",
    "make_oracle",
    "make_synthetic",
    "quadratic_phase_check",
    "recursion_check",
    "reference_minimizer",
    "restricted_condition_number",
    "restricted_eigenvalues",
    "restricted_matrix_norm",
    "restricted_vector_norm",
    "ridge_shift",
    "run_algorithm",
    "save_dataset_csv",
    "single_step_contraction",
    "solve_quadratic_model",
    "spectral_floor",
    "spectral_threshold",
    "wilson_lower",
]
