"""Blob-regularized particle methods for nonlocal aggregation dynamics."""

from .errors import (
    AggblobError,
    CoincidentParticlesError,
    DimensionMismatchError,
    EmptySupportError,
    IndexMismatchError,
    NaNDetectedError,
    NoRootError,
    NumericalError,
    OutOfTableRangeError,
    PastBlowupError,
    QuadratureError,
    SingularOriginError,
    SolverConvergenceError,
    StepSizeUnderflowError,
    UnknownPresetError,
    UnsupportedTermError,
    ValidationError,
    VariantMismatchError,
)
from .kernels import (
    Kernel,
    MorseTerm,
    NewtonianTerm,
    PowerLawTerm,
    kernel_from_config,
    kernel_to_config,
    morse,
    newtonian,
    power_law,
)
from .initial_data import (
    IndicatorBall,
    IndicatorBox,
    ParticleGrid,
    PolyBump,
    Scaled,
    SmoothBump,
    StarPatch,
    discretize,
    normalized,
    profile_from_config,
)
from .mollifiers import Mollifier, builtin, builtin_names, mollifier_from_config
from .norms import (
    GridFunction,
    density_error,
    dual_norm_2,
    energy_delta,
    lp_norm,
    resolve_norm,
    trajectory_error,
    w1p_norm,
)
from .oracles import (
    RadialExactSolution,
    newtonian_radial,
    quadratic_contraction,
    ring_radius,
)
from .harness import (
    ConvergenceReport,
    ConvergenceRow,
    SimulationConfig,
    StudyConfig,
    config_from_dict,
    config_hash,
    fit_rate,
    predicted_rate,
    preset,
    preset_names,
    profile_to_config,
    run_simulation,
    run_study,
    simulation_table,
    simulation_to_config,
    study_to_config,
    write_report,
    write_simulation,
)
from .pairwise import blob_velocity_at, blob_velocity_div, particle_velocity
from .regkernel import RegularizedKernel, TableConfig, build
from .solver import (
    BlobMethod,
    IntegratorConfig,
    Method,
    ParticleMethod,
    ParticleState,
    divergence,
    integrate,
    rhs,
    trace_offgrid,
    velocity,
)

__version__ = "0.1.0"
