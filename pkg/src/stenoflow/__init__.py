"""Stationary channel-flow prediction on pixel grids by domain decomposition.

A universal subdomain solver (CNN inference, analytic stream-function
oracle, or a Laplace benchmark backend) is composed over an overlapping
strip decomposition by an alternating even/odd sweep with exact flow-rate
conservation.  See the README for the file formats and the command-line
surface.
"""

from .errors import (
    ConfigError,
    ExtentError,
    InvariantError,
    ModelError,
    NumericError,
    ParameterError,
    StenoflowError,
    WeightChecksumError,
    WeightFormatError,
    WeightMagicError,
    WeightShapeError,
    WeightVersionError,
)
from .fields import (
    BoundaryBand,
    PixelGrid,
    ScalarField,
    VelocityField,
    load_field,
    save_field,
)
from .geometry import (
    CANONICAL_HEIGHT,
    CANONICAL_WIDTH,
    CANONICAL_X_START,
    ChannelGeometry,
    SamplingWindow,
    StenosisSegment,
    canonical_window,
    compute_sdf,
    load_geometry,
    random_geometry,
    rasterize,
    save_geometry,
    scaled_geometry,
    straight_geometry,
    training_offsets,
    wall_derivatives,
    wall_discontinuities,
    wall_functions,
)
from .physics import (
    CARREAU_BLOOD,
    SDF_MAX,
    V_MAX_RANGE,
    CarreauParams,
    carreau_viscosity,
    flow_rate_profile,
    inlet_flow_rate,
    mask_from_sdf,
    parabolic_profile,
    parabolic_velocity,
)
from .solvers import (
    CnnModel,
    CnnSolver,
    LaplaceSolver,
    SolverInput,
    StreamFunctionSolver,
    SubdomainSolver,
    cnn_forward,
    constraint_layer,
    default_architecture,
    init_weights,
    inspect_weights,
    laplace_dirichlet,
    load_model,
    postprocess,
    save_model,
    stream_solution,
)
from .schwarz import (
    SchwarzConfig,
    SchwarzResult,
    SchwarzState,
    SchwarzTrace,
    Status,
    SubdomainLayout,
    decompose,
    gre_star,
    initialize,
    red_black_iterate,
    run,
)
from .poisson import default_boundary, poisson_harness
from .metrics import GreReport, categorize, category_of, gre, mse
from .config import RunConfig, load_run_config, save_run_config

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "StenoflowError", "ParameterError", "ExtentError", "InvariantError",
    "ConfigError", "ModelError", "NumericError", "WeightFormatError",
    "WeightMagicError", "WeightVersionError", "WeightChecksumError",
    "WeightShapeError",
    # fields
    "PixelGrid", "ScalarField", "VelocityField", "BoundaryBand",
    "save_field", "load_field",
    # geometry
    "StenosisSegment", "ChannelGeometry", "SamplingWindow",
    "CANONICAL_X_START", "CANONICAL_WIDTH", "CANONICAL_HEIGHT",
    "straight_geometry", "random_geometry", "scaled_geometry",
    "wall_functions", "wall_derivatives", "wall_discontinuities",
    "canonical_window", "compute_sdf", "rasterize", "training_offsets",
    "save_geometry", "load_geometry",
    # physics
    "SDF_MAX", "V_MAX_RANGE", "CarreauParams", "CARREAU_BLOOD",
    "carreau_viscosity", "mask_from_sdf", "flow_rate_profile",
    "parabolic_velocity", "parabolic_profile", "inlet_flow_rate",
    # solvers
    "SolverInput", "SubdomainSolver", "postprocess", "constraint_layer",
    "CnnModel", "CnnSolver", "cnn_forward", "default_architecture",
    "init_weights", "LaplaceSolver", "laplace_dirichlet",
    "StreamFunctionSolver", "stream_solution", "save_model", "load_model",
    "inspect_weights",
    # coupling
    "Status", "SubdomainLayout", "decompose", "SchwarzConfig",
    "SchwarzTrace", "SchwarzState", "SchwarzResult", "initialize",
    "red_black_iterate", "run", "gre_star", "poisson_harness",
    "default_boundary",
    # metrics
    "GreReport", "gre", "category_of", "categorize", "mse",
    # configuration
    "RunConfig", "load_run_config", "save_run_config",
]
