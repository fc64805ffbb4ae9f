"""Consistency checking between two independent intensity trackers.

The library runs two particle intensity filters on one simulated formation (a
unit and its three sub-units), synthesizes a sub-unit intensity from the unit
tracker through a doctrine convolution mask, and scores the agreement between
synthesized and tracked sub-unit intensities with L1/L2/Linf distances,
globally or restricted to sub-intervals of the position domain.
"""

from .doctrine import (
    ConvolutionResult,
    DoctrineMask,
    DoctrineSpec,
    apply_doctrine,
    doctrine_mask,
    select_best_doctrine,
    superpose,
)
from .errors import ConfigurationError, NumericalFailureError
from .experiment import (
    PRESETS,
    ExperimentConfig,
    StepRecord,
    Summary,
    apply_preset,
    default_params,
    materialize,
    parse_config_file,
    run,
    summarize,
)
from .filtering import (
    BirthModel,
    FilterConfig,
    FilterDiagnostics,
    MotionModel,
    SensorModel,
    effective_sample_size,
    filter_step,
    predict,
    resample,
    update,
)
from .metrics import (
    NORM_ORDERS,
    DiscrepancyRegion,
    distance,
    local_distance,
    localize_failure,
    lp_norm,
)
from .phd import (
    DiscretizeResult,
    GridPhd,
    GridSpec,
    ParticlePhd,
    StateVector,
    discretize,
    mass,
    mass_in,
)
from .scenario import (
    GroundTruth,
    ObservationSet,
    ScenarioConfig,
    simulate,
    simulate_with_streams,
    subunit_positions,
)

__version__ = "0.1.0"

__all__ = [
    "BirthModel",
    "ConfigurationError",
    "ConvolutionResult",
    "DiscrepancyRegion",
    "DiscretizeResult",
    "DoctrineMask",
    "DoctrineSpec",
    "ExperimentConfig",
    "FilterConfig",
    "FilterDiagnostics",
    "GridPhd",
    "GridSpec",
    "GroundTruth",
    "MotionModel",
    "NORM_ORDERS",
    "NumericalFailureError",
    "ObservationSet",
    "PRESETS",
    "ParticlePhd",
    "ScenarioConfig",
    "SensorModel",
    "StateVector",
    "StepRecord",
    "Summary",
    "apply_doctrine",
    "apply_preset",
    "default_params",
    "discretize",
    "distance",
    "doctrine_mask",
    "effective_sample_size",
    "filter_step",
    "local_distance",
    "localize_failure",
    "lp_norm",
    "mass",
    "mass_in",
    "materialize",
    "parse_config_file",
    "predict",
    "resample",
    "run",
    "select_best_doctrine",
    "simulate",
    "simulate_with_streams",
    "subunit_positions",
    "summarize",
    "superpose",
    "update",
]
