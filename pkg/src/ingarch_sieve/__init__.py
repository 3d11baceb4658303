"""Count-process simulation and sieved least squares link estimation.

The package simulates integer-valued autoregressive processes whose counts
are conditionally Poisson with an intensity driven by a bounded link
function, and estimates that link nonparametrically: candidates are
quadratic spline surfaces with grid-valued coefficients, scored by their
one-step-ahead squared prediction error and searched with a genetic
algorithm under contraction constraints.
"""

from .process import (
    ConstantLink,
    ContractionBounds,
    LinkFunction,
    ParametricLink,
    ProcessPath,
    poisson_draw,
    read_path_csv,
    simulate,
    write_path_csv,
)
from .splines import (
    ConstraintReport,
    SieveConfig,
    SplineLink,
    bspline_basis,
    build_sieve_config,
    check_contractive,
    cox_de_boor,
    knot_intervals,
    load_spline_link,
    sample_link_coefficients,
    save_spline_link,
    sieve_from_spacing,
    snap_to_grid,
)
from .contrast import ContrastValue, contrast, contrast_batch, iterate_link
from .genetic import (
    EstimationResult,
    GAConfig,
    ga_minimize,
    penalized_fitness,
    repair_chromosome,
    write_trace_csv,
)
from .evaluate import (
    LossEstimate,
    RateRow,
    RateTable,
    acf_diagnostic,
    l2_loss_mc,
    link_mse_on_path,
    rate_experiment,
    write_loss_csv,
    write_rate_csv,
)
from .config import (
    ConfigError,
    EvalSpec,
    ExperimentSpec,
    SieveSpec,
    SimulationSpec,
    default_spec,
    load_spec,
    parse_spec,
    save_spec,
    serialize_spec,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantLink",
    "ContractionBounds",
    "LinkFunction",
    "ParametricLink",
    "ProcessPath",
    "poisson_draw",
    "read_path_csv",
    "simulate",
    "write_path_csv",
    "ConstraintReport",
    "SieveConfig",
    "SplineLink",
    "bspline_basis",
    "build_sieve_config",
    "check_contractive",
    "cox_de_boor",
    "knot_intervals",
    "load_spline_link",
    "sample_link_coefficients",
    "save_spline_link",
    "sieve_from_spacing",
    "snap_to_grid",
    "ContrastValue",
    "contrast",
    "contrast_batch",
    "iterate_link",
    "EstimationResult",
    "GAConfig",
    "ga_minimize",
    "penalized_fitness",
    "repair_chromosome",
    "write_trace_csv",
    "LossEstimate",
    "RateRow",
    "RateTable",
    "acf_diagnostic",
    "l2_loss_mc",
    "link_mse_on_path",
    "rate_experiment",
    "write_loss_csv",
    "write_rate_csv",
    "ConfigError",
    "EvalSpec",
    "ExperimentSpec",
    "SieveSpec",
    "SimulationSpec",
    "default_spec",
    "load_spec",
    "parse_spec",
    "save_spec",
    "serialize_spec",
]
