"""Two-velocity random motion whose direction is set by random trials.

The particle moves at speed c or -v; at each epoch of the period sequence
the next sign comes from a Bernoulli trial or a Polya urn drawing.  The
package provides the exact law of the position (atoms + density), the
conditional mean velocity, special-function machinery, an exact-dynamics
Monte Carlo engine, and a validation harness tying them together.
"""

from .errors import (
    NoStationaryLawError,
    ParameterError,
    RangeOverflowError,
    SeriesTruncationError,
    SimulationLimitError,
    TrialTelegraphError,
)
from .intertimes import (
    GammaThenExponential,
    IidExponential,
    IntertimeModel,
    LinearRateExponential,
    intertime_density,
    intertime_quantile,
    intertime_tail,
    partial_sum_cdf,
    partial_sum_density,
    partial_sum_tail,
    sample_intertime,
)
from .law import (
    MotionParams,
    ProcessLaw,
    SeriesDensity,
    atoms_damped,
    atoms_general,
    atoms_polya,
    damped_law,
    density_damped,
    density_damped_edge_limits,
    density_damped_given,
    density_damped_split,
    density_general_series,
    density_polya,
    density_polya_edge_limits,
    density_polya_given,
    density_polya_split,
    polya_law,
    series_law,
    stationary_damped,
    stationary_damped_params,
    tau_star,
)
from .meanvel import (
    mean_position_iid_check,
    mean_velocity_damped,
    mean_velocity_general,
    mean_velocity_polya,
)
from .simulate import (
    EmpiricalLaw,
    SamplePath,
    estimate_law,
    estimate_mean_position,
    estimate_mean_velocity,
    simulate_batch,
    simulate_path,
)
from .special import (
    DEFAULT_CONTROL,
    SeriesControl,
    exp_ramp_conv,
    gamma_cdf,
    gamma_sum_cdf,
    gamma_tail,
    kummer_1f1,
    kummer_second_tail,
    pochhammer,
)
from .streams import PathStream, UniformStreams
from .trials import (
    Bernoulli,
    CountDistribution,
    Direction,
    Polya,
    TrialScheme,
    TrialState,
    count_dist,
    initial_forward_prob,
    joint_count_velocity,
    next_success_prob,
    repeat_forward_prob,
    sample_trial,
)
from .validate import (
    Check,
    ValidationReport,
    check_empirical_vs_analytic,
    check_enumeration,
    check_normalization,
    enumerate_joint,
)

__version__ = "0.1.0"
