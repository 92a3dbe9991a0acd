"""Structure-preserving SEIARD simulation and epidemic-linked actuarial valuation."""

__version__ = "0.1.0"

from .actuarial import (  # noqa: E402
    ActuarialParams,
    ReserveSeries,
    benefit_and_premium_apv,
    discounted_annuity,
    infinite_annuity,
    net_level_premium,
    optimal_premium,
    perpetuity_identity_residual,
    reserve_series,
)
from .errors import ConfigError, DomainError, ParameterError, StageError  # noqa: E402
from .hazards import (  # noqa: E402
    SeriesTable,
    cumulative_survival,
    empirical_force_of_infection,
    empirical_force_of_removal,
    force_of_mortality,
    hazard_table,
    mechanistic_force_of_infection,
)
from .integrator import (  # noqa: E402
    DenominatorSpec,
    GridSpec,
    Trajectory,
    denominator_phi,
    estimate_convergence_order,
    integrate_nsfd,
    integrate_reference,
    integrate_vital,
    nsfd_step,
)
from .model import (  # noqa: E402
    CompartmentState,
    ModelParams,
    StateDerivative,
    VitalParams,
    eval_rhs_absolute,
    eval_rhs_normalized,
    eval_rhs_vital,
    living_fraction,
    validate_params,
)
from .scenario import Scenario, parse_scenario, parse_scenario_text  # noqa: E402
