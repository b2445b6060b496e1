"""Wave dynamics with a nonlinear penalty on the variance of a coordinate centroid."""

from .dynamics import IntegratorConfig, TrajectoryRecord, evolve, step_rk4, step_split
from .hamiltonians import (
    ExternalPoly,
    HamiltonianSpec,
    LinearCoupling,
    Nonlinear,
    NumericalError,
    PairShortRange,
    SpinGradient,
    double_well,
    effective_nl_potential,
    energy_floor,
    h_nl,
    h_qm,
    rhs,
    total_energy,
)
from .observables import ehrenfest_residual, moments, reduced_density
from .scenarios import (
    ScenarioConfig,
    correlation_model,
    double_well_run,
    estimate_w,
    paper_estimates,
    scaling_table,
    stern_gerlach_run,
)
from .wavefield import (
    Axis,
    GridSpec,
    PacketSpec,
    WaveField,
    cat_state,
    gaussian_packet,
    normalize,
    product_superposition_state,
)

__version__ = "0.1.0"
