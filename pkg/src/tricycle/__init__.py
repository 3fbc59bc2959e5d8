"""Finite-time quantum tricycle: slow-driving heats, thermodynamic length and the
geometric bound on the cooling-rate / COP trade-off, with a master-equation oracle.
"""

from .exceptions import (
    ConsistencyError,
    DegenerateSpectrumError,
    DomainError,
    HermiticityError,
    InfeasibleError,
    IntegratorError,
    NonThermalStateError,
    QuadratureError,
    TricycleError,
)
from .optimizer import AllocationResult, constraint_residual, solve_fixed_cop, solve_tau_h
from .oracle import evolve_branch, perturbation_order_check, run_cycle
from .protocol import (
    BranchProtocol,
    CycleConfig,
    Orientation,
    Reservoir,
    build_cycle,
    close_parameters,
    validate_cycle,
)
from .thermo import (
    BranchThermo,
    CycleMetrics,
    QuadratureSpec,
    branch_thermo,
    cycle_metrics,
    engine_reduction_metrics,
    heat_pump_metrics,
)

__version__ = "0.1.0"
