"""chainscope: phase-plane chain census and long-time audits for u_t = u_xx + f(u)."""

__version__ = "0.1.0"

from .asymptotics import (
    OmegaEstimate,
    SpatialTrajectory,
    Tolerances,
    Verdict,
    connection_verdict,
    dist_to_chain,
    dist_to_loop,
    estimate_omega,
    far_field_limits,
    locate_component,
    morse_partition,
    quasiconvergence_verdict,
    spatial_trajectory,
)
from .nonlinearity import (
    Equilibrium,
    Nonlinearity,
    Potential,
    ScenarioClass,
    classify_scenario,
    extend_far_field,
    find_zeros,
    from_callable,
    from_polynomial,
    potential,
    preset,
)
from .pde import InitialData, Snapshot, SolverConfig, boundary_theta, residual, solve, step
from .phase_plane import (
    Annulus,
    Census,
    Chain,
    ChainOrder,
    Loop,
    PeriodicOrbit,
    annuli,
    build_census,
    edge_zeros,
    enumerate_chains,
    hamiltonian,
    membership,
    order_chains,
    periodic_orbit_through,
)
from .sturm import (
    DropLog,
    ZeroReport,
    audit_monotonicity,
    check_critical_finiteness,
    check_reflection_finiteness,
    default_lambdas,
    detect_multiple,
    reflect,
    zero_count,
)

__all__ = [name for name in dir() if not name.startswith("_")]
