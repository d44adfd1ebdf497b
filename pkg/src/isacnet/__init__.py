"""Stochastic-geometry analysis of cooperative sensing-and-communication cellular networks.

Submodules
----------
numerics    quadrature rules and special functions
network     configuration, allocations and distance laws
comm        average user rate and communication ASE
sensing     average radar information rate and sensing ASE
montecarlo  spatial simulation of the same quantities
region      tradeoff frontier, corners and weighted-sum optimisation
configio    config files, output tables and run manifests
cli         command-line entry point
"""

from .comm import CommRateResult, comm_ase, rc_approx, rc_exact
from .errors import (ConfigError, ConvergenceError, DegenerateLaw, DegenerateRealization, DomainError,
                     InfeasibleAllocation, IsacError, ParseError, RankDeficiency, ValidationError)
from .montecarlo import McEstimate, mc_comm_rate, mc_sense_rate
from .network import DEFAULTS, Allocation, NetworkConfig, validate_allocation
from .numerics import NESTED_TOL, SINGLE_TOL, SPECIAL_TOL, QuadSpec
from .region import (RegionBoundary, RegionPoint, boundary_sweep, comm_corner, optimal_user_load,
                     sense_corner, solve_p1, time_share_bound)
from .sensing import SenseRateResult, rs_cluster, rs_q1, sense_ase

__version__ = "0.1.0"

__all__ = [
    "Allocation", "NetworkConfig", "DEFAULTS", "validate_allocation",
    "QuadSpec", "SPECIAL_TOL", "SINGLE_TOL", "NESTED_TOL",
    "CommRateResult", "rc_exact", "rc_approx", "comm_ase",
    "SenseRateResult", "rs_q1", "rs_cluster", "sense_ase",
    "McEstimate", "mc_comm_rate", "mc_sense_rate",
    "RegionPoint", "RegionBoundary", "optimal_user_load", "comm_corner", "sense_corner",
    "boundary_sweep", "time_share_bound", "solve_p1",
    "IsacError", "DomainError", "DegenerateLaw", "ConvergenceError", "InfeasibleAllocation",
    "DegenerateRealization", "RankDeficiency", "ConfigError", "ParseError", "ValidationError",
]
