from tfmlab.bounds.allocation import (
    ASYMPTOTIC_BOUND,
    AllocationBoundResult,
    allocation_bound_curve,
    minimize_allocation_bound,
)
from tfmlab.bounds.efficiency import (
    BoundParams,
    ContradictionReport,
    ThresholdResult,
    efficiency_witness_check,
    find_efficiency_threshold,
    two_bidder_lower,
    two_bidder_upper_extended,
    two_bidder_upper_general,
)
from tfmlab.bounds.lp import (
    LpInstance,
    LpSolution,
    build_lp,
    check_lp_assignment,
    export_mps,
    lp_assignment_from_mechanism,
    solve_lp,
)

__all__ = [
    "ASYMPTOTIC_BOUND",
    "AllocationBoundResult",
    "BoundParams",
    "ContradictionReport",
    "LpInstance",
    "LpSolution",
    "ThresholdResult",
    "allocation_bound_curve",
    "build_lp",
    "check_lp_assignment",
    "efficiency_witness_check",
    "export_mps",
    "find_efficiency_threshold",
    "lp_assignment_from_mechanism",
    "minimize_allocation_bound",
    "solve_lp",
    "two_bidder_lower",
    "two_bidder_upper_extended",
    "two_bidder_upper_general",
]
