"""Branch-and-bound engine: instance model, node propagation and search."""

from .model import BallContainment, Instance, SphereMembership, VariableLink, mindc_arrays
from .propagate import (
    PropagationContext,
    PropStatus,
    propagate_ball_containment,
    propagate_linear_cut,
    propagate_node,
    propagate_sphere_membership,
)
from .search import (
    SETTING_NAMES,
    Repairer,
    SearchNode,
    Settings,
    SolveResult,
    Status,
    branch,
    incumbent_try,
    relative_gap,
    solve,
)

__all__ = [
    "BallContainment",
    "Instance",
    "PropStatus",
    "PropagationContext",
    "Repairer",
    "SETTING_NAMES",
    "SearchNode",
    "Settings",
    "SolveResult",
    "SphereMembership",
    "Status",
    "VariableLink",
    "branch",
    "incumbent_try",
    "mindc_arrays",
    "propagate_ball_containment",
    "propagate_linear_cut",
    "propagate_node",
    "propagate_sphere_membership",
    "relative_gap",
    "solve",
]
