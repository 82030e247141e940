"""Distributed homology-based boundary detection on a simulated network."""

from .cycles import BoundaryCycle, coarse_cycle_stage, edge_walks, minimize_cycles
from .hba import DetectionReport, run_hba
from .local import compute_weight, has_hamilton_cycle, hp_deletable_edge, hp_deletable_vertex
from .network import HomologyViolation, Network, NodeView, PreconditionError, exchange_neighborhoods
from .stages import BOUNDARY_VARIANTS, boundary_edge_stage, edge_deletion_stage, vertex_deletion_stage

__all__ = [
    "BOUNDARY_VARIANTS",
    "BoundaryCycle",
    "DetectionReport",
    "HomologyViolation",
    "Network",
    "NodeView",
    "PreconditionError",
    "boundary_edge_stage",
    "coarse_cycle_stage",
    "compute_weight",
    "edge_deletion_stage",
    "edge_walks",
    "exchange_neighborhoods",
    "has_hamilton_cycle",
    "hp_deletable_edge",
    "hp_deletable_vertex",
    "minimize_cycles",
    "run_hba",
    "vertex_deletion_stage",
]
