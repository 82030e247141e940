"""End-to-end homology-based boundary detection."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..complexes import RipsComplex, build_rips
from ..geometry import Deployment
from .cycles import BoundaryCycle, coarse_cycle_stage, edge_walks, minimize_cycles
from .network import Network, exchange_neighborhoods
from .stages import BOUNDARY_VARIANTS, boundary_edge_stage, edge_deletion_stage, vertex_deletion_stage

STAGES = ("exchange", "vertex_deletion", "edge_deletion", "boundary", "coarse_cycles", "minimize")


@dataclass
class DetectionReport:
    cycles: list[BoundaryCycle]
    rounds: dict[str, int]
    messages: dict[str, int]
    residual: RipsComplex
    betti1_initial: int = 0
    betti1_by_stage: dict[str, int] = field(default_factory=dict)
    coarse_failures: int = 0

    def cycle_lists(self) -> list[list[int]]:
        return [list(c.nodes) for c in self.cycles]

    def to_dict(self) -> dict:
        return {
            "cycles": self.cycle_lists(),
            "rounds": {k: self.rounds.get(k, 0) for k in STAGES},
            "messages": {k: self.messages.get(k, 0) for k in STAGES},
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def run_hba(
    deployment: Deployment, rips: RipsComplex | None = None, check: str = "stage", variant: str = "templates"
) -> DetectionReport:
    """Run all stages.

    ``check`` is "stage" (betti1 after each stage), "step" (after every
    deletion) or "off". ``variant`` picks the boundary and cycle rules:
    "templates" deletes edges by the crossing rules and walks claimed
    boundary components from min-id initiators; "fan" marks one-sided edges
    without deleting, walks from every boundary edge and keeps a shortest
    independent set of cycles.
    """
    if variant not in BOUNDARY_VARIANTS:
        raise ValueError(f"unknown detector variant {variant!r}")
    net = Network(deployment, rips or build_rips(deployment), check=check)
    exchange_neighborhoods(net)
    by_stage: dict[str, int] = {}

    def record(stage: str) -> None:
        if check != "off":
            by_stage[stage] = net.betti1()

    vertex_deletion_stage(net)
    record("vertex_deletion")
    edge_deletion_stage(net)
    record("edge_deletion")
    boundary_edge_stage(net, variant)
    record("boundary")
    fan = variant == "fan"
    search = edge_walks(net) if fan else coarse_cycle_stage(net)
    cycles = minimize_cycles(net, search.cycles, independent=True)
    return DetectionReport(
        cycles=cycles,
        rounds=dict(net.rounds),
        messages=dict(net.messages),
        residual=net.residual(),
        betti1_initial=net.initial_betti1,
        betti1_by_stage=by_stage,
        coarse_failures=search.failures,
    )
