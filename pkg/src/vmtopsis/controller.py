"""Two-level migration controller.

Level 1 ranks physical nodes and flags those whose score exceeds the
threshold. Level 2 ranks the VMs of the hottest node and picks the one to
move; the destination is the least-loaded node that can take it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .cluster import (
    NodeSnapshot,
    VmSnapshot,
    node_decision_matrix,
    node_volume,
    vm_count_rank,
    vm_decision_matrix,
    vm_volume,
    volume_score,
    vsr,
)
from .topsis import (
    DataKind,
    DecisionMatrix,
    RankingResult,
    rank_crisp,
    rank_fuzzy,
    stable_descending,
)


class Pipeline(enum.Enum):
    FUZZY = "fuzzy"
    CRISP = "crisp"
    SANDPIPER = "sandpiper"

    @classmethod
    def parse(cls, value: str | Pipeline) -> Pipeline:
        if isinstance(value, Pipeline):
            return value
        key = value.strip().lower()
        if key in ("sandpiperbaseline", "sandpiper_baseline", "baseline", "volume"):
            key = "sandpiper"
        return cls(key)


@dataclass(frozen=True)
class ControllerConfig:
    threshold: float = 75.0
    control_interval: float = 180.0
    pipeline: Pipeline = Pipeline.FUZZY
    node_criteria: tuple[str, ...] | None = None
    vm_criteria: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not (0 < self.threshold <= 100):
            raise ValueError(f"threshold must lie in (0, 100], got {self.threshold}")
        if not self.control_interval > 0:
            raise ValueError("control_interval must be positive")
        object.__setattr__(self, "pipeline", Pipeline.parse(self.pipeline))


@dataclass(frozen=True)
class MigrationDecision:
    vm_id: str
    source_node: str
    destination_node: str
    source_score_before: float
    trigger_time: float
    transferred_gb: float

    def __post_init__(self) -> None:
        if self.source_node == self.destination_node:
            raise ValueError("destination must differ from source")


@dataclass
class MitigationPlan:
    decisions: list[MigrationDecision] = field(default_factory=list)
    residual_hotspots: list[str] = field(default_factory=list)
    final_ranking: RankingResult | None = None
    nodes_after: list[NodeSnapshot] = field(default_factory=list)
    vms_after: list[VmSnapshot] = field(default_factory=list)

    @property
    def mitigated(self) -> bool:
        return not self.residual_hotspots

    def __len__(self) -> int:
        return len(self.decisions)

    def __iter__(self):
        return iter(self.decisions)


# -- level 1 ----------------------------------------------------------------


def _informative(matrix: DecisionMatrix) -> DecisionMatrix | None:
    """Drop crisp columns that are zero for every alternative.

    Such a column is constant, so it adds nothing to either separation, but
    it would make the normalization divide by zero.
    """
    zero = [
        c.name
        for j, c in enumerate(matrix.criteria)
        if c.data_kind is DataKind.CRISP and all(float(row[j]) == 0.0 for row in matrix.cells)
    ]
    if not zero:
        return matrix
    if len(zero) == len(matrix.criteria):
        return None
    return matrix.drop_criteria(zero)


def _rank_matrix(matrix: DecisionMatrix, pipeline: Pipeline) -> RankingResult:
    reduced = _informative(matrix)
    if reduced is None:
        m = len(matrix.alternatives)
        return RankingResult(matrix.alternatives, (0.5,) * m, matrix.alternatives, True)
    return rank_fuzzy(reduced) if pipeline is Pipeline.FUZZY else rank_crisp(reduced)


def _by_score(ids: Sequence[str], scores: Sequence[float]) -> RankingResult:
    scores = tuple(scores)
    degenerate = len(set(scores)) == 1
    return RankingResult(tuple(ids), scores, stable_descending(ids, scores), degenerate)


def rank_nodes(nodes: Sequence[NodeSnapshot], config: ControllerConfig) -> RankingResult:
    """Scores on the 0-100 scale, most loaded first.

    A cluster where every node is idle has no load to order and ranks
    degenerate at 50 regardless of hardware differences.
    """
    if not nodes:
        raise ValueError("node list is empty")
    if config.pipeline is Pipeline.SANDPIPER:
        return _by_score([n.node_id for n in nodes], [volume_score(node_volume(n)) for n in nodes])
    ids = tuple(n.node_id for n in nodes)
    if all(n.is_idle for n in nodes):
        return RankingResult(ids, (50.0,) * len(ids), ids, True)
    ranking = _rank_matrix(node_decision_matrix(nodes, config.node_criteria), config.pipeline)
    return ranking.rescaled(100.0)


def detect_hotspots(ranking: RankingResult, config: ControllerConfig) -> list[str]:
    return [a for a in ranking.order if ranking.score(a) > config.threshold]


# -- level 2 ----------------------------------------------------------------


def rank_vms(host: str, vms: Sequence[VmSnapshot], config: ControllerConfig) -> RankingResult:
    """Rank the VMs on ``host``, best migration candidate first.

    The baseline pipeline scores by volume-to-size ratio; a zero-size VM
    gets an infinite ratio.
    """
    local = [v for v in vms if v.host_id == host]
    if not local:
        raise ValueError(f"host {host!r} has no VMs")
    ids = [v.vm_id for v in local]
    if config.pipeline is Pipeline.SANDPIPER:
        ratios = [vsr(vm_volume(v), v.ram_usage) if v.ram_usage > 0 else math.inf for v in local]
        return RankingResult(tuple(ids), tuple(ratios), stable_descending(ids, ratios), False)
    return _rank_matrix(vm_decision_matrix(local, config.vm_criteria), config.pipeline)


def select_victim(host: str, vms: Sequence[VmSnapshot], config: ControllerConfig) -> str:
    return rank_vms(host, vms, config).top


# -- destination ------------------------------------------------------------


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def _vm_counts(nodes: Iterable[NodeSnapshot], vms: Iterable[VmSnapshot]) -> dict[str, int]:
    counts = {n.node_id: 0 for n in nodes}
    for v in vms:
        counts[v.host_id] = counts.get(v.host_id, 0) + 1
    return counts


def project_move(
    nodes: Sequence[NodeSnapshot],
    vm: VmSnapshot,
    destination: str,
    counts: dict[str, int] | None = None,
) -> tuple[list[NodeSnapshot], VmSnapshot]:
    """Node list and relocated VM after moving ``vm`` to ``destination``.

    Absolute demands are preserved: CPU scales by the clock ratio, RAM and
    network by the capacity ratios. VM-count ranks are recomputed only
    when ``counts`` (VMs per node before the move) is given.
    """
    by_id = {n.node_id: n for n in nodes}
    src, dst = by_id[vm.host_id], by_id[destination]
    cpu_ghz = vm.cpu_util * src.cpu_clock
    ram_gb = vm.ram_util * src.ram_capacity
    net_mbps = vm.net_util * src.net_bw
    moved = replace(
        vm,
        host_id=destination,
        cpu_util=_clamp(cpu_ghz / dst.cpu_clock),
        ram_util=_clamp(ram_gb / dst.ram_capacity),
        net_util=_clamp(net_mbps / dst.net_bw),
    )
    new_src = replace(
        src,
        cpu_util=_clamp(src.cpu_util - vm.cpu_util),
        ram_util=_clamp(src.ram_util - vm.ram_util),
        net_util=_clamp(src.net_util - vm.net_util),
        ram_free=min(src.ram_capacity, src.ram_free + vm.ram_usage),
    )
    new_dst = replace(
        dst,
        cpu_util=_clamp(dst.cpu_util + cpu_ghz / dst.cpu_clock),
        ram_util=_clamp(dst.ram_util + ram_gb / dst.ram_capacity),
        net_util=_clamp(dst.net_util + net_mbps / dst.net_bw),
        ram_free=max(0.0, dst.ram_free - vm.ram_usage),
    )
    if counts is not None:
        new_src = replace(new_src, vm_count=vm_count_rank(max(counts[src.node_id] - 1, 0), src.vm_slots))
        new_dst = replace(new_dst, vm_count=vm_count_rank(counts[dst.node_id] + 1, dst.vm_slots))
    by_id[src.node_id] = new_src
    by_id[dst.node_id] = new_dst
    return [by_id[n.node_id] for n in nodes], moved


def projected_score(
    nodes: Sequence[NodeSnapshot],
    vm: VmSnapshot,
    destination: str,
    config: ControllerConfig,
    counts: dict[str, int] | None = None,
) -> float:
    after, _ = project_move(nodes, vm, destination, counts)
    if config.pipeline is Pipeline.SANDPIPER:
        dst = next(n for n in after if n.node_id == destination)
        return volume_score(node_volume(dst))
    # ideals depend on every alternative, so re-rank the whole cluster
    return rank_nodes(after, config).score(destination)


def select_destination(
    ranking: RankingResult,
    vm: VmSnapshot,
    nodes: Sequence[NodeSnapshot],
    config: ControllerConfig,
    vms: Sequence[VmSnapshot] | None = None,
    exclude: Iterable[str] = (),
) -> str | None:
    """Least-loaded node with room for ``vm`` whose projected score stays
    at or below the threshold; ``None`` when nothing fits."""
    by_id = {n.node_id: n for n in nodes}
    skip = set(exclude) | {vm.host_id}
    counts = _vm_counts(nodes, vms) if vms is not None else None
    for candidate in reversed(ranking.order):
        if candidate in skip or candidate not in by_id:
            continue
        if by_id[candidate].ram_free + 1e-12 < vm.ram_usage:
            continue
        if projected_score(nodes, vm, candidate, config, counts) <= config.threshold:
            return candidate
    return None


# -- planning ---------------------------------------------------------------


def mitigation_plan(
    nodes: Sequence[NodeSnapshot],
    vms: Sequence[VmSnapshot],
    config: ControllerConfig,
    time: float = 0.0,
    busy_nodes: Iterable[str] = (),
    pinned_vms: Iterable[str] = (),
) -> MitigationPlan:
    """Plan migrations until no hotspot remains or nothing more can move.

    Each node takes part in at most one migration per call, and nodes in
    ``busy_nodes`` (for instance with a transfer already running) in none.
    VMs in ``pinned_vms`` are never chosen. The number of iterations is
    bounded by the VM count.
    """
    node_ids = {n.node_id for n in nodes}
    for v in vms:
        if v.host_id not in node_ids:
            raise ValueError(f"VM {v.vm_id!r} is on unknown host {v.host_id!r}")

    work_nodes = list(nodes)
    work_vms = list(vms)
    busy = set(busy_nodes)
    pinned = set(pinned_vms)
    plan = MitigationPlan()

    for _ in range(len(work_vms)):
        ranking = rank_nodes(work_nodes, config)
        hot = [h for h in detect_hotspots(ranking, config) if h not in busy]
        move = None
        for src in hot:
            movable = [v for v in work_vms if v.host_id == src and v.vm_id not in pinned]
            if not movable:
                continue
            by_vm = {v.vm_id: v for v in movable}
            for vm_id in rank_vms(src, movable, config).order:
                vm = by_vm[vm_id]
                dest = select_destination(ranking, vm, work_nodes, config, work_vms, exclude=busy)
                if dest is not None:
                    move = (vm, src, dest)
                    break
            if move:
                break
        if move is None:
            break
        vm, src, dest = move
        plan.decisions.append(
            MigrationDecision(
                vm_id=vm.vm_id,
                source_node=src,
                destination_node=dest,
                source_score_before=ranking.score(src),
                trigger_time=time,
                transferred_gb=vm.ram_usage,
            )
        )
        counts = _vm_counts(work_nodes, work_vms)
        work_nodes, moved = project_move(work_nodes, vm, dest, counts)
        work_vms = [moved if v.vm_id == vm.vm_id else v for v in work_vms]
        busy |= {src, dest}

    plan.final_ranking = rank_nodes(work_nodes, config)
    plan.residual_hotspots = detect_hotspots(plan.final_ranking, config)
    plan.nodes_after = work_nodes
    plan.vms_after = work_vms
    return plan


def sandpiper_plan(
    nodes: Sequence[NodeSnapshot],
    vms: Sequence[VmSnapshot],
    config: ControllerConfig,
    **kwargs,
) -> MitigationPlan:
    """Volume baseline: nodes by volume, victims by volume-to-size ratio,
    destination the lowest-volume node that fits."""
    return mitigation_plan(nodes, vms, replace(config, pipeline=Pipeline.SANDPIPER), **kwargs)


@dataclass
class TwoLevelDecision:
    node_ranking: RankingResult
    hotspots: list[str]
    host: str | None
    vm_ranking: RankingResult | None
    victim: str | None
    destination: str | None


def two_level_decision(
    nodes: Sequence[NodeSnapshot],
    vms: Sequence[VmSnapshot],
    config: ControllerConfig,
    force: bool = False,
) -> TwoLevelDecision:
    """One pass of both levels for the hottest node.

    Without ``force`` level 2 only runs when a hotspot exists; with it the
    top-ranked node is treated as the source regardless of threshold.
    """
    ranking = rank_nodes(nodes, config)
    hot = detect_hotspots(ranking, config)
    host = hot[0] if hot else (ranking.top if force else None)
    if host is None or not any(v.host_id == host for v in vms):
        return TwoLevelDecision(ranking, hot, host, None, None, None)
    vm_ranking = rank_vms(host, vms, config)
    victim = vm_ranking.top
    vm = next(v for v in vms if v.vm_id == victim)
    dest = select_destination(ranking, vm, nodes, config, vms)
    return TwoLevelDecision(ranking, hot, host, vm_ranking, victim, dest)
