"""Timing of one full two-level decision over synthetic clusters."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cluster import NodeSnapshot, VmSnapshot, vm_count_rank
from .controller import ControllerConfig, TwoLevelDecision, two_level_decision
from .fuzzy import LinguisticRank, TriangularFuzzyNumber

CLOCKS_GHZ = (2.0, 2.4, 2.6, 3.0, 3.4)
NIC_MBPS = (1000.0, 10000.0)
RAM_GB = (16.0, 32.0, 64.0)


def random_cluster(
    n_nodes: int, n_vms_per_node: int, seed: int = 0
) -> tuple[list[NodeSnapshot], list[VmSnapshot]]:
    """Heterogeneous random snapshot with ``n_vms_per_node`` VMs on every node."""
    if n_nodes < 1 or n_vms_per_node < 1:
        raise ValueError("need at least one node and one VM per node")
    rng = np.random.default_rng(seed)
    nodes, vms = [], []
    for i in range(n_nodes):
        node_id = f"N{i:04d}"
        cap = float(rng.choice(RAM_GB))
        shares = rng.dirichlet(np.ones(n_vms_per_node))
        cpu, ram, net = rng.uniform(0.05, 0.95, size=3)
        sizes = np.maximum(0.125, shares * cap * rng.uniform(0.3, 0.8))
        temp = 35.0 + 40.0 * cpu
        nodes.append(
            NodeSnapshot(
                node_id=node_id,
                cpu_util=float(cpu),
                ram_util=float(ram),
                net_util=float(net),
                vm_count=vm_count_rank(n_vms_per_node, max(8, n_vms_per_node)),
                cpu_clock=float(rng.choice(CLOCKS_GHZ)),
                net_bw=float(rng.choice(NIC_MBPS)),
                temperature=TriangularFuzzyNumber(temp - 5.0, temp, temp + 5.0),
                ram_capacity=cap,
                ram_free=max(0.0, cap - float(sizes.sum())),
                vm_slots=max(8, n_vms_per_node),
            )
        )
        for j in range(n_vms_per_node):
            vms.append(
                VmSnapshot(
                    vm_id=f"{node_id}-V{j:03d}",
                    host_id=node_id,
                    cpu_util=float(cpu * shares[j]),
                    ram_util=float(ram * shares[j]),
                    net_util=float(net * shares[j]),
                    ram_usage=float(sizes[j]),
                    qos=LinguisticRank(int(rng.integers(0, 7))),
                )
            )
    return nodes, vms


@dataclass(frozen=True)
class TimingRow:
    n_nodes: int
    n_vms: int
    repetitions: int
    median_ms: float
    min_ms: float
    victim: str | None
    destination: str | None


def planner_timing(
    n_nodes: int,
    n_vms_per_node: int,
    repetitions: int = 5,
    seed: int = 0,
    config: ControllerConfig | None = None,
) -> TimingRow:
    """Median wall clock of :func:`two_level_decision` on one random cluster.

    Level 2 is forced on the top node so every repetition does both levels.
    """
    if repetitions < 3:
        raise ValueError("repetitions must be at least 3")
    config = config or ControllerConfig()
    nodes, vms = random_cluster(n_nodes, n_vms_per_node, seed)
    samples = []
    decision: TwoLevelDecision | None = None
    for _ in range(repetitions):
        t0 = time.perf_counter_ns()
        decision = two_level_decision(nodes, vms, config, force=True)
        samples.append(time.perf_counter_ns() - t0)
    ms = [s / 1e6 for s in samples]
    return TimingRow(
        n_nodes=n_nodes,
        n_vms=n_nodes * n_vms_per_node,
        repetitions=repetitions,
        median_ms=statistics.median(ms),
        min_ms=min(ms),
        victim=decision.victim,
        destination=decision.destination,
    )


def parse_grid(text: str) -> list[int]:
    """``"10,100,1000"`` to a strictly increasing list of VM totals."""
    try:
        grid = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"bad size grid {text!r}") from None
    if not grid or any(g < 1 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"size grid must be increasing positive integers, got {text!r}")
    return grid


def split_size(n_vms: int, n_nodes: int, per_node: int = 20) -> tuple[int, int]:
    """Nodes and VMs per node for about ``n_vms`` in total.

    Small sizes pack ``per_node`` VMs on fewer nodes; once ``n_nodes`` is
    reached the per-node count grows instead. Totals not divisible by the
    node count round up.
    """
    nodes = max(1, min(n_nodes, n_vms // per_node))
    return nodes, -(-n_vms // nodes)


def sweep(
    sizes: Iterable[int], n_nodes: int = 50, repetitions: int = 5, seed: int = 0
) -> list[TimingRow]:
    return [planner_timing(*split_size(n, n_nodes), repetitions=repetitions, seed=seed) for n in sizes]


TIMING_HEADER = ["n_nodes", "n_vms", "repetitions", "median_ms", "min_ms"]


def timing_rows(rows: Sequence[TimingRow]) -> list[list[str]]:
    return [
        [str(r.n_nodes), str(r.n_vms), str(r.repetitions), f"{r.median_ms:.4f}", f"{r.min_ms:.4f}"]
        for r in rows
    ]
