"""Deterministic discrete-time cluster simulator.

Each tick recomputes VM demand, aggregates it per node, advances running
migrations and records one metrics row. On control-interval boundaries the
configured planner sees fresh snapshots; its migrations start on the next
tick.
"""

from __future__ import annotations

import csv
import math
import time as _time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .cluster import NodeSnapshot, VmSnapshot, vm_count_rank
from .controller import (
    ControllerConfig,
    MigrationDecision,
    Pipeline,
    mitigation_plan,
    rank_nodes,
)
from .fuzzy import TriangularFuzzyNumber
from .scenario import Resources, Scenario, SimConfig, demand_at


def transfer_seconds(size_gb: float, bandwidth_gbps: float) -> float:
    """Time to copy a memory footprint: GB * 8 bits / (Gbit/s)."""
    if bandwidth_gbps <= 0:
        raise ValueError("bandwidth must be positive")
    return size_gb * 8.0 / bandwidth_gbps


def unbalance_factor(node_scores: Sequence[float]) -> float:
    """Coefficient of variation (population std / mean); 0 when all scores are equal or zero."""
    if len(node_scores) == 0:
        raise ValueError("need at least one score")
    x = np.asarray(node_scores, dtype=float)
    top = x.max()
    # equal scores are exactly balanced; the float mean need not be exact
    if top <= 0 or top == x.min():
        return 0.0
    # the ratio is scale free, and dividing by the max keeps tiny scores from underflowing
    x = x / top
    return float(x.std() / x.mean())


def response_time_proxy(cpu_util: float, base_ms: float = 10.0, eps: float = 0.02) -> float:
    """Synthetic response time ``base_ms / max(eps, 1 - u)``."""
    if not (0.0 <= cpu_util <= 1.0):
        raise ValueError("cpu_util must lie in [0, 1]")
    return base_ms / max(eps, 1.0 - cpu_util)


@dataclass
class Migration:
    decision: MigrationDecision
    start: float | None = None
    end: float | None = None
    status: str = "pending"  # pending | in_flight | completed | aborted


@dataclass
class MetricsTrace:
    node_ids: tuple[str, ...]
    times: list[float] = field(default_factory=list)
    cpu: list[list[float]] = field(default_factory=list)
    ram: list[list[float]] = field(default_factory=list)
    net: list[list[float]] = field(default_factory=list)
    score: list[list[float]] = field(default_factory=list)
    response_ms: list[list[float]] = field(default_factory=list)
    unbalance: list[float] = field(default_factory=list)
    inflight: list[int] = field(default_factory=list)
    placement: list[dict[str, str]] = field(default_factory=list)

    def column(self, metric: str, node: str) -> np.ndarray:
        j = self.node_ids.index(node)
        return np.array([row[j] for row in getattr(self, metric)])

    def scores_of(self, node: str) -> np.ndarray:
        return self.column("score", node)

    def at(self, t: float) -> int:
        return int(np.searchsorted(np.asarray(self.times), t - 1e-9))

    def header(self) -> list[str]:
        cols = ["time_s"]
        for n in self.node_ids:
            cols += [f"{n}_cpu_util", f"{n}_ram_util", f"{n}_net_util", f"{n}_score", f"{n}_response_ms"]
        return cols + ["unbalance_factor", "inflight_migrations"]

    def rows(self):
        for k, t in enumerate(self.times):
            row = [_num(t)]
            for j in range(len(self.node_ids)):
                row += [
                    _num(self.cpu[k][j]),
                    _num(self.ram[k][j]),
                    _num(self.net[k][j]),
                    _num(self.score[k][j]),
                    _num(self.response_ms[k][j]),
                ]
            row += [_num(self.unbalance[k]), str(self.inflight[k])]
            yield row

    def write_csv(self, path: str | Path) -> None:
        _write_csv(path, self.header(), self.rows())


def _num(x: float) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return f"{x:.6f}"


def _write_csv(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


EVENT_HEADER = ["trigger_time_s", "vm", "source", "destination", "transferred_gb", "start_s", "end_s", "status"]


@dataclass
class SimResult:
    scenario: Scenario
    trace: MetricsTrace
    migrations: list[Migration]
    planner_ns: list[tuple[float, int]]

    @property
    def events(self) -> list[Migration]:
        return [m for m in self.migrations if m.status != "aborted"]

    @property
    def completed(self) -> list[Migration]:
        return [m for m in self.migrations if m.status == "completed"]

    def event_rows(self):
        for m in self.migrations:
            d = m.decision
            yield [
                _num(d.trigger_time),
                d.vm_id,
                d.source_node,
                d.destination_node,
                _num(d.transferred_gb),
                "" if m.start is None else _num(m.start),
                "" if m.end is None else _num(m.end),
                m.status,
            ]

    def write_events(self, path: str | Path) -> None:
        _write_csv(path, EVENT_HEADER, self.event_rows())

    def write_cycles(self, path: str | Path) -> None:
        _write_csv(path, ["time_s", "planner_ns"], ([_num(t), str(ns)] for t, ns in self.planner_ns))

    def residual_hotspots(self) -> list[str]:
        """Nodes above threshold at the final tick."""
        if not self.trace.times:
            return []
        last = self.trace.score[-1]
        thr = self.scenario.controller.threshold
        return [n for n, s in zip(self.trace.node_ids, last) if s > thr]

    def summary(self) -> dict:
        tr = self.trace
        thr = self.scenario.controller.threshold
        tick = self.scenario.sim.tick
        scores = np.array(tr.score) if tr.score else np.zeros((0, len(tr.node_ids)))
        hot_ticks = int((scores > thr).any(axis=1).sum()) if len(scores) else 0
        done = self.completed
        return {
            "scenario": self.scenario.name,
            "planner": "none" if self.scenario.sim.planner is None else self.scenario.sim.planner.value,
            "migrations": len(done),
            "total_gb_moved": round(sum(m.decision.transferred_gb for m in done), 6),
            "peak_unbalance_factor": round(max(tr.unbalance, default=0.0), 6),
            "mean_unbalance_factor": round(float(np.mean(tr.unbalance)) if tr.unbalance else 0.0, 6),
            "mean_response_ms": round(float(np.mean(tr.response_ms)) if tr.response_ms else 0.0, 6),
            "hotspot_dwell_s": round(hot_ticks * tick, 6),
            "peak_score": {
                n: round(float(scores[:, j].max()), 6) if len(scores) else 0.0
                for j, n in enumerate(tr.node_ids)
            },
            "residual_hotspots": self.residual_hotspots(),
        }


class Simulator:
    """Holds the mutable run state for one scenario."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.sim = scenario.sim
        self.nodes = {n.node_id: n for n in scenario.nodes}
        self.node_ids = tuple(n.node_id for n in scenario.nodes)
        self.vms = {v.vm_id: v for v in scenario.vms}
        self.placement = {v.vm_id: v.host_id for v in scenario.vms}
        # demand fractions refer to the VM's starting host
        self.home = {v.vm_id: self.nodes[v.host_id] for v in scenario.vms}
        self.migrations: list[Migration] = []
        self.planner_ns: list[tuple[float, int]] = []
        self.rng = np.random.default_rng(self.sim.seed)
        self.trace = MetricsTrace(self.node_ids)
        self.score_config = replace(
            scenario.controller,
            pipeline=self.sim.planner or scenario.controller.pipeline,
        )
        self.control_every = max(1, int(round(self.sim.control_interval / self.sim.tick)))

    # -- demand -------------------------------------------------------------

    def absolute_demand(self, vm_id: str, t: float) -> Resources:
        """Demand in GHz, GB and Mbit/s."""
        frac = demand_at(self.vms[vm_id].profile, t)
        if self.sim.noise > 0:
            jitter = 1.0 + self.sim.noise * self.rng.standard_normal(3)
            frac = Resources(*(max(0.0, x * k) for x, k in zip(frac.as_tuple(), jitter)))
        home = self.home[vm_id]
        return Resources(frac.cpu * home.cpu_clock, frac.ram * home.ram_capacity, frac.net * home.net_bw)

    def hosted(self, node_id: str) -> list[str]:
        return [v for v, h in self.placement.items() if h == node_id]

    def reserved(self, node_id: str) -> float:
        return sum(
            m.decision.transferred_gb
            for m in self.migrations
            if m.status == "in_flight" and m.decision.destination_node == node_id
        )

    def ram_free(self, node_id: str) -> float:
        used = sum(self.vms[v].ram_usage for v in self.hosted(node_id))
        return self.nodes[node_id].ram_capacity - used - self.reserved(node_id)

    def transfer_load(self, node_id: str) -> float:
        rate = self.sim.migration_bandwidth * 1000.0
        n = sum(
            1
            for m in self.migrations
            if m.status == "in_flight" and node_id in (m.decision.source_node, m.decision.destination_node)
        )
        return n * rate / self.nodes[node_id].net_bw

    def snapshots(self, t: float) -> tuple[list[NodeSnapshot], list[VmSnapshot]]:
        demand = {v: self.absolute_demand(v, t) for v in sorted(self.vms)}
        node_snaps = []
        vm_snaps = []
        for nid in self.node_ids:
            spec = self.nodes[nid]
            local = [v for v in self.vms if self.placement[v] == nid]
            cpu = sum(demand[v].cpu for v in local) / spec.cpu_clock
            ram = sum(demand[v].ram for v in local) / spec.ram_capacity
            net = sum(demand[v].net for v in local) / spec.net_bw + self.transfer_load(nid)
            cpu, ram, net = (min(1.0, x) for x in (cpu, ram, net))
            temp = spec.temp_idle + spec.temp_gain * cpu
            node_snaps.append(
                NodeSnapshot(
                    node_id=nid,
                    cpu_util=cpu,
                    ram_util=ram,
                    net_util=net,
                    vm_count=vm_count_rank(len(local), spec.vm_slots),
                    cpu_clock=spec.cpu_clock,
                    net_bw=spec.net_bw,
                    temperature=TriangularFuzzyNumber(
                        temp - spec.temp_spread, temp, temp + spec.temp_spread
                    ),
                    ram_capacity=spec.ram_capacity,
                    ram_free=max(0.0, self.ram_free(nid)),
                    vm_slots=spec.vm_slots,
                )
            )
            for v in local:
                d = demand[v]
                vm_snaps.append(
                    VmSnapshot(
                        vm_id=v,
                        host_id=nid,
                        cpu_util=min(1.0, d.cpu / spec.cpu_clock),
                        ram_util=min(1.0, d.ram / spec.ram_capacity),
                        net_util=min(1.0, d.net / spec.net_bw),
                        ram_usage=self.vms[v].ram_usage,
                        qos=self.vms[v].qos,
                    )
                )
        return node_snaps, vm_snaps

    # -- migrations ---------------------------------------------------------

    def apply_migration(self, migration: Migration, t: float) -> None:
        """Start ``migration`` at ``t``; a zero-size VM moves at once."""
        d = migration.decision
        if (
            d.destination_node not in self.nodes
            or self.placement.get(d.vm_id) != d.source_node
            or self.ram_free(d.destination_node) + 1e-12 < d.transferred_gb
        ):
            migration.status = "aborted"
            return
        migration.start = t
        migration.end = t + transfer_seconds(d.transferred_gb, self.sim.migration_bandwidth)
        migration.status = "in_flight"
        if migration.end <= t:
            self._complete(migration)

    def _complete(self, migration: Migration) -> None:
        self.placement[migration.decision.vm_id] = migration.decision.destination_node
        migration.status = "completed"

    def _advance(self, t: float) -> None:
        for m in self.migrations:
            if m.status == "pending" and m.start is not None and m.start <= t + 1e-9:
                self.apply_migration(m, t)
        for m in self.migrations:
            if m.status == "in_flight" and m.end <= t + 1e-9:
                self._complete(m)

    # -- loop ---------------------------------------------------------------

    def _record(self, t: float, nodes: list[NodeSnapshot]) -> None:
        ranking = rank_nodes(nodes, self.score_config)
        scores = [ranking.score(n.node_id) for n in nodes]
        sim = self.sim
        tr = self.trace
        tr.times.append(t)
        tr.cpu.append([n.cpu_util for n in nodes])
        tr.ram.append([n.ram_util for n in nodes])
        tr.net.append([n.net_util for n in nodes])
        tr.score.append(scores)
        tr.response_ms.append(
            [response_time_proxy(n.cpu_util, sim.response_base_ms, sim.response_eps) for n in nodes]
        )
        tr.unbalance.append(unbalance_factor(scores))
        tr.inflight.append(sum(1 for m in self.migrations if m.status == "in_flight"))
        tr.placement.append(dict(self.placement))

    def _control(self, t: float, nodes: list[NodeSnapshot], vms: list[VmSnapshot]) -> None:
        config: ControllerConfig = self.score_config
        active = [m for m in self.migrations if m.status in ("pending", "in_flight")]
        busy = {n for m in active for n in (m.decision.source_node, m.decision.destination_node)}
        pinned = {m.decision.vm_id for m in active}
        started = _time.perf_counter_ns()
        plan = mitigation_plan(nodes, vms, config, time=t, busy_nodes=busy, pinned_vms=pinned)
        self.planner_ns.append((t, _time.perf_counter_ns() - started))
        for d in plan.decisions:
            self.migrations.append(Migration(d, start=t + self.sim.tick))

    def step(self, k: int) -> None:
        """Advance to tick ``k`` (time ``k * tick``)."""
        t = k * self.sim.tick
        self._advance(t)
        nodes, vms = self.snapshots(t)
        self._record(t, nodes)
        if self.sim.planner is not None and k % self.control_every == 0:
            self._control(t, nodes, vms)

    def run(self) -> SimResult:
        n_ticks = int(math.floor(self.sim.duration / self.sim.tick + 1e-9))
        for k in range(n_ticks + 1):
            self.step(k)
        return SimResult(self.scenario, self.trace, self.migrations, self.planner_ns)


def run(scenario: Scenario, config: SimConfig | None = None) -> SimResult:
    if config is not None:
        scenario = replace(scenario, sim=config)
    return Simulator(scenario).run()
