"""Scenario files: hardware, VM workload profiles, controller and run settings."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .cluster import DEFAULT_VM_SLOTS, footprint_gb, parse_rank
from .controller import ControllerConfig, Pipeline
from .fuzzy import LinguisticRank
from .schema import ValidationError, get_number, get_str, get_table_list, load_toml

DEFAULT_PEAK_WIDTH = 120.0


@dataclass(frozen=True)
class Resources:
    cpu: float = 0.0
    ram: float = 0.0
    net: float = 0.0

    def __add__(self, other: Resources) -> Resources:
        return Resources(self.cpu + other.cpu, self.ram + other.ram, self.net + other.net)

    def scaled(self, k: float) -> Resources:
        return Resources(self.cpu * k, self.ram * k, self.net * k)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.cpu, self.ram, self.net)


@dataclass(frozen=True)
class WorkloadProfile:
    """Demand as fractions of the VM's home node: a constant baseline plus
    an optional triangular bump centred on ``peak_time``."""

    baseline: Resources = Resources()
    peak_time: float | None = None
    peak_magnitude: Resources = Resources()
    peak_width: float = DEFAULT_PEAK_WIDTH

    def __post_init__(self) -> None:
        for name, v in zip(("cpu", "ram", "net"), (self.baseline + self.peak_magnitude).as_tuple()):
            if v > 1.5:
                raise ValueError(f"baseline + peak {name} demand {v} exceeds 1.5")
        if min(self.baseline.as_tuple() + self.peak_magnitude.as_tuple()) < 0:
            raise ValueError("demands must be nonnegative")
        if self.peak_time is not None and not self.peak_width > 0:
            raise ValueError("peak_width must be positive")


def demand_at(profile: WorkloadProfile, t: float) -> Resources:
    if t < 0:
        raise ValueError("time must be nonnegative")
    if profile.peak_time is None:
        return profile.baseline
    half = profile.peak_width / 2.0
    lift = max(0.0, 1.0 - abs(t - profile.peak_time) / half)
    if lift == 0.0:
        return profile.baseline
    return profile.baseline + profile.peak_magnitude.scaled(lift)


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    cpu_clock: float  # GHz
    ram_capacity: float  # GB
    net_bw: float  # Mbit/s
    vm_slots: int = DEFAULT_VM_SLOTS
    temp_idle: float = 40.0  # 0-100 axis
    temp_gain: float = 40.0  # added at full CPU
    temp_spread: float = 5.0


@dataclass(frozen=True)
class VmSpec:
    vm_id: str
    host_id: str
    ram_usage: float  # GB
    profile: WorkloadProfile
    qos: LinguisticRank = LinguisticRank.MEDIUM


@dataclass(frozen=True)
class SimConfig:
    tick: float = 1.0
    duration: float = 600.0
    control_interval: float = 180.0
    migration_bandwidth: float = 1.0  # Gbit/s
    seed: int = 0
    planner: Pipeline | None = Pipeline.FUZZY
    noise: float = 0.0  # relative std of per-tick demand jitter
    response_base_ms: float = 10.0
    response_eps: float = 0.02

    def __post_init__(self) -> None:
        if not self.tick > 0:
            raise ValueError("tick must be positive")
        if self.duration < 0:
            raise ValueError("duration must be nonnegative")
        if not self.control_interval > 0 or self.tick > self.control_interval:
            raise ValueError("control_interval must be positive and at least one tick")
        if not self.migration_bandwidth > 0:
            raise ValueError("migration_bandwidth must be positive")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")
        if not (self.response_base_ms > 0 and 0 < self.response_eps <= 1):
            raise ValueError("response proxy parameters out of range")
        if self.planner is not None:
            object.__setattr__(self, "planner", Pipeline.parse(self.planner))


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[NodeSpec, ...]
    vms: tuple[VmSpec, ...]
    controller: ControllerConfig = ControllerConfig()
    sim: SimConfig = SimConfig()
    name: str = "scenario"

    def __post_init__(self) -> None:
        ids = [n.node_id for n in self.nodes]
        if not ids:
            raise ValidationError("node", "at least one node is required")
        if len(set(ids)) != len(ids):
            raise ValidationError("node", "duplicate node ids")
        vm_ids = [v.vm_id for v in self.vms]
        if len(set(vm_ids)) != len(vm_ids):
            raise ValidationError("vm", "duplicate VM ids")
        by_id = {n.node_id: n for n in self.nodes}
        used = {i: 0.0 for i in ids}
        for k, v in enumerate(self.vms):
            if v.host_id not in by_id:
                raise ValidationError(f"vm[{k}].host", f"unknown host {v.host_id!r}")
            used[v.host_id] += v.ram_usage
        for k, n in enumerate(self.nodes):
            if used[n.node_id] > n.ram_capacity + 1e-9:
                raise ValidationError(
                    f"node[{k}].ram_capacity_gb",
                    f"VM footprints {used[n.node_id]:.3f} GB exceed capacity {n.ram_capacity} GB",
                )

    def with_overrides(
        self,
        threshold: float | None = None,
        interval: float | None = None,
        planner: Pipeline | None | str = "",
        seed: int | None = None,
        duration: float | None = None,
    ) -> Scenario:
        """Copy with CLI-style overrides; ``planner=""`` leaves it unchanged,
        ``planner=None`` disables balancing."""
        ctrl, sim = self.controller, self.sim
        if threshold is not None:
            ctrl = replace(ctrl, threshold=threshold)
        if interval is not None:
            ctrl = replace(ctrl, control_interval=interval)
            sim = replace(sim, control_interval=interval)
        if planner != "":
            sim = replace(sim, planner=None if planner is None else Pipeline.parse(planner))
            if planner is not None:
                ctrl = replace(ctrl, pipeline=Pipeline.parse(planner))
        if seed is not None:
            sim = replace(sim, seed=seed)
        if duration is not None:
            sim = replace(sim, duration=duration)
        return replace(self, controller=ctrl, sim=sim)


def _resources(raw: Any, path: str) -> Resources:
    if raw is None:
        return Resources()
    if not isinstance(raw, dict):
        raise ValidationError(path, "expected a table with cpu/ram/net")
    unknown = set(raw) - {"cpu", "ram", "net"}
    if unknown:
        raise ValidationError(path, f"unknown keys {sorted(unknown)}")
    return Resources(
        get_number(raw, "cpu", path, default=0.0, lo=0, hi=1.5),
        get_number(raw, "ram", path, default=0.0, lo=0, hi=1.5),
        get_number(raw, "net", path, default=0.0, lo=0, hi=1.5),
    )


def parse_planner(value: Any, path: str) -> Pipeline | None:
    if isinstance(value, str) and value.strip().lower() == "none":
        return None
    try:
        return Pipeline.parse(value)
    except (ValueError, AttributeError):
        raise ValidationError(path, f"unknown planner {value!r}") from None


def scenario_from_dict(doc: Mapping[str, Any], name: str = "scenario") -> Scenario:
    nodes = []
    for i, raw in enumerate(get_table_list(doc, "node")):
        path = f"node[{i}]"
        spread = get_number(raw, "temp_spread", path, default=5.0, lo=0)
        idle = get_number(raw, "temp_idle", path, default=40.0, lo=0, hi=100)
        gain = get_number(raw, "temp_gain", path, default=40.0, lo=0, hi=100)
        if idle < spread:
            raise ValidationError(f"{path}.temp_idle", "must be at least temp_spread")
        nodes.append(
            NodeSpec(
                node_id=get_str(raw, "id", path),
                cpu_clock=get_number(raw, "cpu_clock_ghz", path, lo=0, lo_open=True),
                ram_capacity=get_number(raw, "ram_capacity_gb", path, lo=0, lo_open=True),
                net_bw=get_number(raw, "net_bw_mbps", path, lo=0, lo_open=True),
                vm_slots=int(get_number(raw, "vm_slots", path, default=DEFAULT_VM_SLOTS, lo=1)),
                temp_idle=idle,
                temp_gain=gain,
                temp_spread=spread,
            )
        )

    vms = []
    for i, raw in enumerate(get_table_list(doc, "vm")):
        path = f"vm[{i}]"
        peak_time = raw.get("peak_time_s")
        if peak_time is not None:
            peak_time = get_number(raw, "peak_time_s", path, lo=0)
        try:
            profile = WorkloadProfile(
                baseline=_resources(raw.get("baseline"), f"{path}.baseline"),
                peak_time=peak_time,
                peak_magnitude=_resources(raw.get("peak"), f"{path}.peak"),
                peak_width=get_number(raw, "peak_width_s", path, default=DEFAULT_PEAK_WIDTH, lo=0, lo_open=True),
            )
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(path, str(exc)) from None
        vms.append(
            VmSpec(
                vm_id=get_str(raw, "id", path),
                host_id=get_str(raw, "host", path),
                ram_usage=footprint_gb(raw, path),
                profile=profile,
                qos=parse_rank(raw.get("qos", "M"), f"{path}.qos"),
            )
        )

    ctrl_raw = doc.get("controller", {})
    sim_raw = doc.get("sim", {})
    if not isinstance(ctrl_raw, dict):
        raise ValidationError("controller", "expected a table")
    if not isinstance(sim_raw, dict):
        raise ValidationError("sim", "expected a table")

    planner = parse_planner(ctrl_raw.get("planner", "fuzzy"), "controller.planner")
    try:
        interval = get_number(ctrl_raw, "interval_s", "controller", default=180.0, lo=0, lo_open=True)
        controller = ControllerConfig(
            threshold=get_number(ctrl_raw, "threshold", "controller", default=75.0, lo=0, lo_open=True, hi=100),
            control_interval=interval,
            pipeline=planner or Pipeline.FUZZY,
        )
        sim = SimConfig(
            tick=get_number(sim_raw, "tick_s", "sim", default=1.0, lo=0, lo_open=True),
            duration=get_number(sim_raw, "duration_s", "sim", default=600.0, lo=0),
            control_interval=interval,
            migration_bandwidth=get_number(sim_raw, "migration_bandwidth_gbps", "sim", default=1.0, lo=0, lo_open=True),
            seed=int(get_number(sim_raw, "seed", "sim", default=0, lo=0)),
            planner=planner,
            noise=get_number(sim_raw, "noise", "sim", default=0.0, lo=0),
            response_base_ms=get_number(sim_raw, "response_base_ms", "sim", default=10.0, lo=0, lo_open=True),
            response_eps=get_number(sim_raw, "response_eps", "sim", default=0.02, lo=0, lo_open=True, hi=1),
        )
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("sim", str(exc)) from None
    return Scenario(tuple(nodes), tuple(vms), controller, sim, name=str(doc.get("name", name)))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return scenario_from_dict(load_toml(path), name=path.stem)
