"""Node and VM telemetry records, the two decision matrices, and the
volume / volume-to-size baseline metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .fuzzy import LinguisticRank, TriangularFuzzyNumber
from .schema import (
    ValidationError,
    get_number,
    get_str,
    get_table_list,
    load_toml,
)
from .topsis import Criterion, DataKind, DecisionMatrix, Direction

B, C = Direction.BENEFIT, Direction.COST
VL, L, ML, M, MH, H, VH = LinguisticRank

NODE_CRITERIA: tuple[Criterion, ...] = (
    Criterion("CPU%", B, VH, DataKind.CRISP),
    Criterion("RAM%", B, ML, DataKind.CRISP),
    Criterion("NET%", B, ML, DataKind.CRISP),
    Criterion("#VM", B, L, DataKind.LINGUISTIC),
    Criterion("CPU cycle", C, VH, DataKind.CRISP),
    Criterion("NET BW", C, ML, DataKind.CRISP),
    Criterion("TMP", B, M, DataKind.FUZZY),
    Criterion("RAM capacity", C, ML, DataKind.CRISP),
)

VM_CRITERIA: tuple[Criterion, ...] = (
    Criterion("CPU%", B, VH, DataKind.CRISP),
    Criterion("RAM%", B, ML, DataKind.CRISP),
    Criterion("NET%", B, ML, DataKind.CRISP),
    Criterion("RAM usage", C, H, DataKind.CRISP),
    Criterion("QoS", B, H, DataKind.LINGUISTIC),
)

MIN_FOOTPRINT_GB = 1.0 / 1024.0
DEFAULT_VM_SLOTS = 8


class SaturationError(ValueError):
    """A resource at 100% utilization has unbounded volume."""


def _check_fraction(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def vm_count_rank(count: int, slots: int = DEFAULT_VM_SLOTS) -> LinguisticRank:
    """Quantize ``count / slots`` onto the seven linguistic levels.

    ``slots`` is the number of VMs the host is sized for, so the same count
    reads higher on a weaker node.
    """
    if slots <= 0:
        raise ValueError("slots must be positive")
    if count < 0:
        raise ValueError("count must be nonnegative")
    ratio = min(count / slots, 1.0)
    return LinguisticRank(min(6, int(6 * ratio + 0.5)))


@dataclass(frozen=True)
class NodeSnapshot:
    node_id: str
    cpu_util: float
    ram_util: float
    net_util: float
    vm_count: LinguisticRank
    cpu_clock: float  # GHz
    net_bw: float  # Mbit/s
    temperature: TriangularFuzzyNumber  # 0-100 axis
    ram_capacity: float  # GB
    ram_free: float  # GB
    vm_slots: int = DEFAULT_VM_SLOTS

    def __post_init__(self) -> None:
        for name in ("cpu_util", "ram_util", "net_util"):
            _check_fraction(f"{self.node_id}.{name}", getattr(self, name))
        for name in ("cpu_clock", "net_bw", "ram_capacity"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{self.node_id}.{name} must be positive")
        if self.ram_free < 0 or self.ram_free > self.ram_capacity + 1e-9:
            raise ValueError(f"{self.node_id}.ram_free must lie in [0, ram_capacity]")
        if self.temperature.a < 0:
            raise ValueError(f"{self.node_id}.temperature must be nonnegative")
        object.__setattr__(self, "vm_count", LinguisticRank(self.vm_count))

    @property
    def is_idle(self) -> bool:
        return self.cpu_util == 0 and self.ram_util == 0 and self.net_util == 0


@dataclass(frozen=True)
class VmSnapshot:
    vm_id: str
    host_id: str
    cpu_util: float  # share of host CPU
    ram_util: float  # share of host RAM
    net_util: float  # share of host NIC
    ram_usage: float  # memory footprint, GB
    qos: LinguisticRank = LinguisticRank.MEDIUM

    def __post_init__(self) -> None:
        for name in ("cpu_util", "ram_util", "net_util"):
            _check_fraction(f"{self.vm_id}.{name}", getattr(self, name))
        if not (self.ram_usage >= 0 and math.isfinite(self.ram_usage)):
            raise ValueError(f"{self.vm_id}.ram_usage must be a nonnegative number")
        object.__setattr__(self, "qos", LinguisticRank(self.qos))


def _select(criteria: Sequence[Criterion], columns: Sequence[str] | None) -> list[int]:
    if columns is None:
        return list(range(len(criteria)))
    names = [c.name for c in criteria]
    unknown = set(columns) - set(names)
    if unknown:
        raise ValueError(f"unknown criteria {sorted(unknown)}")
    return [j for j, name in enumerate(names) if name in set(columns)]


def node_decision_matrix(
    nodes: Sequence[NodeSnapshot], columns: Sequence[str] | None = None
) -> DecisionMatrix:
    """Level-1 matrix, one row per node in input order.

    ``columns`` restricts the matrix to a subset of criteria by name.
    """
    if not nodes:
        raise ValueError("node list is empty")
    keep = _select(NODE_CRITERIA, columns)
    rows = []
    for n in nodes:
        full = (
            n.cpu_util,
            n.ram_util,
            n.net_util,
            n.vm_count,
            n.cpu_clock,
            n.net_bw,
            n.temperature,
            n.ram_capacity,
        )
        rows.append([full[j] for j in keep])
    return DecisionMatrix([n.node_id for n in nodes], [NODE_CRITERIA[j] for j in keep], rows)


def vm_decision_matrix(
    vms: Sequence[VmSnapshot], columns: Sequence[str] | None = None
) -> DecisionMatrix:
    """Level-2 matrix over the VMs of a single host."""
    if not vms:
        raise ValueError("VM list is empty")
    hosts = {v.host_id for v in vms}
    if len(hosts) > 1:
        raise ValueError(f"VMs span several hosts: {sorted(hosts)}")
    keep = _select(VM_CRITERIA, columns)
    rows = []
    for v in vms:
        # a zero footprint would zero the fuzzy cost denominator; 1 MB keeps
        # such a VM the cheapest to move
        full = (v.cpu_util, v.ram_util, v.net_util, max(v.ram_usage, MIN_FOOTPRINT_GB), v.qos)
        rows.append([full[j] for j in keep])
    return DecisionMatrix([v.vm_id for v in vms], [VM_CRITERIA[j] for j in keep], rows)


def sandpiper_volume(cpu: float, net: float, mem: float) -> float:
    for name, u in (("cpu", cpu), ("net", net), ("mem", mem)):
        if u < 0:
            raise ValueError(f"{name} utilization must be nonnegative, got {u}")
        if u >= 1:
            raise SaturationError(f"{name} utilization {u} is saturated")
    return 1.0 / (1.0 - cpu) / (1.0 - net) / (1.0 - mem)


def volume_score(volume: float) -> float:
    """Map a volume in ``[1, inf]`` onto 0-100 as ``100 * (1 - 1/vol)``."""
    if volume < 1:
        raise ValueError("volume is at least 1")
    return 100.0 * (1.0 - 1.0 / volume)


def node_volume(node: NodeSnapshot) -> float:
    """Volume of a node; ``inf`` when any resource is saturated."""
    try:
        return sandpiper_volume(node.cpu_util, node.net_util, node.ram_util)
    except SaturationError:
        return math.inf


def vm_volume(vm: VmSnapshot) -> float:
    try:
        return sandpiper_volume(vm.cpu_util, vm.net_util, vm.ram_util)
    except SaturationError:
        return math.inf


def vsr(volume: float, size_gb: float) -> float:
    if not size_gb > 0:
        raise ValueError(f"VM size must be positive, got {size_gb}")
    return volume / size_gb


# -- snapshot files ---------------------------------------------------------


@dataclass
class Snapshot:
    nodes: list[NodeSnapshot]
    vms: list[VmSnapshot]
    settings: dict[str, Any] = field(default_factory=dict)
    time: float | None = None

    def vms_on(self, host: str) -> list[VmSnapshot]:
        return [v for v in self.vms if v.host_id == host]


def parse_rank(value: Any, path: str) -> LinguisticRank:
    try:
        return LinguisticRank.parse(value)
    except (ValueError, TypeError):
        raise ValidationError(path, f"not a linguistic rank: {value!r}") from None


def parse_temperature(raw: Mapping[str, Any], path: str) -> TriangularFuzzyNumber:
    """Either ``temperature = [a, b, c]`` or ``temp_mean`` with
    ``temp_left`` / ``temp_right`` spreads."""
    if "temperature" in raw:
        t = raw["temperature"]
        if not (isinstance(t, list) and len(t) == 3):
            raise ValidationError(f"{path}.temperature", "expected [a, b, c]")
        try:
            tfn = TriangularFuzzyNumber(*(float(x) for x in t))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{path}.temperature", str(exc)) from None
    else:
        mean = get_number(raw, "temp_mean", path, lo=0, hi=100)
        left = get_number(raw, "temp_left", path, default=5.0, lo=0)
        right = get_number(raw, "temp_right", path, default=5.0, lo=0)
        tfn = TriangularFuzzyNumber.from_spread(mean, left, right)
    if tfn.a < 0:
        raise ValidationError(f"{path}.temperature", "must be nonnegative")
    return tfn


def footprint_gb(raw: Mapping[str, Any], path: str) -> float:
    if "ram_mb" in raw:
        return get_number(raw, "ram_mb", path, lo=0) / 1024.0
    return get_number(raw, "ram_usage_gb", path, lo=0)


def snapshot_from_dict(doc: Mapping[str, Any]) -> Snapshot:
    raw_nodes = get_table_list(doc, "node")
    raw_vms = get_table_list(doc, "vm")
    if not raw_nodes:
        raise ValidationError("node", "at least one node is required")

    seen: set[str] = set()
    for i, raw in enumerate(raw_vms):
        path = f"vm[{i}]"
        vid = get_str(raw, "id", path)
        if vid in seen:
            raise ValidationError(f"{path}.id", f"duplicate VM id {vid!r}")
        seen.add(vid)

    node_ids = [get_str(raw, "id", f"node[{i}]") for i, raw in enumerate(raw_nodes)]
    if len(set(node_ids)) != len(node_ids):
        raise ValidationError("node", "duplicate node ids")

    vms: list[VmSnapshot] = []
    for i, raw in enumerate(raw_vms):
        path = f"vm[{i}]"
        host = get_str(raw, "host", path)
        if host not in node_ids:
            raise ValidationError(f"{path}.host", f"unknown host {host!r}")
        try:
            vms.append(
                VmSnapshot(
                    vm_id=raw["id"],
                    host_id=host,
                    cpu_util=get_number(raw, "cpu_util", path, lo=0, hi=1),
                    ram_util=get_number(raw, "ram_util", path, default=0.0, lo=0, hi=1),
                    net_util=get_number(raw, "net_util", path, default=0.0, lo=0, hi=1),
                    ram_usage=footprint_gb(raw, path),
                    qos=parse_rank(raw.get("qos", "M"), f"{path}.qos"),
                )
            )
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(path, str(exc)) from None

    nodes: list[NodeSnapshot] = []
    for i, raw in enumerate(raw_nodes):
        path = f"node[{i}]"
        nid = node_ids[i]
        hosted = [v for v in vms if v.host_id == nid]
        capacity = get_number(raw, "ram_capacity_gb", path, lo=0, lo_open=True)
        slots = int(get_number(raw, "vm_slots", path, default=DEFAULT_VM_SLOTS, lo=1))
        if "vm_count" in raw:
            count_rank = parse_rank(raw["vm_count"], f"{path}.vm_count")
        else:
            count_rank = vm_count_rank(len(hosted), slots)
        default_free = capacity - sum(v.ram_usage for v in hosted)
        if default_free < -1e-9:
            raise ValidationError(f"{path}.ram_capacity_gb", "hosted VM footprints exceed capacity")
        ram_free = get_number(raw, "ram_free_gb", path, default=max(default_free, 0.0), lo=0)
        try:
            nodes.append(
                NodeSnapshot(
                    node_id=nid,
                    cpu_util=get_number(raw, "cpu_util", path, lo=0, hi=1),
                    ram_util=get_number(raw, "ram_util", path, lo=0, hi=1),
                    net_util=get_number(raw, "net_util", path, lo=0, hi=1),
                    vm_count=count_rank,
                    cpu_clock=get_number(raw, "cpu_clock_ghz", path, lo=0, lo_open=True),
                    net_bw=get_number(raw, "net_bw_mbps", path, lo=0, lo_open=True),
                    temperature=parse_temperature(raw, path),
                    ram_capacity=capacity,
                    ram_free=ram_free,
                    vm_slots=slots,
                )
            )
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(path, str(exc)) from None

    settings = doc.get("controller", {})
    if not isinstance(settings, dict):
        raise ValidationError("controller", "expected a table")
    time = doc.get("time_s")
    return Snapshot(nodes, vms, dict(settings), None if time is None else float(time))


def load_snapshot(path: str | Path) -> Snapshot:
    return snapshot_from_dict(load_toml(path))


def _fmt(x: float) -> str:
    return repr(round(float(x), 6))


def dump_snapshot(nodes: Iterable[NodeSnapshot], vms: Iterable[VmSnapshot], time: float | None = None) -> str:
    """Serialize snapshots to the TOML layout read by :func:`load_snapshot`."""
    lines = []
    if time is not None:
        lines += [f"time_s = {_fmt(time)}", ""]
    for n in nodes:
        t = n.temperature
        lines += [
            "[[node]]",
            f'id = "{n.node_id}"',
            f"cpu_util = {_fmt(n.cpu_util)}",
            f"ram_util = {_fmt(n.ram_util)}",
            f"net_util = {_fmt(n.net_util)}",
            f'vm_count = "{n.vm_count.abbrev}"',
            f"vm_slots = {n.vm_slots}",
            f"cpu_clock_ghz = {_fmt(n.cpu_clock)}",
            f"net_bw_mbps = {_fmt(n.net_bw)}",
            f"ram_capacity_gb = {_fmt(n.ram_capacity)}",
            f"ram_free_gb = {_fmt(n.ram_free)}",
            f"temperature = [{_fmt(t.a)}, {_fmt(t.b)}, {_fmt(t.c)}]",
            "",
        ]
    for v in vms:
        lines += [
            "[[vm]]",
            f'id = "{v.vm_id}"',
            f'host = "{v.host_id}"',
            f"cpu_util = {_fmt(v.cpu_util)}",
            f"ram_util = {_fmt(v.ram_util)}",
            f"net_util = {_fmt(v.net_util)}",
            f"ram_usage_gb = {_fmt(v.ram_usage)}",
            f'qos = "{v.qos.abbrev}"',
            "",
        ]
    return "\n".join(lines)


def with_vm_count(node: NodeSnapshot, count: int) -> NodeSnapshot:
    return replace(node, vm_count=vm_count_rank(count, node.vm_slots))
