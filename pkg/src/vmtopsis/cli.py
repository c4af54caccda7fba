"""Command line entry point.

    vmtopsis rank SNAPSHOT
    vmtopsis simulate SCENARIO --out DIR
    vmtopsis compare SCENARIO --out DIR
    vmtopsis bench --sizes 10,100,1000

Every override flag can also come from the environment (``VMTOPSIS_THRESHOLD``,
``VMTOPSIS_INTERVAL``, ``VMTOPSIS_PLANNER``, ``VMTOPSIS_SEED``, ``VMTOPSIS_OUT``);
a flag on the command line wins.

Exit status: 0 ok, 1 run finished with a hotspot left, 2 bad input, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence, TextIO

from . import bench
from .cluster import Snapshot, load_snapshot
from .controller import ControllerConfig, Pipeline, two_level_decision
from .scenario import Scenario, load_scenario, parse_planner
from .schema import ValidationError
from .simulator import SimResult, _write_csv, run

EXIT_OK = 0
EXIT_HOTSPOT = 1
EXIT_INVALID = 2
EXIT_IO = 3

ENV_PREFIX = "VMTOPSIS_"
PLANNERS = ("fuzzy", "crisp", "sandpiper", "none")
COMPARISON_HEADER = [
    "planner",
    "migrations",
    "total_gb_moved",
    "peak_unbalance_factor",
    "mean_unbalance_factor",
    "hotspot_dwell_s",
    "mean_response_ms",
    "residual_hotspots",
]

_UNSET = object()


@dataclass
class Overrides:
    threshold: float | None = None
    interval: float | None = None
    planner: Pipeline | None | object = _UNSET
    seed: int | None = None

    def apply(self, scenario: Scenario) -> Scenario:
        planner = "" if self.planner is _UNSET else self.planner
        try:
            return scenario.with_overrides(self.threshold, self.interval, planner, self.seed)
        except ValidationError:
            raise
        except ValueError as exc:
            raise ValidationError("overrides", str(exc)) from None


def _env(name: str) -> str | None:
    value = os.environ.get(ENV_PREFIX + name.upper())
    return value if value not in (None, "") else None


def _float(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValidationError(name, f"expected a number, got {text!r}") from None


def resolve_overrides(args: argparse.Namespace) -> Overrides:
    """Merge flags over environment values and validate them."""
    ov = Overrides()
    threshold = args.threshold if args.threshold is not None else _env("threshold")
    if threshold is not None:
        ov.threshold = _float(str(threshold), "threshold")
        if not 0 < ov.threshold <= 100:
            raise ValidationError("threshold", f"must be in (0, 100], got {ov.threshold:g}")
    interval = args.interval if args.interval is not None else _env("interval")
    if interval is not None:
        ov.interval = _float(str(interval), "interval")
        if not ov.interval > 0:
            raise ValidationError("interval", f"must be positive, got {ov.interval:g}")
    planner = args.planner if args.planner is not None else _env("planner")
    if planner is not None:
        ov.planner = parse_planner(planner, "planner")
    seed = args.seed if args.seed is not None else _env("seed")
    if seed is not None:
        try:
            ov.seed = int(seed)
        except ValueError:
            raise ValidationError("seed", f"expected an integer, got {seed!r}") from None
        if not 0 <= ov.seed < 2**64:
            raise ValidationError("seed", "must be an unsigned 64-bit integer")
    return ov


def out_dir(args: argparse.Namespace, default: str) -> Path:
    return Path(args.out or _env("out") or default)


# -- report formatting ------------------------------------------------------


def format_table(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [[str(h) for h in header]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _ranking_rows(ranking, scale: float = 1.0) -> list[list[object]]:
    return [[k + 1, a, f"{ranking.score(a) * scale:.2f}"] for k, a in enumerate(ranking.order)]


# -- subcommands ------------------------------------------------------------


def cmd_rank(args: argparse.Namespace, out: TextIO) -> int:
    snap: Snapshot = load_snapshot(args.snapshot)
    ov = resolve_overrides(args)
    s = snap.settings
    try:
        config = ControllerConfig(
            threshold=float(s.get("threshold", 75.0)),
            pipeline=Pipeline.parse(s.get("planner", "fuzzy")),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError("controller", str(exc)) from None
    if ov.threshold is not None:
        config = replace(config, threshold=ov.threshold)
    if ov.planner is None:
        raise ValidationError("planner", "rank needs a ranking planner, not 'none'")
    if ov.planner is not _UNSET:
        config = replace(config, pipeline=ov.planner)

    d = two_level_decision(snap.nodes, snap.vms, config)
    when = "" if snap.time is None else f" at t={snap.time:g}s"
    print(f"Level 1: node ranking{when} ({config.pipeline.value}, threshold {config.threshold:g})", file=out)
    rows = _ranking_rows(d.node_ranking)
    for r in rows:
        r.append("HOT" if r[1] in d.hotspots else "")
    print(format_table(["rank", "node", "score", ""], rows), file=out)

    if args.out or _env("out"):
        target = out_dir(args, ".")
        target.mkdir(parents=True, exist_ok=True)
        _write_csv(target / "node_ranking.csv", ["rank", "node", "score"], [r[:3] for r in rows])

    if not d.hotspots:
        print("\nno hotspot", file=out)
        return EXIT_OK
    scale = 1.0 if config.pipeline is Pipeline.SANDPIPER else 100.0
    key = "vsr" if config.pipeline is Pipeline.SANDPIPER else "score"
    print(f"\nLevel 2: VMs on {d.host}", file=out)
    if d.vm_ranking is None:
        print("(no VMs hosted)", file=out)
        return EXIT_OK
    vm_rows = _ranking_rows(d.vm_ranking, scale)
    print(format_table(["rank", "vm", key], vm_rows), file=out)
    if args.out or _env("out"):
        _write_csv(out_dir(args, ".") / "vm_ranking.csv", ["rank", "vm", key], vm_rows)
    print(f"\nvictim: {d.victim}", file=out)
    print(f"destination: {d.destination or 'none (no node can take it below threshold)'}", file=out)
    return EXIT_OK


def write_run(result: SimResult, target: Path) -> dict:
    target.mkdir(parents=True, exist_ok=True)
    result.trace.write_csv(target / "trace.csv")
    result.write_events(target / "events.csv")
    result.write_cycles(target / "cycles.csv")
    summary = result.summary()
    (target / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary


def _print_summary(summary: dict, out: TextIO) -> None:
    for key in ("planner", "migrations", "total_gb_moved", "peak_unbalance_factor", "mean_response_ms", "hotspot_dwell_s"):
        print(f"{key:24s}{summary[key]}", file=out)
    print(format_table(["node", "peak score"], [[n, f"{s:.2f}"] for n, s in summary["peak_score"].items()]), file=out)
    hot = summary["residual_hotspots"]
    print(f"residual hotspots: {', '.join(hot) if hot else 'none'}", file=out)


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    scenario = resolve_overrides(args).apply(load_scenario(args.scenario))
    result = run(scenario)
    summary = write_run(result, out_dir(args, "out"))
    for m in result.migrations:
        d = m.decision
        print(f"t={d.trigger_time:g}s  {d.vm_id}: {d.source_node} -> {d.destination_node}  [{m.status}]", file=out)
    _print_summary(summary, out)
    return EXIT_HOTSPOT if summary["residual_hotspots"] else EXIT_OK


def cmd_compare(args: argparse.Namespace, out: TextIO) -> int:
    ov = resolve_overrides(args)
    base = load_scenario(args.scenario)
    planners: list[Pipeline | None]
    if ov.planner is _UNSET:
        planners = [Pipeline.FUZZY, Pipeline.CRISP, Pipeline.SANDPIPER, None]
    else:
        planners = [ov.planner]
    target = out_dir(args, "out")
    rows = []
    unmitigated = False
    for planner in planners:
        scenario = replace(ov, planner=planner).apply(base)
        name = "none" if planner is None else planner.value
        s = write_run(run(scenario), target / name)
        if planner is not None and s["residual_hotspots"]:
            unmitigated = True
        rows.append(
            [
                name,
                s["migrations"],
                s["total_gb_moved"],
                s["peak_unbalance_factor"],
                s["mean_unbalance_factor"],
                s["hotspot_dwell_s"],
                s["mean_response_ms"],
                " ".join(s["residual_hotspots"]),
            ]
        )
    _write_csv(target / "comparison.csv", COMPARISON_HEADER, [[str(c) for c in r] for r in rows])
    print(format_table(COMPARISON_HEADER, rows), file=out)
    return EXIT_HOTSPOT if unmitigated else EXIT_OK


def cmd_bench(args: argparse.Namespace, out: TextIO) -> int:
    try:
        sizes = bench.parse_grid(args.sizes)
    except ValueError as exc:
        raise ValidationError("sizes", str(exc)) from None
    if args.repetitions < 3:
        raise ValidationError("repetitions", "must be at least 3")
    if args.nodes < 1:
        raise ValidationError("nodes", "must be positive")
    ov = resolve_overrides(args)
    rows = bench.sweep(sizes, n_nodes=args.nodes, repetitions=args.repetitions, seed=ov.seed or 0)
    table = bench.timing_rows(rows)
    target = out_dir(args, "out")
    target.mkdir(parents=True, exist_ok=True)
    _write_csv(target / "timing.csv", bench.TIMING_HEADER, table)
    print(format_table(bench.TIMING_HEADER, table), file=out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=str, help="hotspot threshold on the 0-100 score scale")
    p.add_argument("--interval", type=str, help="control interval in seconds")
    p.add_argument("--planner", type=str, help="fuzzy | crisp | sandpiper | none")
    p.add_argument("--seed", type=str, help="random seed (unsigned integer)")
    p.add_argument("--out", type=str, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vmtopsis", description="Fuzzy TOPSIS hotspot controller and cluster simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="two-level decision on one snapshot file")
    p.add_argument("snapshot")
    _common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("simulate", help="run a scenario and write trace/event CSVs")
    p.add_argument("scenario")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run a scenario under every planner")
    p.add_argument("scenario")
    _common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="time the two-level decision over a size grid")
    p.add_argument("--sizes", default="12,120,1000,2000", help="comma separated VM totals")
    p.add_argument("--nodes", type=int, default=50, help="node count for the larger sizes")
    p.add_argument("--repetitions", type=int, default=5)
    _common(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
