"""Calibrate peak magnitudes of a scenario against the hotspot threshold.

The reference scenario's demand numbers are inputs, not measured
data. This module makes the choice reproducible: it scales the peak
magnitudes of every VM on one host by a factor ``k`` and bisects for the
smallest ``k`` at which that host, with balancing disabled, scores above the
threshold at the chosen control cycle.

    python3 -m vmtopsis.calibrate scenarios/table5.scenario --node PM3 --at 540
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace

from .cluster import dump_snapshot
from .controller import rank_nodes
from .scenario import Scenario, load_scenario
from .simulator import Simulator


def scale_peaks(scenario: Scenario, node_id: str, k: float) -> Scenario:
    vms = tuple(
        replace(v, profile=replace(v.profile, peak_magnitude=v.profile.peak_magnitude.scaled(k)))
        if v.host_id == node_id
        else v
        for v in scenario.vms
    )
    return replace(scenario, vms=vms)


def unbalanced_scores(scenario: Scenario, at: float) -> dict[str, float]:
    """Node scores at time ``at`` with balancing disabled.

    Without balancing the placement never changes, so the snapshot at ``at``
    is all that is needed.
    """
    sim = Simulator(scenario.with_overrides(planner=None))
    nodes, _ = sim.snapshots(at)
    return rank_nodes(nodes, sim.score_config).as_dict()


@dataclass
class Calibration:
    node: str
    at: float
    threshold: float
    critical_scale: float
    shipped_score: float
    others_max: float
    iterations: int

    @property
    def margin(self) -> float:
        """How far the shipped magnitudes sit above the crossing, as a ratio."""
        return 1.0 / self.critical_scale


def bisect_peak_scale(
    scenario: Scenario,
    node_id: str,
    at: float,
    lo: float = 0.0,
    hi: float = 1.0,
    tol: float = 1e-3,
    max_iter: int = 60,
) -> Calibration:
    """Smallest peak scale in ``[lo, hi]`` putting ``node_id`` over threshold at ``at``.

    Requires the node to be below threshold at ``lo`` and above it at ``hi``.
    """
    threshold = scenario.controller.threshold

    def hot(k: float) -> bool:
        return unbalanced_scores(scale_peaks(scenario, node_id, k), at)[node_id] > threshold

    if hot(lo):
        raise ValueError(f"{node_id} is already above threshold at scale {lo}")
    if not hot(hi):
        raise ValueError(f"{node_id} stays below threshold at scale {hi}")
    n = 0
    while hi - lo > tol and n < max_iter:
        mid = 0.5 * (lo + hi)
        if hot(mid):
            hi = mid
        else:
            lo = mid
        n += 1

    shipped = unbalanced_scores(scenario, at)
    return Calibration(
        node=node_id,
        at=at,
        threshold=threshold,
        critical_scale=hi,
        shipped_score=shipped[node_id],
        others_max=max(s for nid, s in shipped.items() if nid != node_id),
        iterations=n,
    )


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="python3 -m vmtopsis.calibrate", description=__doc__.splitlines()[0])
    ap.add_argument("scenario")
    ap.add_argument("--node", default="PM3")
    ap.add_argument("--at", type=float, default=540.0, help="control cycle time to calibrate against (s)")
    ap.add_argument("--hi", type=float, default=1.0, help="upper end of the scale bracket")
    ap.add_argument("--snapshot", type=float, metavar="T", help="instead print the unbalanced snapshot at T")
    args = ap.parse_args(argv)

    scenario = load_scenario(args.scenario)
    if args.snapshot is not None:
        nodes, vms = Simulator(scenario.with_overrides(planner=None)).snapshots(args.snapshot)
        sys.stdout.write(dump_snapshot(nodes, vms, args.snapshot))
        return 0

    cal = bisect_peak_scale(scenario, args.node, args.at, hi=args.hi)
    print(f"node {cal.node} at t={cal.at:g}s, threshold {cal.threshold:g}")
    print(f"critical peak scale  {cal.critical_scale:.4f}  ({cal.iterations} bisection steps)")
    print(f"shipped score        {cal.shipped_score:.2f}  (margin x{cal.margin:.3f})")
    print(f"other nodes max      {cal.others_max:.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
