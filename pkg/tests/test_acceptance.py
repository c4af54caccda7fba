"""Acceptance checks for the shipped package.

Each test wraps one criterion in ``criterion(...)`` so the run prints a
PASS/FAIL line per criterion and a summary section at the end.
"""

import csv
import io
import itertools
import time

import numpy as np
import pytest

from conftest import criterion
from oracles import crisp_topsis, fuzzy_topsis
from vmtopsis import bench, cli
from vmtopsis.cluster import sandpiper_volume
from vmtopsis.fuzzy import TFN, LinguisticRank, crisp_from_linguistic, tfn_from_linguistic
from vmtopsis.topsis import Criterion, DataKind, DecisionMatrix, Direction, rank_crisp, rank_fuzzy

pytestmark = pytest.mark.acceptance

THRESHOLD = 75.0
FIRST_CYCLE_AFTER = 400.0
END = 600.0


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cli_run(*argv):
    return cli.main([str(a) for a in argv], out=io.StringIO())


def scores_of(rows, node):
    return [(float(r["time_s"]), float(r[f"{node}_score"])) for r in rows]


def cycle_starts(rows, interval=180.0):
    return [float(r["time_s"]) for r in rows if float(r["time_s"]) % interval == 0]


def random_problem(rng, fuzzy):
    m, n = int(rng.integers(2, 9)), int(rng.integers(2, 7))
    dirs = [Direction.BENEFIT if b else Direction.COST for b in rng.integers(0, 2, n)]
    weights = [LinguisticRank(int(k)) for k in rng.integers(0, 7, n)]
    if fuzzy:
        raw = np.sort(rng.uniform(0.1, 100.0, size=(m, n, 3)), axis=2)
        rows = [[TFN(*cell) for cell in row.tolist()] for row in raw]
    else:
        rows = rng.uniform(0.01, 1000.0, size=(m, n)).tolist()
    kind = DataKind.FUZZY if fuzzy else DataKind.CRISP
    crits = [Criterion(f"c{j}", d, w, kind) for j, (d, w) in enumerate(zip(dirs, weights))]
    return DecisionMatrix([f"A{i}" for i in range(m)], crits, rows), dirs, weights, rows


def test_criterion_1_scenario_reproduction(scenario_path, tmp_path):
    with criterion(1, "table5 fuzzy run moves VM3 from PM3 to PM2 once") as v:
        t0 = time.perf_counter()
        code = cli_run("simulate", scenario_path, "--planner", "fuzzy", "--out", tmp_path)
        elapsed = time.perf_counter() - t0
        assert code == 0
        trace = read_csv(tmp_path / "trace.csv")
        events = read_csv(tmp_path / "events.csv")

        cycle = min(t for t in cycle_starts(trace) if t >= FIRST_CYCLE_AFTER)
        row = next(r for r in trace if float(r["time_s"]) == cycle)
        nodes = [k[: -len("_score")] for k in row if k.endswith("_score")]
        top = max(nodes, key=lambda n: float(row[f"{n}_score"]))
        assert top == "PM3" and float(row["PM3_score"]) > THRESHOLD

        assert len(events) == 1
        ev = events[0]
        assert (ev["vm"], ev["source"], ev["destination"]) == ("VM3", "PM3", "PM2")
        assert ev["status"] == "completed" and float(ev["trigger_time_s"]) == cycle

        after = [s for t, s in scores_of(trace, "PM3") if float(ev["end_s"]) < t <= END]
        assert after and max(after) <= THRESHOLD
        assert elapsed <= 5.0
        v.detail = (
            f"cycle {cycle:g}s PM3={float(row['PM3_score']):.2f}, done at {ev['end_s']}s, "
            f"PM3 max after {max(after):.2f}, {elapsed:.2f}s"
        )


def test_criterion_2_no_balancing_baseline(scenario_path, tmp_path):
    with criterion(2, "no balancing keeps PM3 hot around 450 s") as v:
        assert cli_run("simulate", scenario_path, "--planner", "none", "--out", tmp_path) == 1
        assert read_csv(tmp_path / "events.csv") == []
        series = scores_of(read_csv(tmp_path / "trace.csv"), "PM3")
        i = next(k for k, (t, _) in enumerate(series) if t == 450.0)
        assert series[i][1] > THRESHOLD
        lo = hi = i
        while lo > 0 and series[lo - 1][1] > THRESHOLD:
            lo -= 1
        while hi + 1 < len(series) and series[hi + 1][1] > THRESHOLD:
            hi += 1
        v.detail = f"0 migrations, PM3 > {THRESHOLD:g} over [{series[lo][0]:g}, {series[hi][0]:g}] s"


def test_criterion_3_crisp_oracle():
    with criterion(3, "crisp ranking matches the reference evaluator") as v:
        rng = np.random.default_rng(20240601)
        worst, t0 = 0.0, time.perf_counter()
        for _ in range(1000):
            matrix, dirs, weights, rows = random_problem(rng, fuzzy=False)
            res = rank_crisp(matrix)
            rc, order = crisp_topsis(
                list(matrix.alternatives), rows, [d is Direction.BENEFIT for d in dirs], [w.abbrev for w in weights]
            )
            worst = max(worst, max(abs(a - b) for a, b in zip(res.scores, rc)))
            assert list(res.order) == order
        elapsed = time.perf_counter() - t0
        assert worst < 1e-12 and elapsed <= 10.0
        v.detail = f"1000 matrices, max |dRC| {worst:.1e}, {elapsed:.2f}s"


def test_criterion_4_fuzzy_oracle():
    with criterion(4, "fuzzy ranking matches the reference evaluator") as v:
        rng = np.random.default_rng(20240602)
        worst = worst_scale = 0.0
        for _ in range(200):
            matrix, dirs, weights, rows = random_problem(rng, fuzzy=True)
            res = rank_fuzzy(matrix)
            args = (
                list(matrix.alternatives),
                [[c.as_tuple() for c in r] for r in rows],
                [d is Direction.BENEFIT for d in dirs],
                [w.abbrev for w in weights],
            )
            rc, order = fuzzy_topsis(*args)
            rc_third, _ = fuzzy_topsis(*args, distance_factor=1.0 / 3.0)
            worst = max(worst, max(abs(a - b) for a, b in zip(res.scores, rc)))
            worst_scale = max(worst_scale, max(abs(a - b) for a, b in zip(rc, rc_third)))
            assert list(res.order) == order
        assert worst < 1e-12 and worst_scale <= 1e-12
        v.detail = f"200 matrices, max |dRC| {worst:.1e}, 1/3 factor shift {worst_scale:.1e}"


def test_criterion_5_volume():
    with criterion(5, "volume spot values and grid monotonicity") as v:
        for args, want in (((0, 0, 0), 1.0), ((0.5, 0.5, 0.5), 8.0), ((0.9, 0, 0), 10.0)):
            assert abs(sandpiper_volume(*args) - want) <= 1e-12
        grid = np.linspace(0.0, 0.95, 21)
        vol = np.array([sandpiper_volume(c, n, m) for c, n, m in itertools.product(grid, grid, grid)])
        vol = vol.reshape(21, 21, 21)
        for axis in range(3):
            assert (np.diff(vol, axis=axis) > 0).all()
        v.detail = f"3 spot values, {vol.size} grid points strictly increasing on every axis"


def test_criterion_6_linguistic_tables():
    with criterion(6, "linguistic scales") as v:
        triangles = {
            "VL": (30, 30, 40),
            "L": (30, 40, 50),
            "ML": (40, 50, 60),
            "M": (50, 60, 70),
            "MH": (60, 70, 80),
            "H": (70, 80, 90),
            "VH": (80, 90, 90),
        }
        numbers = {"VL": 1, "L": 3, "ML": 4, "M": 5, "MH": 6, "H": 7, "VH": 9}
        assert [r.abbrev for r in LinguisticRank] == list(triangles)
        for r in LinguisticRank:
            assert tfn_from_linguistic(r).as_tuple() == triangles[r.abbrev]
            assert crisp_from_linguistic(r) == numbers[r.abbrev]
        v.detail = "7 fuzzy and 7 crisp conversions exact"


def test_criterion_7_decision_timing():
    with criterion(7, "two-level decision timing") as v:
        one = bench.planner_timing(*bench.split_size(1000, 50), repetitions=9)
        two = bench.planner_timing(*bench.split_size(2000, 50), repetitions=9)
        assert (one.n_nodes, one.n_vms, two.n_vms) == (50, 1000, 2000)
        ratio = two.median_ms / one.median_ms
        assert one.median_ms < 50.0 and ratio <= 3.0
        v.detail = f"1000 VMs {one.median_ms:.2f} ms, 2000 VMs {two.median_ms:.2f} ms, ratio {ratio:.2f}"


def test_criterion_8_planner_comparison(scenario_path, tmp_path):
    with criterion(8, "planner comparison") as v:
        first, second = tmp_path / "a", tmp_path / "b"
        assert cli_run("compare", scenario_path, "--out", first) == 0
        assert cli_run("compare", scenario_path, "--out", second) == 0
        table = {r["planner"]: r for r in read_csv(first / "comparison.csv")}
        assert list(table) == ["fuzzy", "crisp", "sandpiper", "none"]
        for planner, row in table.items():
            assert (first / planner / "trace.csv").is_file()
            assert float(row["total_gb_moved"]) >= 0 and float(row["peak_unbalance_factor"]) >= 0
        for planner in ("fuzzy", "sandpiper"):
            assert table[planner]["residual_hotspots"] == ""
            events = read_csv(first / planner / "events.csv")
            done = max(float(e["end_s"]) for e in events if e["status"] == "completed")
            after = [s for t, s in scores_of(read_csv(first / planner / "trace.csv"), "PM3") if t > done]
            assert after and max(after) <= THRESHOLD
        files = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
        assert files == sorted(p.relative_to(second) for p in second.rglob("*") if p.is_file())
        # cycles.csv holds wall-clock planner timings; everything else must repeat exactly
        for rel in files:
            if rel.name != "cycles.csv":
                assert (first / rel).read_bytes() == (second / rel).read_bytes()
        v.detail = ", ".join(
            f"{p} {table[p]['total_gb_moved']} GB / peak UF {table[p]['peak_unbalance_factor']}" for p in table
        )


def test_criterion_9_property_budget():
    import test_properties as props

    with criterion(9, "seeded property suites") as v:
        props.CASES.clear()
        t0 = time.perf_counter()
        for prop in props.PROPERTIES:
            prop()
        elapsed = time.perf_counter() - t0
        total = sum(props.CASES.values())
        assert set(props.CASES) == {p.__name__ for p in props.PROPERTIES}
        assert total >= 10_000 and elapsed <= 60.0
        v.detail = f"{len(props.PROPERTIES)} properties, {total} cases, {elapsed:.1f}s"
