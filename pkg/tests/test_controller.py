import pytest

from factories import node, vm
from vmtopsis.cluster import load_snapshot
from vmtopsis.controller import (
    ControllerConfig,
    MigrationDecision,
    Pipeline,
    detect_hotspots,
    mitigation_plan,
    project_move,
    rank_nodes,
    sandpiper_plan,
    select_destination,
    select_victim,
    two_level_decision,
)
from vmtopsis.fuzzy import LinguisticRank
from vmtopsis.scenario import load_scenario
from vmtopsis.simulator import Simulator
from vmtopsis.topsis import RankingResult, stable_descending

CFG = ControllerConfig()


def ranking(scores):
    ids = [f"N{i}" for i in range(len(scores))]
    return RankingResult(tuple(ids), tuple(scores), stable_descending(ids, scores))


class TestConfig:
    def test_defaults(self):
        assert CFG.threshold == 75 and CFG.control_interval == 180 and CFG.pipeline is Pipeline.FUZZY

    @pytest.mark.parametrize("bad", [0, -5, 100.5])
    def test_threshold_range(self, bad):
        with pytest.raises(ValueError):
            ControllerConfig(threshold=bad)

    def test_interval_positive(self):
        with pytest.raises(ValueError):
            ControllerConfig(control_interval=0)

    @pytest.mark.parametrize("text", ["SandpiperBaseline", "sandpiper", "baseline"])
    def test_pipeline_aliases(self, text):
        assert Pipeline.parse(text) is Pipeline.SANDPIPER

    def test_decision_source_differs(self):
        with pytest.raises(ValueError):
            MigrationDecision("v", "a", "a", 80, 0, 0.1)


class TestHotspots:
    def test_single(self):
        assert detect_hotspots(ranking([82, 41, 13]), CFG) == ["N0"]

    def test_none(self):
        assert detect_hotspots(ranking([75, 41, 13]), CFG) == []

    def test_hottest_first(self):
        assert detect_hotspots(ranking([80, 90]), CFG) == ["N1", "N0"]


class TestRankNodes:
    def test_reference_snapshot(self, snapshot_path):
        s = load_snapshot(snapshot_path)
        res = rank_nodes(s.nodes, CFG)
        assert res.top == "PM3" and res.bottom == "PM2"
        assert res.score("PM3") > 75

    def test_idle_cluster_degenerate(self):
        nodes = [node("a", 0, 0, 0, clock=2.0), node("b", 0, 0, 0, clock=3.0)]
        res = rank_nodes(nodes, CFG)
        assert res.degenerate and res.scores == (50.0, 50.0)

    def test_saturated_weaker_node_scores_100(self):
        hot = node("hot", 1, 1, 1, count=8, clock=2.0, bw=500, temp=90, cap=4, free=0)
        cold = node("cold", 0.1, 0.1, 0.1, count=1, clock=3.0, bw=1000, temp=40, cap=16)
        for pipeline in Pipeline:
            res = rank_nodes([cold, hot], ControllerConfig(pipeline=pipeline))
            assert res.top == "hot"
            if pipeline is not Pipeline.SANDPIPER:
                assert res.score("hot") == 100.0

    def test_empty(self):
        with pytest.raises(ValueError):
            rank_nodes([], CFG)


class TestVictim:
    def test_reference_snapshot(self, snapshot_path):
        s = load_snapshot(snapshot_path)
        assert select_victim("PM3", s.vms, CFG) == "VM3"

    def test_single_vm(self):
        assert select_victim("h", [vm("only", "h")], CFG) == "only"

    def test_empty_host(self):
        with pytest.raises(ValueError):
            select_victim("h", [vm("x", "other")], CFG)


class TestDestination:
    def setup_method(self):
        self.nodes = [
            node("hot", 0.95, 0.9, 0.9, count=6, clock=2.0, cap=4, free=1.0),
            node("mid", 0.3, 0.3, 0.3, clock=2.4, cap=8, free=4.0),
            node("idle", 0.05, 0.05, 0.05, clock=3.0, cap=8, free=4.0),
        ]
        self.vm = vm("v", "hot", 0.3, 0.2, 0.2, size=0.5)

    def test_least_loaded_first(self):
        r = rank_nodes(self.nodes, CFG)
        assert select_destination(r, self.vm, self.nodes, CFG) == "idle"

    def test_falls_back_when_ram_short(self):
        nodes = self.nodes[:2] + [node("idle", 0.05, 0.05, 0.05, clock=3.0, cap=8, free=0.25)]
        r = rank_nodes(nodes, CFG)
        assert r.bottom == "idle"
        assert select_destination(r, self.vm, nodes, CFG) == "mid"

    def test_none_when_nothing_fits(self):
        nodes = [self.nodes[0]] + [node(n, 0.1, 0.1, 0.1, free=0.1) for n in ("a", "b")]
        r = rank_nodes(nodes, CFG)
        assert select_destination(r, self.vm, nodes, CFG) is None

    def test_reference_snapshot(self, snapshot_path):
        s = load_snapshot(snapshot_path)
        d = two_level_decision(s.nodes, s.vms, CFG)
        assert (d.host, d.victim, d.destination) == ("PM3", "VM3", "PM2")


class TestProjection:
    def test_conserves_absolute_demand(self):
        a = node("a", 0.5, 0.5, 0.5, clock=2.0, cap=4, bw=1000, free=2)
        b = node("b", 0.1, 0.1, 0.1, clock=4.0, cap=8, bw=500, free=4)
        v = vm("v", "a", 0.2, 0.25, 0.1, size=1.0)
        after, moved = project_move([a, b], v, "b")
        na, nb = after
        assert na.cpu_util == pytest.approx(0.3) and nb.cpu_util == pytest.approx(0.1 + 0.2 * 2.0 / 4.0)
        assert nb.ram_util == pytest.approx(0.1 + 0.25 * 4 / 8)
        assert nb.net_util == pytest.approx(0.1 + 0.1 * 1000 / 500)
        assert na.ram_free == 3 and nb.ram_free == 3
        assert moved.host_id == "b" and moved.cpu_util == pytest.approx(0.1)


class TestMitigationPlan:
    def test_reference_snapshot(self, snapshot_path):
        s = load_snapshot(snapshot_path)
        plan = mitigation_plan(s.nodes, s.vms, CFG, time=405)
        assert [(d.vm_id, d.source_node, d.destination_node) for d in plan] == [("VM3", "PM3", "PM2")]
        d = plan.decisions[0]
        assert d.transferred_gb == 0.125 and d.trigger_time == 405 and d.source_score_before > 75
        assert plan.mitigated

    def test_no_hotspot(self, scenario_path):
        nodes, vms = Simulator(load_scenario(scenario_path)).snapshots(180)
        plan = mitigation_plan(nodes, vms, CFG)
        assert len(plan) == 0 and plan.mitigated

    def test_two_node_dominance_is_always_hot(self):
        # scores are relative: the dominant node of a pair sits on the ideal
        nodes = [node("a", 0.2, 0.2, 0.2), node("b", 0.3, 0.3, 0.3)]
        assert rank_nodes(nodes, CFG).score("b") == 100.0

    def test_no_room_anywhere(self):
        nodes = [node("hot", 0.95, 0.95, 0.95, count=8, clock=2.0, free=0.0)] + [
            node(n, 0.1, 0.1, 0.1, free=0.0) for n in ("a", "b")
        ]
        plan = mitigation_plan(nodes, [vm("v", "hot", size=0.5)], CFG)
        assert len(plan) == 0
        assert plan.residual_hotspots == ["hot"]

    def test_threshold_100_is_empty(self, snapshot_path):
        s = load_snapshot(snapshot_path)
        assert len(mitigation_plan(s.nodes, s.vms, ControllerConfig(threshold=100))) == 0

    def test_unknown_host(self):
        with pytest.raises(ValueError):
            mitigation_plan([node("a")], [vm("v", "b")], CFG)

    def test_pinned_and_busy(self, snapshot_path):
        s = load_snapshot(snapshot_path)
        plan = mitigation_plan(s.nodes, s.vms, CFG, pinned_vms={"VM3"})
        assert all(d.vm_id != "VM3" for d in plan)
        assert len(mitigation_plan(s.nodes, s.vms, CFG, busy_nodes={"PM3"})) == 0


class TestSandpiper:
    def test_idle_cluster(self):
        nodes = [node(n, 0, 0, 0) for n in "abc"]
        assert len(sandpiper_plan(nodes, [vm("v", "a", 0, 0, 0)], CFG)) == 0

    def test_volume_dominant_node_is_source(self):
        nodes = [node("hot", 0.9, 0, 0), node("a", 0, 0, 0), node("b", 0, 0, 0)]
        plan = sandpiper_plan(nodes, [vm("v", "hot", 0.5, 0, 0, size=0.25)], CFG)
        assert [d.source_node for d in plan] == ["hot"]

    def test_higher_vsr_first(self):
        nodes = [node("hot", 0.9, 0, 0), node("a", 0, 0, 0)]
        vms = [vm("big", "hot", 0.3, 0, 0, size=0.25), vm("small", "hot", 0.3, 0, 0, size=0.125)]
        plan = sandpiper_plan(nodes, vms, CFG)
        assert plan.decisions[0].vm_id == "small"

    def test_reference_snapshot(self, snapshot_path):
        s = load_snapshot(snapshot_path)
        d = two_level_decision(s.nodes, s.vms, ControllerConfig(pipeline="sandpiper"))
        assert d.node_ranking.top == "PM3"
        assert d.node_ranking.bottom == "PM2"


def test_qos_breaks_level_two_tie():
    vms = [vm("a", "h", qos=LinguisticRank.LOW), vm("b", "h", qos=LinguisticRank.VERY_HIGH)]
    assert select_victim("h", vms, ControllerConfig(pipeline="crisp")) == "b"
