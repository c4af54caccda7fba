"""Fuzzy TOPSIS migration decisions for virtualized clusters."""

from .controller import (
    ControllerConfig,
    MigrationDecision,
    Pipeline,
    mitigation_plan,
    rank_nodes,
    sandpiper_plan,
    select_destination,
    select_victim,
)
from .fuzzy import LinguisticRank, TriangularFuzzyNumber
from .topsis import Criterion, DecisionMatrix, Direction, DataKind, RankingResult, rank_crisp, rank_fuzzy

__all__ = [
    "ControllerConfig",
    "Criterion",
    "DataKind",
    "DecisionMatrix",
    "Direction",
    "LinguisticRank",
    "MigrationDecision",
    "Pipeline",
    "RankingResult",
    "TriangularFuzzyNumber",
    "mitigation_plan",
    "rank_crisp",
    "rank_fuzzy",
    "rank_nodes",
    "sandpiper_plan",
    "select_destination",
    "select_victim",
]
