"""Crisp and fuzzy TOPSIS over benefit/cost criteria with linguistic weights.

Both pipelines return a :class:`RankingResult` whose scores are relative
closeness values in ``[0, 1]`` and whose order is descending closeness with
ties kept in declaration order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .fuzzy import (
    LinguisticRank,
    TriangularFuzzyNumber,
    crisp_from_linguistic,
    tfn_from_linguistic,
)

Cell = Union[float, int, LinguisticRank, TriangularFuzzyNumber]


class Direction(enum.Enum):
    BENEFIT = "benefit"
    COST = "cost"


class DataKind(enum.Enum):
    CRISP = "crisp"
    LINGUISTIC = "linguistic"
    FUZZY = "fuzzy"


class DegenerateColumnError(ValueError):
    """A column cannot be normalized (all zeros, or a zero denominator)."""

    def __init__(self, criterion: str, reason: str):
        super().__init__(f"criterion {criterion!r}: {reason}")
        self.criterion = criterion


@dataclass(frozen=True)
class Criterion:
    name: str
    direction: Direction
    weight: LinguisticRank
    data_kind: DataKind = DataKind.CRISP

    @property
    def is_benefit(self) -> bool:
        return self.direction is Direction.BENEFIT


def _cell_kind(cell: Cell) -> DataKind:
    # LinguisticRank is an int subclass, so test it first
    if isinstance(cell, LinguisticRank):
        return DataKind.LINGUISTIC
    if isinstance(cell, TriangularFuzzyNumber):
        return DataKind.FUZZY
    if isinstance(cell, (int, float, np.integer, np.floating)) and not isinstance(cell, bool):
        return DataKind.CRISP
    raise TypeError(f"unsupported cell type {type(cell).__name__}")


@dataclass(frozen=True)
class DecisionMatrix:
    alternatives: tuple[str, ...]
    criteria: tuple[Criterion, ...]
    cells: tuple[tuple[Cell, ...], ...]

    def __init__(
        self,
        alternatives: Sequence[str],
        criteria: Sequence[Criterion],
        cells: Sequence[Sequence[Cell]],
    ):
        object.__setattr__(self, "alternatives", tuple(alternatives))
        object.__setattr__(self, "criteria", tuple(criteria))
        object.__setattr__(self, "cells", tuple(tuple(row) for row in cells))
        self._validate()

    def _validate(self) -> None:
        m, n = len(self.alternatives), len(self.criteria)
        if m < 1:
            raise ValueError("decision matrix needs at least one alternative")
        if n < 1:
            raise ValueError("decision matrix needs at least one criterion")
        if len(set(self.alternatives)) != m:
            raise ValueError("alternative identifiers must be unique")
        if len({c.name for c in self.criteria}) != n:
            raise ValueError("criterion names must be unique")
        if len(self.cells) != m:
            raise ValueError(f"expected {m} rows, got {len(self.cells)}")
        for i, row in enumerate(self.cells):
            if len(row) != n:
                raise ValueError(f"row {self.alternatives[i]!r} has {len(row)} cells, expected {n}")
            for crit, cell in zip(self.criteria, row):
                kind = _cell_kind(cell)
                if kind is not crit.data_kind:
                    raise TypeError(
                        f"cell [{self.alternatives[i]!r}, {crit.name!r}] is {kind.value}, "
                        f"criterion expects {crit.data_kind.value}"
                    )
                if kind is DataKind.CRISP:
                    x = float(cell)
                    if not math.isfinite(x):
                        raise ValueError(f"cell [{self.alternatives[i]!r}, {crit.name!r}] is not finite")
                    if x < 0:
                        raise ValueError(f"cell [{self.alternatives[i]!r}, {crit.name!r}] is negative")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.alternatives), len(self.criteria)

    def crisp_values(self) -> np.ndarray:
        """m x n floats: linguistic cells via the 1-9 number table, fuzzy
        cells collapsed to their modal value."""
        out = np.empty(self.shape)
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                if isinstance(cell, LinguisticRank):
                    out[i, j] = crisp_from_linguistic(cell)
                elif isinstance(cell, TriangularFuzzyNumber):
                    out[i, j] = cell.b
                else:
                    out[i, j] = float(cell)
        return out

    def fuzzy_values(self) -> np.ndarray:
        """m x n x 3 array of (a, b, c); crisp cells become degenerate TFNs and
        linguistic cells use the membership table."""
        out = np.empty(self.shape + (3,))
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                if isinstance(cell, LinguisticRank):
                    out[i, j] = tfn_from_linguistic(cell).as_tuple()
                elif isinstance(cell, TriangularFuzzyNumber):
                    out[i, j] = cell.as_tuple()
                else:
                    out[i, j] = float(cell)
        return out

    def select_rows(self, indices: Sequence[int]) -> DecisionMatrix:
        return DecisionMatrix(
            [self.alternatives[i] for i in indices],
            self.criteria,
            [self.cells[i] for i in indices],
        )

    def drop_criteria(self, names: Sequence[str]) -> DecisionMatrix:
        drop = set(names)
        keep = [j for j, c in enumerate(self.criteria) if c.name not in drop]
        return DecisionMatrix(
            self.alternatives,
            [self.criteria[j] for j in keep],
            [[row[j] for j in keep] for row in self.cells],
        )


@dataclass(frozen=True)
class RankingResult:
    alternatives: tuple[str, ...]
    scores: tuple[float, ...]
    order: tuple[str, ...]
    degenerate: bool = False

    def score(self, alternative: str) -> float:
        return self.scores[self.alternatives.index(alternative)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.alternatives, self.scores))

    def rescaled(self, factor: float) -> RankingResult:
        return RankingResult(
            self.alternatives, tuple(s * factor for s in self.scores), self.order, self.degenerate
        )

    @property
    def top(self) -> str:
        return self.order[0]

    @property
    def bottom(self) -> str:
        return self.order[-1]


def stable_descending(alternatives: Sequence[str], scores: Sequence[float]) -> tuple[str, ...]:
    idx = sorted(range(len(scores)), key=lambda i: -scores[i])
    return tuple(alternatives[i] for i in idx)


# -- crisp pipeline ---------------------------------------------------------


def normalize_crisp(matrix: DecisionMatrix) -> np.ndarray:
    x = matrix.crisp_values()
    norms = np.empty(x.shape[1])
    for j in range(x.shape[1]):
        top = float(np.abs(x[:, j]).max()) if x.shape[0] else 0.0
        if top == 0.0:
            raise DegenerateColumnError(matrix.criteria[j].name, "column is entirely zero")
        # fsum keeps the norm independent of row order; scaling by the
        # column maximum keeps tiny cells from underflowing when squared
        norms[j] = top * math.sqrt(math.fsum((float(v) / top) ** 2 for v in x[:, j]))
        if norms[j] == 0.0:
            raise DegenerateColumnError(matrix.criteria[j].name, "column is entirely zero")
    return x / norms


def resolve_weights_crisp(criteria: Sequence[Criterion]) -> np.ndarray:
    if not criteria:
        raise ValueError("at least one criterion is required")
    raw = np.array([crisp_from_linguistic(c.weight) for c in criteria])
    return raw / raw.sum()


def weighted_matrix_crisp(normalized: np.ndarray, weights: np.ndarray) -> np.ndarray:
    normalized = np.asarray(normalized, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if normalized.ndim != 2 or weights.shape != (normalized.shape[1],):
        raise ValueError(
            f"weight vector of length {weights.shape} does not match {normalized.shape[1]} criteria"
        )
    return normalized * weights


def ideal_solutions_crisp(
    weighted: np.ndarray, criteria: Sequence[Criterion]
) -> tuple[np.ndarray, np.ndarray]:
    weighted = np.asarray(weighted, dtype=float)
    benefit = np.array([c.is_benefit for c in criteria])
    col_max = weighted.max(axis=0)
    col_min = weighted.min(axis=0)
    a_plus = np.where(benefit, col_max, col_min)
    a_minus = np.where(benefit, col_min, col_max)
    return a_plus, a_minus


def separations_crisp(
    weighted: np.ndarray, a_plus: np.ndarray, a_minus: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    weighted = np.asarray(weighted, dtype=float)
    d_plus = np.sqrt(((weighted - a_plus) ** 2).sum(axis=1))
    d_minus = np.sqrt(((weighted - a_minus) ** 2).sum(axis=1))
    return d_plus, d_minus


def relative_closeness(d_plus: float, d_minus: float) -> float:
    """``d- / (d+ + d-)``; 0.5 when both separations vanish."""
    if d_plus < 0 or d_minus < 0:
        raise ValueError("separations must be nonnegative")
    total = d_plus + d_minus
    if total == 0:
        return 0.5
    return d_minus / total


def _closeness_vector(d_plus: np.ndarray, d_minus: np.ndarray) -> tuple[list[float], bool]:
    scores = [relative_closeness(float(p), float(q)) for p, q in zip(d_plus, d_minus)]
    degenerate = bool(np.all((d_plus == 0) & (d_minus == 0)))
    return scores, degenerate


def _result(matrix: DecisionMatrix, scores: list[float], degenerate: bool) -> RankingResult:
    return RankingResult(
        matrix.alternatives,
        tuple(scores),
        stable_descending(matrix.alternatives, scores),
        degenerate,
    )


def rank_crisp(matrix: DecisionMatrix) -> RankingResult:
    normalized = normalize_crisp(matrix)
    weighted = weighted_matrix_crisp(normalized, resolve_weights_crisp(matrix.criteria))
    a_plus, a_minus = ideal_solutions_crisp(weighted, matrix.criteria)
    d_plus, d_minus = separations_crisp(weighted, a_plus, a_minus)
    scores, degenerate = _closeness_vector(d_plus, d_minus)
    return _result(matrix, scores, degenerate)


# -- fuzzy pipeline ---------------------------------------------------------


def fuzzy_weights(criteria: Sequence[Criterion]) -> np.ndarray:
    """n x 3 weight TFNs: membership-table entry of each weight, scaled to [0, 1]."""
    return np.array([tfn_from_linguistic(c.weight).as_tuple() for c in criteria]) / 100.0


def normalize_fuzzy(matrix: DecisionMatrix, values: np.ndarray | None = None) -> np.ndarray:
    f = matrix.fuzzy_values() if values is None else values
    out = np.empty_like(f)
    for j, crit in enumerate(matrix.criteria):
        col = f[:, j, :]
        if np.any(col[:, 0] < 0):
            raise DegenerateColumnError(crit.name, "fuzzy cells must be nonnegative")
        if crit.is_benefit:
            c_plus = col[:, 2].max()
            if c_plus <= 0:
                raise DegenerateColumnError(crit.name, "largest upper bound is zero")
            out[:, j, :] = col / c_plus
        else:
            if np.any(col[:, 0] <= 0):
                raise DegenerateColumnError(crit.name, "cost column has a zero lower bound")
            a_minus = col[:, 0].min()
            out[:, j, :] = a_minus / col[:, ::-1]
    return out


def rank_fuzzy(matrix: DecisionMatrix) -> RankingResult:
    r = normalize_fuzzy(matrix)
    v = r * fuzzy_weights(matrix.criteria)[None, :, :]
    # direction is already folded into r, so both ideals are envelopes
    a_plus = v.max(axis=0)
    a_minus = v.min(axis=0)
    d_plus = np.sqrt(((v - a_plus) ** 2).sum(axis=2)).sum(axis=1)
    d_minus = np.sqrt(((v - a_minus) ** 2).sum(axis=2)).sum(axis=1)
    scores, degenerate = _closeness_vector(d_plus, d_minus)
    return _result(matrix, scores, degenerate)
