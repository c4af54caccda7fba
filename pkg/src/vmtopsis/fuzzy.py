"""Triangular fuzzy numbers and the seven-level linguistic scale."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class LinguisticRank(enum.IntEnum):
    VERY_LOW = 0
    LOW = 1
    MOL_LOW = 2
    MEDIUM = 3
    MOL_HIGH = 4
    HIGH = 5
    VERY_HIGH = 6

    @property
    def abbrev(self) -> str:
        return _ABBREV[self]

    @classmethod
    def parse(cls, text: str | LinguisticRank) -> LinguisticRank:
        """Accept an abbreviation (``"VH"``), a member name or a long form
        such as ``"very high"``; case-insensitive."""
        if isinstance(text, LinguisticRank):
            return text
        key = str(text).strip().upper().replace("-", "_").replace(" ", "_")
        key = key.replace("MORE_OR_LESS", "MOL").replace("MOLLOW", "MOL_LOW")
        key = key.replace("MOLHIGH", "MOL_HIGH").replace("VERYLOW", "VERY_LOW")
        key = key.replace("VERYHIGH", "VERY_HIGH")
        if key in _FROM_ABBREV:
            return _FROM_ABBREV[key]
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown linguistic rank {text!r}") from None


_ABBREV = {
    LinguisticRank.VERY_LOW: "VL",
    LinguisticRank.LOW: "L",
    LinguisticRank.MOL_LOW: "ML",
    LinguisticRank.MEDIUM: "M",
    LinguisticRank.MOL_HIGH: "MH",
    LinguisticRank.HIGH: "H",
    LinguisticRank.VERY_HIGH: "VH",
}
_FROM_ABBREV = {v: k for k, v in _ABBREV.items()}

# (modal, left spread, right spread) on the 0-100 axis
MEMBERSHIP_TABLE: dict[LinguisticRank, tuple[float, float, float]] = {
    LinguisticRank.VERY_LOW: (30.0, 0.0, 10.0),
    LinguisticRank.LOW: (40.0, 10.0, 10.0),
    LinguisticRank.MOL_LOW: (50.0, 10.0, 10.0),
    LinguisticRank.MEDIUM: (60.0, 10.0, 10.0),
    LinguisticRank.MOL_HIGH: (70.0, 10.0, 10.0),
    LinguisticRank.HIGH: (80.0, 10.0, 10.0),
    LinguisticRank.VERY_HIGH: (90.0, 10.0, 0.0),
}

NUMBER_TABLE: dict[LinguisticRank, float] = {
    LinguisticRank.VERY_LOW: 1.0,
    LinguisticRank.LOW: 3.0,
    LinguisticRank.MOL_LOW: 4.0,
    LinguisticRank.MEDIUM: 5.0,
    LinguisticRank.MOL_HIGH: 6.0,
    LinguisticRank.HIGH: 7.0,
    LinguisticRank.VERY_HIGH: 9.0,
}


@dataclass(frozen=True, slots=True)
class TriangularFuzzyNumber:
    """Fuzzy quantity with support ``[a, c]`` and modal value ``b``."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.a, self.b, self.c)):
            raise ValueError(f"non-finite TFN component in {self.as_tuple()}")
        if not (self.a <= self.b <= self.c):
            raise ValueError(f"TFN requires a <= b <= c, got {self.as_tuple()}")

    @classmethod
    def from_spread(cls, mean: float, left: float, right: float) -> TriangularFuzzyNumber:
        return cls(mean - left, mean, mean + right)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    @property
    def is_crisp(self) -> bool:
        return self.a == self.b == self.c

    def scaled(self, k: float) -> TriangularFuzzyNumber:
        if k < 0:
            raise ValueError("scale factor must be nonnegative")
        return TriangularFuzzyNumber(self.a * k, self.b * k, self.c * k)

    def __mul__(self, other: TriangularFuzzyNumber) -> TriangularFuzzyNumber:
        if not isinstance(other, TriangularFuzzyNumber):
            return NotImplemented
        return tfn_multiply(self, other)


TFN = TriangularFuzzyNumber


def tfn_from_linguistic(rank: LinguisticRank) -> TriangularFuzzyNumber:
    m, left, right = MEMBERSHIP_TABLE[LinguisticRank(rank)]
    return TriangularFuzzyNumber.from_spread(m, left, right)


def crisp_from_linguistic(rank: LinguisticRank) -> float:
    return NUMBER_TABLE[LinguisticRank(rank)]


def tfn_from_crisp(x: float) -> TriangularFuzzyNumber:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot embed non-finite value {x!r}")
    return TriangularFuzzyNumber(x, x, x)


def tfn_multiply(x: TriangularFuzzyNumber, y: TriangularFuzzyNumber) -> TriangularFuzzyNumber:
    """Component-wise product; only defined here for nonnegative operands."""
    if x.a < 0 or y.a < 0:
        raise ValueError("tfn_multiply requires nonnegative operands")
    return TriangularFuzzyNumber(x.a * y.a, x.b * y.b, x.c * y.c)


def vertex_distance(x: TriangularFuzzyNumber, y: TriangularFuzzyNumber) -> float:
    return math.sqrt((x.a - y.a) ** 2 + (x.b - y.b) ** 2 + (x.c - y.c) ** 2)
