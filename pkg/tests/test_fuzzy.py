import math

import pytest

from vmtopsis.fuzzy import (
    TFN,
    LinguisticRank,
    TriangularFuzzyNumber,
    crisp_from_linguistic,
    tfn_from_crisp,
    tfn_from_linguistic,
    tfn_multiply,
    vertex_distance,
)

R = LinguisticRank


class TestTriangularFuzzyNumber:
    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            TFN(3, 2, 4)
        with pytest.raises(ValueError):
            TFN(1, 2, 1.5)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            TFN(0, 1, math.inf)
        with pytest.raises(ValueError):
            TFN(math.nan, 1, 2)

    def test_from_spread(self):
        assert TFN.from_spread(60, 10, 10) == TFN(50, 60, 70)
        assert TFN.from_spread(30, 0, 10) == TFN(30, 30, 40)

    def test_crisp_flag(self):
        assert TFN(2, 2, 2).is_crisp
        assert not TFN(1, 2, 2).is_crisp

    def test_frozen(self):
        t = TFN(1, 2, 3)
        with pytest.raises(AttributeError):
            t.a = 0


class TestLinguisticConversion:
    def test_medium_decodes(self):
        assert tfn_from_linguistic(R.MEDIUM) == TFN(50, 60, 70)

    def test_edges_decode_with_zero_spread(self):
        assert tfn_from_linguistic(R.VERY_LOW) == TFN(30, 30, 40)
        assert tfn_from_linguistic(R.VERY_HIGH) == TFN(80, 90, 90)

    def test_numbers(self):
        assert crisp_from_linguistic(R.VERY_HIGH) == 9
        assert crisp_from_linguistic(R.VERY_LOW) == 1
        assert crisp_from_linguistic(R.MOL_LOW) == 4

    @pytest.mark.parametrize(
        "text, rank",
        [("VH", R.VERY_HIGH), ("vl", R.VERY_LOW), ("ML", R.MOL_LOW), ("very high", R.VERY_HIGH),
         ("MoL low", R.MOL_LOW), ("more-or-less high", R.MOL_HIGH), ("medium", R.MEDIUM), ("HIGH", R.HIGH)],
    )
    def test_parse(self, text, rank):
        assert R.parse(text) is rank

    def test_parse_rejects_unknown(self):
        with pytest.raises(ValueError):
            R.parse("extreme")

    def test_abbrev_round_trip(self):
        for r in R:
            assert R.parse(r.abbrev) is r


class TestArithmetic:
    def test_crisp_embedding(self):
        assert tfn_from_crisp(0.42) == TFN(0.42, 0.42, 0.42)
        with pytest.raises(ValueError):
            tfn_from_crisp(math.nan)

    def test_multiply(self):
        assert tfn_multiply(TFN(1, 2, 3), TFN(2, 3, 4)) == TFN(2, 6, 12)
        assert TFN(1, 2, 3) * TFN(0.5, 0.5, 0.5) == TFN(0.5, 1, 1.5)

    def test_multiply_rejects_negative(self):
        with pytest.raises(ValueError):
            tfn_multiply(TFN(-1, 0, 1), TFN(1, 1, 1))

    def test_vertex_distance_examples(self):
        assert vertex_distance(TFN(1, 2, 3), TFN(1, 2, 3)) == 0
        assert vertex_distance(TFN(0, 0, 0), TFN(1, 1, 1)) == pytest.approx(math.sqrt(3), abs=1e-15)
        # (0,0,0) to (0,0,2): only the right vertex differs
        assert vertex_distance(TFN(0, 0, 0), TFN(0, 0, 2)) == 2.0

    def test_scaled(self):
        assert TFN(1, 2, 3).scaled(2) == TFN(2, 4, 6)
        with pytest.raises(ValueError):
            TFN(1, 2, 3).scaled(-1)
