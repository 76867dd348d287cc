import json
import math

import pytest

from setcensus import species
from setcensus.errors import (
    DomainError,
    UnknownClassError,
    ValidationError,
)

TREES6 = [1, 1, 3, 16, 125, 1296]
CACTI6 = [1, 1, 4, 31, 362, 5676]
HUSIMI6 = [1, 1, 4, 29, 311, 4447]


class TestBuiltins:
    def test_names(self):
        for name in ("trees", "cacti", "husimi"):
            assert species.builtin(name).name == name

    def test_unknown_name(self):
        with pytest.raises(UnknownClassError):
            species.builtin("widgets")

    def test_builtin_is_cached(self):
        assert species.builtin("trees") is species.builtin("trees")

    @pytest.mark.parametrize(
        "name,want",
        [("trees", TREES6), ("cacti", CACTI6), ("husimi", HUSIMI6)],
    )
    def test_first_coefficients(self, name, want):
        assert species.coefficients(species.builtin(name), 6) == want

    def test_cayley_closed_form(self):
        got = species.coefficients(species.builtin("trees"), 10)
        for n in range(3, 11):
            assert got[n - 1] == n ** (n - 2)

    def test_trees_growth(self):
        g = species.builtin("trees").growth
        assert g.b == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)
        assert g.rho == pytest.approx(math.exp(-1), abs=1e-15)
        assert g.alpha == 1.5

    def test_block_derived_growth(self):
        cacti = species.builtin("cacti").growth
        assert cacti.b == pytest.approx(0.120149812501, abs=1e-9)
        assert cacti.rho == pytest.approx(0.238740143685, abs=1e-9)
        husimi = species.builtin("husimi").growth
        assert husimi.b == pytest.approx(0.180737599797, abs=1e-9)
        assert husimi.rho == pytest.approx(0.264380447350, abs=1e-9)

    def test_memoization_is_monotone(self):
        cls = species.builtin("cacti")
        a = species.coefficients(cls, 8)
        b = species.coefficients(cls, 3)
        assert b == a[:3]
        assert species.coefficients(cls, 12)[:8] == a

    def test_coefficients_domain(self):
        with pytest.raises(DomainError):
            species.coefficients(species.builtin("trees"), 0)

    def test_y_series_needs_blocks(self):
        with pytest.raises(DomainError):
            species.y_series(species.synthetic(1, 0.5, 2), 4)


class TestSynthetic:
    def test_formula_values(self):
        cls = species.synthetic(1, 0.5, 2)
        assert species.coefficients(cls, 8) == [2, 1, 2, 6, 31, 213, 1881, 20160]

    def test_half_rounds_away_from_zero(self):
        # n = 2 value is exactly 1/2 here; round-half-away gives 1, not 0
        cls = species.synthetic(2, 1, 2)
        assert species.coefficients(cls, 2) == [2, 1]

    def test_single_vertex_floor(self):
        # formula value at n = 1 rounds to 0; the class still gets |C_1| = 1
        cls = species.synthetic(0.1, 2.0, 3.0)
        assert species.coefficients(cls, 1) == [1]

    def test_integral_alpha_matches_exact_recomputation(self):
        from fractions import Fraction

        got = species.coefficients(species.synthetic(1, 0.5, 2), 40)
        for n in range(2, 41):
            q = Fraction(math.factorial(n) * 2**n, n**3)
            want = (q.numerator * 2 + q.denominator) // (2 * q.denominator)
            assert got[n - 1] == want

    def test_fractional_alpha_matches_high_precision_recomputation(self):
        import mpmath

        got = species.coefficients(species.synthetic(1, 0.5, 1.5), 40)
        with mpmath.workdps(80):
            for n in range(2, 41):
                v = mpmath.factorial(n) * mpmath.power(2, n) / mpmath.power(n, 2.5)
                want = int(mpmath.floor(v + mpmath.mpf("0.5")))
                assert got[n - 1] == want

    @pytest.mark.parametrize("b,rho,alpha", [(0, 1, 2), (1, 0, 2), (1, 1, 1), (1, 1, 0.5)])
    def test_parameter_validation(self, b, rho, alpha):
        with pytest.raises(ValidationError):
            species.synthetic(b, rho, alpha)

    def test_nan_rejected(self):
        with pytest.raises(ValidationError):
            species.synthetic(math.nan, 1, 2)


class TestExplicitList:
    def test_provider_and_bounds(self):
        cls = species.from_coefficients("tiny", [1, 0, 6])
        assert species.coefficients(cls, 3) == [1, 0, 6]
        with pytest.raises(DomainError):
            species.coefficients(cls, 4)

    def test_rejects_bad_lists(self):
        with pytest.raises(ValidationError):
            species.from_coefficients("neg", [1, -2])
        with pytest.raises(ValidationError):
            species.from_coefficients("empty", [])
        with pytest.raises(ValidationError):
            species.from_coefficients("nosingle", [0, 5])

    def test_name_validation(self):
        with pytest.raises(ValidationError):
            species.from_coefficients("has space", [1])
        with pytest.raises(ValidationError):
            species.from_coefficients("", [1])
        with pytest.raises(ValidationError):
            species.from_coefficients("x" * 101, [1])


class TestFiles:
    def test_export_document_shape(self):
        doc = species.export(species.builtin("trees"), 5)
        assert doc["schema_version"] == "1"
        assert doc["name"] == "trees"
        assert doc["coefficients"] == ["1", "1", "3", "16", "125"]
        assert set(doc["growth"]) == {"b", "rho", "alpha"}

    def test_round_trip_coefficient_list(self, tmp_path):
        path = tmp_path / "trees.json"
        species.to_file(species.builtin("trees"), 8, path)
        loaded = species.from_file(path)
        assert species.coefficients(loaded, 8) == TREES6 + [16807, 262144]
        assert loaded.growth.alpha == 1.5

    def test_block_file_matches_builtin(self, tmp_path):
        path = tmp_path / "cacti.json"
        path.write_text(json.dumps({"name": "my-cacti", "block": {"kind": "cactus"}}))
        loaded = species.from_file(path)
        assert species.coefficients(loaded, 6) == CACTI6

    def test_poly_block_reproduces_trees(self, tmp_path):
        path = tmp_path / "poly.json"
        path.write_text(
            json.dumps({"name": "poly-trees", "block": {"kind": "poly", "bprime": ["0", "1"]}})
        )
        loaded = species.from_file(path)
        assert species.coefficients(loaded, 6) == TREES6

    def test_poly_block_fraction_strings(self, tmp_path):
        # B'(u) = u + u^2/2 + u^3/2, the cactus data written out explicitly
        path = tmp_path / "poly4.json"
        path.write_text(
            json.dumps(
                {"name": "c4", "block": {"kind": "poly", "bprime": ["0", "1", "1/2", "1/2"]}}
            )
        )
        loaded = species.from_file(path)
        assert species.coefficients(loaded, 4) == CACTI6[:4]

    def test_growth_agreement_enforced(self, tmp_path):
        path = tmp_path / "bad-growth.json"
        path.write_text(
            json.dumps(
                {
                    "name": "bad",
                    "block": {"kind": "cactus"},
                    "growth": {"b": 0.5, "rho": 0.238740143685, "alpha": 1.5},
                }
            )
        )
        with pytest.raises(ValidationError):
            species.from_file(path)

    @pytest.mark.parametrize(
        "doc",
        [
            {"name": "x"},
            {"name": "x", "coefficients": ["1"], "block": {"kind": "edge"}},
            {"name": "x", "block": {"kind": "moebius"}},
            {"name": "x", "coefficients": "1"},
            {"name": "x", "coefficients": ["one"]},
            {"name": "x", "block": {"kind": "poly", "bprime": ["1", "1"]}},
            {"name": "x", "block": {"kind": "poly", "bprime": ["0", "-1"]}},
            {"name": "x", "block": {"kind": "poly", "bprime": []}},
            {"schema_version": "2", "name": "x", "coefficients": ["1"]},
            {"name": "bad name!", "coefficients": ["1"]},
            {"name": "x", "coefficients": ["1"], "growth": {"b": 1}},
        ],
    )
    def test_schema_rejections(self, tmp_path, doc):
        path = tmp_path / "doc.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError):
            species.from_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            species.from_file(tmp_path / "nope.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError):
            species.from_file(path)
