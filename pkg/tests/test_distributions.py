import numpy as np
import pytest

import vbsense as vb
from vbsense.distributions import expand_degrees


class TestMakeDistribution:
    def test_two_component_table_row(self):
        dd = vb.make_distribution([(3, 0.9), (13, 0.1)])
        assert dd.degrees == (3, 13)
        assert dd.mean_degree == pytest.approx(4.0, abs=1e-12)

    def test_regular_single_degree(self):
        dd = vb.make_distribution([(4, 1.0)])
        assert dd.is_regular()
        assert dd.mean_degree == 4

    def test_duplicate_degree_rejected(self):
        with pytest.raises(vb.DuplicateDegree):
            vb.make_distribution([(3, 0.5), (3, 0.5)])

    def test_non_positive_degree_rejected(self):
        with pytest.raises(vb.NonPositiveDegree):
            vb.make_distribution([(0, 1.0)])
        with pytest.raises(vb.NonPositiveDegree):
            vb.make_distribution([(3, -0.2), (4, 1.2)])

    def test_non_unit_mass_rejected_without_normalize(self):
        with pytest.raises(vb.NonUnitMass):
            vb.make_distribution([(3, 0.5), (13, 0.4)])

    def test_normalize_flag(self):
        dd = vb.make_distribution([(3, 2.0), (13, 2.0)], normalize=True)
        assert dd.fractions == (0.5, 0.5)

    def test_entries_sorted_ascending(self):
        dd = vb.make_distribution([(13, 0.1), (3, 0.9)])
        assert dd.degrees == (3, 13)

    def test_tiny_mass_slack_accepted(self):
        dd = vb.make_distribution([(3, 0.9), (13, 0.1 + 1e-12)])
        assert abs(sum(dd.fractions) - 1.0) < 1e-9


class TestMeanDegree:
    def test_check_side_mixture(self):
        dd = vb.make_distribution([(4, 0.9375), (20, 0.0625)], side="check")
        assert vb.mean_degree(dd) == pytest.approx(5.0, abs=1e-12)

    def test_regular(self):
        assert vb.mean_degree(vb.make_distribution([(5, 1.0)])) == 5

    def test_rational_fraction_exact(self):
        dd = vb.make_distribution([(3, 14 / 15), (18, 1 / 15)])
        assert vb.mean_degree(dd) == pytest.approx(4.0, abs=1e-12)

    def test_printed_decimal_close(self):
        dd = vb.make_distribution([(3, 0.9333), (18, 0.0667)])
        assert vb.mean_degree(dd) == pytest.approx(4.0, abs=1e-3)


class TestParsing:
    def test_parse_mixture(self):
        dd = vb.parse_distribution("0.9x^3+0.1x^13")
        assert dd.entries == ((3, 0.9), (13, 0.1))

    def test_parse_regular_and_whitespace(self):
        assert vb.parse_distribution(" x^4 ").entries == ((4, 1.0),)
        assert vb.parse_distribution("0.9375 x^4 + 0.0625 x^20").degrees == (4, 20)

    def test_parse_rational_coefficients(self):
        dd = vb.parse_distribution("14/15x^3+1/15x^18")
        assert dd.fractions[0] == 14 / 15

    def test_parse_bare_x_is_degree_one(self):
        assert vb.parse_distribution("0.5x+0.5x^2").degrees == (1, 2)

    def test_parse_garbage_rejected(self):
        with pytest.raises(vb.ValidationError):
            vb.parse_distribution("3x^")
        with pytest.raises(vb.ValidationError):
            vb.parse_distribution("")

    def test_text_round_trip(self):
        for text in ("0.9x^3+0.1x^13", "x^5", "0.931x^3+0.035x^17+0.034x^18"):
            dd = vb.parse_distribution(text)
            assert vb.parse_distribution(dd.to_text()).entries == dd.entries

    def test_json_round_trip(self):
        dd = vb.parse_distribution("0.9x^3+0.1x^13")
        back = vb.distribution_from_json(dd.to_json())
        assert back.entries == dd.entries


class TestNodeCounts:
    def test_exact_fractions_bimodal(self):
        dd = vb.parse_distribution("0.9x^3+0.1x^13")
        assert vb.node_counts(dd, 100, 400) == {3: 90, 13: 10}

    def test_exact_fractions_check_side(self):
        dd = vb.parse_distribution("0.9375x^4+0.0625x^20", side="check")
        assert vb.node_counts(dd, 80, 400) == {4: 75, 20: 5}

    def test_three_component_repair(self):
        dd = vb.parse_distribution("0.931x^3+0.035x^17+0.034x^18")
        counts = vb.node_counts(dd, 1000, 4000)
        assert sum(counts.values()) == 1000
        assert sum(d * c for d, c in counts.items()) == 4000
        # repair moves at most a few nodes off the rounded fractions
        assert abs(counts[3] - 931) <= 2

    def test_infeasible_budget(self):
        dd = vb.parse_distribution("0.9x^3+0.1x^13")
        with pytest.raises(vb.InfeasibleEdgeBudget):
            vb.node_counts(dd, 100, 404)  # gap 10 cannot absorb +4

    def test_budget_out_of_range(self):
        dd = vb.parse_distribution("x^4")
        with pytest.raises(vb.InfeasibleEdgeBudget):
            vb.node_counts(dd, 10, 10_000)

    def test_random_supports_exact_sums(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            size = rng.integers(1, 5)
            degrees = np.sort(rng.choice(np.arange(1, 21), size=size, replace=False))
            fractions = rng.dirichlet(np.ones(size))
            if np.any(fractions < 1e-3):
                continue
            dd = vb.make_distribution(list(zip(degrees, fractions)), normalize=True)
            count = int(rng.integers(10, 2000))
            budget = int(round(count * dd.mean_degree))
            try:
                counts = vb.node_counts(dd, count, budget)
            except vb.InfeasibleEdgeBudget:
                continue
            assert sum(counts.values()) == count
            assert sum(d * c for d, c in counts.items()) == budget
            assert all(c > 0 for c in counts.values())

    def test_expand_degrees_ascending_blocks(self):
        assert list(expand_degrees({3: 2, 13: 1})) == [3, 3, 13]
