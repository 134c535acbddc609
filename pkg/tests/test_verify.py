"""Tests for distances, goodness-of-fit tests and sweeps."""

from fractions import Fraction

import numpy as np
import pytest

from bgwlab.config import JobConfig
from bgwlab.exact import Star, Transfer, uniform_binary
from bgwlab.exceptions import DegenerateSupport, NoInternalNode
from bgwlab.models import EmpiricalBatch, IntSeqDist, TreeDist
from bgwlab.offspring import Geometric
from bgwlab.rng import RngStream
from bgwlab.trees import PlaneTree
from bgwlab.verify import (
    METRICS,
    SweepTable,
    chi_square,
    chi_square_test,
    coarsened_outdegrees,
    condensation_stats,
    empirical_batch,
    ks_against_beta,
    limit_law,
    mean_vector,
    parse_limit,
    sweep,
    tv_between_batches,
    tv_empirical,
    tv_exact,
)

GEOMETRIC = Geometric(Fraction(1, 2))


class TestDistances:
    """Test cases for total variation distances."""

    def test_exact_disjoint(self):
        """Test that disjoint point masses are at distance one."""
        assert tv_exact(TreeDist.point_mass("a"), TreeDist.point_mass("b")) == 1

    def test_exact_overlap(self):
        """Test a half overlap."""
        p = TreeDist.uniform(["a", "b"])
        assert tv_exact(p, TreeDist.point_mass("a")) == Fraction(1, 2)
        assert tv_exact(p, p) == 0

    def test_exact_vectors(self):
        """Test laws over integer vectors."""
        p = IntSeqDist({(1, 0): Fraction(1, 4), (0, 1): Fraction(3, 4)})
        q = IntSeqDist({(0, 1): Fraction(1)})
        assert tv_exact(p, q) == Fraction(1, 4)

    def test_empirical(self):
        """Test an empirical law that matches exactly."""
        batch = EmpiricalBatch("tree", ["a", "b", "a", "b"])
        assert tv_empirical(batch, TreeDist.uniform(["a", "b"])) == 0.0
        assert tv_empirical(batch, TreeDist.point_mass("a")) == pytest.approx(0.5)

    def test_empirical_trees(self):
        """Test that trees are counted by their canonical key."""
        batch = EmpiricalBatch("tree", [PlaneTree.star(2)])
        assert tv_empirical(batch, TreeDist.point_mass("1,-1,-1")) == 0.0

    def test_empty_batch(self):
        """Test that an empty batch is rejected."""
        with pytest.raises(ValueError):
            tv_empirical(EmpiricalBatch("tree"), TreeDist.point_mass("a"))

    def test_between_batches(self):
        """Test the distance between two batches."""
        a = EmpiricalBatch("x", [1, 1, 2, 2])
        b = EmpiricalBatch("x", [1, 1, 1, 1])
        assert tv_between_batches(a, b) == pytest.approx(0.5)


class TestChiSquare:
    """Test cases for the chi-square test."""

    def setup_method(self):
        """Set up test fixtures."""
        self.law = TreeDist.uniform(["a", "b"])

    def test_perfect_fit(self):
        """Test that a perfect fit has statistic zero."""
        batch = EmpiricalBatch("tree", ["a"] * 50 + ["b"] * 50)
        result = chi_square_test(batch, self.law)
        assert result.statistic == 0.0
        assert result.dof == 1
        assert result.p_value == pytest.approx(1.0)

    def test_one_degree_of_freedom(self):
        """Test the p-value of statistic 4 with one degree of freedom."""
        batch = EmpiricalBatch("tree", ["a"] * 60 + ["b"] * 40)
        result = chi_square_test(batch, self.law)
        assert result.statistic == pytest.approx(4.0)
        assert result.p_value == pytest.approx(0.0455, abs=1e-3)

    def test_outside_support(self):
        """Test that any draw outside the support gives p = 0."""
        batch = EmpiricalBatch("tree", ["a"] * 50 + ["b"] * 49 + ["c"])
        result = chi_square_test(batch, self.law)
        assert result.outside_support == 1
        assert chi_square(batch, self.law) == 0.0

    def test_degenerate(self):
        """Test that a single bucket is refused."""
        batch = EmpiricalBatch("tree", ["a"] * 10)
        with pytest.raises(DegenerateSupport):
            chi_square_test(batch, TreeDist.point_mass("a"))

    def test_pooling(self):
        """Test that rare atoms are pooled into buckets expecting five draws."""
        law = TreeDist(
            {
                "a": Fraction(1, 2),
                "b": Fraction(1, 4),
                "c": Fraction(1, 8),
                "d": Fraction(1, 8),
            }
        )
        batch = EmpiricalBatch("tree", list("aaaaaaaabbbbccdd"))
        result = chi_square_test(batch, law)
        assert result.buckets == 2
        assert result.dof == 1


class TestBetaFit:
    """Test cases for the Kolmogorov-Smirnov distance to a Beta law."""

    def test_matching_samples(self):
        """Test that Beta samples are close to their law."""
        samples = np.random.default_rng(0).beta(2.0, 3.0, 2000)
        assert ks_against_beta(samples, 2.0, 3.0) < 0.05
        assert ks_against_beta(samples, 3.0, 2.0) > 0.2

    def test_invalid(self):
        """Test parameter and sample validation."""
        with pytest.raises(ValueError):
            ks_against_beta([0.5], 0.0, 1.0)
        with pytest.raises(ValueError):
            ks_against_beta([], 1.0, 1.0)


class TestTreeStatistics:
    """Test cases for condensation and coarsened statistics."""

    def test_condensation(self):
        """Test a tree whose root carries the largest outdegree."""
        s = condensation_stats(PlaneTree.from_outdegrees([3, 0, 2, 0, 0, 0]))
        assert s.root_out == 3
        assert s.max_out == 3
        assert s.second_max_out == 2
        assert s.root_is_max

    def test_condensation_star(self):
        """Test a star, which has no second internal node."""
        s = condensation_stats(PlaneTree.star(4))
        assert s.second_max_out == 0
        assert s.to_dict()["root_is_max"] is True

    def test_single_vertex(self):
        """Test that a lone vertex has no condensation statistics."""
        with pytest.raises(NoInternalNode):
            condensation_stats(PlaneTree.single())

    def test_coarsened(self):
        """Test capped non-root outdegrees."""
        t = PlaneTree.from_outdegrees([2, 3, 0, 0, 0, 1, 0])
        assert coarsened_outdegrees(t) == (3, 1)
        assert coarsened_outdegrees(t, cap=2) == (2, 1)


class TestLimitLaws:
    """Test cases for limit-law names."""

    def test_parse(self):
        """Test each recognized name."""
        assert parse_limit("star", GEOMETRIC, 3) == Star(3)
        assert parse_limit("transfer:alpha=3/2", GEOMETRIC, 3) == Transfer(
            Fraction(3, 2), 3
        )

    @pytest.mark.parametrize("text", ["transfer:beta=1", "transfer", "gaussian"])
    def test_parse_invalid(self, text):
        """Test that malformed names are refused."""
        with pytest.raises(ValueError):
            parse_limit(text, GEOMETRIC, 3)

    def test_binary(self):
        """Test that geometric maximal trees are the binary ones."""
        assert limit_law("binary", GEOMETRIC, 3) == uniform_binary(3)
        assert limit_law("maximal", GEOMETRIC, 3).atoms == uniform_binary(3).atoms

    def test_poisson(self):
        """Test the Poisson-type law on trees with 3 vertices."""
        law = limit_law("poisson", GEOMETRIC, 3)
        assert law.prob("1,-1,-1") == Fraction(1, 3)
        assert law.prob("0,0,-1") == Fraction(2, 3)


class TestSweepTable:
    """Test cases for SweepTable."""

    def setup_method(self):
        """Set up test fixtures."""
        self.table = SweepTable("tv_reduced", decreasing=True, config_hash="abc")
        self.table.add(10, 0.5)
        self.table.add(20, 0.25)

    def test_order(self):
        """Test that n must increase."""
        with pytest.raises(ValueError) as exc_info:
            self.table.add(20, 0.1)
        assert "increasing" in str(exc_info.value)

    def test_trend(self):
        """Test the declared direction."""
        assert self.table.trend_holds()
        assert self.table.failures() == []
        rising = SweepTable("star_mass", decreasing=True)
        rising.add(1, 0.1)
        rising.add(2, 0.2)
        assert len(rising.failures()) == 1

    def test_thresholds(self):
        """Test final_max and final_min bounds."""
        self.table.thresholds = {"final_max": 0.1, "final_min": 0.3}
        failures = self.table.failures()
        assert len(failures) == 2
        assert ">= 0.1" in failures[0]

    def test_csv(self):
        """Test the CSV layout."""
        self.table.thresholds = {"final_max": 0.3}
        assert self.table.to_csv() == (
            "# metric: tv_reduced\n"
            "# config_hash: abc\n"
            "# seeds: \n"
            "# threshold final_max: 0.3\n"
            "n,value\n"
            "10,0.5\n"
            "20,0.25\n"
        )

    def test_csv_meta(self):
        """Test extra columns from row metadata."""
        table = SweepTable("dnk_tv", seeds=[5])
        table.add(10, 0.5, substream=0)
        lines = table.to_csv().splitlines()
        assert lines[2] == "# seeds: 5"
        assert lines[-2:] == ["n,value,substream", "10,0.5,0"]


class TestSweep:
    """Test cases for metric sweeps."""

    def test_exact_metric(self):
        """Test that the reduced law approaches the binary limit."""
        config = JobConfig(
            "sweep",
            dist="geometric:p=1/2",
            k=3,
            metric="tv_reduced",
            n_grid=[10, 40, 160],
            thresholds={"final_max": 0.2},
        )
        table = sweep("tv_reduced", config.n_grid, config)
        assert [row.n for row in table.rows] == [10, 40, 160]
        assert table.final < table.initial
        assert table.failures() == []
        assert table.seeds == []
        assert table.config_hash == config.config_hash()

    def test_sampled_metric_needs_seed(self):
        """Test that Monte-Carlo metrics refuse to run without a seed."""
        config = JobConfig(
            "sweep",
            dist="geometric:p=1/2",
            k=3,
            mode="internal",
            metric="root_fraction",
            n_grid=[10, 20],
        )
        with pytest.raises(ValueError) as exc_info:
            sweep("root_fraction", config.n_grid, config)
        assert "seed" in str(exc_info.value)

    def test_sampled_metric(self):
        """Test a small Monte-Carlo sweep."""
        config = JobConfig(
            "sweep",
            dist="geometric:p=1/2",
            k=2,
            mode="internal",
            metric="root_fraction",
            n_grid=[10, 20],
            samples=20,
            seed=3,
        )
        table = sweep("root_fraction", config.n_grid, config)
        assert table.seeds == [3]
        assert [row.meta["substream"] for row in table.rows] == [0, 1]
        assert all(0 < row.value < 1 for row in table.rows)

    def test_unknown_metric(self):
        """Test that unknown metrics are refused."""
        config = JobConfig(
            "sweep", dist="geometric:p=1/2", k=3, metric="tv_reduced", n_grid=[10]
        )
        with pytest.raises(ValueError) as exc_info:
            sweep("entropy", config.n_grid, config)
        assert "entropy" in str(exc_info.value)
        assert "tv_reduced" in METRICS


class TestHelpers:
    """Test cases for small helpers."""

    def test_empirical_batch(self):
        """Test seed provenance."""
        batch = empirical_batch("root", [1, 2], RngStream(4, 2))
        assert batch.seed == 4
        assert batch.substream == 2
        assert batch.size == 2

    def test_mean_vector(self):
        """Test coordinatewise means."""
        assert mean_vector([[1.0, 2.0], [3.0, 4.0]]) == [2.0, 3.0]
        assert mean_vector([]) == []
