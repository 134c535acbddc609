"""Tests for the tree samplers."""

import itertools
from collections import Counter
from fractions import Fraction
from unittest import mock

import numpy as np
import pytest

from bgwlab.exact import brute_force_law, reduced_dist_leaves
from bgwlab.exceptions import EmptyConditioning, GaveUp, InadmissibleK
from bgwlab.models import EmpiricalBatch, Overflow, SamplerReport
from bgwlab.offspring import Finite, Geometric
from bgwlab.rng import RngStream
from bgwlab.samplers import (
    RejectionSampler,
    default_dnk_fallback,
    draw_batch,
    draw_internal_decomposition,
    format_sample_dump,
    sample_bgw,
    sample_composition,
    sample_dirichlet,
    sample_Dnk,
    sample_internal_exact,
    sample_leaf_sequence_limit,
    sample_leaves_cycle,
    sample_leaves_exact,
    sample_rejection,
    sample_uniform_maximal,
    unrank_combination,
)
from bgwlab.trees import PlaneTree, TreeFilter, decompose_unary
from bgwlab.verify import chi_square

GEOMETRIC = Geometric(Fraction(1, 2))
BINARY = Finite([Fraction(1, 2), 0, Fraction(1, 2)])
UNIFORM3 = Finite([Fraction(1, 3)] * 3)


class TestCombinatorics:
    """Test cases for subset unranking and compositions."""

    def setup_method(self):
        """Set up test fixtures."""
        self.stream = RngStream(11)

    @pytest.mark.parametrize("n,r", [(5, 2), (6, 3), (4, 1), (4, 4)])
    def test_unrank_lexicographic(self, n, r):
        """Test that ranks follow lexicographic order of subsets."""
        expected = [list(c) for c in itertools.combinations(range(n), r)]
        assert [unrank_combination(i, n, r) for i in range(len(expected))] == expected

    def test_composition_shape(self):
        """Test part count and total."""
        for _ in range(50):
            parts = sample_composition(7, 3, self.stream)
            assert len(parts) == 3
            assert sum(parts) == 7
            assert min(parts) >= 0
        assert sample_composition(4, 1, self.stream) == (4,)

    def test_composition_uniform(self):
        """Test that the three compositions of 2 into 2 parts are equally likely."""
        counts = Counter(sample_composition(2, 2, self.stream) for _ in range(3000))
        assert set(counts) == {(0, 2), (1, 1), (2, 0)}
        for c in counts.values():
            assert c / 3000 == pytest.approx(1 / 3, abs=0.04)

    def test_composition_invalid(self):
        """Test that zero parts are rejected."""
        with pytest.raises(ValueError):
            sample_composition(3, 0, self.stream)

    def test_dirichlet(self):
        """Test that Dirichlet draws lie on the simplex."""
        x = sample_dirichlet([0.5, 1.0, 2.0], self.stream)
        assert x.sum() == pytest.approx(1.0)
        assert (x > 0).all()
        with pytest.raises(ValueError):
            sample_dirichlet([], self.stream)


class TestUnconditioned:
    """Test cases for the plain BGW sampler."""

    def test_tree(self):
        """Test that a subcritical draw is a valid tree."""
        d = Finite([Fraction(3, 4), Fraction(1, 4)])
        t = sample_bgw(d, RngStream(5))
        assert isinstance(t, PlaneTree)
        assert t.leaves == 1

    def test_overflow(self):
        """Test that an always-binary law overflows its cap."""
        result = sample_bgw(Finite([0, 0, 1]), RngStream(5), max_vertices=50)
        assert isinstance(result, Overflow)
        assert result.cap == 50
        assert result.vertices > 50


class TestLeafSamplers:
    """Test cases for samplers conditioned on the number of leaves."""

    def setup_method(self):
        """Set up test fixtures."""
        self.stream = RngStream(20240611)

    @pytest.mark.parametrize("sampler", [sample_leaves_exact, sample_leaves_cycle])
    def test_shape(self, sampler):
        """Test that draws have n vertices and k leaves."""
        for n, k in [(1, 1), (10, 3), (25, 7), (12, 11)]:
            t = sampler(GEOMETRIC, n, k, self.stream)
            assert len(t) == n
            assert t.leaves == k

    @pytest.mark.parametrize("sampler", [sample_leaves_exact, sample_leaves_cycle])
    def test_empty(self, sampler):
        """Test that impossible events raise."""
        with pytest.raises(EmptyConditioning):
            sampler(BINARY, 4, 2, self.stream)

    @pytest.mark.parametrize("sampler", [sample_leaves_exact, sample_leaves_cycle])
    def test_law(self, sampler):
        """Test the law of the full tree against enumeration."""
        law = brute_force_law(GEOMETRIC, 6, TreeFilter(leaves=3))
        values = [sampler(GEOMETRIC, 6, 3, self.stream) for _ in range(2000)]
        assert chi_square(EmpiricalBatch("tree", values), law) > 1e-4

    def test_reduced_law(self):
        """Test the reduced tree of exact draws against its exact law."""
        law = reduced_dist_leaves(GEOMETRIC, 30, 3)
        draw = sample_leaves_exact
        trees = [draw(GEOMETRIC, 30, 3, self.stream) for _ in range(1500)]
        values = [decompose_unary(t).reduced for t in trees]
        assert chi_square(EmpiricalBatch("reduced", values), law) > 1e-4


class TestRejection:
    """Test cases for the rejection sampler."""

    def test_shape(self):
        """Test that accepted draws meet the condition."""
        stream = RngStream(3)
        t = sample_rejection(GEOMETRIC, 6, 2, "leaves", stream)
        assert len(t) == 6 and t.leaves == 2
        t = sample_rejection(GEOMETRIC, 6, 2, "internal", stream)
        assert len(t) == 6 and t.internal == 2

    def test_gave_up(self):
        """Test that an impossible event exhausts the tries."""
        sampler = RejectionSampler(GEOMETRIC, 5, 5, "leaves", RngStream(3), 100)
        with pytest.raises(GaveUp) as exc_info:
            sampler.draw()
        assert exc_info.value.tries == 100

    def test_report(self):
        """Test that rejections are counted."""
        report = SamplerReport()
        sampler = RejectionSampler(
            GEOMETRIC, 8, 3, "leaves", RngStream(4), report=report
        )
        sampler.draw()
        assert report.samples == 1
        assert report.rejections > 0
        assert 0 < report.acceptance_rate < 1


class TestInternalSamplers:
    """Test cases for samplers conditioned on the number of internal nodes."""

    def setup_method(self):
        """Set up test fixtures."""
        self.stream = RngStream(77)

    def test_shape(self):
        """Test that draws have n vertices and k internal nodes."""
        for d in (GEOMETRIC, UNIFORM3):
            for n, k in [(2, 1), (5, 3), (7, 4), (12, 6)]:
                t = sample_internal_exact(d, n, k, self.stream)
                assert len(t) == n
                assert t.internal == k

    def test_star(self):
        """Test that one internal node forces a star."""
        assert sample_internal_exact(GEOMETRIC, 5, 1, self.stream) == PlaneTree.star(4)
        with pytest.raises(EmptyConditioning):
            sample_internal_exact(UNIFORM3, 5, 1, self.stream)

    def test_decomposition(self):
        """Test that the drawn leaf sequence fits its core."""
        dec = draw_internal_decomposition(GEOMETRIC, 15, 4, self.stream)
        assert len(dec.core) == 4
        assert len(dec.leaf_seq) == 7
        assert dec.size == 15

    def test_law(self):
        """Test the law of the full tree against enumeration."""
        law = brute_force_law(UNIFORM3, 6, TreeFilter(internal=3))
        draw = sample_internal_exact
        values = [draw(UNIFORM3, 6, 3, self.stream) for _ in range(2000)]
        assert chi_square(EmpiricalBatch("tree", values), law) > 1e-4


class TestCoupling:
    """Test cases for the big-jump coupling tree."""

    def setup_method(self):
        """Set up test fixtures."""
        self.stream = RngStream(8)

    def test_fallback_shape(self):
        """Test the fixed fallback tree in both regimes."""
        for n, k in [(7, 3), (5, 3), (2, 1), (40, 6)]:
            t = default_dnk_fallback(n, k)
            assert len(t) == n
            assert t.internal == k
        with pytest.raises(ValueError):
            default_dnk_fallback(3, 3)

    def test_shape(self):
        """Test that draws have n vertices and k internal nodes."""
        for n, k in [(30, 4), (100, 3), (6, 1)]:
            t = sample_Dnk(GEOMETRIC, n, k, self.stream)
            assert len(t) == n
            assert t.internal == k

    def test_core_leaves_get_z_children(self):
        """Test that each core leaf receives exactly Z_i leaf children."""
        # geometric 1/2: Z = 1 below 1/2, Z = 2 on [1/2, 3/4)
        uniforms = np.array([0.1, 0.6])
        with mock.patch.object(self.stream, "uniform", return_value=uniforms):
            t = sample_Dnk(GEOMETRIC, 20, 3, self.stream)
        assert len(t) == 20
        assert sorted(c for c in t.outdegrees if c) == [1, 2, 16]
        assert t.outdegrees[0] == 16

    def test_bad_fallback(self):
        """Test that a fallback of the wrong shape is rejected."""
        with pytest.raises(ValueError) as exc_info:
            sample_Dnk(GEOMETRIC, 7, 3, self.stream, PlaneTree.star(3))
        assert "fallback" in str(exc_info.value)


class TestMaximal:
    """Test cases for uniform maximal no-unary trees."""

    def test_binary(self):
        """Test that geometric weights give binary trees."""
        t = sample_uniform_maximal(GEOMETRIC, 4, RngStream(2))
        assert len(t) == 7
        assert t.leaves == 4
        assert not t.has_unary

    def test_inadmissible(self):
        """Test that a leaf count no tree realizes is refused."""
        d = Finite([Fraction(1, 2), 0, 0, Fraction(1, 2)])
        with pytest.raises(InadmissibleK) as exc_info:
            sample_uniform_maximal(d, 2, RngStream(2))
        assert exc_info.value.k == 2

    def test_leaf_sequence_limit(self):
        """Test that the limit leaf sequence is a point of the simplex."""
        x = sample_leaf_sequence_limit(PlaneTree.star(2), 1.0, RngStream(2))
        assert len(x) == 5
        assert x.sum() == pytest.approx(1.0)
        assert np.all(x >= 0)


class TestDrawBatch:
    """Test cases for draw_batch and the sample dump."""

    def test_exact_batch(self):
        """Test counts and report of a batch."""
        samples, report = draw_batch(
            "exact", GEOMETRIC, 8, 3, "leaves", RngStream(1), 20
        )
        assert len(samples) == 20
        assert report.samples == 20
        assert report.wall_time >= 0

    def test_reproducible(self):
        """Test that equal seeds give equal batches."""
        first, _ = draw_batch("cycle", GEOMETRIC, 12, 4, "leaves", RngStream(5), 10)
        second, _ = draw_batch("cycle", GEOMETRIC, 12, 4, "leaves", RngStream(5), 10)
        assert [t.key for t in first] == [t.key for t in second]

    def test_mode_mismatch(self):
        """Test samplers that fit only one conditioning."""
        with pytest.raises(ValueError):
            draw_batch("cycle", GEOMETRIC, 8, 3, "internal", RngStream(1), 1)
        with pytest.raises(ValueError):
            draw_batch("dnk", GEOMETRIC, 8, 3, "leaves", RngStream(1), 1)

    def test_unknown_sampler(self):
        """Test that an unknown name is refused."""
        with pytest.raises(ValueError) as exc_info:
            draw_batch("mcmc", GEOMETRIC, 8, 3, "leaves", RngStream(1), 1)
        assert "mcmc" in str(exc_info.value)

    def test_dump(self):
        """Test the one-tree-per-line format."""
        text = format_sample_dump(
            [PlaneTree.star(2), Overflow(12, 10)], {"seed": 1, "sampler": "bgw"}
        )
        assert text == "# seed: 1\n# sampler: bgw\n1,-1,-1\noverflow>10\n"
