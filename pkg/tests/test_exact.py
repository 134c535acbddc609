"""Tests for exact laws, limit laws and identities."""

from fractions import Fraction

import pytest

from bgwlab.exact import (
    LeafTotalsTable,
    LeavesMax,
    PoissonType,
    Star,
    StepSumTable,
    Transfer,
    admissible_leaf_counts,
    bmax,
    brute_force_law,
    brute_force_total,
    dirichlet_aggregation_moment_check,
    dirichlet_aggregation_sides,
    dirichlet_moment,
    exact_law,
    gamma_ratio_identity_check,
    gamma_ratio_identity_sides,
    limit_reduced,
    maximal_trees,
    outdegree_sorted_dist,
    pervertex_leaf_totals,
    prob_total_internal,
    prob_total_leaves,
    reduced_dist_internal,
    reduced_dist_leaves,
    uniform_binary,
    zeta,
)
from bgwlab.exceptions import EmptyConditioning, InadmissibleK
from bgwlab.models import ScaledRational
from bgwlab.offspring import Finite, Geometric, PolyExp
from bgwlab.trees import PlaneTree, TreeFilter

GEOMETRIC = Geometric(Fraction(1, 2))
UNIFORM3 = Finite([Fraction(1, 3)] * 3)


class TestTotals:
    """Test cases for the absolute probabilities of the conditioning events."""

    def test_cherry_probability(self):
        """Test P(3 vertices, 2 leaves) = mu(2) mu(0)^2."""
        p = prob_total_leaves(UNIFORM3, 3, 2)
        assert isinstance(p, ScaledRational)
        assert p.mantissa == Fraction(1, 27)

    def test_leaves_against_enumeration(self):
        """Test the cycle-lemma formula against enumeration."""
        for d in (GEOMETRIC, UNIFORM3, PolyExp([1])):
            for n in range(1, 9):
                for k in range(1, n + 1):
                    brute = brute_force_total(d, n, TreeFilter(leaves=k))
                    assert prob_total_leaves(d, n, k).mantissa == brute

    def test_internal_against_enumeration(self):
        """Test the internal-node formula against enumeration."""
        for d in (GEOMETRIC, UNIFORM3):
            for n in range(2, 9):
                for k in range(1, n):
                    brute = brute_force_total(d, n, TreeFilter(internal=k))
                    assert prob_total_internal(d, n, k).mantissa == brute

    def test_no_internal_node(self):
        """Test that only the single vertex has no internal node."""
        assert prob_total_internal(GEOMETRIC, 1, 0).mantissa == Fraction(1, 2)
        assert prob_total_internal(GEOMETRIC, 3, 0).mantissa == 0

    def test_scaled_family(self):
        """Test that Poisson totals carry one scale factor per vertex."""
        p = prob_total_leaves(PolyExp([1]), 3, 2)
        assert p.power == 3
        assert p.scale_label == "exp(-P(1))"

    def test_out_of_range(self):
        """Test that impossible (n, k) give zero."""
        assert prob_total_leaves(GEOMETRIC, 3, 4).mantissa == 0


class TestStepSumTable:
    """Test cases for weighted step-sum counts."""

    def test_single_step(self):
        """Test that one step of value s has weight mu(s + 1)."""
        table = StepSumTable(GEOMETRIC, 3, 4)
        for s in range(5):
            assert table.probability(1, s) == GEOMETRIC.rational(s + 1)

    def test_empty_sum(self):
        """Test the zero-step row."""
        table = StepSumTable(GEOMETRIC, 2, 3)
        assert table.count(0, 0) == 1
        assert table.count(0, 2) == 0
        assert table.count(2, -1) == 0

    def test_step_weights_sum(self):
        """Test that next-step weights add up to the row entry."""
        table = StepSumTable(UNIFORM3, 4, 3)
        assert sum(table.step_weights(4, 3)) == table.count(4, 3)


class TestReducedLeaves:
    """Test cases for the reduced-tree law under leaf conditioning."""

    def test_against_enumeration(self):
        """Test exact equality with the enumerated law."""
        for n in range(3, 9):
            for k in range(2, n):
                law = reduced_dist_leaves(GEOMETRIC, n, k)
                flt = TreeFilter(leaves=k)
                brute = brute_force_law(GEOMETRIC, n, flt, "unary_reduced")
                assert law.atoms == brute.atoms

    def test_single_leaf(self):
        """Test that one leaf always reduces to a single vertex."""
        law = reduced_dist_leaves(GEOMETRIC, 6, 1)
        assert law.atoms == {"-1": Fraction(1)}

    def test_sums_to_one(self):
        """Test normalization at a larger size."""
        law = reduced_dist_leaves(GEOMETRIC, 50, 3)
        assert sum(law.atoms.values()) == 1
        assert set(uniform_binary(3).keys()) <= set(law.keys())

    def test_no_unary_weight(self):
        """Test that mu(1) = 0 leaves only trees of size 2k - 1."""
        d = Finite([Fraction(1, 2), 0, Fraction(1, 2)])
        with pytest.raises(EmptyConditioning) as exc_info:
            reduced_dist_leaves(d, 4, 2)
        assert exc_info.value.mode == "leaves"
        assert reduced_dist_leaves(d, 3, 2).atoms == {"1,-1,-1": Fraction(1)}


class TestReducedInternal:
    """Test cases for the reduced-tree law under internal conditioning."""

    def test_against_enumeration(self):
        """Test exact equality with the enumerated law."""
        for d in (GEOMETRIC, UNIFORM3):
            for n in range(3, 9):
                for k in range(2, n):
                    flt = TreeFilter(internal=k)
                    if not brute_force_total(d, n, flt):
                        continue
                    law = reduced_dist_internal(d, n, k)
                    brute = brute_force_law(d, n, flt, "leaf_reduced")
                    assert law.atoms == brute.atoms

    def test_single_internal_node(self):
        """Test the star case."""
        d = Finite([Fraction(1, 2), 0, Fraction(1, 2)])
        assert reduced_dist_internal(d, 3, 1).atoms == {"-1": Fraction(1)}
        with pytest.raises(EmptyConditioning):
            reduced_dist_internal(d, 4, 1)

    def test_no_leaves_possible(self):
        """Test that mu(0) = 0 makes the event empty."""
        with pytest.raises(EmptyConditioning):
            reduced_dist_internal(Finite([0, 1, 1]), 5, 2)

    def test_outdegree_law(self):
        """Test the sorted outdegree law against enumeration."""
        for n in range(3, 9):
            for k in range(1, n):
                flt = TreeFilter(internal=k)
                law = outdegree_sorted_dist(GEOMETRIC, n, k)
                brute = brute_force_law(GEOMETRIC, n, flt, "sorted_outdeg")
                assert law.atoms == brute.atoms

    def test_zeta(self):
        """Test 1 / prod c_u!."""
        assert zeta(PlaneTree.star(3)) == Fraction(1, 6)
        assert zeta(PlaneTree.path(3)) == 1


class TestLeafTotals:
    """Test cases for per-vertex leaf totals given the reduced tree."""

    def setup_method(self):
        """Set up test fixtures."""
        self.a = PlaneTree.star(2)
        self.table = pervertex_leaf_totals(GEOMETRIC, self.a, 12)

    def test_total(self):
        """Test the number of leaves left to spread."""
        assert isinstance(self.table, LeafTotalsTable)
        assert self.table.total == 12 - 3 - 2

    def test_coefficient_identity(self):
        """Test total weight times prod c_u! against the series coefficient."""
        assert self.table.coefficient_identity()
        other = LeafTotalsTable(UNIFORM3, PlaneTree.from_outdegrees([2, 1, 0, 0]), 9)
        assert other.coefficient_identity()

    def test_marginal_matches_law(self):
        """Test that the marginal of the joint law equals the direct marginal."""
        law = self.table.law()
        for u in range(len(self.a)):
            assert law.marginal(u) == self.table.marginal(u)

    def test_step_weights_sum(self):
        """Test that exact step weights add up to the suffix total."""
        s = self.table.total
        assert sum(self.table.step_weights(0, s)) == self.table.int_suffix[0][s]

    def test_too_small(self):
        """Test that n below k + phi_0 is refused."""
        with pytest.raises(EmptyConditioning):
            LeafTotalsTable(GEOMETRIC, PlaneTree.star(3), 5)


class TestMaximalProfiles:
    """Test cases for maximal no-unary profiles."""

    def test_binary(self):
        """Test that binary branching maximizes the vertex count."""
        profile = bmax({0, 1, 2}, 4)
        assert profile.b == {2: 3}
        assert profile.admissible
        assert profile.unique

    def test_prefers_binary(self):
        """Test that outdegree 3 is not used when 2 is available."""
        assert bmax({0, 1, 2, 3}, 5).b == {2: 4}

    def test_inadmissible(self):
        """Test that odd k - 1 cannot be built from outdegree 3 only."""
        assert not bmax({0, 1, 3}, 4).admissible

    def test_ties(self):
        """Test that every maximizer is reported."""
        profile = bmax({0, 4, 5, 6}, 9)
        assert profile.p_max == 2
        assert not profile.unique
        assert profile.alternatives == ({4: 1, 6: 1}, {5: 2})

    def test_admissible_counts(self):
        """Test the admissible leaf counts of a support."""
        assert admissible_leaf_counts({0, 3}, 7) == [1, 3, 5, 7]
        assert admissible_leaf_counts({0, 1, 2}, 4) == [1, 2, 3, 4]

    def test_maximal_trees(self):
        """Test the binary trees with four leaves."""
        profile, trees = maximal_trees(GEOMETRIC, 4)
        assert profile.b == {2: 3}
        assert len(trees) == 5

    def test_maximal_trees_inadmissible(self):
        """Test that an inadmissible k raises."""
        d = Finite([Fraction(1, 2), 0, 0, Fraction(1, 2)])
        with pytest.raises(InadmissibleK) as exc_info:
            maximal_trees(d, 4)
        assert exc_info.value.k == 4


class TestLimitLaws:
    """Test cases for the limit laws of the reduced tree."""

    def test_star(self):
        """Test the point mass on the star."""
        assert limit_reduced(Star(3)).atoms == {"1,-1,-1": Fraction(1)}

    def test_poisson_type(self):
        """Test weights 1 / prod c_u! on trees with three vertices."""
        law = limit_reduced(PoissonType(3))
        assert law.atoms == {"0,0,-1": Fraction(2, 3), "1,-1,-1": Fraction(1, 3)}

    def test_transfer_uniform(self):
        """Test that alpha = 1 gives the uniform law."""
        law = limit_reduced(Transfer(Fraction(1), 4))
        assert set(law.atoms.values()) == {Fraction(1, 5)}

    def test_leaves_max_binary(self):
        """Test that the geometric law has uniform binary limits."""
        assert limit_reduced(LeavesMax(GEOMETRIC, 3)).atoms == uniform_binary(3).atoms

    def test_transfer_alpha(self):
        """Test that alpha must be positive."""
        with pytest.raises(ValueError):
            limit_reduced(Transfer(Fraction(0), 3))


class TestIdentities:
    """Test cases for the exact combinatorial identities."""

    def test_gamma_ratio_example(self):
        """Test p = 2 at alpha = 3/2."""
        lhs, rhs = gamma_ratio_identity_sides(2, Fraction(3, 2))
        assert lhs == rhs == Fraction(15, 4)

    @pytest.mark.parametrize("alpha", ["1/2", "3/2", "7/3", "5", "9/4"])
    def test_gamma_ratio_grid(self, alpha):
        """Test the identity for p <= 8."""
        for p in range(1, 9):
            assert gamma_ratio_identity_check(p, Fraction(alpha))

    def test_dirichlet_moment(self):
        """Test moments of the uniform law on the simplex."""
        assert dirichlet_moment([1, 1], [1, 0]) == Fraction(1, 2)
        assert dirichlet_moment([1, 1], [2, 0]) == Fraction(1, 3)

    def test_aggregation_holds(self):
        """Test the aggregation identity when alpha_1 equals k."""
        alphas = [Fraction(2), Fraction(1)]
        for lam in [(1, 1, 1), (2, 0, 1), (3, 1, 0), (0, 2, 2)]:
            assert dirichlet_aggregation_moment_check(alphas, 2, lam)

    def test_aggregation_fails(self):
        """Test the witness where alpha_1 differs from k."""
        lhs, rhs = dirichlet_aggregation_sides([1, 1], 2, [2, 0, 0])
        assert lhs == Fraction(1, 9)
        assert rhs == Fraction(1, 8)

    def test_aggregation_first_moment(self):
        """Test that first moments agree whatever alpha_1."""
        assert dirichlet_aggregation_moment_check([1, 1], 2, [1, 0, 0])

    def test_aggregation_length(self):
        """Test that the exponent count is checked."""
        with pytest.raises(ValueError):
            dirichlet_aggregation_sides([1, 1], 2, [1, 0])


class TestExactLaw:
    """Test cases for the command-line dispatch."""

    def test_reduced(self):
        """Test the reduced law in both modes."""
        law = exact_law(GEOMETRIC, 8, 3, "leaves", "reduced")
        assert law == reduced_dist_leaves(GEOMETRIC, 8, 3)
        internal = exact_law(GEOMETRIC, 8, 2, "internal", "reduced")
        assert sum(internal.atoms.values()) == 1

    def test_total(self):
        """Test that totals are scaled rationals."""
        total = exact_law(GEOMETRIC, 8, 3, "leaves", "total")
        assert isinstance(total, ScaledRational)

    def test_outdeg_requires_internal(self):
        """Test that the outdegree law is only defined for internal conditioning."""
        with pytest.raises(ValueError) as exc_info:
            exact_law(GEOMETRIC, 8, 3, "leaves", "outdeg")
        assert "internal" in str(exc_info.value)

    def test_unknown_law(self):
        """Test that unknown law names are refused."""
        with pytest.raises(ValueError):
            exact_law(GEOMETRIC, 8, 3, "leaves", "height")
