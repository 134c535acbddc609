"""
Exact conditional laws of BGW trees.

Every law here is a ratio of weights of trees with the same number of
vertices, so offspring scale tokens cancel and the results are exact
rationals. Absolute probabilities keep their scale power explicitly.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .exceptions import EmptyConditioning, InadmissibleK
from .models import IntSeqDist, ScaledRational, TreeDist
from .offspring import Mode, OffspringWeights, falling, rising
from .series import build_Ga, log_convolve
from .trees import (
    PlaneTree,
    TreeFilter,
    decompose_leaves,
    decompose_unary,
    enumerate_profile,
    iter_outdegree_sequences,
)

logger = logging.getLogger(__name__)


def tree_weight(d: OffspringWeights, t: PlaneTree) -> Fraction:
    """Product of the rational parts of mu over the vertices of t."""
    out = Fraction(1)
    for deg, count in t.profile.items():
        out *= d.rational(deg) ** count
    return out


def zeta(a: PlaneTree) -> Fraction:
    """1 / prod of c_u! over the internal vertices."""
    return Fraction(1, math.prod(math.factorial(c) for c in a.internal_outdegrees))


def brute_force_law(
    d: OffspringWeights,
    n: int,
    flt: TreeFilter,
    statistic: str = "tree",
) -> Union[TreeDist, IntSeqDist]:
    """
    Law of a statistic of T given the filter, by exhaustive enumeration.

    ``statistic`` is ``tree``, ``unary_reduced``, ``leaf_reduced`` or
    ``sorted_outdeg`` (largest internal outdegrees minus one).
    """
    weights: Dict[str, Fraction] = {}
    vectors: Dict[Tuple[int, ...], Fraction] = {}
    for seq in iter_outdegree_sequences(n, flt):
        t = PlaneTree.from_outdegrees(seq)
        w = tree_weight(d, t)
        if not w:
            continue
        if statistic == "sorted_outdeg":
            key_vec = t.sorted_excess(t.internal)
            vectors[key_vec] = vectors.get(key_vec, Fraction(0)) + w
            continue
        if statistic == "tree":
            key = t.key
        elif statistic == "unary_reduced":
            key = decompose_unary(t).reduced.key
        elif statistic == "leaf_reduced":
            key = decompose_leaves(t).core.key
        else:
            raise ValueError(f"Unknown statistic {statistic!r}")
        weights[key] = weights.get(key, Fraction(0)) + w
    if statistic == "sorted_outdeg":
        return IntSeqDist.from_weights(vectors)
    return TreeDist.from_weights(weights, f"brute force over n={n}")


def brute_force_total(d: OffspringWeights, n: int, flt: TreeFilter) -> Fraction:
    """Total rational weight of the trees with n vertices accepted by the filter."""
    trees = (PlaneTree.from_outdegrees(s) for s in iter_outdegree_sequences(n, flt))
    return sum((tree_weight(d, t) for t in trees), Fraction(0))


@dataclass(frozen=True)
class MaxProfile:
    """
    Outdegree profile of the no-unary trees with k leaves and the most vertices.

    ``b`` maps outdegrees j >= 2 to counts with sum b_j (j - 1) = k - 1;
    ``alternatives`` lists every maximizer, ``b`` first.
    """

    k: int
    b: Dict[int, int]
    p_max: int
    admissible: bool
    alternatives: Tuple[Dict[int, int], ...] = ()

    @property
    def unique(self) -> bool:
        return len(self.alternatives) <= 1

    def full_profiles(self) -> List[Dict[int, int]]:
        """Complete outdegree profiles, leaves included, of every maximizer."""
        return [dict(sorted({0: self.k, **b}.items())) for b in self.alternatives]


def _profiles(degrees: Sequence[int], budget: int) -> Iterator[Dict[int, int]]:
    if not degrees:
        if budget == 0:
            yield {}
        return
    j, rest = degrees[0], degrees[1:]
    for count in range(budget // (j - 1), -1, -1):
        for tail in _profiles(rest, budget - count * (j - 1)):
            yield {j: count, **tail} if count else tail


def bmax(support: Iterable[int], k: int) -> MaxProfile:
    """
    Maximal profile for leaf count k over the outdegrees of a support.

    Searches every profile with sum b_j (j - 1) = k - 1 over the support
    outdegrees j >= 2; the bound b_j <= (k - 1)/(j - 1) keeps it finite.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    degrees = sorted(j for j in set(support) if j >= 2 and j - 1 <= k - 1)
    best: List[Dict[int, int]] = []
    best_size = -1
    for b in _profiles(degrees, k - 1):
        size = sum(b.values())
        if size > best_size:
            best, best_size = [b], size
        elif size == best_size:
            best.append(b)
    if not best:
        return MaxProfile(k, {}, 0, False)
    if len(best) > 1:
        logger.info("k=%d has %d maximal profiles", k, len(best))
    return MaxProfile(k, best[0], best_size, True, tuple(best))


def admissible_leaf_counts(support: Iterable[int], k_max: int) -> List[int]:
    """Leaf counts 1..k_max that some no-unary tree over the support realizes."""
    steps = sorted(j - 1 for j in set(support) if j >= 2)
    reachable = [False] * k_max
    reachable[0] = True
    for s in range(1, k_max):
        reachable[s] = any(s >= step and reachable[s - step] for step in steps)
    return [s + 1 for s in range(k_max) if reachable[s]]


def reduced_dist_leaves(d: OffspringWeights, n: int, k: int) -> TreeDist:
    """
    Law of the tree without unary vertices of T conditioned on n vertices and
    k leaves.

    A reduced tree a with |a| vertices has mass proportional to
    binom(n-1, |a|-1) mu(0)^k mu(1)^(n-|a|) prod_{i>=2} mu(i)^phi_i(a).

    Raises:
        EmptyConditioning: If no tree of the event has positive weight
    """
    if k < 1 or n < k:
        raise EmptyConditioning(n, k, Mode.LEAVES.value)
    mu0, mu1 = d.rational(0), d.rational(1)
    weights: Dict[str, Fraction] = {}
    for size in range(1 if k == 1 else k + 1, min(2 * k - 1, n) + 1):
        for seq in iter_outdegree_sequences(size, TreeFilter(leaves=k, no_unary=True)):
            a = PlaneTree.from_outdegrees(seq)
            mass = math.comb(n - 1, size - 1) * mu0**k * mu1 ** (n - size)
            for deg, count in a.profile.items():
                if deg >= 2:
                    mass *= d.rational(deg) ** count
            if mass:
                weights[a.key] = mass
    if not weights:
        raise EmptyConditioning(n, k, Mode.LEAVES.value)
    return TreeDist.from_weights(weights, f"no-unary trees with {k} leaves")


class StepSumTable:
    """
    Weighted counts of nonnegative step vectors with a prescribed sum.

    ``count(r, s)`` is the sum over (y_1, ..., y_r) >= 0 with sum s of
    prod W(y_j), where W(y) = D mu(y + 1) are integers for the common
    denominator D. Rows are shared by every suffix length, so the table
    serves both the total probabilities and backward sampling.
    """

    def __init__(self, d: OffspringWeights, length: int, total: int) -> None:
        self.length = length
        self.total = total
        rationals = d.rationals(total + 1)[1:] if total >= 0 else ()
        self.denominator = (
            math.lcm(*(r.denominator for r in rationals)) if rationals else 1
        )
        self.weights = [
            r.numerator * (self.denominator // r.denominator) for r in rationals
        ]
        width = max(total, 0) + 1
        row = [1] + [0] * (width - 1)
        self.rows: List[List[int]] = [row]
        for _ in range(length):
            row = [
                sum(self.weights[y] * row[s - y] for y in range(s + 1))
                for s in range(width)
            ]
            self.rows.append(row)
        logger.debug("step-sum table: %d rows, sums up to %d", length + 1, total)

    def count(self, remaining: int, s: int) -> int:
        if s < 0 or s > self.total:
            return 0
        return self.rows[remaining][s]

    def probability(self, remaining: int, s: int) -> Fraction:
        """count(remaining, s) with the common denominator divided out."""
        return Fraction(self.count(remaining, s), self.denominator**remaining)

    def step_weights(self, remaining: int, s: int) -> List[int]:
        """Integer weights of the next step y = 0..s given ``remaining`` steps left."""
        return [
            self.weights[y] * self.count(remaining - 1, s - y) for y in range(s + 1)
        ]


def _scaled(d: OffspringWeights, mantissa: Fraction, power: int) -> ScaledRational:
    return ScaledRational(mantissa, power * d.scale_power, d.scale, d.scale_label)


def prob_total_leaves(d: OffspringWeights, n: int, k: int) -> ScaledRational:
    """
    P(T has n vertices and k leaves), by the cycle lemma.

    Equals (mu(0)^k / n) binom(n, k) times the weighted number of n - k
    nonnegative steps summing to k - 1, each step y weighted mu(y + 1).
    """
    if n < 1 or k < 1 or k > n:
        return _scaled(d, Fraction(0), n)
    table = StepSumTable(d, n - k, k - 1)
    inner = table.probability(n - k, k - 1)
    mantissa = d.rational(0) ** k * math.comb(n, k) * inner / n
    return _scaled(d, mantissa, n)


def prob_total_internal(d: OffspringWeights, n: int, k: int) -> ScaledRational:
    """
    P(T has n vertices and k internal nodes).

    Equals (1/n) binom(n, k) mu(0)^(n-k) [z^(n-k-1)] Ftilde^k with
    Ftilde = (F - mu(0))/z.
    """
    if k == 0:
        return _scaled(d, d.rational(0) if n == 1 else Fraction(0), n)
    if n < 1 or k < 0 or n - k - 1 < 0:
        return _scaled(d, Fraction(0), n)
    table = StepSumTable(d, k, n - k - 1)
    inner = table.probability(k, n - k - 1)
    mantissa = d.rational(0) ** (n - k) * math.comb(n, k) * inner / n
    return _scaled(d, mantissa, n)


def _internal_supports(k: int) -> List[PlaneTree]:
    return [PlaneTree.from_outdegrees(s) for s in iter_outdegree_sequences(k)]


def reduced_internal_weights(
    d: OffspringWeights, n: int, k: int
) -> Dict[str, Fraction]:
    """Unnormalized masses zeta(a) [z^(n-k-phi_0(a))] G^a over trees with k vertices."""
    weights: Dict[str, Fraction] = {}
    for a in _internal_supports(k):
        order = n - k - a.phi(0)
        if order < 0:
            continue
        mass = zeta(a) * build_Ga(d, a, order).coeff(order)
        if mass:
            weights[a.key] = mass
    return weights


def reduced_dist_internal(d: OffspringWeights, n: int, k: int) -> TreeDist:
    """
    Law of the tree of internal nodes of T conditioned on n vertices and k
    internal nodes.

    Raises:
        EmptyConditioning: If mu(0) = 0 or no tree of the event has positive weight
    """
    if k < 1 or n < k + 1 or d.rational(0) == 0:
        raise EmptyConditioning(n, k, Mode.INTERNAL.value)
    if k == 1:
        if d.rational(n - 1) == 0:
            raise EmptyConditioning(n, k, Mode.INTERNAL.value)
        return TreeDist.point_mass(PlaneTree.single().key, "trees with 1 vertex")
    weights = reduced_internal_weights(d, n, k)
    if not weights:
        raise EmptyConditioning(n, k, Mode.INTERNAL.value)
    return TreeDist.from_weights(weights, f"trees with {k} vertices")


def _partitions(total: int, parts: int, cap: int) -> Iterator[Tuple[int, ...]]:
    """Non-increasing tuples of ``parts`` entries in 0..cap summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(total, cap), -1, -1):
        if first * parts < total:
            break
        for rest in _partitions(total - first, parts - 1, first):
            yield (first,) + rest


def outdegree_sorted_dist(d: OffspringWeights, n: int, k: int) -> IntSeqDist:
    """
    Law of the k internal outdegrees minus one of T given n vertices and k
    internal nodes, sorted in decreasing order.

    By exchangeability of the internal steps this is the law of k i.i.d.
    values with weights mu(y + 1) conditioned to sum to n - k - 1, sorted.

    Raises:
        EmptyConditioning: If the event has zero probability
    """
    total = n - k - 1
    if k < 1 or total < 0 or d.rational(0) == 0:
        raise EmptyConditioning(n, k, Mode.INTERNAL.value)
    weights: Dict[Tuple[int, ...], Fraction] = {}
    for y in _partitions(total, k, total):
        mass = Fraction(math.factorial(k))
        for _, group in itertools.groupby(y):
            mass /= math.factorial(len(list(group)))
        for value in y:
            mass *= d.rational(value + 1)
        if mass:
            weights[y] = mass
    if not weights:
        raise EmptyConditioning(n, k, Mode.INTERNAL.value)
    return IntSeqDist.from_weights(weights)


class LeafTotalsTable:
    """
    Joint law of the leaf totals (i_u) of the internal nodes of T_{n,k} given
    its reduced tree a.

    The weight of (i_u) is prod_u binom(c_u + i_u, c_u) mu(ct_u + i_u) over
    vectors summing to n - k - phi_0(a), where ct_u = c_u for internal
    vertices of a and 1 for its leaves. Float log-space suffix tables back
    fast proposals; exact integer tables are built on first use.
    """

    def __init__(self, d: OffspringWeights, a: PlaneTree, n: int) -> None:
        self.d = d
        self.a = a
        self.n = n
        self.k = len(a)
        self.total = n - self.k - a.phi(0)
        if self.total < 0:
            raise EmptyConditioning(n, self.k, Mode.INTERNAL.value)
        self.children = a.outdegrees
        self.offsets = tuple(c if c else 1 for c in self.children)

    def vertex_weights(self, u: int) -> List[Fraction]:
        """Exact weights f_u(i), i = 0..total."""
        c, off = self.children[u], self.offsets[u]
        mus = self.d.rationals(self.total + off)[off:]
        return [math.comb(c + i, c) * mu for i, mu in enumerate(mus)]

    @cached_property
    def log_vertex_weights(self) -> Tuple[np.ndarray, ...]:
        out = []
        i = np.arange(self.total + 1, dtype=float)
        for c, off in zip(self.children, self.offsets):
            logs = self.d.log_rationals(self.total + off)[off:]
            binom = special.gammaln(i + c + 1.0) - special.gammaln(i + 1.0)
            out.append(logs + binom - math.lgamma(c + 1))
        return tuple(out)

    @cached_property
    def log_suffix(self) -> Tuple[np.ndarray, ...]:
        """log of sum over i_u..i_{k-1} with sum s, for every u >= 1."""
        logs = self.log_vertex_weights
        if self.k == 1:
            return logs
        rows: List[np.ndarray] = [logs[-1]]
        for u in range(self.k - 2, 0, -1):
            rows.append(log_convolve(logs[u], rows[-1], self.total))
        rows.append(np.array([]))
        return tuple(reversed(rows))

    @cached_property
    def int_vertex_weights(self) -> Tuple[List[int], ...]:
        out = []
        for u in range(self.k):
            weights = self.vertex_weights(u)
            den = math.lcm(*(w.denominator for w in weights))
            out.append([w.numerator * (den // w.denominator) for w in weights])
        return tuple(out)

    @cached_property
    def denominators(self) -> Tuple[int, ...]:
        out = []
        for u in range(self.k):
            out.append(math.lcm(*(w.denominator for w in self.vertex_weights(u))))
        return tuple(out)

    @cached_property
    def int_suffix(self) -> Tuple[List[int], ...]:
        """Exact integer counterpart of :attr:`log_suffix`, for every u."""
        logger.debug(
            "building exact leaf-total tables for %s, total %d", self.a.key, self.total
        )
        weights = self.int_vertex_weights
        rows: List[List[int]] = [list(weights[-1])]
        for u in range(self.k - 2, -1, -1):
            prev = rows[-1]
            w = weights[u]
            rows.append(
                [
                    sum(w[i] * prev[s - i] for i in range(s + 1) if w[i])
                    for s in range(self.total + 1)
                ]
            )
        return tuple(reversed(rows))

    def step_weights(self, u: int, s: int) -> List[int]:
        """Exact integer weights of i_u = 0..s given s leaves left for u..k-1."""
        w = self.int_vertex_weights[u]
        nxt = self.int_suffix[u + 1]
        return [w[i] * nxt[s - i] for i in range(s + 1)]

    def step_log_weights(self, u: int, s: int) -> np.ndarray:
        return self.log_vertex_weights[u][: s + 1] + self.log_suffix[u + 1][s::-1]

    def total_weight(self) -> Fraction:
        """Sum of the joint weights over all admissible vectors."""
        return Fraction(
            self.int_suffix[0][self.total], math.prod(self.denominators)
        )

    def coefficient_identity(self) -> bool:
        """total_weight times prod c_u! equals [z^total] G^a."""
        factor = math.prod(math.factorial(c) for c in self.children)
        coefficient = build_Ga(self.d, self.a, self.total).coeff(self.total)
        return self.total_weight() * factor == coefficient

    def marginal(self, u: int) -> Dict[int, Fraction]:
        """Exact law of i_u."""
        others = [1] + [0] * self.total
        for v in range(self.k):
            if v == u:
                continue
            w = self.int_vertex_weights[v]
            others = [
                sum(w[i] * others[s - i] for i in range(s + 1) if w[i])
                for s in range(self.total + 1)
            ]
        w = self.int_vertex_weights[u]
        weights = {i: w[i] * others[self.total - i] for i in range(self.total + 1)}
        norm = sum(weights.values())
        return {i: Fraction(x, norm) for i, x in weights.items() if x}

    def law(self) -> IntSeqDist:
        """Full joint law; the support grows like total^(k-1)."""
        weights: Dict[Tuple[int, ...], Fraction] = {}
        ints = self.int_vertex_weights
        for head in itertools.product(range(self.total + 1), repeat=self.k - 1):
            last = self.total - sum(head)
            if last < 0:
                continue
            vec = head + (last,)
            w = math.prod(ints[u][i] for u, i in enumerate(vec))
            if w:
                weights[vec] = Fraction(w)
        return IntSeqDist.from_weights(weights)


def pervertex_leaf_totals(d: OffspringWeights, a: PlaneTree, n: int) -> LeafTotalsTable:
    """Leaf-total table of the reduced tree a inside trees with n vertices."""
    return LeafTotalsTable(d, a, n)


@dataclass(frozen=True)
class LeavesMax:
    """Uniform law on the maximal no-unary trees with k leaves."""

    d: OffspringWeights
    k: int


@dataclass(frozen=True)
class Star:
    """Point mass on the star with k vertices."""

    k: int


@dataclass(frozen=True)
class Transfer:
    """Weights prod_u Gamma(alpha + c_u)/Gamma(1 + c_u) on trees with k vertices."""

    alpha: Fraction
    k: int


@dataclass(frozen=True)
class PoissonType:
    """Weights 1/prod_u c_u! on trees with k vertices."""

    k: int


LimitMode = Union[LeavesMax, Star, Transfer, PoissonType]


def maximal_trees(d: OffspringWeights, k: int) -> Tuple[MaxProfile, List[PlaneTree]]:
    """
    The maximal profile for k and every tree realizing one of its maximizers.

    Raises:
        InadmissibleK: If no no-unary tree over the support has k leaves
    """
    profile = bmax(d.support(k), k)
    if not profile.admissible or d.rational(0) == 0:
        raise InadmissibleK(k)
    trees: List[PlaneTree] = []
    for full in profile.full_profiles():
        trees.extend(enumerate_profile(full))
    return profile, trees


def limit_reduced(mode: LimitMode) -> TreeDist:
    """
    Limit law of the reduced tree in each regime.

    Raises:
        InadmissibleK: For ``LeavesMax`` when k is not admissible
    """
    if isinstance(mode, Star):
        if mode.k < 1:
            raise ValueError("k must be at least 1")
        return TreeDist.point_mass(PlaneTree.star(mode.k - 1).key, "star")
    if isinstance(mode, LeavesMax):
        profile, trees = maximal_trees(mode.d, mode.k)
        support = f"maximal trees with {mode.k} leaves"
        if profile.unique:
            return TreeDist.uniform((t.key for t in trees), support)
        return TreeDist.from_weights(
            {t.key: tree_weight(mode.d, t) for t in trees}, support
        )
    if isinstance(mode, Transfer):
        alpha = Fraction(mode.alpha)
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        weights = {}
        for a in _internal_supports(mode.k):
            w = Fraction(1)
            for c in a.internal_outdegrees:
                w *= rising(alpha, c) / math.factorial(c)
            weights[a.key] = w
        return TreeDist.from_weights(weights, f"trees with {mode.k} vertices")
    if isinstance(mode, PoissonType):
        return TreeDist.from_weights(
            {a.key: zeta(a) for a in _internal_supports(mode.k)},
            f"trees with {mode.k} vertices",
        )
    raise TypeError(f"Unknown limit mode {mode!r}")


def uniform_binary(k: int) -> TreeDist:
    """Uniform law on the binary trees with k leaves."""
    profile = {0: k, 2: k - 1} if k > 1 else {0: 1}
    return TreeDist.uniform(
        (t.key for t in enumerate_profile(profile)), f"binary trees with {k} leaves"
    )


def _integer_partitions(
    p: int, largest: Optional[int] = None
) -> Iterator[Dict[int, int]]:
    """Partitions of p as multiplicity maps part -> m_part."""
    largest = p if largest is None else largest
    if p == 0:
        yield {}
        return
    for part in range(min(p, largest), 0, -1):
        for rest in _integer_partitions(p - part, part):
            out = dict(rest)
            out[part] = out.get(part, 0) + 1
            yield out


def gamma_ratio_identity_sides(p: int, alpha: Fraction) -> Tuple[Fraction, Fraction]:
    """
    Both sides of the balls-in-urns identity.

    Left: sum over partitions (m_i) of p of p!/prod m_i! times the falling
    factorial of alpha of length sum m_i. Right: the rising factorial of alpha
    of length p.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    alpha = Fraction(alpha)
    lhs = Fraction(0)
    for mult in _integer_partitions(p):
        ways = math.prod(math.factorial(m) for m in mult.values())
        coef = Fraction(math.factorial(p), ways)
        lhs += coef * falling(alpha, sum(mult.values()))
    return lhs, rising(alpha, p)


def gamma_ratio_identity_check(p: int, alpha: Fraction) -> bool:
    lhs, rhs = gamma_ratio_identity_sides(p, alpha)
    return lhs == rhs


def dirichlet_moment(params: Sequence[Fraction], powers: Sequence[int]) -> Fraction:
    """E[prod X_i^(lambda_i)] for X ~ Dir(params), exactly."""
    if len(params) != len(powers):
        raise ValueError("params and powers must have the same length")
    if any(Fraction(a) <= 0 for a in params) or any(p < 0 for p in powers):
        raise ValueError("params must be positive and powers nonnegative")
    out = Fraction(1)
    for a, lam in zip(params, powers):
        out *= rising(Fraction(a), lam)
    return out / rising(sum((Fraction(a) for a in params), Fraction(0)), sum(powers))


def dirichlet_aggregation_sides(
    alphas: Sequence[Fraction], k: int, lambdas: Sequence[int]
) -> Tuple[Fraction, Fraction]:
    """
    Moments of (X_1 Y, X_2, ..., X_m) and of Dir((alpha_1/k) x k, alpha_2, ...).

    X ~ Dir(alphas) and Y ~ Dir(1, ..., 1) on k parts are independent;
    ``lambdas`` holds the k exponents of X_1 Y followed by one per X_j, j >= 2.
    """
    alphas = [Fraction(a) for a in alphas]
    if len(lambdas) != k + len(alphas) - 1:
        expected = k + len(alphas) - 1
        raise ValueError(f"Expected {expected} exponents, got {len(lambdas)}")
    split, rest = list(lambdas[:k]), list(lambdas[k:])
    lhs = dirichlet_moment([Fraction(1)] * k, split) * dirichlet_moment(
        alphas, [sum(split)] + rest
    )
    rhs = dirichlet_moment([alphas[0] / k] * k + alphas[1:], split + rest)
    return lhs, rhs


def dirichlet_aggregation_moment_check(
    alphas: Sequence[Fraction], k: int, lambdas: Sequence[int]
) -> bool:
    """
    Whether the aggregation moment identity holds for these exponents.

    With Y uniform on the simplex it holds for every exponent exactly when
    alpha_1 = k; first moments agree for any alpha_1.
    """
    lhs, rhs = dirichlet_aggregation_sides(alphas, k, lambdas)
    return lhs == rhs


@lru_cache(maxsize=64)
def _cached_reduced_internal(d: OffspringWeights, n: int, k: int) -> TreeDist:
    return reduced_dist_internal(d, n, k)


def exact_law(
    d: OffspringWeights, n: int, k: int, mode: Union[Mode, str], law: str
) -> Union[TreeDist, IntSeqDist, ScaledRational]:
    """Dispatch used by the command line: reduced, total or outdeg law."""
    mode = Mode(mode)
    if law == "reduced":
        if mode is Mode.LEAVES:
            return reduced_dist_leaves(d, n, k)
        return _cached_reduced_internal(d, n, k)
    if law == "total":
        if mode is Mode.LEAVES:
            return prob_total_leaves(d, n, k)
        return prob_total_internal(d, n, k)
    if law == "outdeg":
        if mode is Mode.LEAVES:
            raise ValueError("the outdeg law is defined for internal conditioning")
        return outdegree_sorted_dist(d, n, k)
    raise ValueError(f"Unknown law {law!r}")
