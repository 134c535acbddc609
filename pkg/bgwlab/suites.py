"""
Named acceptance suites, runnable through ``bgwlab verify --suite``.

Each suite returns a :class:`SuiteResult` listing its individual checks;
exact checks use rational equality, Monte-Carlo checks fixed seeds and
documented thresholds.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .exact import (
    PoissonType,
    Transfer,
    brute_force_law,
    brute_force_total,
    dirichlet_aggregation_moment_check,
    dirichlet_aggregation_sides,
    gamma_ratio_identity_check,
    limit_reduced,
    outdegree_sorted_dist,
    prob_total_internal,
    prob_total_leaves,
    reduced_dist_internal,
    reduced_dist_leaves,
    tree_weight,
    uniform_binary,
)
from .exceptions import EmptyConditioning
from .models import EmpiricalBatch
from .offspring import (
    Finite,
    Geometric,
    OffspringWeights,
    PolyExp,
    PowerLaw,
    StableTail,
)
from .rng import RngStream
from .samplers import (
    RejectionSampler,
    draw_internal_decomposition,
    sample_composition,
    sample_Dnk,
    sample_internal_exact,
    sample_leaves_cycle,
    sample_leaves_exact,
)
from .series import coeff_ratio_probe, polyexp_factorization, q_polynomial
from .trees import (
    PlaneTree,
    TreeFilter,
    count_good_shifts,
    decompose_leaves,
    decompose_unary,
    enumerate_trees,
    iter_outdegree_sequences,
    luka_decode,
    luka_encode,
    recompose_leaves,
    recompose_unary,
)
from .verify import (
    chi_square,
    coarsened_outdegrees,
    condensation_stats,
    ks_against_beta,
    mean_vector,
    tv_between_batches,
    tv_exact,
)

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240611
GRID = (50, 100, 200, 400)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    """Outcome of one acceptance suite."""

    suite: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))
        log = logger.info if passed else logger.error
        log("[%s] %s: %s %s", self.suite, name, "ok" if passed else "FAILED", detail)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON output."""
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def oracle_families() -> List[OffspringWeights]:
    return [
        Geometric(Fraction(1, 2)),
        Finite([Fraction(1, 3)] * 3),
        PolyExp([1]),
    ]


def random_bridge(stream: RngStream) -> Tuple[List[int], int]:
    """Random k >= 1 and a step vector >= -1 of length at most 20 summing to -k."""
    length = 1 + stream.below(20)
    k = 1 + stream.below(length)
    if k == length:
        return [-1] * length, k
    down = k + stream.below(length - k)
    up = sample_composition(down - k, length - down, stream)
    return list(stream.permutation([-1] * down + list(up))), k


def bijections(
    seed: int = DEFAULT_SEED, n_max: int = 10, vectors: int = 10_000
) -> SuiteResult:
    """Round trips of every encoding and the cycle-lemma count."""
    result = SuiteResult("bijections")
    failures = 0
    total = 0
    for n in range(1, n_max + 1):
        trees = enumerate_trees(n, bound=n_max)
        if len(trees) != math.comb(2 * n - 2, n - 1) // n:
            failures += 1
        for t in trees:
            total += 1
            if luka_decode(luka_encode(t)) != t:
                failures += 1
            if recompose_unary(decompose_unary(t)) != t:
                failures += 1
            if n > 1 and recompose_leaves(decompose_leaves(t)) != t:
                failures += 1
    result.check("round trips", failures == 0, f"{total} trees, {failures} failures")

    stream = RngStream(seed, 0)
    bad = 0
    for _ in range(vectors):
        steps, k = random_bridge(stream)
        if sum(steps) != -k or count_good_shifts(steps) != k:
            bad += 1
    result.check("cycle lemma", bad == 0, f"{vectors} step vectors, {bad} failures")
    return result


def exact_oracle(seed: int = DEFAULT_SEED, n_max: int = 12) -> SuiteResult:
    """Exact laws against exhaustive enumeration, by rational equality."""
    result = SuiteResult("exact-oracle")
    for d in oracle_families():
        mismatches: List[str] = []
        for n in range(1, n_max + 1):
            for k in range(1, n + 1):
                flt = TreeFilter(leaves=k)
                total = brute_force_total(d, n, flt)
                if prob_total_leaves(d, n, k).mantissa != total:
                    mismatches.append(f"total leaves n={n} k={k}")
                if total and n > k:
                    law = reduced_dist_leaves(d, n, k)
                    if law.atoms != brute_force_law(d, n, flt, "unary_reduced").atoms:
                        mismatches.append(f"reduced leaves n={n} k={k}")
            for k in range(1, n):
                flt = TreeFilter(internal=k)
                total = brute_force_total(d, n, flt)
                if prob_total_internal(d, n, k).mantissa != total:
                    mismatches.append(f"total internal n={n} k={k}")
                if not total:
                    continue
                if reduced_dist_internal(d, n, k).atoms != brute_force_law(
                    d, n, flt, "leaf_reduced"
                ).atoms:
                    mismatches.append(f"reduced internal n={n} k={k}")
                if outdegree_sorted_dist(d, n, k).atoms != brute_force_law(
                    d, n, flt, "sorted_outdeg"
                ).atoms:
                    mismatches.append(f"sorted outdegrees n={n} k={k}")
        result.check(d.spec(), not mismatches, ", ".join(mismatches[:5]))
    return result


def conditional_uniformity(seed: int = DEFAULT_SEED, n_max: int = 12) -> SuiteResult:
    """Given the reduced tree, every unary-chain vector is equally likely."""
    result = SuiteResult("conditional-uniformity")
    d = Geometric(Fraction(1, 2))
    bad: List[str] = []
    for n in range(2, n_max + 1):
        for k in range(1, n):
            groups: Dict[str, Dict[tuple, Fraction]] = {}
            for seq in iter_outdegree_sequences(n, TreeFilter(leaves=k)):
                t = PlaneTree.from_outdegrees(seq)
                dec = decompose_unary(t)
                group = groups.setdefault(dec.reduced.key, {})
                group[dec.ancestors] = tree_weight(d, t)
            for key, atoms in groups.items():
                size = len(PlaneTree.from_key(key))
                expected = math.comb(n - 1, size - 1)
                total = sum(atoms.values(), Fraction(0))
                if len(atoms) != expected or any(
                    w / total != Fraction(1, expected) for w in atoms.values()
                ):
                    bad.append(f"n={n} k={k} a={key}")
    result.check("uniform unary chains", not bad, ", ".join(bad[:5]))
    return result


def _tree_batch(
    name: str, draws: Sequence[PlaneTree], stream: RngStream
) -> EmpiricalBatch:
    return EmpiricalBatch(name, list(draws), stream.seed, stream.substream)


def sampler_consistency(
    seed: int = DEFAULT_SEED, samples: int = 100_000, alpha: float = 0.001
) -> SuiteResult:
    """
    Chi-square agreement of every exact sampler with enumeration.

    ``alpha`` is the family-wise level; each of the four tests runs at
    alpha / 4.
    """
    result = SuiteResult("sampler-consistency")
    level = alpha / 4
    d = Geometric(Fraction(1, 2))
    n, k = 8, 3
    law = brute_force_law(d, n, TreeFilter(leaves=k))
    runs: Dict[str, Callable[[RngStream], PlaneTree]] = {
        "exact": lambda s: sample_leaves_exact(d, n, k, s),
        "cycle": lambda s: sample_leaves_cycle(d, n, k, s),
    }
    for index, (name, draw) in enumerate(runs.items()):
        stream = RngStream(seed, index)
        batch = _tree_batch(name, [draw(stream) for _ in range(samples)], stream)
        p = chi_square(batch, law)
        result.check(f"{name} sampler, leaves", p > level, f"p={p:.4g}")
    stream = RngStream(seed, 2)
    rejection = RejectionSampler(d, n, k, "leaves", stream)
    batch = _tree_batch("rejection", [rejection.draw() for _ in range(samples)], stream)
    p = chi_square(batch, law)
    result.check("rejection sampler, leaves", p > level, f"p={p:.4g}")

    k_int = 2
    law = brute_force_law(d, n, TreeFilter(internal=k_int))
    stream = RngStream(seed, 3)
    draws = [sample_internal_exact(d, n, k_int, stream) for _ in range(samples)]
    p = chi_square(_tree_batch("internal", draws, stream), law)
    result.check("exact sampler, internal", p > level, f"p={p:.4g}")
    return result


def _trend(
    result: SuiteResult,
    name: str,
    values: Sequence[float],
    decreasing: bool,
    bound: Optional[float] = None,
) -> None:
    detail = ", ".join(f"{v:.4g}" for v in values)
    moved = values[-1] < values[0] if decreasing else values[-1] > values[0]
    result.check(f"{name} trend", moved, detail)
    if bound is not None:
        ok = values[-1] < bound if decreasing else values[-1] > bound
        result.check(f"{name} final {'<' if decreasing else '>'} {bound}", ok, detail)


def binary_limit(seed: int = DEFAULT_SEED, grid: Sequence[int] = GRID) -> SuiteResult:
    """Leaf-conditioned reduced trees approach the uniform binary tree."""
    result = SuiteResult("binary-limit")
    d = Geometric(Fraction(1, 2))
    target = uniform_binary(3)
    values = [float(tv_exact(reduced_dist_leaves(d, n, 3), target)) for n in grid]
    _trend(result, "TV to uniform binary", values, decreasing=True, bound=0.05)
    return result


def stable_condensation(
    seed: int = DEFAULT_SEED,
    grid: Sequence[int] = GRID,
    samples: int = 10_000,
) -> SuiteResult:
    """Stable offspring laws condense the leaves on the root."""
    result = SuiteResult("stable-condensation")
    d = StableTail(Fraction(3, 2), 0, Fraction(1, 2))
    k = 3
    star = PlaneTree.star(k - 1)
    values = [float(reduced_dist_internal(d, n, k).prob(star)) for n in grid]
    _trend(result, "P(reduced tree is the star)", values, decreasing=False, bound=0.9)

    n = grid[-1]
    stream = RngStream(seed, 0)
    fractions = []
    root_max = 0
    for _ in range(samples):
        st = condensation_stats(sample_internal_exact(d, n, k, stream))
        fractions.append(st.root_out / n)
        root_max += st.root_is_max
    mean = math.fsum(fractions) / samples
    result.check("mean root outdegree / n > 0.9", mean > 0.9, f"{mean:.4f}")
    share = root_max / samples
    result.check("P(root has maximal degree) > 0.95", share > 0.95, f"{share:.4f}")
    return result


def big_jump_coupling(
    seed: int = DEFAULT_SEED,
    grid: Sequence[int] = (50, 200),
    samples: int = 10_000,
    cap: int = 20,
) -> SuiteResult:
    """Conditioned trees and the big-jump coupling grow closer in TV."""
    result = SuiteResult("big-jump-coupling")
    d = PowerLaw(Fraction(3, 2), 1)
    k = 3
    values = []
    for index, n in enumerate(grid):
        stream = RngStream(seed, index)
        exact = EmpiricalBatch("coarsened", [], seed, index)
        coupled = EmpiricalBatch("coarsened", [], seed, index)
        for _ in range(samples):
            tree = sample_internal_exact(d, n, k, stream)
            exact.values.append(coarsened_outdegrees(tree, cap))
            tree = sample_Dnk(d, n, k, stream)
            coupled.values.append(coarsened_outdegrees(tree, cap))
        values.append(tv_between_batches(exact, coupled))
    _trend(result, "TV of coarsened outdegrees", values, decreasing=True, bound=0.1)
    return result


def geometric_transfer(
    seed: int = DEFAULT_SEED,
    grid: Sequence[int] = GRID,
    n_large: int = 2000,
    samples: int = 100_000,
) -> SuiteResult:
    """Geometric offspring: uniform reduced tree and uniform leaf spread."""
    result = SuiteResult("geometric-transfer")
    d = Geometric(Fraction(1, 2))
    k = 3
    target = limit_reduced(Transfer(Fraction(1), k))
    values = [float(tv_exact(reduced_dist_internal(d, n, k), target)) for n in grid]
    _trend(result, "TV to uniform tree", values, decreasing=True, bound=0.05)

    stream = RngStream(seed, 0)
    firsts = [
        draw_internal_decomposition(d, n_large, k, stream).leaf_seq[0] / n_large
        for _ in range(samples)
    ]
    ks = ks_against_beta(firsts, 1.0, 2.0 * k - 2.0)
    result.check("first corner vs Beta(1, 2k-2), KS < 0.02", ks < 0.02, f"{ks:.4f}")
    return result


def _leaf_counts(dec: Any) -> List[int]:
    out = []
    offset = 0
    for c in dec.core.outdegrees:
        corners = dec.leaf_seq[offset : offset + c + 1]
        offset += c + 1
        out.append(sum(corners) + (0 if c else 1))
    return out


def poisson_type(
    seed: int = DEFAULT_SEED,
    grid: Sequence[int] = GRID,
    n_large: int = 2000,
    samples: int = 10_000,
) -> SuiteResult:
    """Poisson offspring: 1/prod c_u! reduced law and equal leaf shares."""
    result = SuiteResult("poisson-type")
    d = PolyExp([1])
    k = 3
    target = limit_reduced(PoissonType(k))
    values = [float(tv_exact(reduced_dist_internal(d, n, k), target)) for n in grid]
    _trend(result, "TV to the 1/prod c! law", values, decreasing=True, bound=0.05)

    stream = RngStream(seed, 0)
    rows = []
    for _ in range(samples):
        dec = draw_internal_decomposition(d, n_large, k, stream)
        rows.append([x / n_large for x in _leaf_counts(dec)])
    means = mean_vector(rows)
    worst = max(abs(m - 1.0 / k) for m in means)
    result.check(
        "mean leaf shares within 0.05 of 1/k",
        worst < 0.05,
        ", ".join(f"{m:.4f}" for m in means),
    )
    return result


def identities(seed: int = DEFAULT_SEED, order: int = 200) -> SuiteResult:
    """Series factorization, balls-in-urns and Dirichlet aggregation identities."""
    result = SuiteResult("identities")
    bad: List[str] = []
    for coefficients in ([1], [1, Fraction(1, 2)], [1, 1, Fraction(1, 3)]):
        d = PolyExp(coefficients)
        p = d.degree
        for k in range(1, 5):
            for seq in iter_outdegree_sequences(k):
                a = PlaneTree.from_outdegrees(seq)
                left, right = polyexp_factorization(d, a, order)
                poly = q_polynomial(d, a)
                if left.coeffs != right.coeffs or left.scale_power != right.scale_power:
                    bad.append(f"series p={p} a={a.key}")
                if poly.degree != (k - 1) * (p - 1):
                    bad.append(f"degree p={p} a={a.key}")
                if poly.leading != (p * d.a[-1]) ** (k - 1):
                    bad.append(f"leading p={p} a={a.key}")
    result.check("polynomial-exponential factorization", not bad, ", ".join(bad[:5]))

    alphas = [Fraction(x) for x in ("1/2", "3/2", "7/3", "5", "9/4")]
    gamma_bad = [
        f"p={p} alpha={alpha}"
        for p in range(1, 9)
        for alpha in alphas
        if not gamma_ratio_identity_check(p, alpha)
    ]
    result.check("balls-in-urns identity", not gamma_bad, ", ".join(gamma_bad[:5]))

    tails: List[List[Fraction]] = [
        [],
        [Fraction(1, 2)],
        [Fraction(1)],
        [Fraction(2)],
        [Fraction(1), Fraction(2)],
    ]
    dir_bad = []
    grid_size = 0
    for k in range(1, 4):
        for rest in tails:
            params = [Fraction(k)] + rest
            for lam in itertools.product(range(4), repeat=k + len(rest)):
                grid_size += 1
                if not dirichlet_aggregation_moment_check(params, k, lam):
                    dir_bad.append(f"alpha={params} lambda={lam}")
    result.check(
        "aggregation moments with alpha_1 = k",
        not dir_bad,
        f"{grid_size} moments; " + ", ".join(str(b) for b in dir_bad[:3]),
    )
    lhs, rhs = dirichlet_aggregation_sides([Fraction(1), Fraction(1)], 2, [2, 0, 0])
    result.check("aggregation fails off alpha_1 = k", lhs != rhs, f"{lhs} vs {rhs}")
    return result


def coefficient_ratio(seed: int = DEFAULT_SEED) -> SuiteResult:
    """
    Normalized coefficient ratios of exp(mP) tend to 1.

    A quadratic P converges more slowly and is held to 0.02 at n = 2000.
    """
    result = SuiteResult("coefficient-ratio")
    cases = [
        (PolyExp([1]), 1, 0.01),
        (PolyExp([1]), 2, 0.01),
        (PolyExp([1, Fraction(1, 2)]), 1, 0.02),
    ]
    for d, m, bound in cases:
        label = f"{d.spec()}, m={m}"
        small, large = (abs(r - 1.0) for r in coeff_ratio_probe(d, m, [200, 2000]))
        result.check(f"{label}: error at 2000 < {bound}", large < bound, f"{large:.3g}")
        trend = f"{small:.3g} -> {large:.3g}"
        result.check(f"{label}: error shrinks", large < small, trend)
    return result


def stable_tail(seed: int = DEFAULT_SEED, n: int = 10_000) -> SuiteResult:
    """Tail mass of the stable family against its power-law equivalent."""
    result = SuiteResult("stable-tail")
    d = StableTail(Fraction(3, 2), 0, Fraction(1, 2))
    ratio = d.tail_mass(n) / d.tail_equivalent(n)
    result.check("tail ratio in [0.9, 1.1]", 0.9 <= ratio <= 1.1, f"{ratio:.5f}")
    return result


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "bijections": bijections,
    "exact-oracle": exact_oracle,
    "conditional-uniformity": conditional_uniformity,
    "sampler-consistency": sampler_consistency,
    "binary-limit": binary_limit,
    "stable-condensation": stable_condensation,
    "big-jump-coupling": big_jump_coupling,
    "geometric-transfer": geometric_transfer,
    "poisson-type": poisson_type,
    "identities": identities,
    "coefficient-ratio": coefficient_ratio,
    "stable-tail": stable_tail,
}

ALIASES = {str(i): name for i, name in enumerate(SUITES, start=1)}
ALIASES.update(
    {
        "thm1.1": "binary-limit",
        "thm1.2": "big-jump-coupling",
        "thm1.3": "stable-condensation",
        "thm1.4": "geometric-transfer",
        "thm1.5": "poisson-type",
    }
)


def run_suite(name: str, seed: int = DEFAULT_SEED) -> SuiteResult:
    """
    Run a suite by name or by its number.

    Raises:
        KeyError: If the suite is unknown
    """
    key = ALIASES.get(name, name)
    if key not in SUITES:
        raise KeyError(name)
    logger.info("running suite %s (seed %d)", key, seed)
    try:
        return SUITES[key](seed)
    except EmptyConditioning as exc:
        result = SuiteResult(key)
        result.check("conditioning", False, exc.message)
        return result
