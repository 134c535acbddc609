"""
Distances, goodness-of-fit tests, condensation statistics and convergence
sweeps tying samples and exact laws together.
"""

import io
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .config import JobConfig
from .exact import (
    LeavesMax,
    LimitMode,
    PoissonType,
    Star,
    Transfer,
    limit_reduced,
    reduced_dist_internal,
    reduced_dist_leaves,
    uniform_binary,
)
from .exceptions import DegenerateSupport, NoInternalNode
from .models import CondensationStats, EmpiricalBatch, IntSeqDist, TreeDist
from .offspring import Mode, OffspringWeights, parse_offspring
from .rng import RngStream
from .samplers import sample_Dnk, sample_internal_exact
from .trees import PlaneTree

logger = logging.getLogger(__name__)

Law = Union[TreeDist, IntSeqDist]

MIN_EXPECTED = 5.0


def _atoms(law: Law) -> Mapping[Hashable, Fraction]:
    return law.atoms


def tv_exact(p: Law, q: Law) -> Fraction:
    """Exact total variation distance over the union of the supports."""
    pa, qa = _atoms(p), _atoms(q)
    keys = set(pa) | set(qa)
    return sum(
        (abs(pa.get(key, Fraction(0)) - qa.get(key, Fraction(0))) for key in keys),
        Fraction(0),
    ) / 2


def tv_empirical(batch: EmpiricalBatch, q: Law) -> float:
    """Total variation between the empirical law of a batch and a finite law."""
    if not batch.size:
        raise ValueError("empty batch")
    counts = batch.counts()
    qa = _atoms(q)
    keys = set(counts) | set(qa)
    return 0.5 * sum(
        abs(counts.get(key, 0) / batch.size - float(qa.get(key, Fraction(0))))
        for key in keys
    )


def tv_between_batches(a: EmpiricalBatch, b: EmpiricalBatch) -> float:
    """Total variation between the empirical laws of two batches."""
    if not a.size or not b.size:
        raise ValueError("empty batch")
    ca, cb = a.counts(), b.counts()
    return 0.5 * sum(
        abs(ca.get(key, 0) / a.size - cb.get(key, 0) / b.size)
        for key in set(ca) | set(cb)
    )


@dataclass
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    buckets: int
    outside_support: int = 0


def _pool(expected: List[Tuple[Hashable, float]]) -> List[List[Hashable]]:
    """Group atoms so every bucket expects at least ``MIN_EXPECTED`` draws."""
    ordered = sorted(expected, key=lambda item: item[1])
    buckets: List[List[Hashable]] = []
    pending: List[Hashable] = []
    pending_mass = 0.0
    for key, mass in ordered:
        if mass >= MIN_EXPECTED and not pending:
            buckets.append([key])
            continue
        pending.append(key)
        pending_mass += mass
        if pending_mass >= MIN_EXPECTED:
            buckets.append(pending)
            pending, pending_mass = [], 0.0
    if pending:
        if buckets:
            buckets[0].extend(pending)
        else:
            buckets.append(pending)
    return buckets


def chi_square_test(batch: EmpiricalBatch, q: Law) -> ChiSquareResult:
    """
    Pearson chi-square test of a batch against a finite law.

    Atoms expecting fewer than five draws are pooled. Draws outside the
    support of q make the p-value 0.

    Raises:
        DegenerateSupport: If fewer than two buckets remain after pooling
    """
    counts = batch.counts()
    qa = _atoms(q)
    outside = sum(c for key, c in counts.items() if key not in qa)
    expected = [(key, float(mass) * batch.size) for key, mass in qa.items()]
    buckets = _pool(expected)
    if len(buckets) < 2:
        raise DegenerateSupport(
            f"Chi-square test needs two buckets, got {len(buckets)} "
            f"from {len(qa)} atoms and {batch.size} draws"
        )
    weights = dict(expected)
    statistic = 0.0
    for bucket in buckets:
        exp = sum(weights[key] for key in bucket)
        obs = sum(counts.get(key, 0) for key in bucket)
        statistic += (obs - exp) ** 2 / exp
    dof = len(buckets) - 1
    p_value = 0.0 if outside else float(stats.chi2.sf(statistic, dof))
    if outside:
        logger.warning("%d draws fall outside the support of the law", outside)
    return ChiSquareResult(statistic, dof, p_value, len(buckets), outside)


def chi_square(batch: EmpiricalBatch, q: Law) -> float:
    """p-value of :func:`chi_square_test`."""
    return chi_square_test(batch, q).p_value


def ks_against_beta(samples: Sequence[float], a: float, b: float) -> float:
    """Kolmogorov-Smirnov distance between samples and the Beta(a, b) law."""
    if a <= 0 or b <= 0:
        raise ValueError("Beta parameters must be positive")
    if not len(samples):
        raise ValueError("no samples")
    result = stats.kstest(np.asarray(samples, dtype=float), "beta", args=(a, b))
    return float(result.statistic)


def condensation_stats(t: PlaneTree) -> CondensationStats:
    """
    Root outdegree against the outdegrees of the other internal nodes.

    Raises:
        NoInternalNode: If t is a single vertex
    """
    degrees = sorted(t.internal_outdegrees, reverse=True)
    if not degrees:
        raise NoInternalNode()
    root = t.outdegrees[0]
    second = degrees[1] if len(degrees) > 1 else 0
    return CondensationStats(root, degrees[0], second, root == degrees[0])


def coarsened_outdegrees(t: PlaneTree, cap: int = 20) -> Tuple[int, ...]:
    """Outdegrees of the non-root internal nodes, capped and sorted decreasingly."""
    return tuple(
        sorted((min(c, cap) for c in t.outdegrees[1:] if c), reverse=True)
    )


def parse_limit(text: str, d: OffspringWeights, k: int) -> LimitMode:
    """Limit mode from ``maximal``, ``star``, ``poisson`` or ``transfer:alpha=x``."""
    name, _, arg = text.partition(":")
    if name == "maximal":
        return LeavesMax(d, k)
    if name == "star":
        return Star(k)
    if name == "poisson":
        return PoissonType(k)
    if name == "transfer":
        key, _, value = arg.partition("=")
        if key != "alpha" or not value:
            raise ValueError(f"Expected transfer:alpha=<rational>, got {text!r}")
        return Transfer(Fraction(value), k)
    raise ValueError(f"Unknown limit law {text!r}")


def limit_law(text: str, d: OffspringWeights, k: int) -> TreeDist:
    """Limit law named by ``text``; ``binary`` is the uniform binary tree."""
    if text == "binary":
        return uniform_binary(k)
    return limit_reduced(parse_limit(text, d, k))


def _reduced(config: JobConfig, d: OffspringWeights, n: int) -> TreeDist:
    assert config.k is not None
    if Mode(config.mode) is Mode.LEAVES:
        return reduced_dist_leaves(d, n, config.k)
    return reduced_dist_internal(d, n, config.k)


def _tv_reduced(
    config: JobConfig, d: OffspringWeights, n: int, stream: RngStream
) -> float:
    assert config.k is not None
    limit = limit_law(config.limit or "binary", d, config.k)
    return float(tv_exact(_reduced(config, d, n), limit))


def _star_mass(
    config: JobConfig, d: OffspringWeights, n: int, stream: RngStream
) -> float:
    assert config.k is not None
    return float(_reduced(config, d, n).prob(PlaneTree.star(config.k - 1)))


def _root_fraction(
    config: JobConfig, d: OffspringWeights, n: int, stream: RngStream
) -> float:
    assert config.k is not None
    total = 0
    for _ in range(config.samples):
        total += sample_internal_exact(d, n, config.k, stream).outdegrees[0]
    return total / (config.samples * n)


def _dnk_tv(
    config: JobConfig, d: OffspringWeights, n: int, stream: RngStream
) -> float:
    assert config.k is not None
    exact = EmpiricalBatch("coarsened", seed=stream.seed, substream=stream.substream)
    coupled = EmpiricalBatch("coarsened", seed=stream.seed, substream=stream.substream)
    for _ in range(config.samples):
        tree = sample_internal_exact(d, n, config.k, stream)
        exact.values.append(coarsened_outdegrees(tree))
        coupled.values.append(coarsened_outdegrees(sample_Dnk(d, n, config.k, stream)))
    return tv_between_batches(exact, coupled)


Metric = Callable[[JobConfig, OffspringWeights, int, RngStream], float]


@dataclass(frozen=True)
class MetricSpec:
    """A registered sweep metric and the direction it should move in n."""

    compute: Metric
    decreasing: bool
    exact: bool


METRICS: Dict[str, MetricSpec] = {
    "tv_reduced": MetricSpec(_tv_reduced, decreasing=True, exact=True),
    "star_mass": MetricSpec(_star_mass, decreasing=False, exact=True),
    "root_fraction": MetricSpec(_root_fraction, decreasing=False, exact=False),
    "dnk_tv": MetricSpec(_dnk_tv, decreasing=True, exact=False),
}


@dataclass
class SweepRow:
    n: int
    value: float
    meta: Dict[str, Any] = field(default_factory=dict)


@dataclass
class SweepTable:
    """Per-n values of one metric, with the provenance needed to rerun it."""

    metric: str
    decreasing: bool = True
    rows: List[SweepRow] = field(default_factory=list)
    config_hash: str = ""
    seeds: List[int] = field(default_factory=list)
    thresholds: Dict[str, float] = field(default_factory=dict)

    def add(self, n: int, value: float, **meta: Any) -> None:
        if self.rows and n <= self.rows[-1].n:
            raise ValueError("Sweep rows must have strictly increasing n")
        self.rows.append(SweepRow(n, value, meta))

    @property
    def initial(self) -> float:
        return self.rows[0].value

    @property
    def final(self) -> float:
        return self.rows[-1].value

    def trend_holds(self) -> bool:
        """Final value moved past the initial one in the declared direction."""
        if len(self.rows) < 2:
            return True
        if self.decreasing:
            return self.final < self.initial
        return self.final > self.initial

    def failures(self) -> List[str]:
        """Violated predicates: the trend plus ``final_max`` / ``final_min`` bounds."""
        out = []
        if not self.trend_holds():
            word = "below" if self.decreasing else "above"
            out.append(
                f"{self.metric}: final {self.final:.6g} is not {word} "
                f"initial {self.initial:.6g}"
            )
        upper = self.thresholds.get("final_max")
        if upper is not None and not self.final < upper:
            out.append(f"{self.metric}: final {self.final:.6g} >= {upper}")
        lower = self.thresholds.get("final_min")
        if lower is not None and not self.final > lower:
            out.append(f"{self.metric}: final {self.final:.6g} <= {lower}")
        return out

    def to_csv(self) -> str:
        """CSV with ``#`` header comments: metric, config hash, seeds, thresholds."""
        buf = io.StringIO()
        buf.write(f"# metric: {self.metric}\n")
        buf.write(f"# config_hash: {self.config_hash}\n")
        buf.write(f"# seeds: {' '.join(str(s) for s in self.seeds)}\n")
        for key in sorted(self.thresholds):
            buf.write(f"# threshold {key}: {self.thresholds[key]}\n")
        meta_keys = sorted({key for row in self.rows for key in row.meta})
        buf.write(",".join(["n", "value"] + meta_keys) + "\n")
        for row in self.rows:
            cells = [str(row.n), repr(row.value)] + [
                str(row.meta.get(key, "")) for key in meta_keys
            ]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def sweep(metric: str, n_grid: Sequence[int], config: JobConfig) -> SweepTable:
    """
    Evaluate a registered metric along a grid of n.

    Monte-Carlo rows use substream i of the configured seed for the i-th n.
    """
    if metric not in METRICS:
        raise ValueError(
            f"Unknown metric {metric!r}; expected one of {', '.join(sorted(METRICS))}"
        )
    spec = METRICS[metric]
    if not spec.exact and config.seed is None:
        raise ValueError(f"Metric {metric!r} samples trees and needs a seed")
    assert config.dist is not None
    d = parse_offspring(config.dist)
    seed = config.seed if config.seed is not None else 0
    table = SweepTable(
        metric,
        spec.decreasing,
        config_hash=config.config_hash(),
        seeds=[] if spec.exact else [seed],
        thresholds=dict(config.thresholds),
    )
    for index, n in enumerate(n_grid):
        stream = RngStream(seed, index)
        value = spec.compute(config, d, n, stream)
        logger.info("%s at n=%d: %.6g", metric, n, value)
        if spec.exact:
            table.add(n, value)
        else:
            table.add(n, value, substream=index)
    return table


def empirical_batch(
    statistic: str, values: Sequence[Any], stream: RngStream
) -> EmpiricalBatch:
    """Wrap observed values with the seed that produced them."""
    return EmpiricalBatch(statistic, list(values), stream.seed, stream.substream)


def mean_vector(rows: Sequence[Sequence[float]]) -> List[float]:
    """Coordinatewise mean."""
    if not rows:
        return []
    return [math.fsum(col) / len(rows) for col in zip(*rows)]
