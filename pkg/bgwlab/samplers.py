"""
Samplers for unconditioned and conditioned BGW trees and their limit objects.

Conditioned samplers are exact in distribution: every discrete choice is an
exact inverse-CDF draw, either directly on integer weights or guided by a
float table that defers to the integer weights near breakpoints.
"""

import functools
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import (
    Callable,
    Deque,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from .exact import (
    LeafTotalsTable,
    StepSumTable,
    bmax,
    reduced_dist_internal,
    reduced_dist_leaves,
    zeta,
)
from .exceptions import EmptyConditioning, GaveUp, InadmissibleK
from .models import Overflow, SamplerReport, TreeDist
from .offspring import Mode, OffspringWeights
from .rng import RngStream, float_cumulative
from .series import log_build_Ga
from .trees import (
    CoreLeafDecomp,
    LeafAncestorDecomp,
    LukasiewiczPath,
    PlaneTree,
    count_prescribed_degrees,
    cyclic_shift,
    good_rotation,
    iter_outdegree_sequences,
    luka_decode,
    recompose_leaves,
    recompose_unary,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_VERTICES = 10**6
DEFAULT_MAX_TRIES = 1_000_000

Sample = Union[PlaneTree, Overflow]


def unrank_combination(rank: int, n: int, r: int) -> List[int]:
    """
    The r-subset of range(n) of the given lexicographic rank.

    Each element is located by binary search on the count of subsets whose
    smallest element lies below it.
    """
    out: List[int] = []
    start = 0
    for m in range(r, 0, -1):
        total = math.comb(n - start, m)
        lo, hi = start, n - m
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if total - math.comb(n - mid, m) <= rank:
                lo = mid
            else:
                hi = mid - 1
        rank -= total - math.comb(n - lo, m)
        out.append(lo)
        start = lo + 1
    return out


def sample_composition(total: int, parts: int, stream: RngStream) -> Tuple[int, ...]:
    """Uniform composition of ``total`` into ``parts`` nonnegative parts."""
    if total < 0 or parts < 1:
        raise ValueError("need total >= 0 and parts >= 1")
    if parts == 1:
        return (total,)
    slots = total + parts - 1
    rank = stream.below(math.comb(slots, parts - 1))
    bars = unrank_combination(rank, slots, parts - 1)
    out = []
    previous = -1
    for b in bars:
        out.append(b - previous - 1)
        previous = b
    out.append(slots - previous - 1)
    return tuple(out)


def sample_dirichlet(params: Sequence[float], stream: RngStream) -> np.ndarray:
    """Dirichlet draw as normalized independent Gamma variables."""
    if not params or any(p <= 0 for p in params):
        raise ValueError("Dirichlet parameters must be positive")
    gammas = stream.standard_gamma([float(p) for p in params])
    return gammas / gammas.sum()


class _OffspringPool:
    """Buffered float inverse-CDF draws from an offspring law."""

    def __init__(self, d: OffspringWeights, stream: RngStream) -> None:
        self.d = d
        self.stream = stream
        self.batch = 16
        self.size = (d.max_index + 1) if d.max_index is not None else 256
        self.cdf = np.cumsum(d.float_pmf(self.size))
        self.buffer: List[int] = []

    def _resolve_tail(self, u: float) -> int:
        if self.d.max_index is not None:
            return self.d.max_index
        size = self.size
        while size < 2**22:
            size *= 2
            cdf = np.cumsum(self.d.float_pmf(size))
            if cdf[-1] > u:
                return int(np.searchsorted(cdf, u, side="right"))
        return size

    def draw(self) -> int:
        if not self.buffer:
            u = self.stream.uniform(self.batch)
            idx = np.searchsorted(self.cdf, u, side="right")
            values = [
                int(i) if i < self.size else self._resolve_tail(float(x))
                for i, x in zip(idx, u)
            ]
            self.buffer = values[::-1]
            self.batch = min(2 * self.batch, 4096)
        return self.buffer.pop()


def sample_bgw(
    d: OffspringWeights,
    stream: RngStream,
    max_vertices: int = DEFAULT_MAX_VERTICES,
    pool: Optional[_OffspringPool] = None,
) -> Sample:
    """
    Unconditioned BGW tree, grown in lexicographic order.

    Returns:
        The tree, or ``Overflow`` once it is certain to exceed ``max_vertices``
    """
    pool = pool or _OffspringPool(d, stream)
    degrees: List[int] = []
    open_slots = 1
    while open_slots:
        c = pool.draw()
        degrees.append(c)
        open_slots += c - 1
        if len(degrees) + open_slots > max_vertices:
            return Overflow(len(degrees) + open_slots, max_vertices)
    return PlaneTree.from_outdegrees(degrees)


class RejectionSampler:
    """
    BGW trees conditioned by rejection, vectorised over batches.

    The first n outdegrees of a BGW tree in lexicographic order are i.i.d.,
    and the tree has exactly n vertices when their walk first reaches -1 at
    step n. Whole batches of candidate prefixes are tested at once.
    """

    def __init__(
        self,
        d: OffspringWeights,
        n: int,
        k: int,
        mode: Union[Mode, str],
        stream: RngStream,
        max_tries: int = DEFAULT_MAX_TRIES,
        batch: int = 8192,
        report: Optional[SamplerReport] = None,
    ) -> None:
        if n < 1 or max_tries < 1:
            raise ValueError("n and max_tries must be positive")
        self.n = n
        self.k = k
        self.mode = Mode(mode)
        self.stream = stream
        self.max_tries = max_tries
        self.batch = min(batch, max_tries)
        self.report = report if report is not None else SamplerReport()
        self.cdf = np.cumsum(d.float_pmf(n))
        self.accepted: Deque[Tuple[int, ...]] = deque()
        self.dry_rows = 0

    def _fill(self) -> None:
        u = self.stream.uniform(self.batch * self.n).reshape(self.batch, self.n)
        degrees = np.searchsorted(self.cdf, u, side="right")
        walk = np.cumsum(degrees - 1, axis=1)
        valid = (walk[:, -1] == -1) & (degrees < self.n).all(axis=1)
        if self.n > 1:
            valid &= (walk[:, :-1] >= 0).all(axis=1)
        zeros = (degrees == 0).sum(axis=1)
        if self.mode is Mode.LEAVES:
            valid &= zeros == self.k
        else:
            valid &= self.n - zeros == self.k
        rows = np.flatnonzero(valid)
        self.accepted.extend(tuple(int(c) for c in degrees[r]) for r in rows)
        self.report.rejections += self.batch - len(rows)
        if len(rows):
            self.dry_rows = self.batch - 1 - int(rows[-1])
        else:
            self.dry_rows += self.batch

    def draw(self) -> PlaneTree:
        """
        Next accepted tree.

        Raises:
            GaveUp: If ``max_tries`` candidates in a row were rejected
        """
        while not self.accepted:
            if self.dry_rows >= self.max_tries:
                raise GaveUp(self.dry_rows)
            self._fill()
        self.report.samples += 1
        return PlaneTree.from_outdegrees(self.accepted.popleft())


def sample_rejection(
    d: OffspringWeights,
    n: int,
    k: int,
    mode: Union[Mode, str],
    stream: RngStream,
    max_tries: int = DEFAULT_MAX_TRIES,
) -> PlaneTree:
    """
    One conditioned tree by rejection from BGW draws.

    Raises:
        GaveUp: If no candidate is accepted within ``max_tries``
    """
    return RejectionSampler(d, n, k, mode, stream, max_tries).draw()


@dataclass
class _PreparedLaw:
    keys: List[str]
    cumulative: List[int]

    @classmethod
    def of(cls, dist: TreeDist) -> "_PreparedLaw":
        den = math.lcm(*(p.denominator for p in dist.atoms.values()))
        keys = list(dist.atoms)
        running = 0
        cumulative = []
        for key in keys:
            p = dist.atoms[key]
            running += p.numerator * (den // p.denominator)
            cumulative.append(running)
        return cls(keys, cumulative)

    def draw(self, stream: RngStream) -> str:
        return self.keys[stream.choose_cumulative(self.cumulative)]


@functools.lru_cache(maxsize=32)
def _leaves_plan(d: OffspringWeights, n: int, k: int) -> _PreparedLaw:
    return _PreparedLaw.of(reduced_dist_leaves(d, n, k))


def sample_leaves_exact(
    d: OffspringWeights, n: int, k: int, stream: RngStream
) -> PlaneTree:
    """
    Exact draw of T given n vertices and k leaves.

    The reduced tree comes from its exact law; given it, the unary chain
    lengths are a uniform composition of the remaining vertices.

    Raises:
        EmptyConditioning: If the event has zero probability
    """
    a = PlaneTree.from_key(_leaves_plan(d, n, k).draw(stream))
    chains = sample_composition(n - len(a), len(a), stream)
    return recompose_unary(LeafAncestorDecomp(a, chains))


@functools.lru_cache(maxsize=32)
def _cycle_table(d: OffspringWeights, n: int, k: int) -> StepSumTable:
    if k < 1 or k > n or d.rational(0) == 0:
        raise EmptyConditioning(n, k, Mode.LEAVES.value)
    table = StepSumTable(d, n - k, k - 1)
    if table.count(n - k, k - 1) == 0:
        raise EmptyConditioning(n, k, Mode.LEAVES.value)
    return table


def _random_subset(n: int, r: int, stream: RngStream) -> List[int]:
    return unrank_combination(stream.below(math.comb(n, r)), n, r)


def sample_leaves_cycle(
    d: OffspringWeights, n: int, k: int, stream: RngStream
) -> PlaneTree:
    """
    Exact draw of T given n vertices and k leaves, through the cycle lemma.

    The n - k nonnegative steps are drawn backward from the step-sum table,
    the k steps equal to -1 are placed uniformly, and the unique good rotation
    of the resulting bridge is decoded.

    Raises:
        EmptyConditioning: If the event has zero probability
    """
    table = _cycle_table(d, n, k)
    remaining, s = n - k, k - 1
    positive: List[int] = []
    while remaining:
        y = stream.choose_weighted(table.step_weights(remaining, s))
        positive.append(y)
        s -= y
        remaining -= 1
    leaves = set(_random_subset(n, k, stream))
    it = iter(positive)
    steps = [-1 if i in leaves else next(it) for i in range(n)]
    rotated = cyclic_shift(steps, good_rotation(steps))
    return luka_decode(LukasiewiczPath(rotated))


@dataclass
class _InternalPlan:
    """Reduced trees of T_{n,k} with float proposal weights and exact fallbacks."""

    d: OffspringWeights
    n: int
    k: int
    trees: List[PlaneTree] = field(default_factory=list)
    cumulative: Optional[np.ndarray] = None
    tables: Dict[str, LeafTotalsTable] = field(default_factory=dict)
    first_steps: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        logs = []
        for seq in iter_outdegree_sequences(self.k):
            a = PlaneTree.from_outdegrees(seq)
            order = self.n - self.k - a.phi(0)
            if order < 0:
                continue
            self.trees.append(a)
            log_coeff = float(log_build_Ga(self.d, a, order)[order])
            logs.append(math.log(zeta(a)) + log_coeff)
        if not self.trees or not np.isfinite(np.max(logs)):
            raise EmptyConditioning(self.n, self.k, Mode.INTERNAL.value)
        self.cumulative = float_cumulative(np.array(logs))
        logger.debug(
            "internal plan n=%d k=%d over %d trees", self.n, self.k, len(self.trees)
        )

    def exact_weights(self) -> List[int]:
        dist = reduced_dist_internal(self.d, self.n, self.k)
        masses = [dist.prob(a) for a in self.trees]
        den = math.lcm(*(m.denominator for m in masses))
        return [m.numerator * (den // m.denominator) for m in masses]

    def table(self, a: PlaneTree) -> LeafTotalsTable:
        if a.key not in self.tables:
            self.tables[a.key] = LeafTotalsTable(self.d, a, self.n)
        return self.tables[a.key]

    def first_step(self, a: PlaneTree) -> np.ndarray:
        if a.key not in self.first_steps:
            table = self.table(a)
            self.first_steps[a.key] = float_cumulative(
                table.step_log_weights(0, table.total)
            )
        return self.first_steps[a.key]


@functools.lru_cache(maxsize=32)
def _internal_plan(d: OffspringWeights, n: int, k: int) -> _InternalPlan:
    if k < 1 or n < k + 1 or d.rational(0) == 0:
        raise EmptyConditioning(n, k, Mode.INTERNAL.value)
    return _InternalPlan(d, n, k)


def draw_leaf_totals(
    table: LeafTotalsTable,
    stream: RngStream,
    first_step: Optional[np.ndarray] = None,
) -> Tuple[int, ...]:
    """Backward draw of (i_u) from a leaf-total table, exact in distribution."""
    s = table.total
    out: List[int] = []
    for u in range(table.k - 1):
        if u == 0 and first_step is not None:
            cumulative = first_step
        else:
            cumulative = float_cumulative(table.step_log_weights(u, s))
        exact = functools.partial(table.step_weights, u, s)
        i = stream.choose_guided(cumulative, exact)
        out.append(i)
        s -= i
    out.append(s)
    return tuple(out)


def draw_internal_decomposition(
    d: OffspringWeights, n: int, k: int, stream: RngStream
) -> CoreLeafDecomp:
    """
    Exact draw of the (core, leaf sequence) pair of T given n vertices and k
    internal nodes.

    Raises:
        EmptyConditioning: If the event has zero probability
    """
    plan = _internal_plan(d, n, k)
    assert plan.cumulative is not None
    a = plan.trees[stream.choose_guided(plan.cumulative, plan.exact_weights)]
    table = plan.table(a)
    totals = draw_leaf_totals(table, stream, plan.first_step(a) if k > 1 else None)
    seq: List[int] = []
    for c, total in zip(a.outdegrees, totals):
        seq.extend(sample_composition(total, c + 1, stream))
    return CoreLeafDecomp(a, tuple(seq))


def sample_internal_exact(
    d: OffspringWeights, n: int, k: int, stream: RngStream
) -> PlaneTree:
    """
    Exact draw of T given n vertices and k internal nodes.

    Raises:
        EmptyConditioning: If the event has zero probability
    """
    if k == 1:
        if n < 2 or d.rational(0) == 0 or d.rational(n - 1) == 0:
            raise EmptyConditioning(n, k, Mode.INTERNAL.value)
        return PlaneTree.star(n - 1)
    return recompose_leaves(draw_internal_decomposition(d, n, k, stream))


def default_dnk_fallback(n: int, k: int) -> PlaneTree:
    """
    Fixed tree with n vertices and k internal nodes.

    A star of k - 1 one-leaf stars with the spare leaves on the root when
    n >= 2k - 1; otherwise a caterpillar with its spare leaves at the top.
    """
    if k < 1 or n < k + 1:
        raise ValueError(f"No tree has {n} vertices and {k} internal nodes")
    if k == 1:
        return PlaneTree.star(n - 1)
    if n >= 2 * k - 1:
        core = PlaneTree.star(k - 1)
        seq = [n - 2 * k + 1] + [0] * (2 * k - 2)
    else:
        core = PlaneTree.path(k)
        seq = [n - k - 1] + [0] * (2 * k - 2)
    return recompose_leaves(CoreLeafDecomp(core, tuple(seq)))


def sample_Dnk(
    d: OffspringWeights,
    n: int,
    k: int,
    stream: RngStream,
    fallback: Optional[PlaneTree] = None,
) -> PlaneTree:
    """
    Big-jump coupling tree: a star core whose k - 1 leaves get Z_i children,
    Z_i i.i.d. with P(Z = j) = mu(j)/(1 - mu(0)), and the remaining leaves
    spread uniformly over the root corners.

    Returns ``fallback`` when the Z's leave no room for the root corners.
    """
    fallback = fallback or default_dnk_fallback(n, k)
    if len(fallback) != n or fallback.internal != k:
        raise ValueError("fallback must have n vertices and k internal nodes")
    if d.float_pmf(1)[0] >= 1.0:
        raise ValueError("mu(0) must be smaller than 1")
    if k == 1:
        return PlaneTree.star(n - 1)
    room = n - k
    pmf = d.float_pmf(room + 1)
    cdf = np.cumsum(pmf[1:]) / (1.0 - pmf[0])
    draws = np.searchsorted(cdf, stream.uniform(k - 1), side="right") + 1
    if (draws > room).any() or int(draws.sum()) > room:
        return fallback
    z = [int(x) for x in draws]
    root = sample_composition(room - sum(z), k, stream)
    seq = list(root) + [x - 1 for x in z]
    return recompose_leaves(CoreLeafDecomp(PlaneTree.star(k - 1), tuple(seq)))


def sample_uniform_maximal(d: OffspringWeights, k: int, stream: RngStream) -> PlaneTree:
    """
    Uniform tree among the maximal no-unary trees with k leaves.

    A uniform arrangement of the degree multiset is rotated into a
    Lukasiewicz path; every tree has exactly as many arrangements as vertices.
    With several maximal profiles, a profile is first chosen with probability
    proportional to its number of trees times its weight.

    Raises:
        InadmissibleK: If k is not admissible for the support
    """
    profile = bmax(d.support(k), k)
    if not profile.admissible or d.rational(0) == 0:
        raise InadmissibleK(k)
    full = profile.full_profiles()
    chosen = full[0]
    if len(full) > 1:
        masses = []
        for prof in full:
            w = Fraction(count_prescribed_degrees(prof))
            for j, count in prof.items():
                w *= d.rational(j) ** count
            masses.append(w)
        den = math.lcm(*(m.denominator for m in masses))
        ints = [m.numerator * (den // m.denominator) for m in masses]
        chosen = full[stream.choose_weighted(ints)]
    degrees = [j for j, count in chosen.items() for _ in range(count)]
    steps = [c - 1 for c in stream.permutation(degrees)]
    rotated = cyclic_shift(steps, good_rotation(steps))
    return luka_decode(LukasiewiczPath(rotated))


def sample_leaf_sequence_limit(
    a: PlaneTree, alpha: float, stream: RngStream
) -> np.ndarray:
    """
    Limit of the rescaled leaf sequence given the reduced tree a.

    Vertex masses are Dir(alpha + c_u) over the vertices of a; each vertex
    splits its mass uniformly (Dir(1, ..., 1)) among its c_u + 1 corners.
    """
    masses = sample_dirichlet([alpha + c for c in a.outdegrees], stream)
    parts = []
    for mass, c in zip(masses, a.outdegrees):
        split = sample_dirichlet([1.0] * (c + 1), stream) if c else np.ones(1)
        parts.append(mass * split)
    return np.concatenate(parts)


def _sampler_function(
    name: str,
    d: OffspringWeights,
    n: int,
    k: int,
    mode: Mode,
    stream: RngStream,
    cap: int,
    max_tries: int,
    report: SamplerReport,
) -> Callable[[], Sample]:
    if name == "exact":
        draw = sample_leaves_exact if mode is Mode.LEAVES else sample_internal_exact
        return functools.partial(draw, d, n, k, stream)
    if name == "cycle":
        if mode is not Mode.LEAVES:
            raise ValueError("the cycle-lemma sampler conditions on leaves")
        return functools.partial(sample_leaves_cycle, d, n, k, stream)
    if name == "rejection":
        return RejectionSampler(d, n, k, mode, stream, max_tries, report=report).draw
    if name == "dnk":
        if mode is not Mode.INTERNAL:
            raise ValueError("the big-jump coupling conditions on internal nodes")
        fallback = default_dnk_fallback(n, k)
        return functools.partial(sample_Dnk, d, n, k, stream, fallback)
    if name == "bgw":
        pool = _OffspringPool(d, stream)
        return functools.partial(sample_bgw, d, stream, cap, pool)
    if name == "maximal":
        return functools.partial(sample_uniform_maximal, d, k, stream)
    raise ValueError(f"Unknown sampler {name!r}")


def draw_batch(
    name: str,
    d: OffspringWeights,
    n: int,
    k: int,
    mode: Union[Mode, str],
    stream: RngStream,
    count: int,
    cap: int = DEFAULT_MAX_VERTICES,
    max_tries: int = DEFAULT_MAX_TRIES,
) -> Tuple[List[Sample], SamplerReport]:
    """
    Draw ``count`` samples with a named sampler.

    Returns:
        The samples in draw order and the run's report
    """
    report = SamplerReport()
    sampler = _sampler_function(
        name, d, n, k, Mode(mode), stream, cap, max_tries, report
    )
    started = time.perf_counter()
    samples = [sampler() for _ in range(count)]
    report.wall_time = time.perf_counter() - started
    if name != "rejection":
        report.samples = count
    logger.info(
        "%s sampler: %d samples in %.3fs (acceptance %.4f)",
        name,
        report.samples,
        report.wall_time,
        report.acceptance_rate,
    )
    return samples, report


def format_sample_dump(samples: Sequence[Sample], header: Mapping[str, object]) -> str:
    """One canonical step CSV per line after ``# key: value`` header lines."""
    lines = [f"# {key}: {value}" for key, value in header.items()]
    for s in samples:
        lines.append(s.key if isinstance(s, PlaneTree) else f"overflow>{s.cap}")
    return "\n".join(lines) + "\n"

