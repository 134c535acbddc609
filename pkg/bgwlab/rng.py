"""
Reproducible random streams and exact discrete choice.

Streams are numpy ``PCG64`` generators seeded through ``SeedSequence`` with
the substream index as spawn key, so (seed, substream) fixes the output on
every platform.

Exact choice compares cumulative integer weights against a dyadic uniform
u / 2^b and appends 64 random bits until the comparison is unambiguous.
"""

import itertools
import logging
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

ALGORITHM = "PCG64/SeedSequence"

# Float-guided choices decide only farther than this (relative to the total)
# from every breakpoint; closer draws go to the exact integer law.
GUIDE_TOLERANCE = 1e-9

T = TypeVar("T")


class RngStream:
    """
    Random stream identified by a 64-bit seed and a substream index.

    Args:
        seed: 64-bit unsigned seed
        substream: Index of an independent substream of the same seed
    """

    algorithm = ALGORITHM

    def __init__(self, seed: int, substream: int = 0) -> None:
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if substream < 0:
            raise ValueError("substream index must be nonnegative")
        self.seed = seed
        self.substream = substream
        self._bitgen = np.random.PCG64(
            np.random.SeedSequence(seed, spawn_key=(substream,))
        )
        self.generator = np.random.Generator(self._bitgen)
        self.exact_fallbacks = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, substream={self.substream})"

    def spawn(self, substream: int) -> "RngStream":
        """Independent stream of the same seed."""
        return RngStream(self.seed, substream)

    def bits64(self) -> int:
        """64 fresh random bits."""
        return int(self._bitgen.random_raw())

    def below(self, bound: int) -> int:
        """Exactly uniform integer in [0, bound), any size of bound."""
        if bound < 1:
            raise ValueError("bound must be positive")
        if bound == 1:
            return 0
        nbits = (bound - 1).bit_length()
        words = (nbits + 63) // 64
        while True:
            value = 0
            for _ in range(words):
                value = (value << 64) | self.bits64()
            value >>= words * 64 - nbits
            if value < bound:
                return value

    def uniform(self, size: Optional[int] = None) -> np.ndarray:
        return self.generator.random(size)

    def permutation(self, items: Sequence[T]) -> List[T]:
        """Uniform random reordering of a sequence."""
        order = self.generator.permutation(len(items))
        return [items[int(i)] for i in order]

    def choose_cumulative(
        self, cumulative: Sequence[int], prefix: Optional[Tuple[int, int]] = None
    ) -> int:
        """
        Exact inverse-CDF choice from nondecreasing cumulative integer weights.

        Args:
            cumulative: Running totals of nonnegative integer weights
            prefix: Already drawn (bits, count) of the uniform to refine

        Returns:
            Index i with probability (cumulative[i] - cumulative[i-1]) / total
        """
        total = cumulative[-1]
        if total <= 0:
            raise ValueError("Cannot choose from an all-zero weight system")
        u, b = prefix if prefix is not None else (self.bits64(), 64)
        while True:
            lo = u * total
            hi = lo + total
            left, right = 0, len(cumulative) - 1
            while left < right:
                mid = (left + right) // 2
                if (cumulative[mid] << b) > lo:
                    right = mid
                else:
                    left = mid + 1
            if (cumulative[left] << b) >= hi:
                return left
            u = (u << 64) | self.bits64()
            b += 64

    def choose_weighted(self, weights: Sequence[int]) -> int:
        """Exact choice proportional to nonnegative integer weights."""
        return self.choose_cumulative(list(itertools.accumulate(weights)))

    def choose_guided(
        self,
        cumulative: np.ndarray,
        exact: Callable[[], Sequence[int]],
    ) -> int:
        """
        Choice guided by a float cumulative, deferring to exact weights near
        breakpoints.

        Args:
            cumulative: Float running totals approximating the exact law
            exact: Producer of the exact integer weights, called only when the
                uniform falls within ``GUIDE_TOLERANCE`` of a breakpoint
        """
        total = float(cumulative[-1])
        u = self.bits64() >> 11
        x = u * total / 2.0**53
        i = int(np.searchsorted(cumulative, x, side="right"))
        width = GUIDE_TOLERANCE * total
        if (
            i < len(cumulative)
            and cumulative[i] - x > width
            and (i == 0 or x - cumulative[i - 1] > width)
        ):
            return i
        self.exact_fallbacks += 1
        logger.debug("uniform near a breakpoint; deciding with exact weights")
        return self.choose_cumulative(list(itertools.accumulate(exact())), (u, 53))

    def standard_gamma(self, shapes: Sequence[float]) -> np.ndarray:
        return self.generator.standard_gamma(np.asarray(shapes, dtype=float))


def float_cumulative(log_weights: np.ndarray) -> np.ndarray:
    """Float running totals of exp(log_weights), rescaled by the largest term."""
    top = float(np.max(log_weights))
    if not np.isfinite(top):
        raise ValueError("Cannot choose from an all-zero weight system")
    return np.cumsum(np.exp(log_weights - top))
