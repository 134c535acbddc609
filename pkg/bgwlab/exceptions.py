"""
bgwlab exceptions.
"""

from typing import Optional


class BgwLabError(Exception):
    """Base exception for all bgwlab errors."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class InvalidPath(BgwLabError):
    """Exception raised when a step sequence is not a Lukasiewicz path."""


class ShapeMismatch(BgwLabError):
    """Exception raised when a decomposition sequence does not fit its tree."""


class NoInternalNode(BgwLabError):
    """Exception raised when a tree without internal nodes is decomposed."""

    def __init__(self, message: str = "Tree has no internal node") -> None:
        super().__init__(message)


class BoundExceeded(BgwLabError):
    """Exception raised when exhaustive enumeration is asked for too large a size."""

    def __init__(self, n: int, bound: int) -> None:
        super().__init__(
            f"Enumeration of size {n} exceeds the bound {bound} "
            "(raise BGWLAB_MAX_ENUM to allow it)"
        )
        self.n = n
        self.bound = bound


class InfeasibleProfile(BgwLabError):
    """Exception raised for an outdegree profile no plane tree can realize."""


class EmptyConditioning(BgwLabError):
    """Exception raised when a conditioning event has zero probability."""

    def __init__(self, n: int, k: int, mode: str) -> None:
        super().__init__(
            f"No tree with n={n} and k={k} ({mode} conditioning) has positive weight"
        )
        self.n = n
        self.k = k
        self.mode = mode


class InadmissibleK(BgwLabError):
    """Exception raised when k has no maximal no-unary tree for the support."""

    def __init__(self, k: int) -> None:
        super().__init__(f"k={k} is not an admissible leaf count for this support")
        self.k = k


class NonDivisible(BgwLabError):
    """Exception raised when a series is not divisible by z after a shift."""


class GaveUp(BgwLabError):
    """Exception raised when a rejection sampler exhausts its tries."""

    def __init__(self, tries: int) -> None:
        super().__init__(f"Rejection sampler gave up after {tries} tries")
        self.tries = tries


class DegenerateSupport(BgwLabError):
    """Exception raised when a goodness-of-fit test has fewer than two buckets."""


class SpecParseError(BgwLabError):
    """Exception raised for a malformed offspring family spec."""

    def __init__(self, text: str, position: int, reason: str) -> None:
        super().__init__(f"Cannot parse {text!r} at position {position}: {reason}")
        self.text = text
        self.position = position
        self.reason = reason


class ConfigError(BgwLabError, ValueError):
    """Exception raised for invalid job configuration or settings."""

    def __init__(self, message: str, key: Optional[str] = None) -> None:
        super().__init__(message)
        self.key = key
