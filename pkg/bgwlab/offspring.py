"""
Offspring families as providers of exact, possibly scaled, weights.

Every family stores rational parts ``rational(i)`` and a scale token shared by
all indices, so ``mu(i) = scale**scale_power * rational(i)``. Conditional laws
over trees with a fixed number of vertices are ratios of products of equally
many weights, hence exact rationals whatever the scale.
"""

import math
import re
import threading
from abc import ABC, abstractmethod
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .exceptions import SpecParseError
from .models import ScaledRational, log_fraction

Number = Union[Fraction, int, str]


class Mode(str, Enum):
    """Conditioning: on the number of leaves or of internal nodes."""

    LEAVES = "leaves"
    INTERNAL = "internal"


def _fmt(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else str(value)


def rising(x: Fraction, m: int) -> Fraction:
    """Rising factorial x (x+1) ... (x+m-1)."""
    out = Fraction(1)
    for j in range(m):
        out *= x + j
    return out


def falling(x: Fraction, m: int) -> Fraction:
    """Falling factorial x (x-1) ... (x-m+1)."""
    out = Fraction(1)
    for j in range(m):
        out *= x - j
    return out


def general_binomial(alpha: Fraction, i: int) -> Fraction:
    """binom(alpha, i) for rational alpha."""
    return falling(alpha, i) / math.factorial(i)


class OffspringWeights(ABC):
    """
    Base class for offspring families.

    Subclasses provide the recurrence for their rational parts, a vectorised
    float version of the weights for proposals, and their mean.
    """

    family: str = ""
    scale_power: int = 0

    def __init__(self) -> None:
        self._cache: List[Fraction] = []
        self._lock = threading.Lock()
        self._pmf_tables: Dict[int, np.ndarray] = {}

    @property
    @abstractmethod
    def params(self) -> Tuple[Any, ...]:
        """Family parameters, used for equality and hashing."""

    @abstractmethod
    def _next_rational(self, i: int, previous: Sequence[Fraction]) -> Fraction:
        """Rational part of index i, given all earlier ones."""

    @abstractmethod
    def _float_weights(self, count: int) -> np.ndarray:
        """Float weights (scale included) of indices 0..count-1."""

    @abstractmethod
    def float_total(self) -> float:
        """Total float mass of all weights."""

    @abstractmethod
    def mean(self) -> Union[Fraction, float]:
        """Mean of the normalized law."""

    @abstractmethod
    def spec(self) -> str:
        """Canonical textual spec, accepted by :func:`parse_offspring`."""

    @property
    def scale(self) -> float:
        return 1.0

    @property
    def scale_label(self) -> str:
        return "1"

    @property
    def max_index(self) -> Optional[int]:
        """Largest index with nonzero weight, or None for infinite support."""
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OffspringWeights):
            return NotImplemented
        return (self.family, self.params) == (other.family, other.params)

    def __hash__(self) -> int:
        return hash((self.family, self.params))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec()!r})"

    def rational(self, i: int) -> Fraction:
        """Exact rational part of the weight of index i."""
        if i < 0:
            raise ValueError("Offspring index must be nonnegative")
        if self.max_index is not None and i > self.max_index:
            return Fraction(0)
        if i >= len(self._cache):
            with self._lock:
                while len(self._cache) <= i:
                    nxt = self._next_rational(len(self._cache), self._cache)
                    self._cache.append(nxt)
        return self._cache[i]

    def rationals(self, upto: int) -> Tuple[Fraction, ...]:
        """Rational parts of indices 0..upto."""
        top = upto if self.max_index is None else min(upto, self.max_index)
        self.rational(top)
        return tuple(self._cache[: top + 1]) + (Fraction(0),) * (upto - top)

    def weight(self, i: int) -> ScaledRational:
        """Exact scaled weight of index i."""
        return ScaledRational(
            self.rational(i), self.scale_power, self.scale, self.scale_label
        )

    def log_rationals(self, upto: int) -> np.ndarray:
        """Natural logs of the rational parts of 0..upto (-inf where zero)."""
        return np.array([log_fraction(r) for r in self.rationals(upto)], dtype=float)

    def support(self, upto: int) -> List[int]:
        """Indices up to ``upto`` with positive weight."""
        return [i for i, r in enumerate(self.rationals(upto)) if r > 0]

    def float_pmf(self, count: int) -> np.ndarray:
        """Normalized float probabilities of 0..count-1; the rest is the tail."""
        table = self._pmf_tables.get(count)
        if table is None:
            table = self._float_weights(count) / self.float_total()
            table.setflags(write=False)
            self._pmf_tables[count] = table
        return table

    def validate_for(self, mode: Union[Mode, str]) -> List[str]:
        """
        Check that the family can be conditioned in the given mode.

        Returns:
            Human-readable violations; empty when the family is usable
        """
        mode = Mode(mode)
        problems: List[str] = []
        if mode is Mode.LEAVES and self.rational(1) <= 0:
            problems.append("μ(1)=0")
        if mode is Mode.INTERNAL:
            if self.rational(0) <= 0:
                problems.append("μ(0)=0")
            upper = self.max_index if self.max_index is not None else 64
            if not any(self.rational(j) > 0 for j in range(1, upper + 1)):
                problems.append("μ(j)=0 for every j≥1")
        return problems


class Finite(OffspringWeights):
    """Arbitrary finitely supported weights μ(0), ..., μ(m)."""

    family = "finite"

    def __init__(self, weights: Sequence[Number]) -> None:
        super().__init__()
        values = tuple(Fraction(w) for w in weights)
        if not values:
            raise ValueError("finite family needs at least one weight")
        if any(w < 0 for w in values):
            raise ValueError("weights must be nonnegative")
        if not any(values):
            raise ValueError("at least one weight must be positive")
        while len(values) > 1 and values[-1] == 0:
            values = values[:-1]
        self.weights = values

    @property
    def params(self) -> Tuple[Any, ...]:
        return self.weights

    @property
    def max_index(self) -> Optional[int]:
        return len(self.weights) - 1

    def _next_rational(self, i: int, previous: Sequence[Fraction]) -> Fraction:
        return self.weights[i]

    def _float_weights(self, count: int) -> np.ndarray:
        out = np.zeros(count)
        top = min(count, len(self.weights))
        out[:top] = [float(w) for w in self.weights[:top]]
        return out

    def float_total(self) -> float:
        return float(sum(self.weights))

    def mean(self) -> Fraction:
        total = sum(self.weights)
        return sum((i * w for i, w in enumerate(self.weights)), Fraction(0)) / total

    def spec(self) -> str:
        return "finite:[" + ",".join(_fmt(w) for w in self.weights) + "]"


class Geometric(OffspringWeights):
    """μ(i) = p (1-p)^i."""

    family = "geometric"

    def __init__(self, p: Number) -> None:
        super().__init__()
        self.p = Fraction(p)
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")

    @property
    def params(self) -> Tuple[Any, ...]:
        return (self.p,)

    def _next_rational(self, i: int, previous: Sequence[Fraction]) -> Fraction:
        return self.p if i == 0 else previous[-1] * (1 - self.p)

    def _float_weights(self, count: int) -> np.ndarray:
        p = float(self.p)
        return p * np.power(1.0 - p, np.arange(count))

    def float_total(self) -> float:
        return 1.0

    def mean(self) -> Fraction:
        return (1 - self.p) / self.p

    def spec(self) -> str:
        return f"geometric:p={_fmt(self.p)}"


class PolyExp(OffspringWeights):
    """
    Generating function c exp(P(z)) with P(z) = a_1 z + ... + a_p z^p.

    Rational parts are [z^i] exp(P), from i f_i = sum_j j a_j f_{i-j}; the
    scale token is c = exp(-P(1)).
    """

    family = "polyexp"
    scale_power = 1

    def __init__(self, coefficients: Sequence[Number]) -> None:
        super().__init__()
        a = tuple(Fraction(x) for x in coefficients)
        while a and a[-1] == 0:
            a = a[:-1]
        if not a:
            raise ValueError("P must be a nonzero polynomial")
        if any(x < 0 for x in a):
            raise ValueError("coefficients of P must be nonnegative")
        if math.gcd(*[j for j, x in enumerate(a, start=1) if x]) != 1:
            raise ValueError("gcd of the exponents of P must be 1")
        self.a = a

    @property
    def params(self) -> Tuple[Any, ...]:
        return self.a

    @property
    def degree(self) -> int:
        return len(self.a)

    @property
    def scale(self) -> float:
        return math.exp(-float(sum(self.a)))

    @property
    def scale_label(self) -> str:
        return "exp(-P(1))"

    def _next_rational(self, i: int, previous: Sequence[Fraction]) -> Fraction:
        if i == 0:
            return Fraction(1)
        total = sum(
            (
                j * aj * previous[i - j]
                for j, aj in enumerate(self.a, start=1)
                if j <= i
            ),
            Fraction(0),
        )
        return total / i

    def _float_weights(self, count: int) -> np.ndarray:
        out = np.zeros(count)
        a = [float(x) for x in self.a]
        p = len(a)
        for i in range(count):
            if i == 0:
                out[0] = 1.0
                continue
            out[i] = sum((j + 1) * a[j] * out[i - j - 1] for j in range(min(p, i))) / i
            if i > 2 * p and not out[i - p : i + 1].any():
                break
        return out * self.scale

    def float_total(self) -> float:
        return 1.0

    def mean(self) -> Fraction:
        return sum((j * x for j, x in enumerate(self.a, start=1)), Fraction(0))

    def spec(self) -> str:
        return "polyexp:a=[" + ",".join(_fmt(x) for x in self.a) + "]"


class StableTail(OffspringWeights):
    """
    Generating function z - m z + m z^2 + c (1 - z)^alpha, 1 < alpha < 2.

    The law has mean 1 + m and a tail of order c n^(-alpha).
    """

    family = "stabletail"

    def __init__(self, alpha: Number, m: Number, c: Number) -> None:
        super().__init__()
        self.alpha = Fraction(alpha)
        self.m = Fraction(m)
        self.c = Fraction(c)
        if not 1 < self.alpha < 2:
            raise ValueError("alpha must lie in (1, 2)")
        if self.m <= -1:
            raise ValueError("m must be greater than -1")
        if self.c <= 0:
            raise ValueError("c must be positive")

    @property
    def params(self) -> Tuple[Any, ...]:
        return (self.alpha, self.m, self.c)

    def _next_rational(self, i: int, previous: Sequence[Fraction]) -> Fraction:
        alpha, m, c = self.alpha, self.m, self.c
        if i == 0:
            return c
        if i == 1:
            return 1 - m - c * alpha
        if i == 2:
            return m + c * alpha * (alpha - 1) / 2
        if i == 3:
            return -c * general_binomial(alpha, 3)
        return previous[-1] * (i - 1 - alpha) / i

    def _float_weights(self, count: int) -> np.ndarray:
        out = np.zeros(count)
        head = min(count, 4)
        out[:head] = [float(self.rational(i)) for i in range(head)]
        if count > 4:
            idx = np.arange(4, count, dtype=float)
            out[4:] = out[3] * np.cumprod((idx - 1.0 - float(self.alpha)) / idx)
        return out

    def float_total(self) -> float:
        return 1.0

    def mean(self) -> Fraction:
        return 1 + self.m

    def tail_mass(self, n: int) -> float:
        """Float value of sum_{i >= n} μ(i)."""
        return 1.0 - math.fsum(self._float_weights(n))

    def tail_equivalent(self, n: int) -> float:
        """Predicted tail c n^(-alpha) / (-Gamma(1 - alpha))."""
        alpha = float(self.alpha)
        return float(self.c) * n ** (-alpha) / (-float(special.gamma(1.0 - alpha)))

    def validate_for(self, mode: Union[Mode, str]) -> List[str]:
        problems = super().validate_for(mode)
        if 1 - self.m - self.c * self.alpha < 0:
            problems.append("1−m−cα < 0")
        if self.rational(2) < 0:
            problems.append("μ(2) < 0")
        return problems

    def spec(self) -> str:
        return (
            f"stabletail:alpha={_fmt(self.alpha)},m={_fmt(self.m)},c={_fmt(self.c)}"
        )


class PowerLaw(OffspringWeights):
    """
    Weights c / i^(1+beta) for i >= 1 and a designated w0 at 0.

    When 1+beta is not an integer the weights are irrational; the rational
    part stored is then the exact value of the nearest double.
    """

    family = "powerlaw"

    def __init__(self, beta: Number, c: Number, w0: Optional[Number] = None) -> None:
        super().__init__()
        self.beta = Fraction(beta)
        self.c = Fraction(c)
        if self.beta <= 1:
            raise ValueError("beta must be greater than 1")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if w0 is None:
            tail = float(self.c) * float(special.zeta(1.0 + float(self.beta)))
            self.w0 = Fraction(tail).limit_denominator(10**6)
        else:
            self.w0 = Fraction(w0)
        if self.w0 < 0:
            raise ValueError("w0 must be nonnegative")

    @property
    def params(self) -> Tuple[Any, ...]:
        return (self.beta, self.c, self.w0)

    def _next_rational(self, i: int, previous: Sequence[Fraction]) -> Fraction:
        if i == 0:
            return self.w0
        exponent = 1 + self.beta
        if exponent.denominator == 1:
            return self.c / i ** exponent.numerator
        return Fraction(float(self.c) * float(i) ** (-float(exponent)))

    def _float_weights(self, count: int) -> np.ndarray:
        out = np.zeros(count)
        if count:
            out[0] = float(self.w0)
        if count > 1:
            idx = np.arange(1, count, dtype=float)
            out[1:] = float(self.c) * idx ** (-(1.0 + float(self.beta)))
        return out

    def float_total(self) -> float:
        return float(self.w0) + float(self.c) * float(
            special.zeta(1.0 + float(self.beta))
        )

    def mean(self) -> float:
        beta = float(self.beta)
        return float(self.c) * float(special.zeta(beta)) / self.float_total()

    def spec(self) -> str:
        return (
            f"powerlaw:beta={_fmt(self.beta)},c={_fmt(self.c)},w0={_fmt(self.w0)}"
        )


_RATIONAL = re.compile(r"-?\d+(?:/\d+|\.\d+)?")
_NAME = re.compile(r"[a-z_][a-z0-9_]*")


class _SpecScanner:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def fail(self, reason: str, pos: Optional[int] = None) -> SpecParseError:
        return SpecParseError(self.text, self.pos if pos is None else pos, reason)

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str) -> None:
        if self.peek() != char:
            found = repr(self.peek()) if self.peek() else "end of input"
            raise self.fail(f"expected {char!r}, found {found}")
        self.pos += 1

    def name(self) -> str:
        match = _NAME.match(self.text, self.pos)
        if not match:
            raise self.fail("expected a name")
        self.pos = match.end()
        return match.group()

    def rational(self) -> Fraction:
        match = _RATIONAL.match(self.text, self.pos)
        if not match:
            raise self.fail("expected a rational number")
        start = self.pos
        self.pos = match.end()
        try:
            return Fraction(match.group())
        except ZeroDivisionError:
            raise self.fail("zero denominator", start) from None

    def rational_list(self) -> List[Fraction]:
        self.expect("[")
        values = [self.rational()]
        while self.peek() == ",":
            self.pos += 1
            values.append(self.rational())
        self.expect("]")
        return values


_FAMILY_PARAMS = {
    "geometric": (("p",), ()),
    "polyexp": (("a",), ()),
    "stabletail": (("alpha", "m", "c"), ()),
    "powerlaw": (("beta", "c"), ("w0",)),
}


def parse_offspring(text: str) -> OffspringWeights:
    """
    Parse a family spec such as ``"geometric:p=1/2"`` or ``"finite:[1/2,0,1/2]"``.

    Raises:
        SpecParseError: With the position and reason of the first problem
    """
    scan = _SpecScanner(text.strip().lower())
    family = scan.name()
    scan.expect(":")
    body_start = scan.pos
    if family == "finite":
        weights = scan.rational_list()
        if not scan.at_end():
            raise scan.fail("unexpected trailing input")
        try:
            return Finite(weights)
        except ValueError as exc:
            raise scan.fail(str(exc), body_start) from None
    if family not in _FAMILY_PARAMS:
        raise scan.fail(f"unknown family {family!r}", 0)

    required, optional = _FAMILY_PARAMS[family]
    values: Dict[str, Any] = {}
    while True:
        key_pos = scan.pos
        key = scan.name()
        if key not in required and key not in optional:
            raise scan.fail(f"unknown parameter {key!r} for {family}", key_pos)
        if key in values:
            raise scan.fail(f"duplicate parameter {key!r}", key_pos)
        scan.expect("=")
        values[key] = scan.rational_list() if key == "a" else scan.rational()
        if scan.at_end():
            break
        scan.expect(",")
    missing = [key for key in required if key not in values]
    if missing:
        raise scan.fail(f"missing parameter {missing[0]!r}")

    try:
        if family == "geometric":
            return Geometric(values["p"])
        if family == "polyexp":
            return PolyExp(values["a"])
        if family == "stabletail":
            return StableTail(values["alpha"], values["m"], values["c"])
        return PowerLaw(values["beta"], values["c"], values.get("w0"))
    except ValueError as exc:
        raise scan.fail(str(exc), body_start) from None
