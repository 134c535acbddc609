"""
Shared value objects for bgwlab.
"""

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Hashable, Iterable, List, Mapping, Optional, Tuple


def fraction_to_str(value: Fraction) -> str:
    """Render a fraction as "num/den" (denominator always present)."""
    return f"{value.numerator}/{value.denominator}"


def log_fraction(value: Fraction) -> float:
    """Natural logarithm of a positive fraction without float overflow."""
    if value <= 0:
        return -math.inf
    return math.log(value.numerator) - math.log(value.denominator)


@dataclass(frozen=True)
class ScaledRational:
    """Exact value ``mantissa * scale**power`` with a symbolic scale token."""

    mantissa: Fraction
    power: int = 0
    scale: float = 1.0
    scale_label: str = "1"

    def __mul__(self, other: "ScaledRational") -> "ScaledRational":
        if self.scale_label != other.scale_label and self.power and other.power:
            raise ValueError("Cannot multiply values carrying different scale tokens")
        label = self.scale_label if self.power else other.scale_label
        scale = self.scale if self.power else other.scale
        return ScaledRational(
            self.mantissa * other.mantissa, self.power + other.power, scale, label
        )

    def to_float(self) -> float:
        """Evaluate in float through log space, so huge powers do not overflow."""
        if self.mantissa == 0:
            return 0.0
        return math.exp(log_fraction(self.mantissa) + self.power * math.log(self.scale))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON output."""
        return {
            "num": str(self.mantissa.numerator),
            "den": str(self.mantissa.denominator),
            "scale": self.scale_label,
            "scale_power": self.power,
            "value": self.to_float(),
        }


def _check_law(masses: Iterable[Fraction]) -> None:
    total = Fraction(0)
    for mass in masses:
        if mass < 0:
            raise ValueError(f"Negative probability mass {mass}")
        total += mass
    if total != 1:
        raise ValueError(f"Probability masses sum to {total}, not 1")


@dataclass(frozen=True)
class TreeDist:
    """Exact finite law over canonical tree keys (Lukasiewicz step CSV)."""

    atoms: Dict[str, Fraction] = field(default_factory=dict)
    support: str = ""

    def __post_init__(self) -> None:
        """Validate the law after initialization."""
        _check_law(self.atoms.values())

    @classmethod
    def from_weights(
        cls, weights: Mapping[str, Fraction], support: str = ""
    ) -> "TreeDist":
        """Normalize nonnegative weights; zero-weight keys are dropped."""
        total = sum(weights.values(), Fraction(0))
        if total == 0:
            raise ValueError("Cannot normalize an all-zero weight system")
        return cls(
            {key: Fraction(w) / total for key, w in weights.items() if w != 0},
            support,
        )

    @classmethod
    def uniform(cls, keys: Iterable[str], support: str = "") -> "TreeDist":
        """Uniform law over the given keys."""
        return cls.from_weights({key: Fraction(1) for key in keys}, support)

    @classmethod
    def point_mass(cls, key: str, support: str = "") -> "TreeDist":
        """Law putting all mass on one tree."""
        return cls({key: Fraction(1)}, support)

    def prob(self, key: Any) -> Fraction:
        """Probability of a key or of any object exposing a ``key`` attribute."""
        name = key if isinstance(key, str) else key.key
        return self.atoms.get(name, Fraction(0))

    def keys(self) -> List[str]:
        return list(self.atoms)

    def to_list(self) -> List[Dict[str, Any]]:
        """Convert to the JSON record list ``[{tree, prob_num, prob_den}]``."""
        return [
            {
                "tree": key,
                "prob_num": str(mass.numerator),
                "prob_den": str(mass.denominator),
            }
            for key, mass in self.atoms.items()
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), indent=2)

    @classmethod
    def from_list(cls, records: List[Dict[str, Any]], support: str = "") -> "TreeDist":
        """Create a law from records produced by :meth:`to_list`."""
        return cls(
            {
                rec["tree"]: Fraction(int(rec["prob_num"]), int(rec["prob_den"]))
                for rec in records
            },
            support,
        )


@dataclass(frozen=True)
class IntSeqDist:
    """Exact finite law over integer vectors."""

    atoms: Dict[Tuple[int, ...], Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate the law after initialization."""
        _check_law(self.atoms.values())

    @classmethod
    def from_weights(cls, weights: Mapping[Tuple[int, ...], Fraction]) -> "IntSeqDist":
        """Normalize nonnegative weights; zero-weight vectors are dropped."""
        total = sum(weights.values(), Fraction(0))
        if total == 0:
            raise ValueError("Cannot normalize an all-zero weight system")
        return cls({key: Fraction(w) / total for key, w in weights.items() if w != 0})

    def prob(self, value: Tuple[int, ...]) -> Fraction:
        return self.atoms.get(tuple(value), Fraction(0))

    def marginal(self, index: int) -> Dict[int, Fraction]:
        """Law of one coordinate."""
        out: Dict[int, Fraction] = {}
        for value, mass in self.atoms.items():
            out[value[index]] = out.get(value[index], Fraction(0)) + mass
        return dict(sorted(out.items()))

    def mean(self) -> Tuple[Fraction, ...]:
        """Exact mean vector."""
        if not self.atoms:
            return ()
        width = len(next(iter(self.atoms)))
        return tuple(
            sum((mass * value[i] for value, mass in self.atoms.items()), Fraction(0))
            for i in range(width)
        )

    def to_list(self) -> List[Dict[str, Any]]:
        """Convert to JSON records ``[{value, prob_num, prob_den}]``."""
        return [
            {
                "value": list(value),
                "prob_num": str(mass.numerator),
                "prob_den": str(mass.denominator),
            }
            for value, mass in self.atoms.items()
        ]


@dataclass
class SamplerReport:
    """Bookkeeping for a run of a sampler."""

    samples: int = 0
    rejections: int = 0
    wall_time: float = 0.0

    @property
    def acceptance_rate(self) -> float:
        tries = self.samples + self.rejections
        return self.samples / tries if tries else 0.0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON output."""
        return {
            "samples": self.samples,
            "rejections": self.rejections,
            "wall_time": round(self.wall_time, 6),
            "acceptance_rate": self.acceptance_rate,
        }


@dataclass(frozen=True)
class Overflow:
    """Marker returned when an unconditioned tree grows past its cap."""

    vertices: int
    cap: int


@dataclass(frozen=True)
class CondensationStats:
    """Outdegree statistics of the internal nodes of one tree."""

    root_out: int
    max_out: int
    second_max_out: int
    root_is_max: bool

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON output."""
        return {
            "root_out": self.root_out,
            "max_out": self.max_out,
            "second_max_out": self.second_max_out,
            "root_is_max": self.root_is_max,
        }


@dataclass
class EmpiricalBatch:
    """Observed values of one statistic, with the seed that produced them."""

    statistic: str
    values: List[Any] = field(default_factory=list)
    seed: Optional[int] = None
    substream: int = 0

    @property
    def size(self) -> int:
        return len(self.values)

    def counts(self) -> "Counter[Hashable]":
        """Frequency table keyed by canonical key (trees) or by the value itself."""
        return Counter(
            value.key if hasattr(value, "key") else value for value in self.values
        )
