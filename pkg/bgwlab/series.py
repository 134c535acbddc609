"""
Truncated power series with exact rational coefficients.

A series carries a ``scale_power``: the coefficients are rational parts and
the true coefficients are ``scale**scale_power`` times them, where the scale
is the offspring family's token. Products add scale powers, so every
coefficient of the product of j generating functions has scale power j.
"""

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .exceptions import NonDivisible
from .models import fraction_to_str
from .offspring import OffspringWeights, PolyExp
from .trees import PlaneTree

logger = logging.getLogger(__name__)


def _common_numerators(coeffs: Sequence[Fraction]) -> Tuple[List[int], int]:
    den = math.lcm(*(c.denominator for c in coeffs)) if coeffs else 1
    return [c.numerator * (den // c.denominator) for c in coeffs], den


@dataclass(frozen=True)
class TruncSeries:
    """Power series known up to and including z^order."""

    coeffs: Tuple[Fraction, ...]
    scale_power: int = 0

    def __post_init__(self) -> None:
        """Validate the series after initialization."""
        if not self.coeffs:
            raise ValueError("A truncated series needs at least one coefficient")

    @classmethod
    def of(
        cls, values: Sequence[Union[Fraction, int]], scale_power: int = 0
    ) -> "TruncSeries":
        return cls(tuple(Fraction(v) for v in values), scale_power)

    @classmethod
    def one(cls, order: int) -> "TruncSeries":
        return cls((Fraction(1),) + (Fraction(0),) * order)

    @classmethod
    def from_offspring(cls, d: OffspringWeights, order: int) -> "TruncSeries":
        """Generating function of the offspring weights, to the given order."""
        if order < 0:
            raise ValueError("order must be nonnegative")
        return cls(d.rationals(order), d.scale_power)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> Fraction:
        if not 0 <= i <= self.order:
            raise IndexError(
                f"Coefficient {i} is outside the known range 0..{self.order}"
            )
        return self.coeffs[i]

    def truncate(self, order: int) -> "TruncSeries":
        if order > self.order:
            raise ValueError(f"Cannot extend a series of order {self.order} to {order}")
        return TruncSeries(self.coeffs[: order + 1], self.scale_power)

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        if self.scale_power != other.scale_power:
            raise ValueError("Cannot add series with different scale powers")
        order = min(self.order, other.order)
        return TruncSeries(
            tuple(self.coeffs[i] + other.coeffs[i] for i in range(order + 1)),
            self.scale_power,
        )

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        order = min(self.order, other.order)
        ia, da = _common_numerators(self.coeffs[: order + 1])
        ib, db = _common_numerators(other.coeffs[: order + 1])
        nz_a = [i for i, x in enumerate(ia) if x]
        den = da * db
        out = []
        for s in range(order + 1):
            acc = 0
            for i in nz_a:
                if i > s:
                    break
                acc += ia[i] * ib[s - i]
            out.append(Fraction(acc, den))
        return TruncSeries(tuple(out), self.scale_power + other.scale_power)

    def scalar_mul(self, value: Union[Fraction, int], power: int = 0) -> "TruncSeries":
        """Multiply by a constant carrying ``power`` extra scale factors."""
        value = Fraction(value)
        coeffs = tuple(c * value for c in self.coeffs)
        return TruncSeries(coeffs, self.scale_power + power)

    def derivative(self, times: int = 1) -> "TruncSeries":
        """The ``times``-th derivative; the order drops by ``times``."""
        if times > self.order:
            raise ValueError("Derivative would leave no known coefficient")
        return TruncSeries(
            tuple(
                self.coeffs[i + times] * math.perm(i + times, times)
                for i in range(self.order - times + 1)
            ),
            self.scale_power,
        )

    def shift_div_z(self, constant: Union[Fraction, int]) -> "TruncSeries":
        """
        Compute (self - constant) / z.

        Raises:
            NonDivisible: If the constant term differs from ``constant``
        """
        if self.coeffs[0] != constant:
            raise NonDivisible(
                f"Constant term {self.coeffs[0]} differs from {constant}; "
                "the series is not divisible by z"
            )
        if self.order == 0:
            raise ValueError("Shift would leave no known coefficient")
        return TruncSeries(self.coeffs[1:], self.scale_power)

    def shift_mul_z(self, times: int) -> "TruncSeries":
        """Multiply by z^times keeping the order."""
        if times == 0:
            return self
        zeros = (Fraction(0),) * min(times, self.order + 1)
        return TruncSeries((zeros + self.coeffs)[: self.order + 1], self.scale_power)

    def pow(self, m: int) -> "TruncSeries":
        """Exact m-th power by repeated squaring."""
        if m < 0:
            raise ValueError("Power must be nonnegative")
        result = TruncSeries.one(self.order)
        base = self
        while m:
            if m & 1:
                result = result * base
            m >>= 1
            if m:
                base = base * base
        return result

    def to_json(self) -> str:
        """Debug dump as a JSON array of "num/den" strings."""
        return json.dumps([fraction_to_str(c) for c in self.coeffs])


def derivative_of_offspring(d: OffspringWeights, c: int, order: int) -> TruncSeries:
    """c-th derivative of the offspring generating function, to the given order."""
    return TruncSeries.from_offspring(d, order + c).derivative(c)


@lru_cache(maxsize=256)
def build_Ga(d: OffspringWeights, a: PlaneTree, order: int) -> TruncSeries:
    """
    Product over the vertices of ``a`` of (F - mu(0))/z for leaves and of the
    c_u-th derivative of F for internal nodes.

    Args:
        d: Offspring family providing F
        a: Reduced tree
        order: Truncation order of the result

    Returns:
        Exact series whose scale power is |a| times the family's
    """
    mu0 = d.rational(0)
    tilde = TruncSeries.from_offspring(d, order + 1).shift_div_z(mu0)
    result = tilde.pow(a.phi(0))
    for c in a.internal_outdegrees:
        result = result * derivative_of_offspring(d, c, order)
    logger.debug("built G for %s to order %d", a.key, order)
    return result


def log_convolve(x: np.ndarray, y: np.ndarray, order: int) -> np.ndarray:
    """Log of the convolution of exp(x) and exp(y), up to index ``order``."""
    out = np.full(order + 1, -np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        for s in range(order + 1):
            out[s] = special.logsumexp(x[: s + 1] + y[s::-1])
    return out


def log_offspring_derivative(d: OffspringWeights, c: int, order: int) -> np.ndarray:
    """Log coefficients of the c-th derivative of F (rational parts)."""
    logs = d.log_rationals(order + c)[c:]
    i = np.arange(order + 1, dtype=float)
    return logs + special.gammaln(i + c + 1.0) - special.gammaln(i + 1.0)


def log_build_Ga(d: OffspringWeights, a: PlaneTree, order: int) -> np.ndarray:
    """Float log-space counterpart of :func:`build_Ga`."""
    tilde = d.log_rationals(order + 1)[1:]
    result: np.ndarray = np.full(order + 1, -np.inf)
    result[0] = 0.0
    factors = [tilde] * a.phi(0) + [
        log_offspring_derivative(d, c, order) for c in a.internal_outdegrees
    ]
    for factor in factors:
        result = log_convolve(result, factor, order)
    return result


@dataclass(frozen=True)
class FactorPolynomial:
    """The polynomial z^{phi_0(a)} Q_a of the polynomial-exponential factorization."""

    coeffs: Tuple[Fraction, ...]
    shift: int

    @property
    def degree(self) -> int:
        nonzero = [i for i, c in enumerate(self.coeffs) if c]
        return nonzero[-1] if nonzero else -1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[self.degree] if self.degree >= 0 else Fraction(0)

    @property
    def q_degree(self) -> int:
        """Degree of Q_a itself."""
        return self.degree - self.shift


def _poly_mul(x: Sequence[Fraction], y: Sequence[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * (len(x) + len(y) - 1)
    for i, xi in enumerate(x):
        if xi:
            for j, yj in enumerate(y):
                out[i + j] += xi * yj
    return out


def _poly_add(x: Sequence[Fraction], y: Sequence[Fraction]) -> List[Fraction]:
    size = max(len(x), len(y))
    return [
        (x[i] if i < len(x) else Fraction(0)) + (y[i] if i < len(y) else Fraction(0))
        for i in range(size)
    ]


def _poly_derivative(x: Sequence[Fraction]) -> List[Fraction]:
    return [i * x[i] for i in range(1, len(x))] or [Fraction(0)]


def q_polynomial(d: PolyExp, a: PlaneTree) -> FactorPolynomial:
    """
    Build z^{phi_0(a)} Q_a = prod over internal u of P_{c_u}, where F^{(j)} = P_j F.

    P_0 = 1 and P_{j+1} = P_j' + P' P_j, so P_1 = P'.
    """
    p_prime = [j * aj for j, aj in enumerate(d.a, start=1)]
    polys: List[List[Fraction]] = [[Fraction(1)]]
    for _ in range(max(a.internal_outdegrees, default=0)):
        prev = polys[-1]
        polys.append(_poly_add(_poly_derivative(prev), _poly_mul(p_prime, prev)))
    product: List[Fraction] = [Fraction(1)]
    for c in a.internal_outdegrees:
        product = _poly_mul(product, polys[c])
    return FactorPolynomial(tuple(product), a.phi(0))


def polyexp_factorization(
    d: PolyExp, a: PlaneTree, order: int
) -> Tuple[TruncSeries, TruncSeries]:
    """
    Both sides of the factorization of G^a for a polynomial-exponential family.

    Left: z^{phi_0} G^a. Right: (z^{phi_0} Q_a) times
    sum_j binom(phi_0, j) (-mu(0))^j F^{k-j}.

    Returns:
        (left, right) as series of the same order and scale power
    """
    k = len(a)
    phi0 = a.phi(0)
    left = build_Ga(d, a, order).shift_mul_z(phi0)
    poly = q_polynomial(d, a).coeffs
    poly_series = TruncSeries.of(
        [poly[i] if i < len(poly) else 0 for i in range(order + 1)]
    )
    f = TruncSeries.from_offspring(d, order)
    mu0 = d.rational(0)
    total = TruncSeries.of([0] * (order + 1), k * d.scale_power)
    for j in range(phi0 + 1):
        weight = math.comb(phi0, j) * (-mu0) ** j
        total = total + f.pow(k - j).scalar_mul(weight, j * d.scale_power)
    return left, poly_series * total


def coeff_ratio_probe(d: PolyExp, m: int, n_grid: Sequence[int]) -> List[float]:
    """
    Normalized ratios of consecutive coefficients of exp(m P).

    The value at n is (e_{n+1}/e_n) n^{1/p} / (m p a_p)^{1/p}, computed in log
    space since the coefficients underflow any float long before n = 2000.
    """
    top = max(n_grid) + 1
    logs = np.zeros(top + 1)
    terms = [
        (j, math.log(j * m * float(aj))) for j, aj in enumerate(d.a, start=1) if aj
    ]
    for n in range(1, top + 1):
        parts = [lw + logs[n - j] for j, lw in terms if j <= n]
        logs[n] = float(special.logsumexp(parts)) - math.log(n)
    p = d.degree
    norm = (m * p * float(d.a[-1])) ** (1.0 / p)
    return [math.exp(logs[n + 1] - logs[n]) * n ** (1.0 / p) / norm for n in n_grid]
