"""
Wilson 6-j weights p_{k,N}(a,b,c), the pi_{j,K}(a,b) family and the
Pi_k(a,c;N) family, with validation and closed-form moments.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Optional, Tuple

from harness_lab.models.errors import InvalidParams
from harness_lab.models.model import Branch6j, Mode
from harness_lab.services.scalar import (
    RatioProduct,
    Scalar,
    as_mode,
    eval_ratio_product,
    same_mode,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LawParams6j:
    a: Scalar
    b: Scalar
    c: Scalar
    N: int

    @property
    def mode(self) -> Mode:
        return same_mode(self.a, self.b, self.c) or Mode.EXACT


@dataclass(frozen=True)
class DiscreteLaw:
    """Finitely supported law: ``weights[i]`` is the mass of ``support[i]``."""

    support: Tuple[int, ...]
    weights: Tuple[Scalar, ...]

    def __post_init__(self):
        if len(self.support) != len(self.weights):
            raise ValueError("support and weights differ in length")

    @classmethod
    def point_mass(cls, state: int, mode: Mode = Mode.EXACT) -> "DiscreteLaw":
        return cls((state,), (as_mode(1, mode),))

    @classmethod
    def from_dict(cls, masses: Dict[int, Scalar]) -> "DiscreteLaw":
        states = tuple(sorted(masses))
        return cls(states, tuple(masses[state] for state in states))

    def __iter__(self) -> Iterator[Tuple[int, Scalar]]:
        return iter(zip(self.support, self.weights))

    def __len__(self) -> int:
        return len(self.support)

    def weight(self, state: int) -> Scalar:
        for candidate, weight in self:
            if candidate == state:
                return weight
        return 0 * self.weights[0] if self.weights else 0

    def as_dict(self) -> Dict[int, Scalar]:
        return dict(zip(self.support, self.weights))

    def total(self) -> Scalar:
        return sum(self.weights, 0 * self.weights[0])

    def expectation(self, fn: Callable[[int], Scalar]) -> Scalar:
        return sum((weight * fn(state) for state, weight in self), 0 * self.weights[0])

    def moments(self, fn: Callable[[int], Scalar]) -> Tuple[Scalar, Scalar]:
        """Mean and variance of ``fn(state)``."""
        mean = self.expectation(fn)
        second = self.expectation(lambda state: fn(state) ** 2)
        return mean, second - mean * mean

    def total_variation(self, other: "DiscreteLaw") -> Scalar:
        mine, theirs = self.as_dict(), other.as_dict()
        zero = 0 * self.weights[0]
        return sum(
            (abs(mine.get(state, zero) - theirs.get(state, zero)) for state in set(mine) | set(theirs)),
            zero,
        ) / 2

    def is_nonnegative(self) -> bool:
        return all(weight >= 0 for weight in self.weights)


def validate_6j(p: LawParams6j) -> Branch6j:
    """Check (a, b, c, N) and return the c-branch that holds."""
    if not isinstance(p.N, int) or p.N < 0:
        raise InvalidParams("N >= 0", f"N={p.N}")
    same_mode(p.a, p.b, p.c)
    if not p.a > -as_mode(1, p.mode) / 2:
        raise InvalidParams("a > -1/2", f"a={p.a}")
    if not -p.a < p.b < p.a + 1:
        raise InvalidParams("b in (-a, a+1)", f"a={p.a}, b={p.b}")
    if p.c < -p.a - p.N + 1:
        return Branch6j.CASE_LOW
    if p.c > p.a + p.N:
        return Branch6j.CASE_HIGH
    raise InvalidParams("c > a+N or c < -a-N+1", f"a={p.a}, c={p.c}, N={p.N}")


def wilson_ratio(k: int, p: LawParams6j) -> RatioProduct:
    """p_{k,N}(a,b,c) as a ratio of Pochhammer symbols.

    The factor (2a)_k (a+1)_k / (a)_k is used in its cancelled form
    2 (2a+1)_{k-1} (a+k), which stays finite at a = 0.
    """
    a, b, c, N = p.a, p.b, p.c, p.N
    numerator = [(a - b + 1, N), (a - c + 1, N), (a + b, k), (a + c, k), (-N, k)]
    if k >= 1:
        numerator += [(2, 1), (2 * a + 1, k - 1), (a + k, 1)]
    denominator = [
        (2 * a + 1, N),
        (-b - c + 1, N),
        (1, k),
        (a - b + 1, k),
        (a - c + 1, k),
        (2 * a + N + 1, k),
    ]
    return RatioProduct.of(numerator, denominator)


def wilson_weight(k: int, p: LawParams6j, *, validate: bool = True) -> Scalar:
    """Weight p_{k,N}(a,b,c). With ``validate=False`` any rational point is evaluated."""
    if validate:
        validate_6j(p)
    if not 0 <= k <= p.N:
        raise ValueError(f"state {k} outside 0..{p.N}")
    return eval_ratio_product(wilson_ratio(k, p), p.mode)


def wilson_law(p: LawParams6j, *, validate: bool = True) -> DiscreteLaw:
    if validate:
        validate_6j(p)
    states = tuple(range(p.N + 1))
    return DiscreteLaw(states, tuple(wilson_weight(k, p, validate=False) for k in states))


def y_moments_6j(p: LawParams6j) -> Tuple[Scalar, Scalar]:
    """Mean and variance of Y = k(2a+k) under p_{k,N}(a,b,c)."""
    validate_6j(p)
    a, b, c, N = p.a, p.b, p.c, p.N
    zero = as_mode(0, p.mode)
    if N == 0:
        return zero, zero
    mean = (a + b) * (a + c) * N / (b + c - N)
    if N == 1:
        variance = -(a - b + 1) * (a + b) * (a - c + 1) * (a + c) / (b + c - 1) ** 2
    else:
        variance = (
            N * (a - b + N) * (a + b) * (a - c + N) * (a + c) * (b + c)
            / ((b + c - N) ** 2 * (N - b - c - 1))
        )
    return mean, variance


def validate_pi(K: int, a: Scalar, b: Scalar) -> None:
    if not isinstance(K, int) or K < 0:
        raise InvalidParams("K >= 0", f"K={K}")
    if K == 0:
        return
    if not a > -1:
        raise InvalidParams("a > -1", f"a={a}")
    if not 0 < b < a + 1:
        raise InvalidParams("b in (0, a+1)", f"a={a}, b={b}")


def pi_ratio(j: int, K: int, a: Scalar, b: Scalar) -> RatioProduct:
    """pi_{j,K}(a,b) in the binomial product form."""
    return RatioProduct.of(
        [(K - j + 1, j), (a - b + j + 1, K - j), (b, j)],
        [(1, j), (a + 2 * j + 1, K - j), (a + j, j)],
    )


def pi_weight(
    j: int, K: int, a: Scalar, b: Scalar, *, allow_out_of_range: bool = False
) -> Scalar:
    mode = same_mode(a, b) or Mode.EXACT
    if not allow_out_of_range:
        validate_pi(K, a, b)
    if not 0 <= j <= K:
        raise ValueError(f"state {j} outside 0..{K}")
    return eval_ratio_product(pi_ratio(j, K, a, b), mode)


def pi_weight_alternating(j: int, K: int, a: Scalar, b: Scalar) -> Scalar:
    """pi_{j,K}(a,b) in the alternating-sign form; undefined at a = 0."""
    mode = same_mode(a, b) or Mode.EXACT
    ratio = RatioProduct.of(
        [(a + 1 - b, K), (-K, j), (a, j), (b, j), (1 + a / 2, j)],
        [(a + 1, K), (1, j), (a + 1 - b, j), (a / 2, j), (a + 1 + K, j)],
        sign=(-1) ** j,
    )
    return eval_ratio_product(ratio, mode)


def pi_law(K: int, a: Scalar, b: Scalar, *, allow_out_of_range: bool = False) -> DiscreteLaw:
    if not allow_out_of_range:
        validate_pi(K, a, b)
    states = tuple(range(K + 1))
    return DiscreteLaw(
        states, tuple(pi_weight(j, K, a, b, allow_out_of_range=True) for j in states)
    )


def x_moments_pi(K: int, a: Scalar, b: Scalar) -> Tuple[Scalar, Scalar]:
    """Mean and variance of X = j(a+j) under pi_{j,K}(a,b)."""
    validate_pi(K, a, b)
    mode = same_mode(a, b) or Mode.EXACT
    return as_mode(K * b, mode), as_mode(K * (K + a - b) * b, mode)


def validate_big_pi(a: Scalar, c: Scalar, N: int) -> None:
    if not isinstance(N, int) or N < 0:
        raise InvalidParams("N >= 0", f"N={N}")
    if not c > 0:
        raise InvalidParams("c > 0", f"c={c}")
    if not a < 1 - N:
        raise InvalidParams("a < 1-N", f"a={a}, N={N}")


def big_pi_ratio(k: int, a: Scalar, c: Scalar, N: int) -> RatioProduct:
    return RatioProduct.of([(c, N), (a, k), (-N, k)], [(c - a, N), (1, k), (c, k)])


def big_pi_weight(k: int, a: Scalar, c: Scalar, N: int, *, validate: bool = True) -> Scalar:
    """Weight Pi_k(a, c; N)."""
    mode = same_mode(a, c) or Mode.EXACT
    if validate:
        validate_big_pi(a, c, N)
    if not 0 <= k <= N:
        raise ValueError(f"state {k} outside 0..{N}")
    return eval_ratio_product(big_pi_ratio(k, a, c, N), mode)


def big_pi_law(a: Scalar, c: Scalar, N: int, *, validate: bool = True) -> DiscreteLaw:
    if validate:
        validate_big_pi(a, c, N)
    states = tuple(range(N + 1))
    return DiscreteLaw(states, tuple(big_pi_weight(k, a, c, N, validate=False) for k in states))


def u_moments(a: Scalar, c: Scalar, N: int) -> Tuple[Scalar, Scalar]:
    """Mean and variance of U with P(U=k) = Pi_k(a, c; N)."""
    validate_big_pi(a, c, N)
    mode = same_mode(a, c) or Mode.EXACT
    zero = as_mode(0, mode)
    if N == 0:
        return zero, zero
    mean = a * N / (a - c - N + 1)
    if N == 1:
        variance = -a * c / (c - a) ** 2
    else:
        variance = (
            a * (a - c + 1) * (c + N - 1) * N / ((c + N - a - 2) * (c + N - a - 1) ** 2)
        )
    return mean, variance


def limit_pi_from_p(j: int, K: int, a: float, b: float, c: float) -> float:
    """p_{j,K}(a/2, b - a/2, c): approaches pi_{j,K}(a,b) as c -> -infinity."""
    return wilson_weight(j, LawParams6j(a / 2, b - a / 2, c, K), validate=False)
