"""
Dual-mode scalars, Pochhammer symbols and Pochhammer-ratio products.

A scalar is either a ``fractions.Fraction`` (exact mode) or a ``float``
(float mode). Plain ``int`` values are mode-neutral and combine with both.
Irrational square roots are sympy expressions such as ``sqrt(26)/13``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import zip_longest
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

import sympy

from harness_lab.models.errors import ModeMismatch, ZeroDenominator
from harness_lab.models.model import Mode

Scalar = Union[Fraction, float]

DEFAULT_REL_TOL = 1e-10


def mode_of(value) -> Optional[Mode]:
    """Mode of a value; ``None`` for mode-neutral ints."""
    if isinstance(value, bool):
        raise ModeMismatch("booleans are not scalars")
    if isinstance(value, int):
        return None
    if isinstance(value, (Fraction, sympy.Basic)):
        return Mode.EXACT
    if isinstance(value, float):
        return Mode.FLOAT
    raise ModeMismatch(f"unsupported scalar type {type(value).__name__}")


def same_mode(*values) -> Optional[Mode]:
    """Return the common mode of ``values``; raise ModeMismatch when they mix."""
    found = None
    for value in values:
        current = mode_of(value)
        if current is None:
            continue
        if found is None:
            found = current
        elif current is not found:
            raise ModeMismatch(f"cannot mix {found.value} and {current.value} scalars")
    return found


def parse_scalar(text: Union[str, int, Fraction, float], mode: Mode) -> Scalar:
    """Parse "p/q", an int, a Fraction or a float into a scalar of ``mode``."""
    if isinstance(text, str):
        try:
            value = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ModeMismatch(f"not a rational number: {text!r}") from e
        return value if mode is Mode.EXACT else float(value)
    return as_mode(text, mode)


def as_mode(value, mode: Mode) -> Scalar:
    """Coerce ``value`` into ``mode`` without crossing modes."""
    current = mode_of(value)
    if current is None:
        return Fraction(value) if mode is Mode.EXACT else float(value)
    if current is not mode:
        raise ModeMismatch(f"expected a {mode.value} scalar, got {current.value}")
    return value


def is_close(x, y, rel_tol: float = DEFAULT_REL_TOL, abs_tol: float = 0.0) -> bool:
    """Exact equality for exact scalars, ``math.isclose`` otherwise."""
    if same_mode(x, y) is Mode.FLOAT:
        return math.isclose(float(x), float(y), rel_tol=rel_tol, abs_tol=abs_tol)
    return exact_equal(x, y)


def pochhammer_terms(a, k: int) -> Iterator:
    """The factors a, a+1, ..., a+k-1."""
    if k < 0:
        raise ValueError("Pochhammer length must be non-negative")
    for i in range(k):
        yield a + i


def pochhammer(a, k: int):
    """Rising factorial (a)_k = a(a+1)...(a+k-1), with (a)_0 = 1."""
    result = 1
    for term in pochhammer_terms(a, k):
        result = result * term
    if isinstance(result, int) and not isinstance(a, int):
        return as_mode(result, mode_of(a))
    return result


Factor = Tuple[Scalar, int]


@dataclass(frozen=True)
class RatioProduct:
    """Product of Pochhammer symbols over a product of Pochhammer symbols."""

    numerator: Tuple[Factor, ...]
    denominator: Tuple[Factor, ...] = ()
    sign: int = 1

    @classmethod
    def of(cls, numerator: Iterable[Factor], denominator: Iterable[Factor] = (), sign: int = 1):
        return cls(tuple(numerator), tuple(denominator), sign)

    def factor_count(self) -> int:
        return sum(length for _, length in self.numerator) + sum(
            length for _, length in self.denominator
        )

    def mode(self) -> Optional[Mode]:
        return same_mode(*(base for base, _ in self.numerator + self.denominator))

    def evaluate(self) -> Scalar:
        return eval_ratio_product(self)


def _expand(factors: Sequence[Factor]) -> list:
    return [term for base, length in factors for term in pochhammer_terms(base, length)]


def eval_ratio_product(rp: RatioProduct, mode: Optional[Mode] = None) -> Scalar:
    """Evaluate ``rp``; exact in exact mode, interleaved products in float mode."""
    mode = mode or rp.mode() or Mode.EXACT
    numerator = _expand(rp.numerator)
    denominator = _expand(rp.denominator)
    if any(term == 0 for term in denominator):
        raise ZeroDenominator("denominator Pochhammer chain contains a zero factor")

    if mode is Mode.EXACT:
        top = Fraction(rp.sign)
        for term in numerator:
            top *= term
        if top == 0:
            return Fraction(0)
        bottom = Fraction(1)
        for term in denominator:
            bottom *= term
        return top / bottom

    # float: alternate multiply and divide so the running value stays near 1
    result = float(rp.sign)
    for top, bottom in zip_longest(numerator, denominator, fillvalue=1):
        result = result * top / bottom
    return result


def exact(value):
    """Fold a rational sympy number back to a Fraction; radicals stay symbolic."""
    if isinstance(value, sympy.Basic):
        value = sympy.radsimp(value)
        if value.is_Rational:
            return Fraction(int(value.p), int(value.q))
    return value


def rational_sqrt(value) -> Optional[Fraction]:
    """Exact square root of a non-negative rational, or None when it is irrational."""
    value = Fraction(value)
    if value < 0:
        return None
    root = exact(sympy.sqrt(sympy.Rational(value.numerator, value.denominator)))
    return root if isinstance(root, Fraction) else None


def scalar_sqrt(value):
    """Square root in the mode of ``value``: a Fraction or sympy radical when exact, a float otherwise."""
    if same_mode(value) is Mode.FLOAT:
        return math.sqrt(value)
    value = Fraction(value)
    if value < 0:
        raise ValueError(f"square root of negative {value}")
    return exact(sympy.sqrt(sympy.Rational(value.numerator, value.denominator)))


def is_zero(value) -> bool:
    if isinstance(value, sympy.Basic):
        return value.equals(0) is True
    return value == 0


def exact_equal(x, y) -> bool:
    if isinstance(x, sympy.Basic) or isinstance(y, sympy.Basic):
        return is_zero(sympy.sympify(x) - sympy.sympify(y))
    return x == y


def to_float(value) -> float:
    return float(value)
