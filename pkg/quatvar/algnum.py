from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Union

from typing_extensions import TypeAlias

from .exceptions import UserError

Scalar: TypeAlias = Union[int, Fraction]


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"Expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class AlgNum:
    """An element ``a + b*sqrt(5)`` of the real quadratic field Q(sqrt 5), held exactly."""

    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _to_fraction(self.a))
        object.__setattr__(self, "b", _to_fraction(self.b))

    @classmethod
    def coerce(cls, value: AlgNum | Scalar) -> AlgNum:
        if isinstance(value, AlgNum):
            return value
        return cls(_to_fraction(value))

    @classmethod
    def sqrt5(cls) -> AlgNum:
        return cls(0, 1)

    def __add__(self, other: AlgNum | Scalar) -> AlgNum:
        other = AlgNum.coerce(other)
        return AlgNum(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self) -> AlgNum:
        return AlgNum(-self.a, -self.b)

    def __sub__(self, other: AlgNum | Scalar) -> AlgNum:
        return self + (-AlgNum.coerce(other))

    def __rsub__(self, other: Scalar) -> AlgNum:
        return AlgNum.coerce(other) - self

    def __mul__(self, other: AlgNum | Scalar) -> AlgNum:
        other = AlgNum.coerce(other)
        return AlgNum(self.a * other.a + 5 * self.b * other.b, self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def __truediv__(self, other: AlgNum | Scalar) -> AlgNum:
        other = AlgNum.coerce(other)
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 5)")
        return self * other.conj() * AlgNum(1 / n)

    def __rtruediv__(self, other: Scalar) -> AlgNum:
        return AlgNum.coerce(other) / self

    def __pow__(self, exponent: int) -> AlgNum:
        if exponent < 0:
            return AlgNum(1) / (self**-exponent)
        result = AlgNum(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = AlgNum(other)
        if not isinstance(other, AlgNum):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def conj(self) -> AlgNum:
        """The Galois conjugate ``a - b*sqrt(5)``."""
        return AlgNum(self.a, -self.b)

    def trace(self) -> Fraction:
        return 2 * self.a

    def norm(self) -> Fraction:
        return self.a * self.a - 5 * self.b * self.b

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(5)

    def __repr__(self) -> str:
        return f"AlgNum({self.a}, {self.b})"

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt(5)"

    def to_json_dict(self) -> dict[str, str]:
        return {
            "a": f"{self.a.numerator}/{self.a.denominator}",
            "b": f"{self.b.numerator}/{self.b.denominator}",
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, str]) -> AlgNum:
        try:
            return cls(Fraction(data["a"]), Fraction(data.get("b", "0")))
        except (KeyError, ValueError, ZeroDivisionError) as e:
            raise UserError(f"Invalid AlgNum encoding {data!r}") from e


def quadratic_roots(c1: Scalar, c0: Scalar) -> tuple[AlgNum, AlgNum]:
    """Roots of ``x^2 + c1*x + c0`` in Q(sqrt 5), the branch with ``+sqrt`` first.

    The discriminant must be a rational square or 5 times one; a rational square gives two
    rational roots.
    """
    c1, c0 = _to_fraction(c1), _to_fraction(c0)
    disc = c1 * c1 - 4 * c0
    half = -c1 / 2
    root = _rational_sqrt(disc)
    if root is not None:
        return AlgNum(half + root / 2), AlgNum(half - root / 2)
    root5 = _rational_sqrt(disc / 5)
    if root5 is None:
        raise UserError(f"x^2 + {c1}x + {c0} does not split over Q(sqrt 5)")
    return AlgNum(half, root5 / 2), AlgNum(half, -root5 / 2)


def _rational_sqrt(value: Fraction) -> Fraction | None:
    if value < 0:
        return None
    num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None
