"""Exact arithmetic in Z[zeta] for zeta a primitive 2^N-th root of unity.

Elements are integer coefficient vectors of length h = 2^(N-1) modulo x^h + 1. Arrays of
elements keep the coefficient axis last.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .exceptions import UserError


def half_order(n: int) -> int:
    if n < 1:
        raise UserError(f"cyclotomic level must be positive, got {n}")
    return 1 << (n - 1)


def mul_zeta(arr: np.ndarray, exponent: int) -> np.ndarray:
    """Multiply every element of ``arr`` by ``zeta^exponent``."""
    h = arr.shape[-1]
    e = exponent % (2 * h)
    sign = 1
    if e >= h:
        e -= h
        sign = -1
    out = np.roll(arr, e, axis=-1)
    if e:
        out[..., :e] *= -1
    return out if sign == 1 else -out


def cyc_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise product of two arrays of cyclotomic integers."""
    h = x.shape[-1]
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape), dtype=np.int64)
    for k in range(h):
        coeff = x[..., k : k + 1]
        if np.any(coeff):
            out += coeff * mul_zeta(y, k)
    return out


def cyc_conj(x: np.ndarray) -> np.ndarray:
    """Complex conjugation ``zeta -> zeta^-1``."""
    out = np.empty_like(x)
    out[..., 0] = x[..., 0]
    out[..., 1:] = -x[..., :0:-1]
    return out


@dataclass(frozen=True)
class CycInt:
    """A single element of Z[zeta_{2^N}]."""

    n: int
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != half_order(self.n):
            raise UserError(f"Z[zeta_{1 << self.n}] elements need {half_order(self.n)} coefficients")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @classmethod
    def from_int(cls, n: int, value: int) -> CycInt:
        return cls(n, (value,) + (0,) * (half_order(n) - 1))

    @classmethod
    def zeta(cls, n: int, exponent: int = 1) -> CycInt:
        return cls.from_array(n, mul_zeta(np.eye(1, half_order(n), dtype=np.int64)[0], exponent))

    @classmethod
    def from_array(cls, n: int, arr: Sequence[int] | np.ndarray) -> CycInt:
        return cls(n, tuple(int(v) for v in arr))

    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.int64)

    def _check(self, other: CycInt) -> None:
        if other.n != self.n:
            raise UserError("cannot mix cyclotomic integers of different levels")

    def __add__(self, other: CycInt) -> CycInt:
        self._check(other)
        return CycInt.from_array(self.n, self.array() + other.array())

    def __sub__(self, other: CycInt) -> CycInt:
        self._check(other)
        return CycInt.from_array(self.n, self.array() - other.array())

    def __neg__(self) -> CycInt:
        return CycInt.from_array(self.n, -self.array())

    def __mul__(self, other: CycInt | int) -> CycInt:
        if isinstance(other, int):
            return CycInt.from_array(self.n, self.array() * other)
        self._check(other)
        return CycInt.from_array(self.n, cyc_mul(self.array(), other.array()))

    def __pow__(self, exponent: int) -> CycInt:
        result = CycInt.from_int(self.n, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def conj(self) -> CycInt:
        return CycInt.from_array(self.n, cyc_conj(self.array()))

    def is_integer(self) -> bool:
        return not any(self.coeffs[1:])

    def to_int(self) -> int:
        if not self.is_integer():
            raise UserError(f"{self} is not a rational integer")
        return self.coeffs[0]

    def __complex__(self) -> complex:
        z = np.exp(2j * np.pi / (1 << self.n))
        return complex(sum(c * z**k for k, c in enumerate(self.coeffs)))

    def __str__(self) -> str:
        terms = [f"{c}*z^{k}" if k else str(c) for k, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"


__all__ = ["CycInt", "cyc_conj", "cyc_mul", "half_order", "mul_zeta"]
