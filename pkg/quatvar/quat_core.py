"""Exact arithmetic in the definite quaternion algebra B = (-1, -p), integral lattices,
short-vector enumeration and the 2-adic splitting B (x) Q_2 = M_2(Q_2).

The shipped presentation is i^2 = -1, j^2 = -p, k = ij = -ji with p = 23, and the maximal
order with Z-basis 1, i, (i + j)/2, (1 + k)/2.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Any, Union

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form
from typing_extensions import TypeAlias

from .exceptions import StabilizationError, UnsupportedConfiguration, UserError
from .logger import logger

DEFAULT_PRIME = 23

Rational: TypeAlias = Union[int, Fraction]
Mat2: TypeAlias = tuple[int, int, int, int]
"""A 2x2 matrix ``((a, b), (c, d))`` stored row-major as ``(a, b, c, d)``."""

FormLike: TypeAlias = Union["QLattice", Sequence[Sequence[Rational]], np.ndarray]

_HENSEL_GUARD_BITS = 24
_STABILIZATION_CAP = 16
_FLOAT_MARGIN = 1e-6
_CHUNK_ROWS = 1 << 18


def _frac(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    # sympy Rational / Integer
    if hasattr(value, "p") and hasattr(value, "q"):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"Expected an exact rational, got {type(value).__name__}")


def _lcm(values: Iterator[int] | Sequence[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def fraction_gcd(values: Sequence[Fraction]) -> Fraction:
    """Positive generator of the Z-module spanned by ``values``."""
    nums = [v.numerator for v in values if v != 0]
    if not nums:
        return Fraction(0)
    dens = [v.denominator for v in values if v != 0]
    return Fraction(reduce(math.gcd, nums), _lcm(dens))


# ---------------------------------------------------------------------------
# Quaternions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Quaternion:
    """``x0 + x1*i + x2*j + x3*k`` with exact rational coefficients."""

    x0: Fraction
    x1: Fraction
    x2: Fraction
    x3: Fraction
    p: int = DEFAULT_PRIME
    """The algebra is (-1, -p)."""

    def __post_init__(self) -> None:
        for name in ("x0", "x1", "x2", "x3"):
            object.__setattr__(self, name, _frac(getattr(self, name)))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[Rational], p: int = DEFAULT_PRIME) -> Quaternion:
        x0, x1, x2, x3 = coeffs
        return cls(x0, x1, x2, x3, p)

    @classmethod
    def scalar(cls, value: Rational, p: int = DEFAULT_PRIME) -> Quaternion:
        return cls(value, 0, 0, 0, p)

    @classmethod
    def units(cls, p: int = DEFAULT_PRIME) -> tuple[Quaternion, Quaternion, Quaternion, Quaternion]:
        """The standard basis ``1, i, j, k``."""
        return (
            cls(1, 0, 0, 0, p),
            cls(0, 1, 0, 0, p),
            cls(0, 0, 1, 0, p),
            cls(0, 0, 0, 1, p),
        )

    @property
    def coeffs(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.x0, self.x1, self.x2, self.x3)

    def _check_same_algebra(self, other: Quaternion) -> None:
        if other.p != self.p:
            raise UserError(f"Cannot combine elements of (-1,-{self.p}) and (-1,-{other.p})")

    def __add__(self, other: Quaternion | Rational) -> Quaternion:
        if not isinstance(other, Quaternion):
            other = Quaternion.scalar(other, self.p)
        self._check_same_algebra(other)
        return Quaternion.from_coeffs([a + b for a, b in zip(self.coeffs, other.coeffs)], self.p)

    __radd__ = __add__

    def __neg__(self) -> Quaternion:
        return Quaternion.from_coeffs([-a for a in self.coeffs], self.p)

    def __sub__(self, other: Quaternion | Rational) -> Quaternion:
        if not isinstance(other, Quaternion):
            other = Quaternion.scalar(other, self.p)
        return self + (-other)

    def __rsub__(self, other: Rational) -> Quaternion:
        return Quaternion.scalar(other, self.p) - self

    def __mul__(self, other: Quaternion | Rational) -> Quaternion:
        if not isinstance(other, Quaternion):
            c = _frac(other)
            return Quaternion.from_coeffs([a * c for a in self.coeffs], self.p)
        return multiply(self, other)

    def __rmul__(self, other: Rational) -> Quaternion:
        return self * other

    def conj(self) -> Quaternion:
        return Quaternion(self.x0, -self.x1, -self.x2, -self.x3, self.p)

    def nrd(self) -> Fraction:
        return self.x0**2 + self.x1**2 + self.p * self.x2**2 + self.p * self.x3**2

    def trd(self) -> Fraction:
        return 2 * self.x0

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __str__(self) -> str:
        return f"{self.x0} + {self.x1}i + {self.x2}j + {self.x3}k"


def multiply(a: Quaternion, b: Quaternion) -> Quaternion:
    """Product under ``i^2 = -1``, ``j^2 = -p``, ``ij = -ji = k``."""
    a._check_same_algebra(b)
    p = a.p
    x0, x1, x2, x3 = a.coeffs
    y0, y1, y2, y3 = b.coeffs
    return Quaternion(
        x0 * y0 - x1 * y1 - p * x2 * y2 - p * x3 * y3,
        x0 * y1 + x1 * y0 + p * x2 * y3 - p * x3 * y2,
        x0 * y2 + x2 * y0 - x1 * y3 + x3 * y1,
        x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        p,
    )


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------


def _hnf_rows(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Row-style Hermite normal form of the Z-span of ``rows`` (zero rows dropped)."""
    h = hermite_normal_form(Matrix([list(r) for r in rows]).T).T
    return tuple(tuple(int(v) for v in h.row(r)) for r in range(h.rows))


@dataclass(frozen=True)
class QLattice:
    """A Z-lattice in B, stored as integer row vectors (coordinates on 1, i, j, k) over a
    common denominator.

    Lattices built through :meth:`from_generators` are in canonical Hermite normal form, so
    equal lattices compare equal. A lattice may have rank below 4 (the trace-zero lattices).
    """

    rows: tuple[tuple[int, ...], ...]
    denominator: int = 1
    p: int = DEFAULT_PRIME

    @classmethod
    def from_generators(cls, gens: Sequence[Quaternion], p: int | None = None) -> QLattice:
        if not gens:
            raise UserError("A lattice needs at least one generator")
        p = gens[0].p if p is None else p
        den = _lcm([c.denominator for g in gens for c in g.coeffs])
        rows = [[int(c * den) for c in g.coeffs] for g in gens]
        return cls._canonical(rows, den, p)

    @classmethod
    def _canonical(cls, rows: Sequence[Sequence[int]], den: int, p: int) -> QLattice:
        hnf = _hnf_rows(rows)
        if not hnf:
            raise UserError("The zero module is not a lattice")
        g = reduce(math.gcd, (v for r in hnf for v in r), den)
        return cls(tuple(tuple(v // g for v in r) for r in hnf), den // g, p)

    def hnf(self) -> QLattice:
        """The canonical form of this lattice (idempotent)."""
        return QLattice._canonical(self.rows, self.denominator, self.p)

    def key(self) -> tuple[int, tuple[tuple[int, ...], ...]]:
        """Sort/dedup key; only meaningful on canonical lattices."""
        return (self.denominator, self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    @cached_property
    def basis(self) -> tuple[Quaternion, ...]:
        return tuple(
            Quaternion.from_coeffs([Fraction(v, self.denominator) for v in r], self.p)
            for r in self.rows
        )

    @cached_property
    def gram(self) -> tuple[tuple[Fraction, ...], ...]:
        """Gram matrix of the bilinear form ``<x, y> = trd(x * conj(y))``."""
        b = self.basis
        return tuple(tuple((x * y.conj()).trd() for y in b) for x in b)

    @cached_property
    def value_form(self) -> tuple[tuple[Fraction, ...], ...]:
        """Matrix ``A`` with ``nrd(sum v_i b_i) = v^T A v``."""
        return tuple(tuple(v / 2 for v in row) for row in self.gram)

    def gram_det(self) -> Fraction:
        return _frac(Matrix([[x for x in row] for row in self.gram]).det())

    def norm(self) -> Fraction:
        """Reduced norm of the lattice: the gcd of ``nrd`` over its elements."""
        a = self.value_form
        n = len(a)
        return fraction_gcd([a[i][i] for i in range(n)] + [2 * a[i][j] for i in range(n) for j in range(i + 1, n)])

    @cached_property
    def _solver(self) -> tuple[tuple[int, ...], tuple[tuple[Fraction, ...], ...]]:
        m = Matrix([list(r) for r in self.rows])
        _, pivots = m.rref()
        sub = m.extract(list(range(m.rows)), list(pivots))
        inv = sub.inv()
        return tuple(pivots), tuple(
            tuple(_frac(inv[i, j]) for j in range(inv.cols)) for i in range(inv.rows)
        )

    def coordinates(self, q: Quaternion) -> tuple[Fraction, ...] | None:
        """Rational coordinates of ``q`` on :attr:`basis`, or ``None`` if ``q`` lies outside
        the rational span."""
        pivots, inv = self._solver
        target = [c * self.denominator for c in q.coeffs]
        r = self.rank
        coords = tuple(sum((target[pivots[i]] * inv[i][j] for i in range(r)), Fraction(0)) for j in range(r))
        for col in range(4):
            if sum((coords[j] * self.rows[j][col] for j in range(r)), Fraction(0)) != target[col]:
                return None
        return coords

    def contains(self, q: Quaternion) -> bool:
        coords = self.coordinates(q)
        return coords is not None and all(c.denominator == 1 for c in coords)

    def element(self, coords: Sequence[int]) -> Quaternion:
        total = [Fraction(0)] * 4
        for c, row in zip(coords, self.rows):
            for col in range(4):
                total[col] += int(c) * row[col]
        return Quaternion.from_coeffs([t / self.denominator for t in total], self.p)

    def product(self, other: QLattice) -> QLattice:
        """The lattice spanned by all products ``x * y``."""
        return QLattice.from_generators([x * y for x in self.basis for y in other.basis], self.p)

    def __mul__(self, other: QLattice) -> QLattice:
        return self.product(other)

    def __add__(self, other: QLattice) -> QLattice:
        return QLattice.from_generators(list(self.basis) + list(other.basis), self.p)

    def conj(self) -> QLattice:
        return QLattice.from_generators([b.conj() for b in self.basis], self.p)

    def scale(self, c: Rational) -> QLattice:
        return QLattice.from_generators([b * c for b in self.basis], self.p)

    def is_ring(self) -> bool:
        """Contains 1 and is closed under multiplication (all basis products)."""
        if not self.contains(Quaternion.scalar(1, self.p)):
            return False
        return all(self.contains(x * y) for x in self.basis for y in self.basis)

    def left_order(self) -> QLattice:
        """Left order ``I * conj(I) / N(I)`` of a locally principal ideal."""
        return (self * self.conj()).scale(1 / self.norm())

    def trace_zero_part(self) -> QLattice:
        """``{x - conj(x) : x in L}``; for an order R this is the trace-zero part of Z + 2R."""
        gens = [b - b.conj() for b in self.basis]
        return QLattice.from_generators([g for g in gens if not g.is_zero()], self.p)

    def to_json_dict(self) -> dict[str, Any]:
        return {"basis": [list(r) for r in self.rows], "denominator": self.denominator, "p": self.p}

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> QLattice:
        try:
            rows = tuple(tuple(int(v) for v in r) for r in data["basis"])
            return cls(rows, int(data["denominator"]), int(data.get("p", DEFAULT_PRIME)))
        except (KeyError, TypeError, ValueError) as e:
            raise UserError(f"Invalid lattice encoding: {e}") from e


def maximal_order(p: int = DEFAULT_PRIME) -> QLattice:
    """The maximal order with basis ``1, i, (i + j)/2, (1 + k)/2`` of ``(-1, -p)``."""
    if p % 4 != 3:
        raise UnsupportedConfiguration(f"maximal_order needs p = 3 (mod 4), got p = {p}")
    return QLattice(((2, 0, 0, 0), (0, 2, 0, 0), (0, 1, 1, 0), (1, 0, 0, 1)), 2, p)


# ---------------------------------------------------------------------------
# Short vectors
# ---------------------------------------------------------------------------


def _integer_form(form: FormLike) -> tuple[np.ndarray, int]:
    """Return ``(A_int, scale)`` with ``A = A_int / scale`` and ``A_int`` an int64 matrix."""
    if isinstance(form, QLattice):
        rows = form.value_form
    else:
        rows = [[_frac(v) for v in row] for row in np.asarray(form, dtype=object).tolist()]
    scale = _lcm([_frac(v).denominator for row in rows for v in row])
    a_int = np.array([[int(_frac(v) * scale) for v in row] for row in rows], dtype=np.int64)
    if a_int.ndim != 2 or a_int.shape[0] != a_int.shape[1]:
        raise UserError("A quadratic form needs a square Gram matrix")
    if not np.array_equal(a_int, a_int.T):
        raise UserError("Gram matrix is not symmetric")
    return a_int, scale


def _candidate_blocks(a_float: np.ndarray, bound: float) -> Iterator[np.ndarray]:
    """Fincke-Pohst enumeration of ``v^T A v <= bound``, innermost coordinate vectorised.

    Yields int64 blocks of candidate vectors. Candidates are a superset of the answer (a
    float margin is added); callers filter exactly.
    """
    n = a_float.shape[0]
    try:
        chol = np.linalg.cholesky(a_float)
    except np.linalg.LinAlgError as e:
        raise UserError("Gram matrix is not positive definite") from e
    diag = np.diag(chol)
    q_diag = diag**2
    q = chol.T / diag[:, None]
    x = np.zeros(n, dtype=np.int64)

    def walk(i: int, remaining: float) -> Iterator[np.ndarray]:
        center = -float(q[i, i + 1 :] @ x[i + 1 :]) if i + 1 < n else 0.0
        radius = math.sqrt(max(remaining, 0.0) / q_diag[i])
        lo, hi = math.ceil(center - radius), math.floor(center + radius)
        if i == 0:
            if hi >= lo:
                block = np.empty((hi - lo + 1, n), dtype=np.int64)
                block[:, 0] = np.arange(lo, hi + 1, dtype=np.int64)
                block[:, 1:] = x[1:]
                yield block
            return
        for xi in range(lo, hi + 1):
            x[i] = xi
            yield from walk(i - 1, remaining - q_diag[i] * (xi - center) ** 2)
        x[i] = 0

    yield from walk(n - 1, bound + _FLOAT_MARGIN * max(1.0, bound))


def _exact_chunks(form: FormLike, bound: Rational) -> Iterator[tuple[np.ndarray, np.ndarray, int]]:
    """Chunks ``(vectors, scaled_values, scale)`` with ``vectors^T A vectors <= bound`` exactly."""
    a_int, scale = _integer_form(form)
    limit = int(math.floor(_frac(bound) * scale))
    pending: list[np.ndarray] = []
    pending_rows = 0

    def flush() -> tuple[np.ndarray, np.ndarray, int]:
        vecs = np.concatenate(pending)
        vals = np.einsum("ij,jk,ik->i", vecs, a_int, vecs)
        keep = vals <= limit
        return vecs[keep], vals[keep], scale

    for block in _candidate_blocks(a_int / scale, float(bound)):
        pending.append(block)
        pending_rows += len(block)
        if pending_rows >= _CHUNK_ROWS:
            yield flush()
            pending, pending_rows = [], 0
    if pending:
        yield flush()


def short_vectors(form: FormLike, bound: Rational) -> list[tuple[tuple[int, ...], Fraction]]:
    """All integer vectors ``v`` with ``Q(v) = v^T A v <= bound``, each exactly once, in
    lexicographic order of coordinates.

    ``form`` is a :class:`QLattice` (its reduced-norm form is used) or a square Gram matrix
    ``A`` of the value form. Float work is advisory; membership is decided exactly.
    """
    if bound < 0:
        return []
    chunks = list(_exact_chunks(form, bound))
    if not chunks:
        return []
    vecs = np.concatenate([c[0] for c in chunks])
    vals = np.concatenate([c[1] for c in chunks])
    scale = chunks[0][2]
    order = np.lexsort(vecs.T[::-1])
    return [
        (tuple(int(v) for v in vecs[idx]), Fraction(int(vals[idx]), scale)) for idx in order
    ]


def theta_counts(
    form: FormLike,
    bound: int,
    weight: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Weighted representation numbers ``r(n) = sum_{Q(v) = n} weight(v)`` for ``0 <= n <= bound``.

    The form must take integer values. ``weight`` maps an ``(k, n)`` int64 block of vectors to
    ``k`` integer weights; the default counts vectors.
    """
    counts = np.zeros(bound + 1, dtype=np.float64)
    if bound < 0:
        return counts.astype(np.int64)
    for vecs, vals, scale in _exact_chunks(form, bound):
        if np.any(vals % scale):
            raise UserError("theta_counts needs an integer-valued form")
        idx = vals // scale
        w = None if weight is None else np.asarray(weight(vecs), dtype=np.float64)
        counts += np.bincount(idx, weights=w, minlength=bound + 1)
    return np.rint(counts).astype(np.int64)


# ---------------------------------------------------------------------------
# 2-adic splitting
# ---------------------------------------------------------------------------


def hensel_sqrt(a: int, precision: int) -> int:
    """Square root of ``a = 1 (mod 8)`` modulo ``2^precision`` by bitwise lifting.

    For ``a = 9 (mod 16)`` (e.g. ``a = -23``) the root returned is the one ``= 3 (mod 8)``.
    """
    if precision < 3:
        raise UserError(f"hensel_sqrt needs precision >= 3, got {precision}")
    if a % 8 != 1:
        raise UserError(f"{a} is not a square in Z_2 (needs a = 1 mod 8)")
    s = 3 if a % 16 == 9 else 1
    for k in range(3, precision + 1):
        if (s * s - a) % (1 << (k + 1)):
            s += 1 << (k - 1)
    return s % (1 << precision)


_FracMat: TypeAlias = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]


def _mat_mul(x: _FracMat, y: _FracMat) -> _FracMat:
    return (
        (x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
        (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]),
    )


def _mat_inv(x: _FracMat) -> _FracMat:
    det = x[0][0] * x[1][1] - x[0][1] * x[1][0]
    return ((x[1][1] / det, -x[0][1] / det), (-x[1][0] / det, x[0][0] / det))


def _two_power_exponent(den: int) -> int:
    e = (den & -den).bit_length() - 1
    if den >> e != 1:
        raise StabilizationError(f"Unexpected odd denominator {den} in 2-adic lattice")
    return e


def _stable_hnf(columns: Sequence[tuple[Fraction, Fraction]]) -> _FracMat:
    """Column HNF of the Z_2-span of ``columns`` together with Z^2."""
    t = max(_two_power_exponent(c.denominator) for col in columns for c in col)
    scale = 1 << t
    gens = [[int(c * scale) for c in col] for col in columns] + [[scale, 0], [0, scale]]
    h = hermite_normal_form(Matrix(gens).T)
    return (
        (Fraction(int(h[0, 0]), scale), Fraction(int(h[0, 1]), scale)),
        (Fraction(int(h[1, 0]), scale), Fraction(int(h[1, 1]), scale)),
    )


def mat_mod(m: Sequence[int], modulus: int) -> Mat2:
    a, b, c, d = m
    return (a % modulus, b % modulus, c % modulus, d % modulus)


def mat2_mul(x: Mat2, y: Mat2, modulus: int) -> Mat2:
    return mat_mod(
        (
            x[0] * y[0] + x[1] * y[2],
            x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3],
        ),
        modulus,
    )


@dataclass(frozen=True)
class TwoAdicSplitting:
    """A ring map ``order -> M_2(Z/2^M)`` obtained from ``B (x) Q_2 = M_2(Q_2)``."""

    precision: int
    """M: images are reduced modulo 2^M."""

    images: tuple[Mat2, Mat2, Mat2, Mat2]
    """Images of the order basis elements."""

    two_adic_sqrt_m23: int
    """The residue s with s^2 = -p (mod 2^M) used for j -> diag(s, -s)."""

    order: QLattice
    """The order whose basis the images refer to."""

    @property
    def modulus(self) -> int:
        return 1 << self.precision

    def image_coords(self, coords: Sequence[int]) -> Mat2:
        total = [0, 0, 0, 0]
        for c, img in zip(coords, self.images):
            for idx in range(4):
                total[idx] += int(c) * img[idx]
        return mat_mod(total, self.modulus)

    def image(self, q: Quaternion) -> Mat2:
        """Image of an element of the order (2-integral coordinates are enough)."""
        coords = self.order.coordinates(q)
        if coords is None:
            raise UserError(f"{q} is not in the span of the order")
        ints = []
        for c in coords:
            if c.denominator % 2 == 0:
                raise UserError(f"{q} is not 2-integral for this order")
            ints.append(c.numerator * pow(c.denominator, -1, self.modulus))
        return self.image_coords(ints)

    def reduce(self, precision: int) -> TwoAdicSplitting:
        if precision > self.precision:
            raise UserError("Cannot raise the precision of a splitting by reduction")
        m = 1 << precision
        images = tuple(mat_mod(img, m) for img in self.images)
        return TwoAdicSplitting(precision, images, self.two_adic_sqrt_m23 % m, self.order)  # type: ignore[arg-type]


def two_adic_split(precision: int, order: QLattice | None = None) -> TwoAdicSplitting:
    """Split ``order`` at 2 modulo ``2^precision``.

    ``i -> [[0, -1], [1, 0]]`` and ``j -> diag(s, -s)`` with ``s = hensel_sqrt(-p, .)``,
    followed by the change of basis to the order-stable lattice, so that the images of the
    order basis are integral.
    """
    if precision < 3:
        raise UserError(f"two_adic_split needs precision >= 3, got {precision}")
    order = maximal_order() if order is None else order
    p = order.p
    if p % 8 != 7:
        raise UnsupportedConfiguration(f"B = (-1,-{p}) does not split at 2 by this construction (needs p = 7 mod 8)")
    if order.rank != 4:
        raise UserError("two_adic_split needs an order of rank 4")

    work = precision + _HENSEL_GUARD_BITS
    s = hensel_sqrt(-p, work)
    one, zero = Fraction(1), Fraction(0)
    standard: list[_FracMat] = [
        ((one, zero), (zero, one)),
        ((zero, -one), (one, zero)),
        ((Fraction(s), zero), (zero, Fraction(-s))),
        ((zero, Fraction(s)), (Fraction(s), zero)),
    ]

    def embed(q: Quaternion) -> _FracMat:
        out = [[zero, zero], [zero, zero]]
        for c, m in zip(q.coeffs, standard):
            for r in range(2):
                for col in range(2):
                    out[r][col] += c * m[r][col]
        return ((out[0][0], out[0][1]), (out[1][0], out[1][1]))

    basis_images = [embed(b) for b in order.basis]

    lattice: _FracMat = ((one, zero), (zero, one))
    for _ in range(_STABILIZATION_CAP):
        columns = [(lattice[0][c], lattice[1][c]) for c in range(2)]
        gens = list(columns)
        for img in basis_images:
            for col in columns:
                gens.append((img[0][0] * col[0] + img[0][1] * col[1], img[1][0] * col[0] + img[1][1] * col[1]))
        new = _stable_hnf(gens)
        if new == lattice:
            break
        lattice = new
    else:
        raise StabilizationError(f"stable lattice did not settle within {_STABILIZATION_CAP} iterations")

    inv = _mat_inv(lattice)
    modulus = 1 << precision
    images = []
    for img in basis_images:
        rho = _mat_mul(_mat_mul(inv, img), lattice)
        flat = (rho[0][0], rho[0][1], rho[1][0], rho[1][1])
        if any(v.denominator != 1 for v in flat):
            raise StabilizationError("order image is not integral on the stable lattice")
        images.append(mat_mod([int(v) for v in flat], modulus))

    splitting = TwoAdicSplitting(precision, tuple(images), s % modulus, order)  # type: ignore[arg-type]
    _verify_splitting(splitting)
    logger.debug("two_adic_split: precision %d, s = %d, lattice %s", precision, s % modulus, lattice)
    return splitting


def _verify_splitting(splitting: TwoAdicSplitting) -> None:
    order, m = splitting.order, splitting.modulus
    basis = order.basis
    for bi, img_i in zip(basis, splitting.images):
        a, b, c, d = img_i
        if (a * d - b * c - int(bi.nrd())) % m or (a + d - int(bi.trd())) % m:
            raise StabilizationError(f"norm/trace not preserved for {bi}")
        for bj, img_j in zip(basis, splitting.images):
            coords = order.coordinates(bi * bj)
            if coords is None or any(c.denominator != 1 for c in coords):
                raise UserError("two_adic_split needs a ring (order basis not closed)")
            if mat2_mul(img_i, img_j, m) != splitting.image_coords([int(c) for c in coords]):
                raise StabilizationError(f"multiplication table violated for {bi} * {bj}")


__all__ = [
    "DEFAULT_PRIME",
    "Mat2",
    "QLattice",
    "Quaternion",
    "TwoAdicSplitting",
    "fraction_gcd",
    "hensel_sqrt",
    "mat2_mul",
    "mat_mod",
    "maximal_order",
    "multiply",
    "short_vectors",
    "theta_counts",
    "two_adic_split",
]
