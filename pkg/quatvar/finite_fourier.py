"""Fourier analysis on M_2(Z/2^N) and 2-adic local integrals.

The exact part works with functions on M_2(Z/2^N) valued in Z[zeta_{2^N}] and the pairing
``(x, y) = det(x + y) - det(x) - det(y) = x11*y22 + x22*y11 - x12*y21 - x21*y12``. The 2-adic
part evaluates Schwartz-Bruhat inner products exactly and spherical-function sums in floating
point.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING, Any, Union

import numpy as np
from typing_extensions import TypeAlias

from .algnum import AlgNum
from .cyclotomic import CycInt, cyc_conj, cyc_mul, half_order, mul_zeta
from .exceptions import ConvergenceError, UserError
from .logger import logger
from .report import CaseTally, CheckReport
from .tracing import check_span
from .tree_fix import TorsionAction, chi_from_bits, fix_sharp

if TYPE_CHECKING:
    from .run_config import RunConfig

RealLike: TypeAlias = Union[AlgNum, float, int, Fraction]

LOCAL_INTEGRAL_TOLERANCE = 1e-12
LOCAL_INTEGRAL_CAP = 200
NAIVE_GROUP_SUM_MAX_LEVEL = 2

# Generators of GL_2(Z/2^N): the two elementary matrices generate SL_2, and -1, 3, 5 cover
# the determinants.
_GL2_GENERATORS = ((1, 1, 0, 1), (1, 0, 1, 1), (-1, 0, 0, 1), (3, 0, 0, 1), (5, 0, 0, 1))


def gl2_order(n: int) -> int:
    """|GL_2(Z/2^N)| = 6 * 2^(4N-4)."""
    return 6 << (4 * n - 4)


# ---------------------------------------------------------------------------
# Functions on M_2(Z/2^N)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteMatFn:
    """A function on M_2(Z/2^N) valued in Z[zeta_{2^N}].

    ``values[x11, x12, x21, x22]`` is the coefficient vector of the value at that matrix.
    """

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        q, h = 1 << self.n, half_order(self.n)
        if self.values.shape != (q, q, q, q, h):
            raise UserError(f"expected a table of shape {(q, q, q, q, h)}, got {self.values.shape}")

    @property
    def modulus(self) -> int:
        return 1 << self.n

    @classmethod
    def from_integers(cls, n: int, table: np.ndarray) -> FiniteMatFn:
        q, h = 1 << n, half_order(n)
        values = np.zeros((q, q, q, q, h), dtype=np.int64)
        values[..., 0] = np.asarray(table, dtype=np.int64)
        return cls(n, values)

    @classmethod
    def delta(cls, n: int, point: tuple[int, int, int, int] = (0, 0, 0, 0)) -> FiniteMatFn:
        q = 1 << n
        table = np.zeros((q,) * 4, dtype=np.int64)
        table[tuple(v % q for v in point)] = 1
        return cls.from_integers(n, table)

    def is_integer(self) -> bool:
        return not np.any(self.values[..., 1:])

    def integers(self) -> np.ndarray:
        if not self.is_integer():
            raise UserError("function is not integer valued")
        return self.values[..., 0].copy()

    def at(self, x: tuple[int, int, int, int]) -> CycInt:
        q = self.modulus
        return CycInt.from_array(self.n, self.values[tuple(v % q for v in x)])

    def negated_argument(self) -> FiniteMatFn:
        """``x -> f(-x)``."""
        idx = (-np.arange(self.modulus)) % self.modulus
        return FiniteMatFn(self.n, self.values[np.ix_(idx, idx, idx, idx)])

    def conj(self) -> FiniteMatFn:
        return FiniteMatFn(self.n, cyc_conj(self.values))

    def __add__(self, other: FiniteMatFn) -> FiniteMatFn:
        return FiniteMatFn(self.n, self.values + other.values)

    def __sub__(self, other: FiniteMatFn) -> FiniteMatFn:
        return FiniteMatFn(self.n, self.values - other.values)

    def __mul__(self, other: FiniteMatFn | int) -> FiniteMatFn:
        if isinstance(other, int):
            return FiniteMatFn(self.n, self.values * other)
        return FiniteMatFn(self.n, cyc_mul(self.values, other.values))

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteMatFn):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    def total(self) -> CycInt:
        return CycInt.from_array(self.n, self.values.reshape(-1, self.values.shape[-1]).sum(axis=0))

    def hermitian_norm(self) -> CycInt:
        """``sum_x f(x) * conj(f(x))``."""
        return (self * self.conj()).total()

    def support(self) -> np.ndarray:
        return np.any(self.values != 0, axis=-1)

    def save(self, path: Any) -> None:
        """Binary dump of the table for regression fixtures."""
        np.savez_compressed(path, n=self.n, values=self.values)

    @classmethod
    def load(cls, path: Any) -> FiniteMatFn:
        with np.load(path) as data:
            return cls(int(data["n"]), data["values"])


def _transform_axis(values: np.ndarray, axis: int, sign: int, q: int) -> np.ndarray:
    moved = np.moveaxis(values, axis, 0)
    out = np.zeros_like(moved)
    for x in range(q):
        for y in range(q):
            out[x] += mul_zeta(moved[y], sign * x * y)
    return np.moveaxis(out, 0, axis)


def ft_m2(f: FiniteMatFn) -> FiniteMatFn:
    """``F f(x) = sum_y f(y) zeta^((x, y))``, computed one matrix entry at a time.

    Entry y11 pairs with x22, y12 with x21 (negatively), y21 with x12 (negatively) and y22
    with x11.
    """
    q = f.modulus
    values = f.values
    for axis, sign in ((0, 1), (1, -1), (2, -1), (3, 1)):
        values = _transform_axis(values, axis, sign, q)
    return FiniteMatFn(f.n, np.ascontiguousarray(values.transpose(3, 2, 1, 0, 4)))


def _grids(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    q = 1 << n
    return tuple(np.meshgrid(*(np.arange(q),) * 4, indexing="ij"))  # type: ignore[return-value]


def _unit(x: np.ndarray) -> np.ndarray:
    return (x % 2 == 1).astype(np.int64)


def _zero(x: np.ndarray, n: int) -> np.ndarray:
    return (x % (1 << n) == 0).astype(np.int64)


def _odd_diagonal(x11: np.ndarray | int, x22: np.ndarray | int) -> np.ndarray | bool:
    return (x11 % 2 == 1) & (x22 % 2 == 1)


def phi0_scaled(n: int) -> FiniteMatFn:
    """``4 * Phi^0``: diagonal entries units, off-diagonal entries weighted by ``2*[0] - [0 mod 2^(N-1)]``."""
    if n < 2:
        raise UserError(f"Phi^0 needs N >= 2, got {n}")
    x11, x12, x21, x22 = _grids(n)

    def off(x: np.ndarray) -> np.ndarray:
        return 2 * _zero(x, n) - _zero(x, n - 1)

    return FiniteMatFn.from_integers(n, _unit(x11) * _unit(x22) * off(x12) * off(x21))


def sigma(n: int, n1: int, n2: int) -> FiniteMatFn:
    """Indicator of ``x11 = 0 mod 2^n1``, ``x22 = 0 mod 2^n2`` with both off-diagonal entries odd."""
    x11, x12, x21, x22 = _grids(n)
    return FiniteMatFn.from_integers(n, _zero(x11, n1) * _zero(x22, n2) * _unit(x12) * _unit(x21))


def sigma_combination_scaled(n: int) -> FiniteMatFn:
    """``4 * (sigma_{N,N} - sigma_{N-1,N}/2 - sigma_{N,N-1}/2 + sigma_{N-1,N-1}/4)``."""
    return sigma(n, n, n) * 4 - sigma(n, n - 1, n) * 2 - sigma(n, n, n - 1) * 2 + sigma(n, n - 1, n - 1)


def phi_prime(n: int) -> FiniteMatFn:
    """``(-1)^(x+y) + (-1)^(y+z) + (-1)^(x+z)`` on ``t = m + 2^(N-2)[[x, 2y], [2z, -x]]`` with
    both diagonal entries odd; zero elsewhere.

    For N >= 3 an odd diagonal is the same as m odd. At N = 2 the shift by x moves the diagonal,
    so the parity has to be read off the entries themselves.
    """
    x11, x12, x21, x22 = _grids(n)
    half = 1 << (n - 1)
    on = _odd_diagonal(x11, x22) & ((x11 - x22) % half == 0) & (x12 % half == 0) & (x21 % half == 0)
    a = ((x11 - x22) // half) % 2
    b = (x12 // half) % 2
    c = (x21 // half) % 2
    total = (-1) ** ((b + c) % 2) + (-1) ** ((a + c) % 2) + (-1) ** ((a + b) % 2)
    return FiniteMatFn.from_integers(n, np.where(on, total, 0))


def _conjugation_permutation(n: int, g: tuple[int, int, int, int]) -> np.ndarray:
    """Flat index of ``g^-1 x g`` for every flat ``x``."""
    q = 1 << n
    a, b, c, d = g
    det = (a * d - b * c) % q
    inv = pow(det, -1, q)
    ia, ib, ic, id_ = (d * inv) % q, (-b * inv) % q, (-c * inv) % q, (a * inv) % q
    x11, x12, x21, x22 = (v.ravel() for v in _grids(n))
    # y = g^-1 x
    y11, y12 = ia * x11 + ib * x21, ia * x12 + ib * x22
    y21, y22 = ic * x11 + id_ * x21, ic * x12 + id_ * x22
    z11, z12 = (y11 * a + y12 * c) % q, (y11 * b + y12 * d) % q
    z21, z22 = (y21 * a + y22 * c) % q, (y21 * b + y22 * d) % q
    return ((z11 * q + z12) * q + z21) * q + z22


@lru_cache(maxsize=8)
def conjugacy_orbits(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``(labels, sizes)``: the smallest flat index of each point's GL_2-orbit and the orbit size
    per point."""
    perms = [_conjugation_permutation(n, g) for g in _GL2_GENERATORS]
    labels = np.arange(1 << (4 * n), dtype=np.int64)
    while True:
        previous = labels
        for perm in perms:
            labels = np.minimum(labels, labels[perm])
        labels = labels[labels]
        if np.array_equal(labels, previous):
            break
    counts = np.bincount(labels, minlength=labels.size)
    return labels, counts[labels]


def conjugation_sum(f: FiniteMatFn) -> FiniteMatFn:
    """``sum_{g in GL_2(Z/2^N)} f(g^-1 x g)`` for integer-valued ``f``, orbit by orbit."""
    n = f.n
    labels, sizes = conjugacy_orbits(n)
    flat = f.integers().ravel()
    sums = np.zeros(flat.size, dtype=np.int64)
    np.add.at(sums, labels, flat)
    order = gl2_order(n)
    if np.any(order % sizes):
        raise UserError("orbit size does not divide the group order")
    q = 1 << n
    return FiniteMatFn.from_integers(n, ((order // sizes) * sums[labels]).reshape((q,) * 4))


def conjugation_sum_naive(f: FiniteMatFn) -> FiniteMatFn:
    """The same sum over every group element; only for small N."""
    n = f.n
    if n > NAIVE_GROUP_SUM_MAX_LEVEL:
        raise UserError(f"the naive group sum is limited to N <= {NAIVE_GROUP_SUM_MAX_LEVEL}")
    q = 1 << n
    flat = f.integers().ravel()
    total = np.zeros(flat.size, dtype=np.int64)
    for g in itertools.product(range(q), repeat=4):
        if (g[0] * g[3] - g[1] * g[2]) % 2:
            total += flat[_conjugation_permutation(n, g)]
    return FiniteMatFn.from_integers(n, total.reshape((q,) * 4))


def _flat_to_matrix(index: int, n: int) -> tuple[int, int, int, int]:
    q = 1 << n
    x22 = index % q
    x21 = (index // q) % q
    x12 = (index // q**2) % q
    x11 = index // q**3
    return (x11, x12, x21, x22)


def verify_ugly_lemma(n: int, config: RunConfig | None = None) -> CheckReport:
    """Phi = c_N Phi' with one constant c_N on a common support, the transform identity for
    Phi^0 and the anchors tying c_N to Fix#."""
    if n < 2:
        raise UserError(f"verify_ugly_lemma needs N >= 2, got {n}")
    tally = CaseTally("fourier", {"N": n}, config)
    logger.debug("verify_ugly_lemma: N=%d", n)
    with check_span("verify.fourier", N=n):
        phi0 = phi0_scaled(n)
        transformed = ft_m2(phi0)
        expected = sigma_combination_scaled(n) * (1 << (2 * n))
        tally.record(transformed == expected, identity="F(Phi0) = 2^(2N) sigma-combination")

        phi4 = conjugation_sum(phi0).integers()
        if n <= NAIVE_GROUP_SUM_MAX_LEVEL:
            tally.record(np.array_equal(phi4, conjugation_sum_naive(phi0).integers()), identity="orbit sum = naive sum")

        prime = phi_prime(n).integers()
        same_zeros = np.array_equal(phi4 != 0, prime != 0)
        mismatch = np.flatnonzero((phi4 != 0) != (prime != 0))
        tally.record(
            same_zeros,
            identity="zero sets agree",
            point=None if same_zeros else _flat_to_matrix(int(mismatch[0]), n),
        )

        support = np.flatnonzero(prime.ravel())
        ratios = {Fraction(int(phi4.ravel()[i]), 4 * int(prime.ravel()[i])) for i in support}
        c_n = next(iter(ratios)) if len(ratios) == 1 else None
        closed = Fraction(gl2_order(n), 12)
        tally.record(len(ratios) == 1, identity="single ratio on the support", ratios=sorted(ratios))
        tally.record(c_n == closed == Fraction(1 << (4 * n - 5)), identity="c_N = |GL_2|/12 = 2^(4N-5)", c_N=c_n)

        one = TorsionAction.scalar(1, n)
        phi_at_one = Fraction(int(phi4[1, 0, 0, 1]), 4)
        anchor_phi = Fraction(3 << (2 * n - 2)) * phi_at_one / gl2_order(n)
        anchor_fix = Fraction(fix_sharp(one, n), 2)
        anchor = Fraction(3 << (2 * n - 4))
        tally.record(anchor_phi == anchor_fix == anchor, identity="anchor 3*2^(2N-4)", via_phi=anchor_phi, via_fix=anchor_fix)

        if c_n is not None:
            failed_at = None
            checked = 0
            for idx in range(phi4.size):
                t = _flat_to_matrix(int(idx), n)
                if not _odd_diagonal(t[0], t[3]):
                    continue
                checked += 1
                lhs = (1 << (2 * n - 3)) * Fraction(int(phi4.ravel()[idx]), 4)
                rhs = c_n * fix_sharp(TorsionAction(n, t), n)
                if lhs != rhs and failed_at is None:
                    failed_at = {"t": t, "lhs": lhs, "rhs": rhs}
            tally.record(failed_at is None, identity="2^(2N-3) Phi = c_N Fix#", checked=checked, failure=failed_at)
    return tally.report({"c_N": c_n, "c_N_closed_form": closed, "anchor": anchor, "support_size": int(support.size)})


# ---------------------------------------------------------------------------
# Schwartz-Bruhat functions on B_2 = M_2(Q_2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SchwartzB2:
    """``factor * table[u]`` at ``2^-scale_in * u``, supported on ``2^-scale_in M_2(Z_2)`` and
    constant on cosets of ``2^scale_out M_2(Z_2)``; ``u`` runs over M_2(Z/2^(in+out))."""

    scale_in: int
    scale_out: int
    table: np.ndarray
    factor: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        k = self.grid
        if self.table.shape != (k, k, k, k):
            raise UserError(f"table shape {self.table.shape} does not match the grid {k}")

    @property
    def grid(self) -> int:
        return 1 << (self.scale_in + self.scale_out)

    @classmethod
    def indicator_m2(cls) -> SchwartzB2:
        return cls(0, 0, np.ones((1, 1, 1, 1), dtype=np.int64))

    def refine(self) -> SchwartzB2:
        """The same function on the grid ``(scale_in + 1, scale_out + 1)``."""
        k2 = 4 * self.grid
        u = np.arange(k2)
        idx = (u // 2) % self.grid
        table = self.table[np.ix_(idx, idx, idx, idx)].copy()
        odd = u % 2 == 1
        table[odd, :, :, :] = 0
        table[:, odd, :, :] = 0
        table[:, :, odd, :] = 0
        table[:, :, :, odd] = 0
        return SchwartzB2(self.scale_in + 1, self.scale_out + 1, table, self.factor)


def phi_hat() -> SchwartzB2:
    """phi / kappa_0 as a table on ``u/4``: ``(1/8) sum chi`` where ``u11 + u22 = 8 (mod 16)`` and
    the off-diagonal entries are even, 0 elsewhere."""
    k = 16
    u11, u12, u21, u22 = np.meshgrid(*(np.arange(k),) * 4, indexing="ij")
    on = ((u11 + u22) % k == 8) & (u12 % 2 == 0) & (u21 % 2 == 0)
    a = ((u11 - u22) // 2) % 2
    b = (u12 // 2) % 2
    c = (u21 // 2) % 2
    total = (-1) ** ((b + c) % 2) + (-1) ** ((a + c) % 2) + (-1) ** ((a + b) % 2)
    return SchwartzB2(2, 2, np.where(on, total, 0).astype(np.int64), Fraction(1, 8))


def schwartz_ip(n: int, f1: SchwartzB2, f2: SchwartzB2) -> Fraction:
    """``<Ad(a(2^n)) f1, f2>`` with vol(M_2(Z_2)) = 1 and ``a(t) = diag(t, 1)``."""
    if (f1.scale_in, f1.scale_out) != (f2.scale_in, f2.scale_out):
        raise UserError(
            f"scale mismatch: ({f1.scale_in}, {f1.scale_out}) vs ({f2.scale_in}, {f2.scale_out})"
        )
    k = f1.grid
    m = abs(n)
    scaled = (np.arange(k) * pow(2, m, k)) % k
    ident = np.arange(k)
    t1, t2 = (f1.table, f2.table) if n >= 0 else (f2.table, f1.table)
    left = t1[np.ix_(ident, ident, scaled, ident)]
    right = t2[np.ix_(ident, scaled, ident, ident)]
    total = int(np.sum(left.astype(object) * right.astype(object)))
    return f1.factor * f2.factor * Fraction(total, 1 << (4 * f1.scale_out + m))


# ---------------------------------------------------------------------------
# Trace-zero Schwartz functions on B_2^0
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TraceZeroSchwartz:
    """A function of ``[[a, b], [c, -a]]`` with coordinate ``i`` supported on ``2^-s_i Z_2`` and
    invariant under ``2^t_i Z_2``; measure da db dc."""

    s: tuple[int, int, int]
    t: tuple[int, int, int]
    table: np.ndarray

    def __post_init__(self) -> None:
        shape = tuple(1 << (si + ti) for si, ti in zip(self.s, self.t))
        if any(si + ti < 0 for si, ti in zip(self.s, self.t)):
            raise UserError("support must contain the invariance lattice")
        if self.table.shape != shape:
            raise UserError(f"table shape {self.table.shape} does not match {shape}")

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-sum(self.t))

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.table) ** 2)) * self.cell_volume

    @classmethod
    def indicator_r0(cls) -> TraceZeroSchwartz:
        return cls((0, 0, 0), (0, 0, 0), np.ones((1, 1, 1), dtype=complex))

    @classmethod
    def indicator_coset(cls, point: tuple[int, int, int]) -> TraceZeroSchwartz:
        """``1_{point + 2 R^0}`` on the grid of R^0 mod 2."""
        table = np.zeros((2, 2, 2), dtype=complex)
        table[tuple(v % 2 for v in point)] = 1
        return cls((0, 0, 0), (1, 1, 1), table)


def phi_hat_trace_zero() -> TraceZeroSchwartz:
    """``2^-3 sum_i chi_i(4 beta)``."""
    table = np.zeros((2, 2, 2), dtype=complex)
    for a, b, c in itertools.product((0, 1), repeat=3):
        table[a, b, c] = sum(chi_from_bits((a, b, c))) / 8
    return TraceZeroSchwartz((2, 1, 1), (-1, 0, 0), table)


def _pairing_kernel(s_in: int, t_in: int, s_out: int, doubled: bool) -> np.ndarray:
    """Matrix of ``psi(-c x x')`` (c = 2 or 1) times the input cell volume; input and output
    grids have the same size."""
    size = 1 << (s_in + t_in)
    exp = s_in + s_out - (1 if doubled else 0)
    j = np.arange(size)[:, None]
    i = np.arange(size)[None, :]
    if exp <= 0:
        phase = np.zeros((size, size))
    else:
        phase = ((i * j) % (1 << exp)) / (1 << exp)
    return np.exp(-2j * np.pi * phase) * 2.0 ** (-t_in)


def ft_trace_zero(f: TraceZeroSchwartz) -> TraceZeroSchwartz:
    """``F'' f(b') = int f(b) psi(-(2 a a' + b c' + c b'))``, ``psi(x) = exp(2 pi i {x}_2)``."""
    (sa, sb, sc), (ta, tb, tc) = f.s, f.t
    s_out = (ta + 1, tc, tb)
    t_out = (sa - 1, sc, sb)
    ka = _pairing_kernel(sa, ta, s_out[0], True)
    kb_from_c = _pairing_kernel(sc, tc, s_out[1], False)
    kc_from_b = _pairing_kernel(sb, tb, s_out[2], False)
    table = np.einsum("ip,jr,kq,pqr->ijk", ka, kb_from_c, kc_from_b, f.table)
    return TraceZeroSchwartz(s_out, t_out, table)


def trace_zero_ip(n: int, f1: TraceZeroSchwartz, f2: TraceZeroSchwartz) -> float:
    """``<Ad(a(2^n)) f1, f2> = 2^-|n| int f1(a, b, 2^n c) f2(a, 2^n b, c)`` for n >= 0, with
    the roles of b and c exchanged for n < 0."""
    if (f1.s, f1.t) != (f2.s, f2.t):
        raise UserError("scale mismatch between trace-zero Schwartz functions")
    m = abs(n)
    na, nb, nc = f1.table.shape
    ia, ib, ic = np.arange(na), np.arange(nb), np.arange(nc)
    sb = (ib * pow(2, m, nb)) % nb
    sc = (ic * pow(2, m, nc)) % nc
    if n >= 0:
        left = f1.table[np.ix_(ia, ib, sc)]
        right = f2.table[np.ix_(ia, sb, ic)]
    else:
        left = f1.table[np.ix_(ia, sb, ic)]
        right = f2.table[np.ix_(ia, ib, sc)]
    return float(np.real(np.sum(left * np.conj(right)))) * f1.cell_volume * 2.0 ** (-m)


# ---------------------------------------------------------------------------
# Spherical functions and local integrals
# ---------------------------------------------------------------------------


def _as_float(a2: RealLike) -> float:
    return float(a2)


def cartan_volume(n: int) -> int:
    """vol(K a(2^n) K) / vol(K): 1, then 3 * 2^(n-1)."""
    if n < 0:
        raise UserError(f"Cartan cells are indexed by n >= 0, got {n}")
    return 1 if n == 0 else 3 << (n - 1)


def spherical_recurrence(a2: RealLike, n: int) -> float:
    """Xi(n) from ``omega(n+1) = (a2 omega(n) - omega(n-1)) / 2`` with omega(0) = 1, omega(1) = a2/3."""
    n = abs(n)
    x = _as_float(a2)
    prev, cur = 1.0, x / 3
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, (x * cur - prev) / 2
    return cur


def macdonald_xi(a2: RealLike, n: int) -> float:
    """Normalised spherical function Xi(a(2^n)) for the Hecke eigenvalue ``a2`` of T_2."""
    n = abs(n)
    lam = _as_float(a2) / math.sqrt(2)
    alpha = (lam + cmath.sqrt(lam * lam - 4)) / 2
    if abs(alpha * alpha - 1) < 1e-9:
        return spherical_recurrence(a2, n)
    inv = 1 / alpha
    term = alpha**n * (1 - inv**2 / 2) / (1 - inv**2) + inv**n * (1 - alpha**2 / 2) / (1 - alpha**2)
    return float((2.0 ** (-n / 2) / 1.5 * term).real)


def _cartan_sum(a2: RealLike, ip: Any, label: str) -> float:
    total = 0.0
    for n in range(LOCAL_INTEGRAL_CAP + 1):
        weight = cartan_volume(n) * float(ip(n))
        term = weight * macdonald_xi(a2, n)
        total += term
        if abs(term) < LOCAL_INTEGRAL_TOLERANCE and abs(weight) * (n + 1) * 2.0 ** (-n / 2) < LOCAL_INTEGRAL_TOLERANCE:
            logger.debug("%s: a2=%s converged after %d cells", label, float(a2), n + 1)
            return total
    raise ConvergenceError(f"{label} did not converge within {LOCAL_INTEGRAL_CAP} Cartan cells for a2 = {float(a2)}")


def local_l_factor(a2: RealLike) -> float:
    """L_2(Psi, 1/2) = (1 - lambda/sqrt(2) + 1/2)^-1 with lambda = a2/sqrt(2)."""
    return 2 / (3 - _as_float(a2))


ZETA2_AT_2 = Fraction(4, 3)


def local_integral_unramified(a2: RealLike) -> float:
    """``sum_n vol(K a(2^n) K) <Ad(a(2^n)) 1, 1> Xi(n)``; equals L_2(Psi, 1/2) / zeta_2(2)."""
    one = SchwartzB2.indicator_m2()
    return _cartan_sum(a2, lambda n: schwartz_ip(n, one, one), "local_integral_unramified")


_PHI_HAT_IP: dict[int, Fraction] = {}


def _phi_hat_ip(n: int) -> Fraction:
    if n not in _PHI_HAT_IP:
        f = phi_hat()
        _PHI_HAT_IP[n] = schwartz_ip(n, f, f)
    return _PHI_HAT_IP[n]


def local_integral_correlations(a2: RealLike) -> float:
    """The same Cartan sum against ``<Ad(a(2^n)) phi_hat, phi_hat>``; equals
    ``2^-4 (2 + L_2(Psi, 1/2) / zeta_2(2))``."""
    return _cartan_sum(a2, _phi_hat_ip, "local_integral_correlations")


def local_integrals_report(a2_values: dict[str, AlgNum], config: RunConfig | None = None) -> CheckReport:
    """Truncated Cartan sums against their closed forms for each eigenvalue branch."""
    tally = CaseTally("local-integrals", {}, config)
    data: dict[str, Any] = {}
    for label, a2 in a2_values.items():
        closed = local_l_factor(a2) / float(ZETA2_AT_2)
        unram = local_integral_unramified(a2)
        corr = local_integral_correlations(a2)
        tally.record(abs(unram - closed) < 1e-9, branch=label, integral="unramified", value=unram, closed_form=closed)
        tally.record(abs(corr - (2 + closed) / 16) < 1e-9, branch=label, integral="correlations", value=corr, closed_form=(2 + closed) / 16)
        data[label] = {"unramified": unram, "correlations": corr, "closed_form": closed}
    return tally.report(data)


__all__ = [
    "FiniteMatFn",
    "SchwartzB2",
    "TraceZeroSchwartz",
    "ZETA2_AT_2",
    "cartan_volume",
    "conjugacy_orbits",
    "conjugation_sum",
    "conjugation_sum_naive",
    "ft_m2",
    "ft_trace_zero",
    "gl2_order",
    "local_integral_correlations",
    "local_integral_unramified",
    "local_integrals_report",
    "local_l_factor",
    "macdonald_xi",
    "phi0_scaled",
    "phi_hat",
    "phi_hat_trace_zero",
    "phi_prime",
    "schwartz_ip",
    "sigma",
    "sigma_combination_scaled",
    "spherical_recurrence",
    "trace_zero_ip",
    "verify_ugly_lemma",
]
