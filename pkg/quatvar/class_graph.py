"""Right-ideal classes of the maximal order, Brandt matrices and the Hecke eigenfunctions on
the class set."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache, cached_property
from typing import Any

import numpy as np
import sympy
from sympy import Matrix, Poly, legendre_symbol

from .algnum import AlgNum, quadratic_roots
from .exceptions import UnsupportedConfiguration, UserError
from .logger import logger
from .quat_core import DEFAULT_PRIME, QLattice, Quaternion, maximal_order, short_vectors, theta_counts, two_adic_split
from .report import CaseTally, CheckReport
from .tracing import check_span
from .tree_fix import CharFrame, build_char_frame
from .util._parallel import parallel_map

SPLITTING_PRECISION = 16
"""Precision of the stored per-class splittings; torsion computations reduce from here."""

DEFAULT_EIGEN_NMAX = 343
HECKE_PRIMES = (3, 5, 7)
RAMANUJAN_TOLERANCE = 1e-12
CONSTANT_EIGENVALUE_NMAX = 25


@dataclass(frozen=True)
class ClassRecord:
    """One right-ideal class E."""

    ideal: QLattice
    """Representative right R-ideal I_E."""

    left_order: QLattice
    """R_E, the left order of I_E."""

    w: int
    """Unit weight #R_E^x / 2."""

    ternary: QLattice
    """S_E^0, the trace-zero part of Z + 2 R_E."""

    char_frame: CharFrame

    @property
    def ideal_norm(self) -> Fraction:
        return self.ideal.norm()

    @cached_property
    def ternary_gram(self) -> tuple[tuple[int, ...], ...]:
        """Integer matrix of nrd on the S_E^0 basis."""
        rows = self.ternary.value_form
        if any(v.denominator != 1 for row in rows for v in row):
            raise UserError("ternary form is not integral")
        return tuple(tuple(int(v) for v in row) for row in rows)

    @property
    def ternary_det(self) -> int:
        return int(Matrix(self.ternary_gram).det())

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "ideal": self.ideal.to_json_dict(),
            "ideal_norm": self.ideal_norm,
            "left_order": self.left_order.to_json_dict(),
            "w": self.w,
            "ternary_gram": [list(r) for r in self.ternary_gram],
            "ternary_basis": self.ternary.to_json_dict(),
            "rho_mod4": [list(m) for m in self.char_frame.rho_mod4],
        }


@dataclass(frozen=True)
class ClassSet:
    """The class set Y, ordered by ``(w, canonical ideal basis)``."""

    p: int
    classes: tuple[ClassRecord, ...]
    order: QLattice

    @property
    def mass(self) -> Fraction:
        return sum((Fraction(1, c.w) for c in self.classes), Fraction(0))

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(c.w for c in self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def class_of(self, ideal: QLattice) -> int:
        for idx, record in enumerate(self.classes):
            if ideals_equivalent(ideal, record.ideal):
                return idx
        raise UserError("ideal is not equivalent to any class representative")

    def neighbours(self, index: int) -> list[int]:
        """Classes of the 2-neighbours of I_E, one entry per neighbour."""
        return [self.class_of(j) for j in two_neighbours(self.classes[index].ideal, self.order)]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "mass": self.mass,
            "order": self.order.to_json_dict(),
            "classes": [c.to_json_dict() for c in self.classes],
        }


# ---------------------------------------------------------------------------
# Ideals
# ---------------------------------------------------------------------------


def two_neighbours(ideal: QLattice, order: QLattice) -> list[QLattice]:
    """The right ideals ``xR + 2I`` with ``x in I \\ 2I`` and ``nrd(x)/N(I)`` even."""
    norm = ideal.norm()
    twice = ideal.scale(2)
    seen: dict[Any, QLattice] = {}
    basis = ideal.basis
    for mask in range(1, 16):
        x = sum((basis[i] for i in range(4) if mask >> i & 1), Quaternion.scalar(0, ideal.p))
        if (x.nrd() / norm).denominator != 1 or (x.nrd() / norm) % 2:
            continue
        j = QLattice.from_generators([x * b for b in order.basis] + list(twice.basis), ideal.p)
        seen.setdefault(j.key(), j)
    return [seen[k] for k in sorted(seen)]


def ideals_equivalent(i: QLattice, j: QLattice) -> bool:
    """``J = a I`` for some ``a in B^x``: ``J conj(I)`` holds an element of norm ``N(J) N(I)``."""
    target = i.norm() * j.norm()
    product = j * i.conj()
    return any(value == target for _, value in short_vectors(product, target))


def unit_weight(order: QLattice) -> int:
    units = sum(1 for _, value in short_vectors(order, 1) if value == 1)
    return units // 2


def _make_record(ideal: QLattice, order: QLattice) -> ClassRecord:
    left = ideal.left_order()
    s0 = left.trace_zero_part()
    splitting = two_adic_split(SPLITTING_PRECISION, left)
    return ClassRecord(ideal, left, unit_weight(left), s0, build_char_frame(s0, splitting))


def build_class_set(p: int = DEFAULT_PRIME) -> ClassSet:
    """Walk the 2-neighbour graph from R until the classes found have mass (p-1)/12."""
    if p % 4 != 3:
        raise UnsupportedConfiguration(f"class sets are built for p = 3 (mod 4) only, got p = {p}")
    order = maximal_order(p)
    target = Fraction(p - 1, 12)
    logger.debug("build_class_set: p=%d, target mass %s", p, target)
    with check_span("class_set.build", p=p):
        found: list[ClassRecord] = [_make_record(order, order)]
        mass = Fraction(1, found[0].w)
        queue = [order]
        while queue and mass < target:
            current = queue.pop(0)
            for neighbour in two_neighbours(current, order):
                if any(ideals_equivalent(neighbour, r.ideal) for r in found):
                    continue
                record = _make_record(neighbour, order)
                found.append(record)
                mass += Fraction(1, record.w)
                queue.append(neighbour)
                if mass >= target:
                    break
        if mass != target:
            raise UserError(f"class walk ended at mass {mass}, expected {target}")
    classes = tuple(sorted(found, key=lambda r: (r.w, r.ideal.key())))
    logger.debug("build_class_set: %d classes, weights %s", len(classes), [c.w for c in classes])
    return ClassSet(p, classes, order)


@cache
def default_class_set(p: int = DEFAULT_PRIME) -> ClassSet:
    return build_class_set(p)


def ternary_lattice(class_set: ClassSet, index: int) -> tuple[tuple[tuple[int, ...], ...], CharFrame]:
    record = class_set.classes[index]
    return record.ternary_gram, record.char_frame


# ---------------------------------------------------------------------------
# Brandt matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BrandtMatrix:
    """B(n) acting on functions on the class set (column vectors)."""

    n: int
    entries: tuple[tuple[Fraction, ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def __matmul__(self, other: BrandtMatrix) -> tuple[tuple[Fraction, ...], ...]:
        k = self.size
        return tuple(
            tuple(sum((self.entries[i][m] * other.entries[m][j] for m in range(k)), Fraction(0)) for j in range(k))
            for i in range(k)
        )

    def apply(self, f: list[Any]) -> list[Any]:
        return [sum((self.entries[i][j] * f[j] for j in range(self.size)), AlgNum(0)) for i in range(self.size)]

    def row_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, Fraction(0)) for row in self.entries)

    def trace(self) -> Fraction:
        return sum((self.entries[i][i] for i in range(self.size)), Fraction(0))

    def weighted_symmetric(self, weights: tuple[int, ...]) -> bool:
        k = self.size
        return all(
            self.entries[i][j] / weights[i] == self.entries[j][i] / weights[j] for i in range(k) for j in range(k)
        )

    def to_sympy(self) -> Matrix:
        return Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in self.entries])

    def to_json_dict(self) -> dict[str, Any]:
        return {"n": self.n, "entries": [list(row) for row in self.entries]}


def _pair_counts(args: tuple[ClassRecord, ClassRecord, int]) -> np.ndarray:
    e, f, n_max = args
    lattice = e.ideal * f.ideal.conj()
    scale = e.ideal_norm * f.ideal_norm
    form = [[v / scale for v in row] for row in lattice.value_form]
    return theta_counts(form, n_max)


def brandt_series(n_max: int, class_set: ClassSet | None = None) -> dict[int, BrandtMatrix]:
    """B(n) for ``1 <= n <= n_max`` from one enumeration per unordered pair of classes."""
    if n_max <= 0:
        raise UserError(f"Brandt matrices need n >= 1, got n_max = {n_max}")
    class_set = class_set or default_class_set()
    classes = class_set.classes
    k = len(classes)
    pairs = [(a, b) for a in range(k) for b in range(a, k)]
    logger.debug("brandt_series: n_max=%d over %d class pairs", n_max, len(pairs))
    with check_span("brandt.series", n_max=n_max):
        counts = parallel_map(_pair_counts, [(classes[a], classes[b], n_max) for a, b in pairs])
    r: dict[tuple[int, int], np.ndarray] = {}
    for (a, b), c in zip(pairs, counts):
        r[(a, b)] = r[(b, a)] = c
    return {
        n: BrandtMatrix(
            n,
            tuple(tuple(Fraction(int(r[(a, b)][n]), 2 * classes[b].w) for b in range(k)) for a in range(k)),
        )
        for n in range(1, n_max + 1)
    }


def brandt(n: int, class_set: ClassSet | None = None) -> BrandtMatrix:
    if n <= 0:
        raise UserError(f"brandt needs n >= 1, got {n}")
    return brandt_series(n, class_set)[n]


# ---------------------------------------------------------------------------
# Trace formula
# ---------------------------------------------------------------------------


def class_number(d: int) -> int:
    """Number of reduced primitive positive binary forms of discriminant ``d < 0``."""
    if d >= 0 or d % 4 not in (0, 1):
        raise UserError(f"{d} is not a negative discriminant")
    h = 0
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                h += 1
        a += 1
    return h


def _unit_index(d: int) -> int:
    return {-3: 3, -4: 2}.get(d, 1)


def _eichler_symbol(d: int, p: int) -> int:
    if d % (p * p) == 0 and (d // (p * p)) % 4 in (0, 1):
        return 1
    return int(legendre_symbol(d % p, p)) if d % p else 0


def eichler_trace(n: int, p: int = DEFAULT_PRIME) -> Fraction:
    """tr B(n) from the Eichler-Selberg trace formula for the maximal order (gcd(n, p) = 1)."""
    if n <= 0 or n % p == 0:
        raise UserError(f"eichler_trace needs n >= 1 prime to {p}, got {n}")
    total = Fraction(0)
    s = 0
    while s * s < 4 * n:
        for sign in ((1,) if s == 0 else (1, -1)):
            disc0 = (sign * s) ** 2 - 4 * n
            f = 1
            while f * f <= -disc0:
                if disc0 % (f * f) == 0 and (disc0 // (f * f)) % 4 in (0, 1):
                    d = disc0 // (f * f)
                    total += Fraction(class_number(d), _unit_index(d)) * Fraction(1 - _eichler_symbol(d, p), 2)
                f += 1
        s += 1
    root = math.isqrt(n)
    if root * root == n:
        total += Fraction(p - 1, 12)
    return total


# ---------------------------------------------------------------------------
# Eigenfunctions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenFns:
    """The mean-zero Hecke eigenfunctions, unnormalised, over Q(sqrt 5)."""

    psi: tuple[tuple[AlgNum, ...], tuple[AlgNum, ...]]
    """Psi_1 (the branch with a_2 = (-1 + sqrt 5)/2) and its Galois conjugate Psi_2."""

    norm_sq: tuple[AlgNum, AlgNum]
    """sum_E Psi(E)^2 / w_E."""

    eigenvalues: tuple[dict[int, AlgNum], dict[int, AlgNum]] = field(default_factory=lambda: ({}, {}))
    """n -> a_n with T_n Psi = a_n Psi."""

    weights: tuple[int, ...] = ()

    def a(self, k: int, n: int) -> AlgNum:
        try:
            return self.eigenvalues[k][n]
        except KeyError as e:
            raise UserError(f"a_{n} of Psi_{k + 1} was not computed") from e

    def normalized(self, k: int) -> list[float]:
        scale = math.sqrt(float(self.norm_sq[k]))
        return [float(v) / scale for v in self.psi[k]]

    def weighted_inner(self, f: tuple[AlgNum, ...], g: tuple[AlgNum, ...]) -> AlgNum:
        return sum((x * y / w for x, y, w in zip(f, g, self.weights)), AlgNum(0))

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "psi": [list(p) for p in self.psi],
            "norm_sq": list(self.norm_sq),
            "a2": [self.eigenvalues[k].get(2) for k in range(2)],
            "a3": [self.eigenvalues[k].get(3) for k in range(2)],
        }


def _cross(u: list[AlgNum], v: list[AlgNum]) -> list[AlgNum]:
    return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]


def _eigenvector(b: BrandtMatrix, lam: AlgNum) -> tuple[AlgNum, ...]:
    rows = [[AlgNum(b.entries[i][j]) - (lam if i == j else 0) for j in range(3)] for i in range(3)]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        vec = _cross(rows[i], rows[j])
        if any(vec):
            lead = next(v for v in vec if v)
            return tuple(v / lead for v in vec)
    raise UserError(f"eigenvalue {lam} has a multi-dimensional eigenspace")


def eigenfunctions(class_set: ClassSet | None = None, n_max: int = DEFAULT_EIGEN_NMAX) -> EigenFns:
    """Diagonalise B(2) on the mean-zero plane and read off a_n for n <= n_max."""
    class_set = class_set or default_class_set()
    if len(class_set) != 3:
        raise UnsupportedConfiguration("eigenfunctions are implemented for class sets of size 3")
    series = brandt_series(max(n_max, 2), class_set)
    b2 = series[2]
    x = sympy.Symbol("x")
    quotient, remainder = sympy.div(Poly(b2.to_sympy().charpoly(x).as_expr(), x), Poly(x - 3, x))
    if not remainder.is_zero:
        raise UserError("3 is not an eigenvalue of B(2)")
    _, c1, c0 = (Fraction(int(c.p), int(c.q)) for c in quotient.all_coeffs())
    roots = quadratic_roots(c1, c0)
    psi = tuple(_eigenvector(b2, lam) for lam in roots)
    weights = class_set.weights
    norm_sq = tuple(sum((v * v / w for v, w in zip(p, weights)), AlgNum(0)) for p in psi)
    eigenvalues: tuple[dict[int, AlgNum], dict[int, AlgNum]] = ({}, {})
    for k, p in enumerate(psi):
        lead = next(i for i, v in enumerate(p) if v)
        for n, bn in series.items():
            image = bn.apply(list(p))
            a_n = image[lead] / p[lead]
            if any(image[i] != a_n * p[i] for i in range(3)):
                raise UserError(f"Psi_{k + 1} is not an eigenvector of B({n})")
            eigenvalues[k][n] = a_n
    logger.debug("eigenfunctions: B(2) quadratic x^2 + %s x + %s, roots %s", c1, c0, roots)
    return EigenFns(psi, norm_sq, eigenvalues, weights)  # type: ignore[arg-type]


def _sigma(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


BRANDT_COMMUTING = (1, 2, 3, 5, 7, 9, 15, 25)
EXPECTED_CLASS_DATA = {23: (3, (1, 2, 3))}
"""Known (class number, weights) per ramified prime."""


def brandt_report(class_set: ClassSet | None = None, config: Any = None) -> CheckReport:
    """Class set and Brandt layer: class number, mass, B(2) against the neighbour walk, weighted
    self-adjointness, commutation, Hecke multiplicativity and the trace formula."""
    class_set = class_set or default_class_set()
    p = class_set.p
    tally = CaseTally("brandt", {"p": p}, config)
    tally.record(class_set.mass == Fraction(p - 1, 12), check="mass", mass=class_set.mass)
    if p in EXPECTED_CLASS_DATA:
        h, weights = EXPECTED_CLASS_DATA[p]
        tally.record(len(class_set) == h, check="class_number", h=len(class_set))
        tally.record(class_set.weights == weights, check="weights", weights=list(class_set.weights))

    series = brandt_series(max(BRANDT_COMMUTING), class_set)
    b2 = series[2]
    tally.record(all(r == 3 for r in b2.row_sums()), check="B(2) row sums", rows=b2.row_sums())
    for e in range(len(class_set)):
        histogram = Counter(class_set.neighbours(e))
        row = tuple(histogram.get(f, 0) for f in range(len(class_set)))
        tally.record(row == b2.entries[e], check="neighbours", E=e + 1, histogram=row)

    chosen = [series[n] for n in BRANDT_COMMUTING]
    for b in chosen:
        tally.record(b.weighted_symmetric(class_set.weights), check="weighted_symmetric", n=b.n)
        for c in chosen:
            if b.n < c.n:
                tally.record(b @ c == c @ b, check="commute", n=b.n, m=c.n)
    tally.record(series[3] @ series[5] == series[15].entries, check="B(3) B(5) = B(15)")
    for q in (2, 3, 5):
        if q ** 2 <= max(BRANDT_COMMUTING) and q != p:
            hecke = tuple(
                tuple(series[q * q].entries[i][j] + q * series[1].entries[i][j] for j in range(len(class_set)))
                for i in range(len(class_set))
            )
            tally.record(series[q] @ series[q] == hecke, check="B(q)^2 = B(q^2) + q B(1)", q=q)
    for n in range(1, 11):
        if n % p:
            tally.record(series[n].trace() == eichler_trace(n, p), check="trace formula", n=n, trace=series[n].trace())
    return tally.report({"B2": b2, "traces": {n: series[n].trace() for n in range(1, 11)}})


def eigen_report(class_set: ClassSet | None = None, eig: EigenFns | None = None, config: Any = None) -> CheckReport:
    """Exact eigen data checks: mean zero, orthogonality, trace-formula quadratic, Hecke
    recursion for p in 3, 5, 7 and the Ramanujan bound."""
    class_set = class_set or default_class_set()
    eig = eig or eigenfunctions(class_set)
    tally = CaseTally("eigen", {}, config)
    w = class_set.weights
    for k in range(2):
        tally.record(eig.weighted_inner(eig.psi[k], (AlgNum(1),) * 3) == 0, check="mean_zero", k=k + 1)
    tally.record(eig.weighted_inner(eig.psi[0], eig.psi[1]) == 0, check="orthogonal")

    s = eichler_trace(2, class_set.p) - 3
    prod = (s * s - 4 - (eichler_trace(4, class_set.p) - 7)) / 2
    a2 = (eig.a(0, 2), eig.a(1, 2))
    tally.record(a2[0] + a2[1] == s and a2[0] * a2[1] == prod, check="trace_quadratic", sum=s, product=prod)

    for k in range(2):
        for p in HECKE_PRIMES:
            for j in (1, 2):
                lhs = eig.a(k, p) * eig.a(k, p**j)
                rhs = eig.a(k, p ** (j + 1)) + p * eig.a(k, p ** (j - 1))
                tally.record(lhs == rhs, check="hecke_recursion", k=k + 1, p=p, power=j)
        for p in (2,) + HECKE_PRIMES:
            bound = 2 * math.sqrt(p) + RAMANUJAN_TOLERANCE
            tally.record(abs(float(eig.a(k, p))) <= bound, check="ramanujan", k=k + 1, p=p)
    series = brandt_series(CONSTANT_EIGENVALUE_NMAX, class_set)
    for n in range(1, CONSTANT_EIGENVALUE_NMAX + 1):
        if math.gcd(n, 2 * class_set.p) == 1:
            rows = series[n].row_sums()
            tally.record(all(r == _sigma(n) for r in rows), check="constant_eigenvalue", n=n)
            tally.record(series[n].weighted_symmetric(w), check="self_adjoint", n=n)
    return tally.report({"eigen": eig, "weights": list(w)})


__all__ = [
    "BrandtMatrix",
    "ClassRecord",
    "ClassSet",
    "EigenFns",
    "brandt",
    "brandt_report",
    "brandt_series",
    "build_class_set",
    "class_number",
    "default_class_set",
    "eichler_trace",
    "eigen_report",
    "eigenfunctions",
    "ideals_equivalent",
    "ternary_lattice",
    "two_neighbours",
    "unit_weight",
]
