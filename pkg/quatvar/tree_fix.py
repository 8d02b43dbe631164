"""Fixed cyclic-subgroup pairs on the 2-adic Bruhat-Tits tree and the characters of S_E^0.

A cyclic subgroup of order 2^N of (Q_2/Z_2)^2 is named by a canonical generator of
(Z/2^N)^2: ``(1, t)`` with ``t mod 2^N`` or ``(2u, 1)`` with ``u mod 2^(N-1)``. Its mod-2
reduction is one of the three lines of (Z/2)^2; two subgroups are independent exactly when
their lines differ.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Any

import numpy as np

from .exceptions import UserError
from .logger import logger
from .quat_core import Mat2, QLattice, Quaternion, TwoAdicSplitting, mat2_mul, mat_mod
from .report import CaseTally, CheckReport
from .tracing import check_span
from .util._parallel import parallel_map

if TYPE_CHECKING:
    from .class_graph import ClassSet
    from .run_config import RunConfig

DEFAULT_LEVEL_SLACK = 2
RANDOM_SUPPORT_SAMPLES = 500
_RANDOM_SEED = 20231

LINES = ((1, 1), (1, 0), (0, 1))
"""The order-2 subgroups v1, v2, v3 of (Z/2)^2, in the order that makes chi_i = eta_j * eta_k."""

E_TRACE_ZERO: tuple[Mat2, Mat2, Mat2] = ((0, 1, 1, 0), (1, 1, 0, -1), (1, 0, 1, -1))


@dataclass(frozen=True)
class TorsionAction:
    """An endomorphism of the 2^level torsion, given by its matrix mod 2^level."""

    level: int
    matrix: Mat2

    def __post_init__(self) -> None:
        if self.level < 1:
            raise UserError(f"torsion level must be positive, got {self.level}")
        object.__setattr__(self, "matrix", mat_mod(self.matrix, 1 << self.level))

    @classmethod
    def from_quaternion(cls, splitting: TwoAdicSplitting, alpha: Quaternion, level: int) -> TorsionAction:
        if level > splitting.precision:
            raise UserError(f"splitting precision {splitting.precision} is below level {level}")
        return cls(level, splitting.image(alpha))

    @classmethod
    def scalar(cls, value: int, level: int) -> TorsionAction:
        return cls(level, (value, 0, 0, value))

    @property
    def modulus(self) -> int:
        return 1 << self.level

    def det(self) -> int:
        a, b, c, d = self.matrix
        return (a * d - b * c) % self.modulus

    def trace(self) -> int:
        a, _, _, d = self.matrix
        return (a + d) % self.modulus

    def translate(self, t: int) -> TorsionAction:
        a, b, c, d = self.matrix
        return TorsionAction(self.level, (a + t, b, c, d + t))

    def scale(self, factor: int) -> TorsionAction:
        return TorsionAction(self.level, tuple(factor * v for v in self.matrix))  # type: ignore[arg-type]

    def conjugate(self, g: Mat2) -> TorsionAction:
        """``g^-1 * A * g`` for ``g`` invertible mod 2."""
        a, b, c, d = g
        m = self.modulus
        det = (a * d - b * c) % m
        if det % 2 == 0:
            raise UserError(f"conjugator {g} is not invertible mod 2")
        inv = pow(det, -1, m)
        g_inv = mat_mod((d * inv, -b * inv, -c * inv, a * inv), m)
        return TorsionAction(self.level, mat2_mul(mat2_mul(g_inv, self.matrix, m), g, m))

    def reduce(self, level: int) -> TorsionAction:
        if level > self.level:
            raise UserError(f"cannot lift an action from level {self.level} to {level}")
        return TorsionAction(level, self.matrix)


@dataclass(frozen=True)
class CyclicPair:
    """A pair of independent cyclic subgroups of orders 2^n1 and 2^n2."""

    g1: tuple[int, int]
    g2: tuple[int, int]
    n1: int
    n2: int

    def __post_init__(self) -> None:
        if _line(self.g1) == _line(self.g2):
            raise UserError(f"{self.g1} and {self.g2} do not span (Z/2)^2")

    def is_fixed_by(self, action: TorsionAction) -> bool:
        return _stabilises(action.matrix, self.g1, self.n1) and _stabilises(action.matrix, self.g2, self.n2)


def _line(g: tuple[int, int]) -> tuple[int, int]:
    x, y = g[0] % 2, g[1] % 2
    if (x, y) == (0, 0):
        raise UserError(f"{g} is not a generator of a cyclic subgroup of full order")
    return (x, y)


def _stabilises(matrix: Mat2, g: tuple[int, int], n: int) -> bool:
    if n == 0:
        return True
    m = 1 << n
    a, b, c, d = matrix
    x, y = g
    image = ((a * x + b * y) % m, (c * x + d * y) % m)
    if x % 2:
        lam = image[0] * pow(x, -1, m)
    else:
        lam = image[1] * pow(y, -1, m)
    return image == ((lam * x) % m, (lam * y) % m)


def cyclic_generators(n: int) -> list[tuple[int, int]]:
    """Canonical generators of the 3 * 2^(n-1) cyclic subgroups of order 2^n."""
    if n < 1:
        raise UserError(f"subgroup order exponent must be positive, got {n}")
    m = 1 << n
    return [(1, t) for t in range(m)] + [(2 * u, 1) for u in range(m // 2)]


def enumerate_pairs(n1: int, n2: int) -> list[CyclicPair]:
    """All of L_{n1,n2} (n1, n2 >= 1), by brute force."""
    return [
        CyclicPair(g1, g2, n1, n2)
        for g1 in cyclic_generators(n1)
        for g2 in cyclic_generators(n2)
        if _line(g1) != _line(g2)
    ]


def lattice_pair_count(n1: int, n2: int) -> int:
    """|L_{n1,n2}| in closed form; the order-1 subgroup stands in for a zero exponent."""
    if n1 < 0 or n2 < 0:
        raise UserError("subgroup order exponents must be non-negative")
    if n1 == 0 and n2 == 0:
        return 1
    if n1 == 0 or n2 == 0:
        return 3 << (max(n1, n2) - 1)
    return 3 << (n1 + n2 - 1)


@lru_cache(maxsize=1 << 16)
def _fixed_per_line(matrix: Mat2, n: int) -> tuple[int, int, int]:
    """Number of fixed order-2^n subgroups above each line of ``LINES``."""
    m = 1 << n
    a, b, c, d = (int(v) % m for v in matrix)
    t = np.arange(m, dtype=np.int64)
    lam = (a + b * t) % m
    fixed_t = ((c + d * t - t * lam) % m) == 0
    u2 = 2 * np.arange(m // 2, dtype=np.int64)
    lam_u = (c * u2 + d) % m
    fixed_u = ((a * u2 + b - u2 * lam_u) % m) == 0
    odd = int(np.count_nonzero(fixed_t[1::2]))
    even = int(np.count_nonzero(fixed_t[0::2]))
    return (odd, even, int(np.count_nonzero(fixed_u)))


def fix_count(action: TorsionAction, n1: int, n2: int) -> int:
    """#{(C1, C2) in L_{n1,n2} : alpha C1 <= C1, alpha C2 <= C2}."""
    if n1 < 0 or n2 < 0:
        raise UserError("subgroup order exponents must be non-negative")
    if max(n1, n2) > action.level:
        raise UserError(
            f"torsion level {action.level} is too low for Fix_{{{n1},{n2}}}; need at least {max(n1, n2)}"
        )
    if n1 == 0 and n2 == 0:
        return 1
    if n1 == 0 or n2 == 0:
        return sum(_fixed_per_line(action.reduce(max(n1, n2)).matrix, max(n1, n2)))
    first = _fixed_per_line(action.reduce(n1).matrix, n1)
    second = _fixed_per_line(action.reduce(n2).matrix, n2)
    return sum(first[i] * second[j] for i in range(3) for j in range(3) if i != j)


def fix_sharp(action: TorsionAction, n: int) -> int:
    """Fix_{N,N} - Fix_{N-1,N} - Fix_{N,N-1} + Fix_{N-1,N-1}."""
    if n < 1:
        raise UserError(f"fix_sharp needs N >= 1, got {n}")
    return (
        fix_count(action, n, n)
        - fix_count(action, n - 1, n)
        - fix_count(action, n, n - 1)
        + fix_count(action, n - 1, n - 1)
    )


def support_bits(matrix: Mat2, n: int) -> tuple[int, int, int] | None:
    """``(a, b, c)`` when ``matrix = m + 2^(N-2) [[a, 2b], [2c, -a]] (mod 2^N)``, else ``None``."""
    if n < 2:
        raise UserError(f"the support shape needs N >= 2, got {n}")
    y00, y01, y10, y11 = matrix
    half = 1 << (n - 1)
    if (y00 - y11) % half or y01 % half or y10 % half:
        return None
    return (((y00 - y11) // half) % 2, (y01 // half) % 2, (y10 // half) % 2)


def chi_from_bits(bits: Sequence[int]) -> tuple[int, int, int]:
    a, b, c = bits
    return ((-1) ** ((b + c) % 2), (-1) ** ((a + c) % 2), (-1) ** ((a + b) % 2))


def fix_sharp_closed_form(action: TorsionAction, n: int) -> int:
    """``2^(2N-3) * sum chi`` on the support shape, 0 off it (N >= 2)."""
    bits = support_bits(action.reduce(n).matrix, n)
    if bits is None:
        return 0
    return (1 << (2 * n - 3)) * sum(chi_from_bits(bits))


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharFrame:
    """Mod-4 matrix model of a ternary lattice S_E^0, enough to evaluate chi and eta."""

    lattice: QLattice
    """S_E^0, rank 3."""

    splitting: TwoAdicSplitting
    """Splitting of the left order R_E; S_E^0 sits inside it."""

    rho_mod4: tuple[Mat2, Mat2, Mat2]
    """Images of the S_E^0 basis, each of shape [[a, 2b], [2c, -a]] mod 4."""

    bit_matrix: tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]
    """Row r holds the (a, b, c) bits of basis element r."""

    child_labels: tuple[tuple[int, int], tuple[int, int], tuple[int, int]] = LINES

    def coordinates(self, beta: Quaternion) -> tuple[int, int, int]:
        coords = self.lattice.coordinates(beta)
        if coords is None or any(c.denominator != 1 for c in coords):
            raise UserError(f"{beta} is not in S_E^0")
        return tuple(int(c) for c in coords)  # type: ignore[return-value]

    def bits(self, beta: Quaternion) -> tuple[int, int, int]:
        coords = self.coordinates(beta)
        return tuple(  # type: ignore[return-value]
            sum(coords[r] * self.bit_matrix[r][col] for r in range(3)) % 2 for col in range(3)
        )

    def bits_of_coords(self, vecs: np.ndarray) -> np.ndarray:
        """Vectorised ``(a, b, c)`` bits of lattice vectors given by coordinates."""
        return (np.asarray(vecs, dtype=np.int64) @ np.array(self.bit_matrix, dtype=np.int64)) % 2

    def chi_sum_weights(self, vecs: np.ndarray) -> np.ndarray:
        """``sum_i chi_i`` for each coordinate row: 3 on bits 000 and 111, -1 otherwise."""
        bits = self.bits_of_coords(vecs)
        total = bits.sum(axis=1)
        return np.where((total == 0) | (total == 3), 3, -1)

    def residue_classes(self) -> list[Quaternion]:
        """One representative per class of S_E^0 / 2 S_E^0."""
        return [
            self.lattice.element((e0, e1, e2))
            for e0 in (0, 1)
            for e1 in (0, 1)
            for e2 in (0, 1)
        ]


def build_char_frame(lattice: QLattice, splitting: TwoAdicSplitting) -> CharFrame:
    if lattice.rank != 3:
        raise UserError(f"a character frame needs a rank-3 lattice, got rank {lattice.rank}")
    images, bits = [], []
    for b in lattice.basis:
        img = mat_mod(splitting.image(b), 4)
        y00, y01, y10, y11 = img
        if y01 % 2 or y10 % 2 or (y00 + y11) % 4:
            raise UserError(f"{b} does not reduce to the shape [[a, 2b], [2c, -a]] mod 4")
        images.append(img)
        bits.append((y00 % 2, (y01 // 2) % 2, (y10 // 2) % 2))
    return CharFrame(lattice, splitting, tuple(images), tuple(bits))  # type: ignore[arg-type]


def chi(frame: CharFrame, beta: Quaternion) -> tuple[int, int, int]:
    """``((-1)^(b+c), (-1)^(a+c), (-1)^(a+b))`` read from rho(beta) mod 4."""
    frame.coordinates(beta)
    y00, y01, y10, _ = mat_mod(frame.splitting.image(beta), 4)
    return chi_from_bits((y00 % 2, (y01 // 2) % 2, (y10 // 2) % 2))


def chi_fourier(frame: CharFrame, beta: Quaternion) -> tuple[int, int, int]:
    """chi_i as ``(-1)^<rho(beta), e_i/2>`` for the pairing ``tr(A * B^iota)``."""
    frame.coordinates(beta)
    x = mat_mod(frame.splitting.image(beta), 4)
    out = []
    for e in E_TRACE_ZERO:
        a, b, c, d = e
        adj = (d, -b, -c, a)
        tr = (x[0] * adj[0] + x[1] * adj[2] + x[2] * adj[1] + x[3] * adj[3]) % 4
        out.append((-1) ** (tr // 2))
    return tuple(out)  # type: ignore[return-value]


def eta(frame: CharFrame, beta: Quaternion, lift: int = 0) -> tuple[int, int, int]:
    """eta_i(beta) = (fixed order-4 children of v_i) - 1 for the action of ``alpha = beta + t``.

    ``t`` is the smallest non-negative integer with ``nrd(alpha)`` odd, shifted by ``2 * lift``.
    """
    frame.coordinates(beta)
    t = 0 if int(beta.nrd()) % 2 else 1
    t += 2 * lift
    action = TorsionAction(2, frame.splitting.image(beta + t))
    if action.det() % 2 == 0:
        raise UserError(f"auxiliary element {beta} + {t} has even norm")
    odd, even, vertical = _fixed_per_line(action.matrix, 2)
    return (odd - 1, even - 1, vertical - 1)


def _complement(i: int) -> tuple[int, int]:
    return tuple(j for j in range(3) if j != i)  # type: ignore[return-value]


def verify_triples_agree(class_set: ClassSet | None = None, config: RunConfig | None = None) -> CheckReport:
    """chi_i = eta_j * eta_k on every residue class of every S_E^0, with two lifts per beta."""
    from .class_graph import default_class_set

    class_set = class_set or default_class_set()
    tally = CaseTally("triples", {}, config)
    with check_span("verify.triples"):
        for idx, record in enumerate(class_set.classes):
            frame = record.char_frame
            for beta in frame.residue_classes():
                c = chi(frame, beta)
                e0, e1 = eta(frame, beta, 0), eta(frame, beta, 1)
                ok = e0 == e1 and all(c[i] == e0[j] * e0[k] for i in range(3) for j, k in [_complement(i)])
                ok = ok and chi_fourier(frame, beta) == c
                tally.record(ok, cls=f"E{idx + 1}", beta=list(beta.coeffs), chi=list(c), eta=list(e0), eta_lift=list(e1))
    return tally.report()


# ---------------------------------------------------------------------------
# Verification sweeps
# ---------------------------------------------------------------------------


def _level_for(n: int, config: RunConfig | None) -> int:
    slack = config.torsion_precision_slack if config is not None else DEFAULT_LEVEL_SLACK
    return n + slack


def _pushforward_cases(args: tuple[int, int, CharFrame, int]) -> list[tuple[bool, dict[str, Any]]]:
    idx, n, frame, level = args
    scale = 1 << (n - 2)
    out = []
    for beta in frame.residue_classes():
        expected = (1 << (2 * n - 3)) * sum(chi(frame, beta))
        for m in range(4):
            alpha = beta * scale + m
            got = fix_sharp(TorsionAction.from_quaternion(frame.splitting, alpha, level), n)
            out.append((got == expected, {"cls": f"E{idx + 1}", "m": m, "beta": list(beta.coeffs), "fix_sharp": got, "expected": expected}))
    return out


def verify_local_pushforward(
    n: int,
    class_set: ClassSet | None = None,
    class_index: int | None = None,
    config: RunConfig | None = None,
) -> CheckReport:
    """Fix#(m + 2^(N-2) beta, N) = 2^(2N-3) sum chi_i(beta) for every residue class of beta and
    m in 0..3; 32 cases per class."""
    from .class_graph import default_class_set

    if n < 2:
        raise UserError(f"verify_local_pushforward needs N >= 2, got {n}")
    class_set = class_set or default_class_set()
    level = _level_for(n, config)
    indices = range(len(class_set.classes)) if class_index is None else [class_index]
    tally = CaseTally("fix-prop", {"N": n, "class": None if class_index is None else f"E{class_index + 1}"}, config)
    logger.debug("verify_local_pushforward: N=%d level=%d", n, level)
    with check_span("verify.fix_prop", N=n):
        frames = [(i, n, class_set.classes[i].char_frame, level) for i in indices]
        for cases in parallel_map(_pushforward_cases, frames):
            for ok, case in cases:
                tally.record(ok, **case)
    return tally.report({"level": level})


def verify_closed_form_samples(
    n: int,
    class_set: ClassSet | None = None,
    config: RunConfig | None = None,
    samples: int = RANDOM_SUPPORT_SAMPLES,
) -> CheckReport:
    """Fix# equals its closed form, zero off the support shape, on random elements of the left
    orders, cycling through the classes."""
    from .class_graph import default_class_set

    if n < 2:
        raise UserError(f"verify_closed_form_samples needs N >= 2, got {n}")
    if samples < 1:
        raise UserError(f"samples must be positive, got {samples}")
    class_set = class_set or default_class_set()
    level = _level_for(n, config)
    tally = CaseTally("fix-closed-form", {"N": n, "samples": samples}, config)
    rng = np.random.default_rng(_RANDOM_SEED + n)
    off_support = 0
    with check_span("verify.fix_closed_form", N=n, samples=samples):
        for sample in range(samples):
            idx = sample % len(class_set.classes)
            record = class_set.classes[idx]
            coords = [int(v) for v in rng.integers(-50, 51, size=4)]
            alpha = record.left_order.element(coords)
            action = TorsionAction.from_quaternion(record.char_frame.splitting, alpha, level)
            got, expected = fix_sharp(action, n), fix_sharp_closed_form(action, n)
            off_support += support_bits(action.reduce(n).matrix, n) is None
            tally.record(got == expected, cls=f"E{idx + 1}", alpha=list(alpha.coeffs), fix_sharp=got, expected=expected)
    return tally.report({"level": level, "off_support": off_support})


def unit_fix_sum(record: Any, n: int, level: int) -> tuple[int, list[tuple[Quaternion, int]]]:
    """``(1/2) sum_{alpha in R_E, nrd(alpha) = 1} Fix#(alpha, N)`` and the per-unit values."""
    from .quat_core import short_vectors

    order: QLattice = record.left_order
    per_unit = []
    for vec, value in short_vectors(order, 1):
        if value != 1:
            continue
        alpha = order.element(vec)
        per_unit.append((alpha, fix_sharp(TorsionAction.from_quaternion(record.char_frame.splitting, alpha, level), n)))
    total = sum(v for _, v in per_unit)
    if total % 2:
        raise UserError(f"unit sum {total} is odd")
    return total // 2, per_unit


def mean_statistics(n: int, class_set: ClassSet | None = None, config: RunConfig | None = None) -> CheckReport:
    """Per-class unit sums of Fix# equal ``(3/8) 2^(2N)`` and ``|F_N| = sum_E value / w_E``."""
    from fractions import Fraction

    from .class_graph import default_class_set

    if n < 2:
        raise UserError(f"mean_statistics needs N >= 2, got {n}")
    class_set = class_set or default_class_set()
    level = _level_for(n, config)
    expected = 3 * (1 << (2 * n)) // 8
    tally = CaseTally("mean", {"N": n}, config)
    per_class = {}
    family = Fraction(0)
    with check_span("verify.mean", N=n):
        for idx, record in enumerate(class_set.classes):
            value, per_unit = unit_fix_sum(record, n, level)
            per_class[f"E{idx + 1}"] = value
            family += Fraction(value, record.w)
            tally.record(value == expected, cls=f"E{idx + 1}", value=value, expected=expected)
            for alpha, fs in per_unit:
                if alpha.x0 in (1, -1) and not any(alpha.coeffs[1:]):
                    continue
                tally.record(fs == 0, cls=f"E{idx + 1}", unit=list(alpha.coeffs), fix_sharp=fs)
        closed = Fraction(3, 8) * (1 << (2 * n)) * class_set.mass
        tally.record(family == closed and family.denominator == 1, family_size=family, closed_form=closed)
    return tally.report({"per_class": per_class, "family_size": family, "expected_per_class": expected})


def fix_table(n: int, class_set: ClassSet | None = None, config: RunConfig | None = None) -> dict[str, Any]:
    """Fix#(m + 2^(N-2) beta, N) for m in 0..3 on each residue class of each S_E^0, next to
    chi(beta) and eta(beta)."""
    from .class_graph import default_class_set

    if n < 2:
        raise UserError(f"fix_table needs N >= 2, got {n}")
    class_set = class_set or default_class_set()
    level = _level_for(n, config)
    scale = 1 << (n - 2)
    table: dict[str, Any] = {"N": n, "level": level, "classes": {}}
    for idx, record in enumerate(class_set.classes):
        frame = record.char_frame
        rows = []
        for beta in frame.residue_classes():
            rows.append(
                {
                    "beta": list(beta.coeffs),
                    "bits": list(frame.bits(beta)),
                    "chi": list(chi(frame, beta)),
                    "eta": list(eta(frame, beta)),
                    "fix_sharp": [
                        fix_sharp(TorsionAction.from_quaternion(frame.splitting, beta * scale + m, level), n)
                        for m in range(4)
                    ],
                }
            )
        table["classes"][f"E{idx + 1}"] = rows
    return table


__all__ = [
    "CharFrame",
    "CyclicPair",
    "LINES",
    "TorsionAction",
    "build_char_frame",
    "chi",
    "chi_fourier",
    "chi_from_bits",
    "cyclic_generators",
    "enumerate_pairs",
    "eta",
    "fix_count",
    "fix_sharp",
    "fix_sharp_closed_form",
    "fix_table",
    "lattice_pair_count",
    "mean_statistics",
    "support_bits",
    "unit_fix_sum",
    "verify_closed_form_samples",
    "verify_local_pushforward",
    "verify_triples_agree",
]
