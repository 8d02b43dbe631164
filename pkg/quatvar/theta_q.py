"""Exact q-expansions: the Jacobi theta series, the ternary measures mu_D, the seesaw coefficient
identity, the Shimura T(9) recurrence and the arithmetic-variance partial sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Any

import numpy as np
from sympy import legendre_symbol

from .algnum import AlgNum
from .constants import Pairing, variance_target
from .exceptions import UserError
from .logger import logger
from .quat_core import short_vectors, theta_counts
from .report import CaseTally, CheckReport
from .tracing import check_span
from .tree_fix import TorsionAction, fix_sharp
from .util._parallel import parallel_map

if TYPE_CHECKING:
    from .class_graph import ClassRecord, ClassSet, EigenFns
    from .run_config import RunConfig

Coefficient = int | Fraction | AlgNum

DEFAULT_SEESAW_NMAX = 99
DEFAULT_T9_DMAX = 450
MAX_VARIANCE_X = 10**7
VARIANCE_CHECKPOINTS = (10**3, 10**4, 10**5, 10**6, 10**7)
OFF_DIAGONAL_RATIO = 0.15
TARGET_RELATIVE_ERROR = 0.30
SLOW_VARIANCE_X = 10**6


@dataclass
class CoeffSeries:
    """A truncated q-expansion ``sum_{e <= max_exp} coeffs[e] q^e``. Missing exponents are zero."""

    coeffs: dict[int, Coefficient]
    max_exp: int
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.max_exp < 0:
            raise UserError(f"max_exp must be non-negative, got {self.max_exp}")
        bad = [e for e in self.coeffs if e < 0 or e > self.max_exp]
        if bad:
            raise UserError(f"exponents {bad[:5]} fall outside [0, {self.max_exp}]")
        self.coeffs = {e: c for e, c in self.coeffs.items() if c}

    def __getitem__(self, exponent: int) -> Coefficient:
        if exponent > self.max_exp:
            raise UserError(f"q^{exponent} is beyond the truncation q^{self.max_exp}")
        return self.coeffs.get(exponent, 0)

    def __add__(self, other: CoeffSeries) -> CoeffSeries:
        bound = min(self.max_exp, other.max_exp)
        out: dict[int, Coefficient] = {}
        for series in (self, other):
            for e, c in series.coeffs.items():
                if e <= bound:
                    out[e] = out.get(e, 0) + c
        return CoeffSeries(out, bound, {"sum": [self.meta, other.meta]})

    def cauchy(self, other: CoeffSeries) -> CoeffSeries:
        """Product of the two series, truncated at the smaller ``max_exp``."""
        bound = min(self.max_exp, other.max_exp)
        out: dict[int, Coefficient] = {}
        for e1, c1 in self.coeffs.items():
            if e1 > bound:
                continue
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if e <= bound:
                    out[e] = out.get(e, 0) + c1 * c2
        return CoeffSeries(out, bound, {"product": [self.meta, other.meta]})

    __mul__ = cauchy

    def scale(self, factor: Coefficient) -> CoeffSeries:
        return CoeffSeries({e: c * factor for e, c in self.coeffs.items()}, self.max_exp, dict(self.meta))

    def dilate(self, factor: int | Fraction) -> CoeffSeries:
        """``f(z) -> f(factor * z)``: exponent e moves to ``factor * e``.

        The known range grows to every exponent below ``factor * (max_exp + 1)``.
        """
        factor = Fraction(factor)
        if factor <= 0:
            raise UserError(f"dilation factor must be positive, got {factor}")
        out: dict[int, Coefficient] = {}
        for e, c in self.coeffs.items():
            moved = e * factor
            if moved.denominator != 1:
                raise UserError(f"q^{e} does not dilate to an integral exponent under {factor}")
            out[int(moved)] = c
        bound = math.ceil((self.max_exp + 1) * factor) - 1
        meta = dict(self.meta)
        meta["dilation"] = meta.get("dilation", Fraction(1)) * factor
        return CoeffSeries(out, bound, meta)

    def to_json_dict(self) -> dict[str, Any]:
        return {"max_exp": self.max_exp, "coeffs": {str(e): self.coeffs[e] for e in sorted(self.coeffs)}, "meta": self.meta}


def jacobi_coeffs(max_exp: int) -> CoeffSeries:
    """``sum_{m odd} q^(m^2)``: coefficient 2 at every odd square."""
    coeffs = {m * m: 2 for m in range(1, math.isqrt(max(max_exp, 0)) + 1, 2)}
    return CoeffSeries(coeffs, max_exp, {"series": "theta_odd"})


def full_theta_coeffs(max_exp: int) -> CoeffSeries:
    """``sum_{m in Z} q^(m^2)``."""
    coeffs: dict[int, Coefficient] = {0: 1}
    coeffs.update({m * m: 2 for m in range(1, math.isqrt(max(max_exp, 0)) + 1)})
    return CoeffSeries(coeffs, max_exp, {"series": "theta_all"})


# ---------------------------------------------------------------------------
# mu_D
# ---------------------------------------------------------------------------


@dataclass
class MuMeasure:
    """``mu[E][D] = sum_{beta in S_E^0, nrd beta = D} sum_i chi_i^E(beta)`` for every class."""

    dmax: int
    per_class: tuple[np.ndarray, ...]
    weights: tuple[int, ...]
    eig: EigenFns | None = None
    _exact: dict[int, CoeffSeries] = field(default_factory=dict, repr=False)

    def __getitem__(self, index: tuple[int, int]) -> int:
        cls, d = index
        return int(self.per_class[cls][d])

    def psi_series(self, k: int) -> CoeffSeries:
        """``mu_D(Psi_k) = sum_E Psi_k(E) mu[E][D] / w_E`` exactly, with unnormalised Psi."""
        if self.eig is None:
            raise UserError("MuMeasure was built without eigenfunctions")
        if k not in self._exact:
            psi = self.eig.psi[k]
            table = np.stack(self.per_class)
            coeffs: dict[int, Coefficient] = {}
            for d in np.flatnonzero(np.any(table != 0, axis=0)):
                coeffs[int(d)] = sum(
                    (psi[e] * Fraction(int(table[e, d]), w) for e, w in enumerate(self.weights)),
                    AlgNum(0),
                )
            self._exact[k] = CoeffSeries(coeffs, self.dmax, {"series": "mu", "psi": k + 1})
        return self._exact[k]

    def psi_float(self, k: int) -> np.ndarray:
        """``mu_D(Psi_k)`` for ``0 <= D <= dmax`` with Psi_k normalised to unit weighted norm."""
        if self.eig is None:
            raise UserError("MuMeasure was built without eigenfunctions")
        psi = self.eig.normalized(k)
        out = np.zeros(self.dmax + 1, dtype=np.float64)
        for e, w in enumerate(self.weights):
            out += (psi[e] / w) * self.per_class[e].astype(np.float64)
        return out

    def csv_rows(self, k: int) -> list[list[Any]]:
        """``D, mu[E1], mu[E2], mu[E3], a, b`` with ``mu_D(Psi_k) = a + b sqrt 5``."""
        series = self.psi_series(k)
        rows = []
        for d in range(self.dmax + 1):
            value = AlgNum.coerce(series[d])
            rows.append([d, *(int(t[d]) for t in self.per_class), str(value.a), str(value.b)])
        return rows


def _class_mu(args: tuple[ClassRecord, int]) -> np.ndarray:
    record, dmax = args
    return theta_counts(record.ternary_gram, dmax, record.char_frame.chi_sum_weights)


def mu_measure(dmax: int, class_set: ClassSet | None = None, eig: EigenFns | None = None) -> MuMeasure:
    from .class_graph import default_class_set, eigenfunctions

    if dmax < 0:
        raise UserError(f"dmax must be non-negative, got {dmax}")
    class_set = class_set or default_class_set()
    eig = eig or eigenfunctions(class_set)
    logger.debug("mu_measure: dmax=%d", dmax)
    with check_span("theta.mu_measure", dmax=dmax):
        tables = parallel_map(_class_mu, [(record, dmax) for record in class_set.classes])
    return MuMeasure(dmax, tuple(tables), class_set.weights, eig)


def h_series(mu: MuMeasure, k: int, n: int) -> CoeffSeries:
    """The mu-series of Psi_k at exponents ``2^(2N-4) D``: h_k(16z) dilated to h_k(2^(2N) z)."""
    if n < 2:
        raise UserError(f"h_series needs N >= 2, got {n}")
    return mu.psi_series(k).dilate(Fraction(1 << (2 * n), 16))


# ---------------------------------------------------------------------------
# Seesaw identity
# ---------------------------------------------------------------------------


def _orbital_sums(args: tuple[ClassRecord, int, int, int]) -> dict[int, int]:
    record, n, level, n_max = args
    splitting = record.char_frame.splitting
    order = record.left_order
    out: dict[int, int] = {}
    for vec, value in short_vectors(order, n_max):
        if value.denominator != 1 or value % 2 == 0:
            continue
        alpha = order.element(vec)
        fs = fix_sharp(TorsionAction.from_quaternion(splitting, alpha, level), n)
        if fs:
            out[int(value)] = out.get(int(value), 0) + fs
    return out


def orbital_side(
    n: int, n_max: int, level: int, class_set: ClassSet, eig: EigenFns
) -> tuple[list[dict[int, int]], tuple[dict[int, AlgNum], dict[int, AlgNum]]]:
    """Per-class ``sum_{alpha in R_E, nrd = n} Fix#(alpha, N)`` for odd n, and their
    ``Psi_k(E) / w_E`` combinations."""
    per_class = parallel_map(_orbital_sums, [(r, n, level, n_max) for r in class_set.classes])
    combined: tuple[dict[int, AlgNum], dict[int, AlgNum]] = ({}, {})
    for k in range(2):
        for m in range(1, n_max + 1, 2):
            combined[k][m] = sum(
                (eig.psi[k][e] * Fraction(per_class[e].get(m, 0), r.w) for e, r in enumerate(class_set.classes)),
                AlgNum(0),
            )
    return per_class, combined


def theta_side(mu: MuMeasure, k: int, n: int, n_max: int, *, odd_only: bool = False) -> CoeffSeries:
    """``sum_{m, D : m^2 + 2^(2N-4) D = n} mu_D(Psi_k)``, m over Z or over odd m only."""
    theta = jacobi_coeffs(n_max) if odd_only else full_theta_coeffs(n_max)
    return theta.cauchy(h_series(mu, k, n))


def seesaw_check(
    n: int,
    n_max: int = DEFAULT_SEESAW_NMAX,
    class_set: ClassSet | None = None,
    eig: EigenFns | None = None,
    mu: MuMeasure | None = None,
    config: RunConfig | None = None,
) -> CheckReport:
    """Tree side against theta side for both eigenfunctions and every odd n <= n_max.

    Both sides must be proportional with one scalar ``s_N`` shared by every n and both
    eigenfunctions. The scalar found is set against the pushforward constant ``2^(2N-3)`` and the
    closed form ``2^(2N)`` in the report data.
    """
    from .class_graph import default_class_set, eigenfunctions

    if n not in (2, 3):
        raise UserError(f"seesaw_check supports N in {{2, 3}}, got {n}")
    if n_max < 1 or n_max % 2 == 0:
        raise UserError(f"n_max must be a positive odd integer, got {n_max}")
    class_set = class_set or default_class_set()
    eig = eig or eigenfunctions(class_set)
    slack = config.torsion_precision_slack if config is not None else 2
    level = n + slack
    dmax = n_max >> (2 * n - 4)
    if mu is None or mu.dmax < dmax:
        mu = mu_measure(dmax, class_set, eig)
    pushforward_scalar = Fraction(1 << (2 * n - 3))
    closed_form_scalar = Fraction(1 << (2 * n))
    tally = CaseTally("seesaw", {"N": n, "n_max": n_max}, config)
    logger.debug("seesaw_check: N=%d n_max=%d level=%d", n, n_max, level)

    with check_span("verify.seesaw", N=n, n_max=n_max):
        composite = h_series(mu, 0, n)
        direct = CoeffSeries(
            {d << (2 * n - 4): c for d, c in mu.psi_series(0).coeffs.items()},
            ((mu.dmax + 1) << (2 * n - 4)) - 1,
        )
        tally.record(composite.coeffs == direct.coeffs, identity="dilation bookkeeping", N=n)

        _, lhs = orbital_side(n, n_max, level, class_set, eig)
        _, lhs_higher = orbital_side(n, n_max, level + 1, class_set, eig)
        for k in range(2):
            for m in lhs[k]:
                tally.record(lhs[k][m] == lhs_higher[k][m], identity="level sufficiency", k=k + 1, n=m, level=level)

        reference: AlgNum | None = None
        scalars: list[AlgNum] = []
        both_nonzero = 0
        odd_m_differs: list[int] = []
        per_k: dict[str, Any] = {}
        for k in range(2):
            rhs = theta_side(mu, k, n, n_max)
            rhs_odd = theta_side(mu, k, n, n_max, odd_only=True)
            rows = []
            for m in range(1, n_max + 1, 2):
                left, right = lhs[k][m], AlgNum.coerce(rhs[m])
                right_odd = AlgNum.coerce(rhs_odd[m])
                if right_odd != right:
                    odd_m_differs.append(m)
                if n >= 3:
                    # 2^(2N-4) D is even, so only odd m reach an odd n
                    tally.record(right_odd == right, identity="odd m only", k=k + 1, n=m)
                if right:
                    ratio = left / right
                    if reference is None:
                        reference = ratio
                    if ratio not in scalars:
                        scalars.append(ratio)
                    ok = ratio == reference
                    both_nonzero += bool(left)
                else:
                    ok = not left
                tally.record(ok, k=k + 1, n=m, lhs=left, rhs=right, scalar=reference)
                rows.append({"n": m, "lhs": left, "rhs": right, "rhs_odd_m": right_odd})
            per_k[f"Psi_{k + 1}"] = rows
        tally.record(len(scalars) <= 1, identity="single scalar", scalars=scalars)

    s_n = reference.a if reference is not None and reference.is_rational() else reference
    data = {
        "level": level,
        "s_N": s_n,
        "theta_side": "m over Z: the tree pushforward weights every m in Z_2, even m included",
        "s_N_pushforward": pushforward_scalar,
        "s_N_matches_pushforward": isinstance(s_n, Fraction) and s_n == pushforward_scalar,
        "s_N_closed_form": closed_form_scalar,
        "bookkeeping_ratio": closed_form_scalar / s_n if isinstance(s_n, Fraction) and s_n else None,
        "odd_m_differs_at": sorted(set(odd_m_differs)),
        "n_with_both_sides_nonzero": both_nonzero,
        "coefficients": per_k,
    }
    return tally.report(data, inconclusive=both_nonzero == 0)


# ---------------------------------------------------------------------------
# Shimura T(9)
# ---------------------------------------------------------------------------


def _minus_d_mod_3(d: int) -> int:
    return int(legendre_symbol((-d) % 3, 3)) if d % 3 else 0


def _t9_residual(series: CoeffSeries, d: int, sign: int, c: AlgNum) -> AlgNum:
    a = AlgNum.coerce
    tail = a(series[d // 9]) * 3 if d % 9 == 0 else AlgNum(0)
    return a(series[9 * d]) + a(series[d]) * (sign * _minus_d_mod_3(d)) + tail - c * a(series[d])


def _fit_t9(series: CoeffSeries, d_top: int) -> tuple[int, AlgNum, int | None] | None:
    """Fit the twist sign and eigenvalue on the first D with a nonzero coefficient, then return
    ``(sign, c, first violated D or None)`` for the sign that fails last."""
    start = next((d for d in range(1, d_top + 1) if series[d]), None)
    if start is None:
        return None
    best: tuple[int, AlgNum, int | None] | None = None
    for sign in (1, -1):
        a_start = AlgNum.coerce(series[start])
        c = _t9_residual(series, start, sign, AlgNum(0)) / a_start
        violated = next((d for d in range(1, d_top + 1) if _t9_residual(series, d, sign, c)), None)
        candidate = (sign, c, violated)
        if violated is None:
            return candidate
        if best is None or (best[2] is not None and violated > best[2]):
            best = candidate
    return best


def shimura_t9_check(
    dmax: int = DEFAULT_T9_DMAX,
    k: int | None = None,
    class_set: ClassSet | None = None,
    eig: EigenFns | None = None,
    mu: MuMeasure | None = None,
    config: RunConfig | None = None,
) -> CheckReport:
    """``a(9D) + sign (-D|3) a(D) + 3 a(D/9) = c a(D)`` for all ``D <= dmax/9``, with
    ``c / a_3(Psi_k)`` rational and the same for both eigenfunctions."""
    from .class_graph import default_class_set, eigenfunctions

    if dmax < DEFAULT_T9_DMAX:
        raise UserError(f"shimura_t9_check needs dmax >= {DEFAULT_T9_DMAX}, got {dmax}")
    class_set = class_set or default_class_set()
    eig = eig or eigenfunctions(class_set)
    if mu is None or mu.dmax < dmax:
        mu = mu_measure(dmax, class_set, eig)
    ks = range(2) if k is None else [k - 1]
    d_top = dmax // 9
    tally = CaseTally("t9", {"dmax": dmax, "k": k}, config)
    fits: dict[str, Any] = {}
    ratios: list[AlgNum] = []
    with check_span("verify.t9", dmax=dmax):
        for kk in ks:
            series = mu.psi_series(kk)
            fit = _fit_t9(series, d_top)
            if fit is None:
                tally.record(True, k=kk + 1, note="all coefficients vanish")
                continue
            sign, c, violated = fit
            tally.record(violated is None, k=kk + 1, sign=sign, c=c, first_violated_D=violated)
            ratio = c / eig.a(kk, 3)
            tally.record(ratio.is_rational(), k=kk + 1, c=c, a3=eig.a(kk, 3), ratio=ratio)
            ratios.append(ratio)
            fits[f"Psi_{kk + 1}"] = {"sign": sign, "c": c, "c_over_a3": ratio, "checked_D": d_top}
        if len(ratios) > 1:
            tally.record(len(set(ratios)) == 1, identity="c / a_3 independent of k", ratios=ratios)
    return tally.report(fits)


# ---------------------------------------------------------------------------
# Arithmetic variance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceSeries:
    """Partial sums ``S_kl(x) = (1/x) sum_{0 < D < x} mu_D(Psi_k) mu_D(Psi_l) / sqrt(D)``."""

    k: int
    l: int
    partial_sums: dict[int, float]
    targets: dict[str, float]
    """Limit under each L-value pairing."""

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "k": self.k + 1,
            "l": self.l + 1,
            "partial_sums": {str(x): v for x, v in self.partial_sums.items()},
            "targets": self.targets,
        }


def checkpoints(x_max: int) -> list[int]:
    points = [x for x in VARIANCE_CHECKPOINTS if x <= x_max]
    if not points or points[-1] != x_max:
        points.append(x_max)
    return points


def arith_variance(x_max: int, k: int, l: int, mu: MuMeasure | None = None) -> VarianceSeries:
    """Float partial sums at logarithmic checkpoints; ``k`` and ``l`` are 0-based."""
    if x_max < 2 or x_max > MAX_VARIANCE_X:
        raise UserError(f"x_max must lie in [2, {MAX_VARIANCE_X}], got {x_max}")
    if mu is None or mu.dmax < x_max - 1:
        mu = mu_measure(x_max - 1)
    fk, fl = mu.psi_float(k)[:x_max], mu.psi_float(l)[:x_max]
    d = np.arange(x_max, dtype=np.float64)
    terms = np.zeros(x_max, dtype=np.float64)
    terms[1:] = fk[1:] * fl[1:] / np.sqrt(d[1:])
    running = np.cumsum(terms)
    sums = {x: float(running[x - 1] / x) for x in checkpoints(x_max)}
    pairings: tuple[Pairing, Pairing] = ("direct", "swapped")
    targets = {p: variance_target(k, l, p) for p in pairings}
    return VarianceSeries(k, l, sums, targets)


def _resolve_pairing(s11: float, s22: float, targets: tuple[VarianceSeries, VarianceSeries]) -> tuple[Pairing, dict[str, float]]:
    errors: dict[str, float] = {}
    for pairing in ("direct", "swapped"):
        errors[pairing] = sum(
            abs(s - series.targets[pairing]) / series.targets[pairing] for s, series in zip((s11, s22), targets)
        )
    best: Pairing = "direct" if errors["direct"] <= errors["swapped"] else "swapped"
    return best, errors


def arith_variance_report(
    x_max: int,
    class_set: ClassSet | None = None,
    eig: EigenFns | None = None,
    mu: MuMeasure | None = None,
    config: RunConfig | None = None,
) -> CheckReport:
    """Positivity, near-diagonality and, from ``x = 10^6``, closeness to the limit under the
    empirically resolved eigenvalue/L-value pairing."""
    from .class_graph import default_class_set, eigenfunctions

    class_set = class_set or default_class_set()
    eig = eig or eigenfunctions(class_set)
    if mu is None or mu.dmax < x_max - 1:
        mu = mu_measure(x_max - 1, class_set, eig)
    tally = CaseTally("arithvar", {"x_max": x_max}, config)
    logger.debug("arith_variance_report: x_max=%d", x_max)
    with check_span("verify.arithvar", x_max=x_max):
        s11 = arith_variance(x_max, 0, 0, mu)
        s22 = arith_variance(x_max, 1, 1, mu)
        s12 = arith_variance(x_max, 0, 1, mu)
        for series in (s11, s22):
            for x, value in series.partial_sums.items():
                if x >= 1000:
                    tally.record(value > 0, identity="positivity", k=series.k + 1, x=x, S=value)
        a, b, off = s11.partial_sums[x_max], s22.partial_sums[x_max], s12.partial_sums[x_max]
        tally.record(
            abs(off) <= OFF_DIAGONAL_RATIO * math.sqrt(a * b), identity="off-diagonal", x=x_max, S12=off, S11=a, S22=b
        )
        pairing, errors = _resolve_pairing(a, b, (s11, s22))
        data: dict[str, Any] = {
            "series": [s11, s22, s12],
            "pairing": pairing,
            "pairing_errors": errors,
        }
        if x_max >= SLOW_VARIANCE_X:
            for series, value in ((s11, a), (s22, b)):
                target = series.targets[pairing]
                rel = abs(value - target) / target
                tally.record(rel <= TARGET_RELATIVE_ERROR, identity="limit", k=series.k + 1, S=value, target=target, relative_error=rel)
            early = 10**5
            early_pairing, _ = _resolve_pairing(s11.partial_sums[early], s22.partial_sums[early], (s11, s22))
            tally.record(early_pairing == pairing, identity="pairing stability", early=early_pairing, late=pairing)
            data["pairing_at_1e5"] = early_pairing
    return tally.report(data)


__all__ = [
    "CoeffSeries",
    "MuMeasure",
    "VarianceSeries",
    "arith_variance",
    "arith_variance_report",
    "checkpoints",
    "full_theta_coeffs",
    "h_series",
    "jacobi_coeffs",
    "mu_measure",
    "orbital_side",
    "seesaw_check",
    "shimura_t9_check",
    "theta_side",
]
