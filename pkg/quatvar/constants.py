"""Closed-form constants: kappa_0, kappa_1, the local integrals at infinity and 23, the L-value
registry, P(x) and the limiting variance matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Literal

import sympy
from sympy import Rational, gamma, pi, sqrt

from .algnum import AlgNum
from .exceptions import UserError
from .report import CaseTally, CheckReport

if TYPE_CHECKING:
    from .run_config import RunConfig

Pairing = Literal["direct", "swapped"]

THETA_NORM_SQ = Rational(1, 2)
I_INF = Rational(1, 4)
I_23 = Rational(2, 23)

ZETA_S_2 = (pi**2 / 6) * Rational(3, 4) * Rational(528, 529)
"""zeta(2) with the Euler factors at 2 and 23 removed."""

ZETA2_AT_1 = Rational(2)
ZETA23_AT_1 = Rational(23, 22)
ZETA2_AT_2 = Rational(4, 3)

KAPPA1 = Rational(23, 96) / pi**4
KAPPA0_SQ = 24 * pi**4 / 23

LMFDB_L: dict[str, float] = {"0.552": 0.552, "0.450": 0.450}
"""Central values L(Psi, 1/2) of the two level-23 weight-2 newforms, to three decimals."""

A2_BRANCHES = (AlgNum(Fraction(-1, 2), Fraction(1, 2)), AlgNum(Fraction(-1, 2), Fraction(-1, 2)))
"""T_2 eigenvalues of Psi_1 and Psi_2."""

VARIANCE_TOLERANCE = 1e-12
RALLIS_TOLERANCE = 1e-9

_x = sympy.Symbol("x", real=True)


def _sym(value: AlgNum) -> sympy.Expr:
    return Rational(value.a.numerator, value.a.denominator) + Rational(value.b.numerator, value.b.denominator) * sqrt(5)


def P(x: float) -> float:
    """pi^2 (15 - 4 sqrt(2) x) / 69."""
    return math.pi**2 * (15 - 4 * math.sqrt(2) * x) / 69


def P_symbolic(x: sympy.Expr = _x) -> sympy.Expr:
    return pi**2 * (15 - 4 * sqrt(2) * x) / 69


def lambda2(k: int) -> sympy.Expr:
    """lambda_{Psi_k}(2) = a_2 / sqrt(2)."""
    return _sym(A2_BRANCHES[k]) / sqrt(2)


def _l_value(k: int, pairing: Pairing | None) -> float:
    if pairing is None:
        raise UserError("the eigenvalue/L-value pairing is unresolved; pass pairing='direct' or 'swapped'")
    if pairing not in ("direct", "swapped"):
        raise UserError(f"unknown pairing {pairing!r}")
    direct = (LMFDB_L["0.552"], LMFDB_L["0.450"])
    return direct[k] if pairing == "direct" else direct[1 - k]


def v_infinity(k: int, l: int, pairing: Pairing | None) -> float:
    """Entry (k, l) of the limiting variance matrix: ``P(lambda_k(2)) L(Psi_k, 1/2)`` on the
    diagonal, 0 off it."""
    if k != l:
        return 0.0
    return P(float(lambda2(k))) * _l_value(k, pairing)


def variance_normaliser() -> float:
    """kappa_0^2 (4 pi)^(-3/2) Gamma(3/2)."""
    return float(KAPPA0_SQ * (4 * pi) ** Rational(-3, 2) * gamma(Rational(3, 2)))


def variance_target(k: int, l: int, pairing: Pairing | None) -> float:
    return 2 * v_infinity(k, l, pairing) / variance_normaliser()


def kappa_identity() -> bool:
    """kappa_1 (4 pi)^2 zeta^(S)(2) zeta_2(1) zeta_23(1) = 1, symbolically."""
    return sympy.simplify(KAPPA1 * (4 * pi) ** 2 * ZETA_S_2 * ZETA2_AT_1 * ZETA23_AT_1 - 1) == 0


@dataclass(frozen=True)
class ConstantsTable:
    kappa1: float
    kappa0: float
    kappa1_factors: list[str]
    kappa0_factors: list[str]
    theta_norm_sq: float = float(THETA_NORM_SQ)
    I_inf: float = float(I_INF)
    I_23: float = float(I_23)
    lmfdb_L: dict[str, float] = field(default_factory=lambda: dict(LMFDB_L))
    lambda2: dict[str, str] = field(default_factory=dict)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "kappa1": self.kappa1,
            "kappa0": self.kappa0,
            "kappa1_factors": self.kappa1_factors,
            "kappa0_factors": self.kappa0_factors,
            "theta_norm_sq": self.theta_norm_sq,
            "I_inf": self.I_inf,
            "I_23": self.I_23,
            "lmfdb_L": self.lmfdb_L,
            "lambda2": self.lambda2,
            "P": str(P_symbolic()),
            "kappa1_identity": kappa_identity(),
        }


def constants_table() -> ConstantsTable:
    kappa1_factors = [Rational(23, 96), pi**-4]
    kappa0_factors = [Rational(24, 23) ** Rational(1, 2), pi**2]
    return ConstantsTable(
        kappa1=float(KAPPA1),
        kappa0=float(sqrt(KAPPA0_SQ)),
        kappa1_factors=[str(f) for f in kappa1_factors],
        kappa0_factors=[str(f) for f in kappa0_factors],
        lambda2={f"Psi_{k + 1}": str(sympy.nsimplify(lambda2(k))) for k in range(2)},
    )


def _product(factors: list[sympy.Expr]) -> float:
    out = 1.0
    for f in factors:
        out *= float(f)
    return out


def constant_product(x: sympy.Expr = _x) -> sympy.Expr:
    """``2 (4 pi)^2 I_inf * I_23 * C_2(x)`` with the 2-adic factor
    ``C_2 = 2^-6 / (zeta_2(1)^-2 zeta_2(2)^-1) * (2 / L_2 + 3/4)`` and ``L_2 = 1/(1 - x/sqrt 2 + 1/2)``."""
    lv = 1 / (1 - x / sqrt(2) + Rational(1, 2))
    c0 = 2 * (4 * pi) ** 2 * I_INF
    c2 = Rational(1, 64) / (Rational(1, 4) * Rational(3, 4)) * (2 / lv + Rational(3, 4))
    return c0 * I_23 * c2


def rallis_constant_check(config: RunConfig | None = None) -> CheckReport:
    """The constant in front of L(Psi, 1/2) assembled from the local factors equals P(lambda_Psi(2))."""
    from .finite_fourier import local_integral_correlations, local_l_factor

    tally = CaseTally("rallis", {}, config)
    difference = sympy.expand(constant_product() - P_symbolic())
    coeffs = sympy.Poly(difference, _x).all_coeffs()
    tally.record(all(sympy.simplify(c) == 0 for c in coeffs), identity="affine coefficients of C(x) - P(x)")
    for value in (-2.0, -1.0, 0.0, 0.5, 2.0):
        got = float(constant_product().subs(_x, value))
        tally.record(abs(got - P(value)) < VARIANCE_TOLERANCE, identity="pointwise", x=value, product=got, P=P(value))

    data: dict[str, Any] = {}
    c0 = float(2 * (4 * pi) ** 2 * I_INF)
    for k, a2 in enumerate(A2_BRANCHES):
        corr = local_integral_correlations(a2)
        l2 = local_l_factor(a2)
        c2 = float(ZETA2_AT_1**2 * ZETA2_AT_2) * corr / (4 * l2)
        got = c0 * float(I_23) * c2
        expected = P(float(lambda2(k)))
        tally.record(abs(got - expected) < RALLIS_TOLERANCE, identity="local integral route", k=k + 1, product=got, P=expected)
        data[f"Psi_{k + 1}"] = {"I_2": corr, "L_2": l2, "C": got, "P": expected}

    factors = _product([Rational(23, 96), pi**-4])
    tally.record(abs(factors - float(KAPPA1)) < VARIANCE_TOLERANCE, identity="kappa1 factor list", value=factors)
    tally.record(kappa_identity(), identity="kappa1 (4 pi)^2 zeta^(S)(2) zeta_2(1) zeta_23(1) = 1")
    tally.record(sympy.simplify(KAPPA1 - 1 / (4 * KAPPA0_SQ)) == 0, identity="kappa1 = kappa0^-2 / 4")
    return tally.report(data)


__all__ = [
    "A2_BRANCHES",
    "ConstantsTable",
    "I_23",
    "I_INF",
    "KAPPA0_SQ",
    "KAPPA1",
    "LMFDB_L",
    "P",
    "P_symbolic",
    "Pairing",
    "THETA_NORM_SQ",
    "constant_product",
    "constants_table",
    "kappa_identity",
    "lambda2",
    "rallis_constant_check",
    "v_infinity",
    "variance_normaliser",
    "variance_target",
]
