from __future__ import annotations

import math

import pytest
import sympy

from quatvar.constants import (
    A2_BRANCHES,
    P,
    P_symbolic,
    constant_product,
    constants_table,
    kappa_identity,
    lambda2,
    rallis_constant_check,
    v_infinity,
    variance_normaliser,
    variance_target,
)
from quatvar.exceptions import UserError


def test_p_values() -> None:
    assert P(0) == pytest.approx(15 * math.pi**2 / 69)
    assert P(float(lambda2(0))) == pytest.approx(1.792, abs=1e-3)
    assert P(float(lambda2(1))) == pytest.approx(3.071, abs=1e-3)


def test_lambda2_matches_the_branches() -> None:
    for k, a2 in enumerate(A2_BRANCHES):
        assert float(lambda2(k)) == pytest.approx(float(a2) / math.sqrt(2))


def test_constant_product_is_p() -> None:
    assert sympy.simplify(constant_product() - P_symbolic()) == 0


def test_kappa_identity() -> None:
    assert kappa_identity()


def test_v_infinity() -> None:
    assert v_infinity(0, 1, "direct") == 0.0
    assert v_infinity(1, 0, None) == 0.0
    assert v_infinity(0, 0, "direct") == pytest.approx(P(float(lambda2(0))) * 0.552)
    assert v_infinity(0, 0, "swapped") == pytest.approx(P(float(lambda2(0))) * 0.450)
    for k in range(2):
        assert variance_target(k, k, "direct") > 0


@pytest.mark.parametrize("pairing", [None, "sideways"])
def test_v_infinity_needs_a_pairing(pairing: str | None) -> None:
    with pytest.raises(UserError):
        v_infinity(0, 0, pairing)  # type: ignore[arg-type]


def test_variance_normaliser() -> None:
    kappa0_sq = 24 * math.pi**4 / 23
    expected = kappa0_sq * (4 * math.pi) ** -1.5 * math.sqrt(math.pi) / 2
    assert variance_normaliser() == pytest.approx(expected)


def test_rallis_check_passes() -> None:
    report = rallis_constant_check()
    assert report.passed
    assert set(report.data) == {"Psi_1", "Psi_2"}
    for k in range(2):
        assert report.data[f"Psi_{k + 1}"]["C"] == pytest.approx(P(float(lambda2(k))), abs=1e-9)


def test_constants_table() -> None:
    table = constants_table()
    assert table.kappa1 == pytest.approx(23 / (96 * math.pi**4))
    assert table.kappa0 == pytest.approx(math.sqrt(24 / 23) * math.pi**2)
    payload = table.to_json_dict()
    assert payload["theta_norm_sq"] == 0.5
    assert payload["I_inf"] == 0.25
    assert payload["I_23"] == pytest.approx(2 / 23)
    assert payload["kappa1_identity"] is True
    assert set(payload["lambda2"]) == {"Psi_1", "Psi_2"}
