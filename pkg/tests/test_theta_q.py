from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from quatvar.algnum import AlgNum
from quatvar.class_graph import ClassSet, EigenFns
from quatvar.exceptions import UserError
from quatvar.theta_q import (
    CoeffSeries,
    MuMeasure,
    arith_variance,
    arith_variance_report,
    checkpoints,
    full_theta_coeffs,
    h_series,
    jacobi_coeffs,
    seesaw_check,
    shimura_t9_check,
    theta_side,
)
from quatvar.tree_fix import chi


def test_jacobi_coefficients() -> None:
    series = jacobi_coeffs(50)
    assert {e: series[e] for e in range(51) if series[e]} == {1: 2, 9: 2, 25: 2, 49: 2}
    full = full_theta_coeffs(16)
    assert [full[e] for e in range(17) if full[e]] == [1, 2, 2, 2, 2]


def test_truncation_is_enforced() -> None:
    with pytest.raises(UserError):
        jacobi_coeffs(10)[11]
    with pytest.raises(UserError):
        CoeffSeries({12: 1}, 10)


def test_cauchy_product() -> None:
    a, b = full_theta_coeffs(30), jacobi_coeffs(20)
    ab, ba = a * b, b.cauchy(a)
    assert ab.max_exp == 20
    assert ab.coeffs == ba.coeffs
    # r_2(n) for sum of two squares
    square = full_theta_coeffs(25) * full_theta_coeffs(25)
    assert [square[n] for n in (0, 1, 2, 3, 4, 5, 25)] == [1, 4, 4, 0, 4, 8, 12]


def test_addition_and_scaling() -> None:
    total = jacobi_coeffs(10) + full_theta_coeffs(12).scale(3)
    assert total.max_exp == 10
    assert total[0] == 3 and total[1] == 8 and total[4] == 6 and total[9] == 8


def test_dilation() -> None:
    series = CoeffSeries({1: 5, 3: 7}, 3)
    wide = series.dilate(4)
    assert wide.max_exp == 15
    assert wide[4] == 5 and wide[12] == 7 and wide[13] == 0
    assert series.dilate(Fraction(1, 1)).coeffs == series.coeffs
    with pytest.raises(UserError):
        series.dilate(Fraction(1, 2))
    with pytest.raises(UserError):
        series.dilate(0)


def test_mu_at_zero(mu: MuMeasure) -> None:
    for cls in range(3):
        assert mu[cls, 0] == 3
    for k in range(2):
        assert mu.psi_series(k)[0] == 0


def _naive_mu(class_set: ClassSet, cls: int, dmax: int) -> list[int]:
    record = class_set.classes[cls]
    gram = np.array(record.ternary_gram, dtype=np.float64)
    inverse = np.linalg.inv(gram)
    bounds = [math.isqrt(int(dmax * inverse[i, i])) + 1 for i in range(3)]
    counts = [0] * (dmax + 1)
    frame = record.char_frame
    for vec in itertools.product(*(range(-b, b + 1) for b in bounds)):
        beta = frame.lattice.element(vec)
        value = beta.nrd()
        if value <= dmax:
            counts[int(value)] += sum(chi(frame, beta))
    return counts


@pytest.mark.parametrize("cls", [0, 1, 2])
def test_mu_matches_naive_enumeration(class_set: ClassSet, mu: MuMeasure, cls: int) -> None:
    naive = _naive_mu(class_set, cls, 120)
    assert [mu[cls, d] for d in range(121)] == naive


def test_psi_series_matches_float_measure(mu: MuMeasure, eig: EigenFns) -> None:
    for k in range(2):
        exact = mu.psi_series(k)
        scale = math.sqrt(float(eig.norm_sq[k]))
        floats = mu.psi_float(k)
        for d in range(1, 200):
            assert floats[d] == pytest.approx(float(AlgNum.coerce(exact[d])) / scale, rel=1e-9, abs=1e-9)


def test_csv_rows(mu: MuMeasure) -> None:
    rows = mu.csv_rows(0)
    assert len(rows) == mu.dmax + 1
    assert rows[0][:4] == [0, 3, 3, 3]
    for row in rows[:50]:
        value = AlgNum(row[4], row[5])
        assert value == AlgNum.coerce(mu.psi_series(0)[row[0]])


def test_h_series_dilates(mu: MuMeasure) -> None:
    base = mu.psi_series(0)
    assert h_series(mu, 0, 2).coeffs == base.coeffs
    wide = h_series(mu, 0, 3)
    for d, c in base.coeffs.items():
        assert wide[4 * d] == c
    with pytest.raises(UserError):
        h_series(mu, 0, 1)


def test_theta_side_odd_only_drops_even_m(mu: MuMeasure) -> None:
    full = theta_side(mu, 0, 2, 49)
    odd = theta_side(mu, 0, 2, 49, odd_only=True)
    assert full.max_exp == odd.max_exp == 49
    assert full[0] == 0


def test_seesaw_level_two(class_set: ClassSet, eig: EigenFns, mu: MuMeasure) -> None:
    report = seesaw_check(2, 49, class_set, eig, mu)
    assert report.status == "pass"
    assert report.data["s_N"] == "2/1"
    assert report.data["s_N_matches_pushforward"] is True
    assert report.data["bookkeeping_ratio"] == "8/1"
    assert all(n % 4 == 3 for n in report.data["odd_m_differs_at"])


@pytest.mark.slow
def test_seesaw_level_three(class_set: ClassSet, eig: EigenFns, mu: MuMeasure) -> None:
    report = seesaw_check(3, 99, class_set, eig, mu)
    assert report.status == "pass"
    assert report.data["s_N"] == "8/1"
    assert report.data["odd_m_differs_at"] == []


def test_seesaw_argument_checks(class_set: ClassSet, eig: EigenFns, mu: MuMeasure) -> None:
    with pytest.raises(UserError):
        seesaw_check(4, 99, class_set, eig, mu)
    with pytest.raises(UserError):
        seesaw_check(2, 98, class_set, eig, mu)


def test_shimura_t9(class_set: ClassSet, eig: EigenFns, mu: MuMeasure) -> None:
    report = shimura_t9_check(450, class_set=class_set, eig=eig, mu=mu)
    assert report.passed
    ratios = {report.data[f"Psi_{k}"]["c_over_a3"]["b"] for k in (1, 2)}
    assert ratios == {"0/1"}


def test_shimura_t9_needs_enough_coefficients(mu: MuMeasure) -> None:
    with pytest.raises(UserError):
        shimura_t9_check(449, mu=mu)


def test_checkpoints() -> None:
    assert checkpoints(1000) == [1000]
    assert checkpoints(5000) == [1000, 5000]
    assert checkpoints(100) == [100]


def test_arith_variance(mu: MuMeasure) -> None:
    series = arith_variance(451, 0, 0, mu)
    assert list(series.partial_sums) == [451]
    assert series.partial_sums[451] > 0
    assert set(series.targets) == {"direct", "swapped"}
    off = arith_variance(451, 0, 1, mu)
    assert off.targets == {"direct": 0.0, "swapped": 0.0}


@pytest.mark.parametrize("x_max", [1, 10**7 + 1])
def test_arith_variance_range(mu: MuMeasure, x_max: int) -> None:
    with pytest.raises(UserError):
        arith_variance(x_max, 0, 0, mu)


@pytest.mark.slow
def test_arith_variance_report(class_set: ClassSet, eig: EigenFns) -> None:
    report = arith_variance_report(10**5, class_set, eig)
    assert report.passed
    assert report.data["pairing"] in ("direct", "swapped")
