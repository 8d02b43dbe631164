from __future__ import annotations

import itertools
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from quatvar.algnum import AlgNum
from quatvar.cyclotomic import CycInt
from quatvar.exceptions import ConvergenceError, UserError
from quatvar.finite_fourier import (
    FiniteMatFn,
    SchwartzB2,
    TraceZeroSchwartz,
    cartan_volume,
    conjugation_sum,
    conjugation_sum_naive,
    ft_m2,
    ft_trace_zero,
    gl2_order,
    local_integral_correlations,
    local_integral_unramified,
    local_integrals_report,
    local_l_factor,
    macdonald_xi,
    phi0_scaled,
    phi_hat,
    phi_hat_trace_zero,
    phi_prime,
    schwartz_ip,
    spherical_recurrence,
    trace_zero_ip,
    verify_ugly_lemma,
)

A2_PSI = {
    "Psi_1": AlgNum(Fraction(-1, 2), Fraction(1, 2)),
    "Psi_2": AlgNum(Fraction(-1, 2), Fraction(-1, 2)),
}


def test_cyclotomic_units() -> None:
    assert CycInt.zeta(2) ** 2 == CycInt.from_int(2, -1)
    assert CycInt.zeta(3) ** 8 == CycInt.from_int(3, 1)
    z = CycInt.zeta(3)
    assert z * z.conj() == CycInt.from_int(3, 1)
    assert complex(z) == pytest.approx(complex(math.cos(math.pi / 4), math.sin(math.pi / 4)))


def test_cyclotomic_levels_do_not_mix() -> None:
    with pytest.raises(UserError):
        CycInt.zeta(2) + CycInt.zeta(3)
    with pytest.raises(UserError):
        CycInt(3, (1, 0))


@pytest.mark.parametrize("n", [1, 2])
def test_gl2_order(n: int) -> None:
    q = 1 << n
    count = sum((a * d - b * c) % 2 for a, b, c, d in itertools.product(range(q), repeat=4))
    assert gl2_order(n) == count


def test_fourier_transform_of_delta_is_constant() -> None:
    assert ft_m2(FiniteMatFn.delta(2)) == FiniteMatFn.from_integers(2, np.ones((4,) * 4, dtype=np.int64))


def test_fourier_inversion() -> None:
    f = FiniteMatFn.delta(2, (1, 2, 3, 0))
    assert ft_m2(ft_m2(f)) == FiniteMatFn.delta(2, (-1, -2, -3, 0)) * 256


def test_orbit_sum_matches_naive_sum() -> None:
    phi0 = phi0_scaled(2)
    assert np.array_equal(conjugation_sum(phi0).integers(), conjugation_sum_naive(phi0).integers())


def test_naive_group_sum_is_limited() -> None:
    with pytest.raises(UserError):
        conjugation_sum_naive(phi0_scaled(3))


def test_ugly_lemma_level_two() -> None:
    report = verify_ugly_lemma(2)
    assert report.passed
    assert report.data["c_N"] == "8/1"
    assert report.data["anchor"] == "3/1"


def test_level_two_support_follows_the_diagonal_parity() -> None:
    orbit_sum = conjugation_sum(phi0_scaled(2)).integers()
    prime = phi_prime(2).integers()
    assert prime[0, 0, 0, 2] == 0 and orbit_sum[0, 0, 0, 2] == 0
    assert prime[1, 0, 0, 3] == -1 and orbit_sum[1, 0, 0, 3] == -32
    assert np.array_equal(orbit_sum, 32 * prime)


@pytest.mark.slow
def test_ugly_lemma_level_three() -> None:
    report = verify_ugly_lemma(3)
    assert report.passed
    assert report.data["c_N"] == "128/1"


def test_ugly_lemma_needs_level_two() -> None:
    with pytest.raises(UserError):
        verify_ugly_lemma(1)


@pytest.mark.parametrize("n", [0, 1, 2, 5, -3])
def test_indicator_matrix_coefficients(n: int) -> None:
    one = SchwartzB2.indicator_m2()
    assert schwartz_ip(n, one, one) == Fraction(1, 2 ** abs(n))


def test_refinement_keeps_inner_products() -> None:
    one = SchwartzB2.indicator_m2()
    fine = one.refine()
    for n in range(3):
        assert schwartz_ip(n, fine, fine) == schwartz_ip(n, one, one)


@pytest.mark.parametrize(("n", "expected"), [(0, Fraction(3, 16)), (1, Fraction(1, 32)), (2, Fraction(1, 64))])
def test_phi_hat_matrix_coefficients(n: int, expected: Fraction) -> None:
    f = phi_hat()
    assert schwartz_ip(n, f, f) == expected


def test_scale_mismatch_is_rejected() -> None:
    with pytest.raises(UserError):
        schwartz_ip(0, phi_hat(), SchwartzB2.indicator_m2())


def test_trace_zero_norms() -> None:
    f = phi_hat_trace_zero()
    assert f.norm_sq() == pytest.approx(0.75)
    assert trace_zero_ip(0, f, f) == pytest.approx(0.75)
    for n in (1, 2, 3):
        assert trace_zero_ip(n, f, f) == pytest.approx(2.0 ** (-2 - n))
    assert ft_trace_zero(TraceZeroSchwartz.indicator_r0()).norm_sq() == pytest.approx(2.0)


def test_trace_zero_coset_indicator() -> None:
    f = TraceZeroSchwartz.indicator_coset((1, 0, 1))
    assert f.norm_sq() == pytest.approx(1 / 8)


def test_cartan_volume() -> None:
    assert [cartan_volume(n) for n in range(5)] == [1, 3, 6, 12, 24]
    with pytest.raises(UserError):
        cartan_volume(-1)


@pytest.mark.parametrize("a2", [0.0, 1.0, -1.5, 0.618, -1.618, 2.5])
def test_spherical_function_closed_form(a2: float) -> None:
    for n in range(12):
        assert macdonald_xi(a2, n) == pytest.approx(spherical_recurrence(a2, n), abs=1e-12)


def test_local_integral_at_zero() -> None:
    assert local_integral_unramified(0) == pytest.approx(0.5)


def test_local_integral_diverges_at_the_edge() -> None:
    with pytest.raises(ConvergenceError):
        local_integral_unramified(3)


@pytest.mark.parametrize("a2", list(A2_PSI.values()))
def test_local_integrals_closed_forms(a2: AlgNum) -> None:
    closed = local_l_factor(a2) * 0.75
    assert local_integral_unramified(a2) == pytest.approx(closed, abs=1e-9)
    assert local_integral_correlations(a2) == pytest.approx((2 + closed) / 16, abs=1e-9)


def test_local_integrals_report() -> None:
    report = local_integrals_report(A2_PSI)
    assert report.passed
    assert report.cases_total == 4
    assert set(report.data) == {"Psi_1", "Psi_2"}


def test_parseval() -> None:
    rng = np.random.default_rng(5)
    f = FiniteMatFn.from_integers(2, rng.integers(-2, 3, size=(4,) * 4))
    assert ft_m2(f).hermitian_norm() == f.hermitian_norm() * 256


def test_conjugation_sum_is_a_class_function() -> None:
    from quatvar.finite_fourier import _conjugation_permutation

    phi = conjugation_sum(phi0_scaled(2)).integers().ravel()
    for g in [(1, 1, 0, 1), (0, 1, 1, 0), (3, 2, 1, 1)]:
        assert np.array_equal(phi[_conjugation_permutation(2, g)], phi)


def test_function_tables_round_trip(tmp_path: Path) -> None:
    f = phi0_scaled(2)
    path = tmp_path / "phi0.npz"
    f.save(path)
    assert FiniteMatFn.load(path) == f


def test_schwartz_ip_is_symmetric_under_inversion() -> None:
    f = phi_hat()
    for n in (1, 2, 3):
        assert schwartz_ip(n, f, f) == schwartz_ip(-n, f, f)


def test_trace_zero_plancherel() -> None:
    f = phi_hat_trace_zero()
    transformed = ft_trace_zero(f)
    assert (transformed.s, transformed.t) == ((0, 0, 0), (1, 1, 1))
    expected = np.zeros((2, 2, 2))
    for point in [(0, 1, 1), (1, 1, 0), (1, 0, 1)]:
        expected[point] = 2
    assert np.allclose(transformed.table, expected)
    assert f.norm_sq() == pytest.approx(transformed.norm_sq() / 2)
    one = TraceZeroSchwartz.indicator_r0()
    assert one.norm_sq() == pytest.approx(ft_trace_zero(one).norm_sq() / 2)


@pytest.mark.parametrize("n", [0, 1, 2, 4])
def test_phi_hat_factorises_through_the_trace_zero_part(n: int) -> None:
    f = phi_hat_trace_zero()
    assert float(schwartz_ip(n, phi_hat(), phi_hat())) == pytest.approx(0.25 * trace_zero_ip(n, f, f))


def test_spherical_function_of_the_trivial_representation() -> None:
    for n in range(8):
        assert macdonald_xi(3, n) == pytest.approx(1.0)


@pytest.mark.parametrize("a2", list(A2_PSI.values()))
def test_first_cartan_shell_recovers_the_hecke_eigenvalue(a2: AlgNum) -> None:
    assert macdonald_xi(a2, 0) == pytest.approx(1.0)
    assert cartan_volume(1) * macdonald_xi(a2, 1) == pytest.approx(float(a2), abs=1e-12)
