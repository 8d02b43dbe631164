from __future__ import annotations

from collections import Counter
from fractions import Fraction

import pytest

from quatvar.algnum import AlgNum
from quatvar.class_graph import (
    ClassSet,
    EigenFns,
    brandt,
    brandt_report,
    brandt_series,
    class_number,
    eichler_trace,
    eigen_report,
    ideals_equivalent,
)
from quatvar.exceptions import UserError
from quatvar.quat_core import QLattice, Quaternion, maximal_order

SQRT5 = AlgNum.sqrt5()


def test_three_classes_with_mass_eleven_sixths(class_set: ClassSet) -> None:
    assert len(class_set) == 3
    assert class_set.weights == (1, 2, 3)
    assert class_set.mass == Fraction(11, 6)


def test_maximal_order_is_the_weight_two_class(class_set: ClassSet) -> None:
    assert class_set.class_of(maximal_order()) == 1


def test_principal_ideals_are_equivalent_to_the_order() -> None:
    order = maximal_order()
    alpha = Quaternion(1, 1, Fraction(1, 2), Fraction(1, 2))
    shifted = QLattice.from_generators([alpha * b for b in order.basis])
    assert ideals_equivalent(order, shifted)
    assert shifted.norm() == alpha.nrd()


def test_ternary_lattices_share_the_determinant(class_set: ClassSet) -> None:
    assert [record.ternary_det for record in class_set.classes] == [2116, 2116, 2116]


def test_brandt_two(class_set: ClassSet) -> None:
    b2 = brandt(2, class_set)
    assert b2.entries == ((1, 1, 1), (2, 1, 0), (3, 0, 0))
    assert b2.row_sums() == (3, 3, 3)


def test_neighbours_reproduce_brandt_two(class_set: ClassSet) -> None:
    b2 = brandt(2, class_set)
    for e in range(3):
        histogram = Counter(class_set.neighbours(e))
        assert tuple(histogram.get(f, 0) for f in range(3)) == b2.entries[e]


def test_brandt_traces(class_set: ClassSet) -> None:
    series = brandt_series(10, class_set)
    assert [series[n].trace() for n in range(1, 6)] == [3, 2, 4, 6, 4]
    for n in range(1, 11):
        assert series[n].trace() == eichler_trace(n)


def test_brandt_matrices_commute_and_are_weighted_symmetric(class_set: ClassSet) -> None:
    series = brandt_series(25, class_set)
    chosen = [series[n] for n in (1, 2, 3, 5, 7, 9, 15, 25)]
    for b in chosen:
        assert b.weighted_symmetric(class_set.weights)
        for c in chosen:
            assert b @ c == c @ b


def test_brandt_rejects_non_positive_n() -> None:
    with pytest.raises(UserError):
        brandt(0)


def test_class_numbers() -> None:
    assert [class_number(d) for d in (-3, -4, -7, -20, -23)] == [1, 1, 1, 2, 3]
    with pytest.raises(UserError):
        class_number(-5)


def test_eichler_trace_needs_n_prime_to_p() -> None:
    with pytest.raises(UserError):
        eichler_trace(23)


def test_eigenfunctions(eig: EigenFns) -> None:
    assert eig.psi[0] == (AlgNum(1), -3 - SQRT5, AlgNum(Fraction(3, 2), Fraction(3, 2)))
    assert eig.psi[1] == tuple(v.conj() for v in eig.psi[0])
    assert eig.norm_sq[0] == AlgNum(Fraction(25, 2), Fraction(9, 2))
    assert eig.a(0, 2) == AlgNum(Fraction(-1, 2), Fraction(1, 2))
    assert eig.a(0, 3) == -SQRT5
    assert eig.a(0, 5) == SQRT5 - 1
    assert eig.a(1, 3) == SQRT5


def test_eigenvalues_solve_the_quadratic_factor(eig: EigenFns) -> None:
    for k in range(2):
        a2 = eig.a(k, 2)
        assert a2 * a2 + a2 - 1 == 0


def test_eigen_report_passes(class_set: ClassSet, eig: EigenFns) -> None:
    report = eigen_report(class_set, eig)
    assert report.status == "pass"
    assert report.cases_failed == 0


def test_normalized_eigenfunctions_have_unit_weighted_norm(eig: EigenFns) -> None:
    for k in range(2):
        psi = eig.normalized(k)
        assert sum(v * v / w for v, w in zip(psi, eig.weights)) == pytest.approx(1.0)


def test_brandt_is_multiplicative_on_coprime_indices(class_set: ClassSet) -> None:
    series = brandt_series(15, class_set)
    assert series[3] @ series[5] == series[15].entries
    assert series[2] @ series[2] == tuple(
        tuple(series[4].entries[i][j] + 2 * series[1].entries[i][j] for j in range(3)) for i in range(3)
    )


def test_brandt_report_passes(class_set: ClassSet) -> None:
    report = brandt_report(class_set)
    assert report.status == "pass"
    assert report.data["B2"]["entries"] == [["1/1", "1/1", "1/1"], ["2/1", "1/1", "0/1"], ["3/1", "0/1", "0/1"]]
    assert report.data["traces"]["5"] == "4/1"
