from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from quatvar.exceptions import UnsupportedConfiguration, UserError
from quatvar.quat_core import (
    QLattice,
    Quaternion,
    hensel_sqrt,
    mat2_mul,
    maximal_order,
    short_vectors,
    theta_counts,
    two_adic_split,
)


def test_multiplication_table() -> None:
    one, i, j, k = Quaternion.units()
    assert i * j == k
    assert j * i == -k
    assert i * i == -one
    assert j * j == Quaternion.scalar(-23)
    assert k * k == Quaternion.scalar(-23)


def test_norm_and_trace_are_multiplicative_and_additive() -> None:
    x = Quaternion(Fraction(1, 2), 3, Fraction(-1, 2), 2)
    y = Quaternion(2, -1, 1, Fraction(1, 2))
    assert (x * y).nrd() == x.nrd() * y.nrd()
    assert (x + y).trd() == x.trd() + y.trd()
    assert x * x.conj() == Quaternion.scalar(x.nrd())


def test_maximal_order_is_a_ring_of_discriminant_23() -> None:
    order = maximal_order()
    assert order.is_ring()
    assert order.gram_det() == 529
    assert order.norm() == 1
    assert order.left_order().key() == order.hnf().key()


def test_maximal_order_rejects_other_residues() -> None:
    with pytest.raises(UnsupportedConfiguration):
        maximal_order(13)


def test_canonical_form_identifies_equal_lattices() -> None:
    order = maximal_order()
    shuffled = QLattice.from_generators([order.basis[3], order.basis[0] + order.basis[3], order.basis[2], order.basis[1]])
    assert shuffled.key() == order.hnf().key()


def test_coordinates_and_membership() -> None:
    order = maximal_order()
    half_one_plus_k = Quaternion(Fraction(1, 2), 0, 0, Fraction(1, 2))
    assert order.contains(half_one_plus_k)
    assert not order.contains(Quaternion(Fraction(1, 2), 0, 0, 0))
    coords = order.coordinates(half_one_plus_k)
    assert coords is not None
    assert order.element([int(c) for c in coords]) == half_one_plus_k


def test_trace_zero_part_has_rank_three() -> None:
    s0 = maximal_order().trace_zero_part()
    assert s0.rank == 3
    assert all(b.trd() == 0 for b in s0.basis)
    assert s0.gram_det() == 8 * 2116


def test_short_vectors_on_the_square_lattice() -> None:
    vecs = short_vectors([[1, 0], [0, 1]], 2)
    assert len(vecs) == 9
    assert [v for v, _ in vecs] == sorted(v for v, _ in vecs)
    assert all(value == v[0] ** 2 + v[1] ** 2 for v, value in vecs)


def test_units_of_the_maximal_order() -> None:
    units = [v for v, value in short_vectors(maximal_order(), 1) if value == 1]
    assert len(units) == 4


def test_theta_counts_sum_of_two_squares() -> None:
    assert theta_counts([[1, 0], [0, 1]], 5).tolist() == [1, 4, 4, 0, 4, 8]


def test_theta_counts_with_weights() -> None:
    counts = theta_counts([[1, 0], [0, 1]], 4, weight=lambda v: np.where(v[:, 0] % 2 == 0, 1, -1))
    assert counts.tolist() == [1, 0, -4, 0, 4]


def test_theta_counts_rejects_non_integral_forms() -> None:
    with pytest.raises(UserError):
        theta_counts([[Fraction(1, 2), 0], [0, 1]], 3)


def test_hensel_square_root_of_minus_23() -> None:
    s = hensel_sqrt(-23, 20)
    assert (s * s + 23) % (1 << 20) == 0
    assert s % 8 == 3
    with pytest.raises(UserError):
        hensel_sqrt(3, 10)


def test_two_adic_splitting_is_a_ring_map() -> None:
    order = maximal_order()
    splitting = two_adic_split(12, order)
    m = splitting.modulus
    for x in order.basis:
        a, b, c, d = splitting.image(x)
        assert (a * d - b * c - int(x.nrd())) % m == 0
        assert (a + d - int(x.trd())) % m == 0
        for y in order.basis:
            assert splitting.image(x * y) == mat2_mul(splitting.image(x), splitting.image(y), m)


def test_two_adic_split_validates_precision() -> None:
    with pytest.raises(UserError):
        two_adic_split(2)


def test_norm_examples() -> None:
    one, i, j, k = Quaternion.units()
    assert (one + i + j + k).nrd() == 48
    half = Quaternion(Fraction(1, 2), 0, 0, Fraction(1, 2))
    assert half.trd() == 1 and half.nrd() == 6
    assert half * half == half - 6


def test_short_vectors_on_the_cube_lattice() -> None:
    vecs = short_vectors([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 2)
    assert sorted(Counter(int(value) for _, value in vecs).items()) == [(0, 1), (1, 6), (2, 12)]
    assert short_vectors([[2, 1], [1, 3]], 0) == [((0, 0), 0)]
    assert short_vectors([[2, 1], [1, 3]], -1) == []


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_short_vectors_match_a_box_search(seed: int) -> None:
    rng = np.random.default_rng(seed)
    basis = rng.integers(-3, 4, size=(3, 3))
    while round(np.linalg.det(basis)) == 0:
        basis = rng.integers(-3, 4, size=(3, 3))
    gram = (basis @ basis.T).tolist()
    bound = 30
    inverse = np.linalg.inv(np.array(gram, dtype=float))
    box = [int(np.sqrt(bound * inverse[i, i])) + 1 for i in range(3)]
    naive = sorted(
        v
        for v in itertools.product(*(range(-b, b + 1) for b in box))
        if np.array(v) @ np.array(gram) @ np.array(v) <= bound
    )
    assert [v for v, _ in short_vectors(gram, bound)] == naive


def test_hnf_is_idempotent() -> None:
    order = maximal_order()
    assert order.hnf().hnf().key() == order.hnf().key()


def test_lattice_json_round_trip() -> None:
    order = maximal_order()
    assert QLattice.from_json_dict(order.to_json_dict()).key() == order.key()


def test_splittings_agree_across_precisions() -> None:
    low, high = two_adic_split(6), two_adic_split(14)
    assert high.reduce(6).images == low.images
    assert high.two_adic_sqrt_m23 % 64 == low.two_adic_sqrt_m23
    i_image = low.image(Quaternion.units()[1])
    assert mat2_mul(i_image, i_image, low.modulus) == (low.modulus - 1, 0, 0, low.modulus - 1)


def test_hensel_root_matches_exhaustive_search() -> None:
    s = hensel_sqrt(-23, 6)
    roots = [r for r in range(64) if (r * r) % 64 == 41]
    assert s in roots
    assert s % 8 == 3
