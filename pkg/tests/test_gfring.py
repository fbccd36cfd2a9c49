# tests\test_gfring.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.
"""

import numpy as np
import pytest

from gulocal.gfring import (
    FieldError,
    SeriesRing,
    TruncMatrix,
    TruncSeries,
    WindowError,
    coordinate_lattice,
    count_t_stable,
    deserialize_submodule,
    field_ctx,
    field_inverse,
    iter_t_stable,
    meet_dimension,
    module_from_vectors,
    nullspace,
    rank,
    submodule_canonicalize,
    submodule_meet_join,
)


# ---------------------------------------------------------
# Utility helpers
# ---------------------------------------------------------
def exhaustive_elements(fld):
    return list(range(fld.q))


def random_matrix(fld, rows, cols, seed=123):
    rng = np.random.default_rng(seed)
    return rng.integers(0, fld.q, size=(rows, cols))


def fmatmul(fld, a, b):
    return fld.sum(fld.mul(a[:, :, None], b[None, :, :]), axis=1)


def random_module(ring, rank_, count, seed):
    rng = np.random.default_rng(seed)
    return module_from_vectors(ring, rank_, rng.integers(0, ring.base.q, size=(count, rank_, ring.width)))


# ---------------------------------------------------------
# Field axioms
# ---------------------------------------------------------
def test_field_rejects_even_and_composite_characteristic():
    with pytest.raises(FieldError):
        field_ctx(2)
    with pytest.raises(FieldError):
        field_ctx(9)
    with pytest.raises(FieldError):
        field_ctx(3, 3)


def test_zero_and_one_properties(f9):
    for a in exhaustive_elements(f9):
        assert f9.add(a, 0) == a
        assert f9.mul(a, 0) == 0
        assert f9.mul(a, 1) == a
        assert f9.add(a, f9.neg(a)) == 0


def test_inverse_exhaustive(f9, f25):
    for fld in (f9, f25):
        for a in range(1, fld.q):
            assert fld.mul(a, fld.inv(a)) == 1
    with pytest.raises(FieldError):
        f9.inv(0)


def test_distributivity_and_associativity(f9):
    for a in exhaustive_elements(f9):
        for b in exhaustive_elements(f9):
            assert f9.mul(a, b) == f9.mul(b, a)
            for c in exhaustive_elements(f9):
                assert f9.mul(a, f9.add(b, c)) == f9.add(f9.mul(a, b), f9.mul(a, c))
                assert f9.mul(f9.mul(a, b), c) == f9.mul(a, f9.mul(b, c))


def test_frobenius_is_an_involutive_automorphism(f9, f25):
    for fld in (f9, f25):
        fixed = 0
        for a in exhaustive_elements(fld):
            assert fld.frob(fld.frob(a)) == a
            assert fld.frob(a) == fld.pow(a, fld.p)
            fixed += int(fld.is_prime_subfield(a))
            for b in (1, fld.generator, fld.q - 1):
                assert fld.frob(fld.mul(a, b)) == fld.mul(fld.frob(a), fld.frob(b))
                assert fld.frob(fld.add(a, b)) == fld.add(fld.frob(a), fld.frob(b))
        assert fixed == fld.p


def test_trace_and_norm_land_in_prime_field(f25):
    for a in exhaustive_elements(f25):
        assert f25.is_prime_subfield(f25.trace(a))
        assert f25.is_prime_subfield(f25.norm(a))


def test_generator_is_primitive(f9, f25):
    for fld in (f9, f25):
        powers = {fld.pow(fld.generator, k) for k in range(fld.q - 1)}
        assert len(powers) == fld.q - 1


# ---------------------------------------------------------
# Dense linear algebra
# ---------------------------------------------------------
def test_nullspace_is_kernel(f25):
    m = random_matrix(f25, 3, 6)
    kernel = nullspace(f25, m)
    assert kernel.shape[0] + rank(f25, m) == 6
    assert not np.any(fmatmul(f25, m, kernel.T))


def test_field_inverse(f9):
    lower = np.tril(random_matrix(f9, 4, 4, seed=7), -1) + np.eye(4, dtype=np.int64)
    upper = np.triu(random_matrix(f9, 4, 4, seed=8), 1) + np.eye(4, dtype=np.int64)
    m = fmatmul(f9, lower, upper)
    inverse = field_inverse(f9, m)
    assert np.array_equal(fmatmul(f9, m, inverse), np.eye(4, dtype=inverse.dtype))


def test_field_inverse_rejects_singular(f9):
    with pytest.raises(FieldError):
        field_inverse(f9, [[1, 1], [1, 1]])


# ---------------------------------------------------------
# Series rings
# ---------------------------------------------------------
def test_invalid_windows(f9):
    with pytest.raises(WindowError):
        SeriesRing(f9, 1, 3)
    with pytest.raises(WindowError):
        SeriesRing(f9, -1, -1)


def test_mass_below_window_is_an_error(f9):
    ring = SeriesRing(f9, -1, 2)
    with pytest.raises(WindowError):
        ring.truncate(np.array([1, 0, 0]), -2)
    with pytest.raises(WindowError):
        TruncSeries.monomial(ring, 1, -1) * TruncSeries.monomial(ring, 1, -1)


def test_series_product_truncates_above(f9):
    ring = SeriesRing(f9, 0, 3)
    one_plus_t = TruncSeries.constant(ring, 1) + TruncSeries.monomial(ring, 1, 1)
    one_minus_t = TruncSeries.constant(ring, 1) - TruncSeries.monomial(ring, 1, 1)
    expected = TruncSeries.constant(ring, 1) - TruncSeries.monomial(ring, 1, 2)
    assert one_plus_t * one_minus_t == expected
    assert TruncSeries.monomial(ring, 1, 2) * TruncSeries.monomial(ring, 1, 1) == TruncSeries.zero(ring)
    assert TruncSeries.monomial(ring, 1, 1).shift(1).valuation() == 2


def test_conjugation_fixes_t(f9):
    ring = SeriesRing(f9, 0, 2)
    s = TruncSeries(ring, [f9.generator, 1])
    assert s.conj().coefficient(1) == 1
    assert s.conj().coefficient(0) == f9.frob(f9.generator)
    assert s.conj().conj() == s


def test_matrix_inverse_over_power_series(f25):
    ring = SeriesRing(f25, 0, 4)
    rng = np.random.default_rng(5)
    g = TruncMatrix.identity(ring, 3) + TruncMatrix(ring, rng.integers(0, f25.q, size=(3, 3, 4))).shift(1)
    ident = TruncMatrix.identity(ring, 3)
    assert g @ g.inverse() == ident
    assert g.inverse() @ g == ident


# ---------------------------------------------------------
# Submodules
# ---------------------------------------------------------
def test_span_does_not_depend_on_generators(f9):
    ring = SeriesRing(f9, -1, 2)
    rng = np.random.default_rng(3)
    vecs = rng.integers(0, f9.q, size=(2, 2, ring.width))
    combo = f9.add(vecs[0], f9.mul(vecs[1], 2))
    a = module_from_vectors(ring, 2, vecs)
    b = module_from_vectors(ring, 2, np.stack([vecs[1], combo]))
    assert a == b
    assert hash(a) == hash(b)
    assert a == submodule_canonicalize(TruncMatrix(ring, vecs.transpose(1, 0, 2)))


def test_modules_are_t_stable(f9):
    ring = SeriesRing(f9, -1, 2)
    module = random_module(ring, 2, 1, seed=11)
    assert module.contains(module.shift(1))
    assert module.shift(1).dimension < module.dimension


def test_modular_law(f25):
    ring = SeriesRing(f25, -1, 2)
    a = random_module(ring, 3, 2, seed=1)
    b = random_module(ring, 3, 2, seed=2)
    meet, join = submodule_meet_join(a, b)
    assert meet.dimension + join.dimension == a.dimension + b.dimension
    assert a.contains(meet) and b.contains(meet)
    assert join.contains(a) and join.contains(b)


def test_meet_dimension_fast_path_matches_general(f9):
    ring = SeriesRing(f9, -2, 2)
    coordinate = coordinate_lattice(ring, 2, [-1, 0])
    general = module_from_vectors(ring, 2, coordinate.vectors())
    assert general.row_bounds is None and general == coordinate
    other = random_module(ring, 2, 2, seed=4)
    expected = submodule_meet_join(other, general)[0].dimension
    assert meet_dimension(other, coordinate) == expected
    assert meet_dimension(coordinate, other) == expected


def test_coordinate_lattice_shift_and_lift(f9):
    ring = SeriesRing(f9, -2, 2)
    lattice = coordinate_lattice(ring, 2, [0, 1])
    assert lattice.shift(-1) == coordinate_lattice(ring, 2, [-1, 0])
    assert lattice.shift(-1).contains(lattice)
    with pytest.raises(WindowError):
        lattice.shift(-3)
    wide = SeriesRing(f9, -3, 3)
    assert lattice.lift(wide) == coordinate_lattice(wide, 2, [0, 1])
    with pytest.raises(WindowError):
        coordinate_lattice(ring, 2, [-3, 0])


def test_general_module_lift_fills_the_top(f9):
    ring = SeriesRing(f9, -1, 1)
    module = random_module(ring, 2, 1, seed=8)
    wide = SeriesRing(f9, -2, 3)
    lifted = module.lift(wide)
    assert lifted.contains(coordinate_lattice(wide, 2, [1, 1]))
    assert lifted.dimension == module.dimension + 2 * 2


def test_serialize_restores_the_module(f25):
    ring = SeriesRing(f25, -1, 2)
    module = random_module(ring, 2, 2, seed=9)
    assert deserialize_submodule(module.serialize()) == module


# ---------------------------------------------------------
# t-stable subspace streams
# ---------------------------------------------------------
def test_iter_t_stable_matches_count(f9):
    ring = SeriesRing(f9, -1, 1)
    lower, upper = [-1, -1], [1, 1]
    for dimension in range(0, 5):
        found = list(iter_t_stable(ring, 2, lower, upper, dimension))
        assert len(found) == count_t_stable(ring, 2, lower, upper, dimension)
        assert len(set(found)) == len(found)
        for module in found:
            assert module.dimension == dimension
            assert module.contains(module.shift(1))


def test_iter_t_stable_two_step_lines(f9):
    ring = SeriesRing(f9, -1, 1)
    lines = list(iter_t_stable(ring, 2, [-1, -1], [1, 1], 1))
    assert len(lines) == count_t_stable(ring, 2, [-1, -1], [1, 1], 1) == f9.q + 1
    assert all(line.row_starts in {(0, 1), (1, 0)} for line in lines)


def test_iter_t_stable_in_rank_three():
    f3 = field_ctx(3, 1)
    ring = SeriesRing(f3, 0, 2)
    lower, upper = [0, 0, 0], [2, 2, 2]
    found = list(iter_t_stable(ring, 3, lower, upper, 3))
    assert len(set(found)) == len(found)
    assert len(found) < count_t_stable(ring, 3, lower, upper, 3)
    for module in found:
        assert module.dimension == 3
        assert module.contains(module.shift(1))
    # t e0 + a e1 + b e2, t e1 + c e2, t e2 span a module iff a c = 0
    balanced = [module for module in found if module.row_starts == (1, 1, 1)]
    assert len(balanced) == (2 * f3.q - 1) * f3.q


def test_iter_t_stable_lines_of_the_residue_plane(f9):
    ring = SeriesRing(f9, 0, 1)
    lines = list(iter_t_stable(ring, 2, [0, 0], [1, 1], 1))
    assert len(lines) == f9.q + 1


def test_iter_t_stable_rejects_crossed_bounds(f9):
    ring = SeriesRing(f9, -1, 1)
    with pytest.raises(WindowError):
        count_t_stable(ring, 2, [0, 0], [-1, 1], 1)
