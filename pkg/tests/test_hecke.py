# tests\test_hecke.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.
"""

import itertools
import json

import numpy as np
import pytest
import sympy

from gulocal.hecke import (
    V,
    HeckeAlgebra,
    HeckeElement,
    HeckeError,
    ParameterFitError,
    ParameterSystem,
    expected_point_count,
    fit_from_cells,
    fit_parameters,
    from_laurent_terms,
    laurent_terms,
)
from gulocal.latmodel import DEFAULT_BUDGET
from gulocal.weyl import (
    Cocharacter,
    WeylElement,
    admissible,
    braid_order,
    finite_orbit,
    group_ctx,
    length,
    simple_reflection,
    translation,
)

TAU = WeylElement((2, 1), (1, 0), 1)
T10 = translation(Cocharacter((1, 0), 1))
T01 = translation(Cocharacter((0, 1), 1))
MU2 = Cocharacter.standard_minuscule(2)
MU4 = Cocharacter.standard_minuscule(4)


# ---------------------------------------------------------
# Utility helpers
# ---------------------------------------------------------
def alternating(algebra, i, j, k):
    result = algebra.unit()
    for step in range(k):
        result = algebra.multiply(result, algebra.simple(i if step % 2 == 0 else j))
    return result


def random_cocharacter(rng, d, bound=2):
    gamma = int(rng.integers(-bound, bound + 1))
    half = [int(x) for x in rng.integers(-bound, bound + 1, size=d // 2)]
    return Cocharacter(tuple(half) + tuple(gamma - x for x in reversed(half)), gamma)


@pytest.fixture
def rank_two():
    return HeckeAlgebra(ParameterSystem.equal(2))


@pytest.fixture
def rank_four():
    return HeckeAlgebra(ParameterSystem(4, ((0, 2), (1,)), (1, 2)))


# ---------------------------------------------------------
# Laurent coefficients and parameters
# ---------------------------------------------------------
def test_laurent_terms():
    expr = 3 * V ** -2 - V + 2
    assert laurent_terms(expr) == [(-2, 3), (0, 2), (1, -1)]
    assert sympy.expand(from_laurent_terms(laurent_terms(expr)) - expr) == 0
    with pytest.raises(HeckeError):
        laurent_terms(V / 2)


def test_parameter_system_validation():
    with pytest.raises(HeckeError):
        ParameterSystem(4, ((0, 2), (1,)), (1,))
    with pytest.raises(HeckeError):
        ParameterSystem(4, ((0, 1, 2),), (1,))
    with pytest.raises(HeckeError):
        ParameterSystem.from_mapping(4, {0: 1, 1: 2, 2: 3})
    params = ParameterSystem.from_mapping(4, {0: 1, 1: 2, 2: 1})
    assert params.exponent(2) == 1
    assert params.word_exponent((0, 1, 2)) == 4


def test_element_json_roundtrip(rank_two):
    h = rank_two.add(rank_two.scale(rank_two.basis(T10), V ** -1), rank_two.basis(TAU))
    assert HeckeElement.from_json(2, h.to_json()) == h


# ---------------------------------------------------------
# Relations
# ---------------------------------------------------------
def test_quadratic_relation(rank_four):
    for i in group_ctx(4).simple_indices:
        q = rank_four.q_s(i)
        s = rank_four.simple(i)
        expected = rank_four.add(rank_four.scale(s, q - 1), rank_four.scale(rank_four.unit(), q))
        assert rank_four.multiply(s, s) == expected


def test_braid_relations(rank_four):
    ctx = group_ctx(4)
    for i, j in itertools.combinations(ctx.simple_indices, 2):
        k = braid_order(ctx, i, j)
        assert alternating(rank_four, i, j, k) == alternating(rank_four, j, i, k)


def test_associativity(rank_four):
    elements = admissible(MU4)[:6]
    for x, y, z in itertools.product(elements[:4], elements[2:], elements[::2]):
        bx, by, bz = (rank_four.basis(w) for w in (x, y, z))
        left = rank_four.multiply(rank_four.multiply(bx, by), bz)
        right = rank_four.multiply(bx, rank_four.multiply(by, bz))
        assert left == right


def test_inverse(rank_four):
    for w in admissible(MU4):
        assert rank_four.multiply(rank_four.basis(w), rank_four.T_inverse(w)) == rank_four.unit()


def test_rank_mismatch_is_rejected(rank_two, rank_four):
    with pytest.raises(HeckeError):
        rank_two.multiply(rank_two.unit(), rank_four.unit())


# ---------------------------------------------------------
# Bernstein elements and the center
# ---------------------------------------------------------
def test_theta_is_multiplicative(rank_two):
    lams = sorted(finite_orbit(MU2))
    for a, b in itertools.product(lams, repeat=2):
        assert rank_two.theta(a + b) == rank_two.multiply(rank_two.theta(a), rank_two.theta(b))


def test_theta_is_additive_on_random_pairs(rank_two):
    rng = np.random.default_rng(7)
    for _ in range(10):
        a, b = random_cocharacter(rng, 2), random_cocharacter(rng, 2)
        assert rank_two.theta(a + b) == rank_two.multiply(rank_two.theta(a), rank_two.theta(b))
    zero = Cocharacter.zero(2)
    assert rank_two.theta(zero) == rank_two.unit()


@pytest.mark.slow
def test_theta_is_additive_in_rank_four(rank_four):
    rng = np.random.default_rng(11)
    for _ in range(3):
        a, b = random_cocharacter(rng, 4, bound=1), random_cocharacter(rng, 4, bound=1)
        assert rank_four.theta(a + b) == rank_four.multiply(rank_four.theta(a), rank_four.theta(b))


def test_rank_two_bernstein_element(rank_two):
    z = rank_two.bernstein_z(MU2)
    assert rank_two.is_central(z)
    assert z.support == frozenset(admissible(MU2))
    assert z.coeff(T10) == V ** -1
    assert z.coeff(T01) == V ** -1
    assert sympy.expand(z.coeff(TAU) - (V ** -1 - V)) == 0


def test_sstrace_element_is_central(rank_two):
    assert rank_two.is_central(rank_two.sstrace_element(MU2))


def test_translation_basis_element_is_not_central(rank_two):
    assert not rank_two.is_central(rank_two.basis(T10))


def test_characterization_reproduces_bernstein(rank_two):
    assert rank_two.central_from_characterization(MU2) == rank_two.bernstein_z(MU2)


@pytest.mark.slow
def test_rank_four_center_with_unequal_parameters(rank_four):
    z = rank_four.bernstein_z(MU4)
    t_mu = translation(MU4)
    assert rank_four.is_central(z)
    assert z.support <= frozenset(admissible(MU4))
    assert z.coeff(t_mu) == V ** -rank_four.half_exponent(t_mu)
    assert rank_four.central_from_characterization(MU4) == z


@pytest.mark.slow
def test_rank_four_sstrace_is_central(rank_four):
    trace = rank_four.sstrace_element(MU4)
    t_mu = translation(MU4)
    sign = -1 if length(t_mu) % 2 else 1
    assert rank_four.is_central(trace)
    assert trace.coeff(t_mu) == sign


def test_specialize(rank_two):
    s = rank_two.simple(0)
    product = rank_two.multiply(s, s)
    assert rank_two.specialize(product, 5) == {s.terms[0][0]: 4, WeylElement.identity(2): 5}
    with pytest.raises(HeckeError):
        rank_two.specialize(rank_two.scale(rank_two.unit(), V), 3)


def test_specialized_index(rank_four):
    ctx = group_ctx(4)
    assert rank_four.specialized_index(WeylElement.identity(4), 3) == 1
    assert rank_four.specialized_index(simple_reflection(ctx, 0), 5) == 5
    assert rank_four.specialized_index(simple_reflection(ctx, 1), 3) == 9
    t_mu = translation(MU4)
    assert rank_four.specialized_index(t_mu, 3) == 3 ** rank_four.half_exponent(t_mu)


# ---------------------------------------------------------
# Parameter fitting
# ---------------------------------------------------------
def test_expected_point_count():
    for q in (3, 5, 7):
        assert expected_point_count(MU2, ParameterSystem.equal(2), q) == 2 * q + 1
    assert expected_point_count(MU4, ParameterSystem(4, ((0, 2), (1,)), (1, 2)), 3) == 457


def test_fit_from_synthetic_cells():
    cells = {q: {TAU: 1, T10: q, T01: q} for q in (3, 5)}
    assert fit_from_cells(2, cells) == ParameterSystem.equal(2)
    assert fit_from_cells(2, {3: {TAU: 1, T10: 9, T01: 9}}) == ParameterSystem.equal(2, 2)


def test_fit_rejects_inconsistent_cells():
    with pytest.raises(ParameterFitError):
        fit_from_cells(2, {3: {TAU: 1, T10: 6, T01: 3}})
    with pytest.raises(ParameterFitError):
        fit_from_cells(2, {3: {TAU: 1, T10: 3, T01: 9}})
    with pytest.raises(ParameterFitError):
        fit_from_cells(2, {3: {TAU: 3}})
    with pytest.raises(ParameterFitError):
        fit_from_cells(2, {3: {TAU: 1}})


def test_fit_from_census():
    assert fit_parameters(2, [3, 5], DEFAULT_BUDGET) == ParameterSystem.equal(2)


@pytest.mark.slow
def test_fit_from_rank_four_census(golden_dir):
    golden = json.loads((golden_dir / "census_d4_q3_m0_n1.json").read_text(encoding="utf-8"))
    params = fit_parameters(4, [3], DEFAULT_BUDGET)
    assert params.exponents == (1, 2)
    assert params.to_dict() == golden["parameters"]
    assert expected_point_count(MU4, params, 3) == golden["total"]
