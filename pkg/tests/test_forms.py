# tests\test_forms.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy

from gulocal.forms import (
    Direction,
    FormError,
    HermitianForm,
    IsometryClass,
    LocalFieldScalar,
    apply_matrix,
    convert_form,
    default_zeta,
    determinant_class,
    dual_lattice,
    hensel_unitarize,
    inert_parameter,
    is_isotropic,
    is_similitude,
    isometry_class,
    multiplier_mod_t,
    pair,
)
from gulocal.config_manager import DEFAULT_CONFIG
from gulocal.gfring import SeriesRing, TruncMatrix, TruncSeries, WindowError, coordinate_lattice
from gulocal.latmodel import ModelWindow, approximate_iwahori, generator_ring, standard_lattice
from gulocal.weyl import Cocharacter, admissible, monomial_matrix


# ---------------------------------------------------------
# Utility helpers
# ---------------------------------------------------------
def random_hermitian(fld, d, seed):
    rng = np.random.default_rng(seed)
    upper = rng.integers(0, fld.q, size=(d, d))
    gram = np.triu(upper, 1)
    gram = gram + fld.frob(gram).T
    diagonal = rng.integers(0, fld.p, size=d)
    return gram + np.diag(diagonal)


def anti_identity(d):
    return [[1 if i + j == d - 1 else 0 for j in range(d)] for i in range(d)]


# ---------------------------------------------------------
# Pairing and duality
# ---------------------------------------------------------
def test_pairing_is_hermitian(f25):
    ring = SeriesRing(f25, -1, 3)
    phi = HermitianForm(ring, 2)
    v = [TruncSeries(ring, [0, 1, 2, 0]), TruncSeries(ring, [0, 3, 0, 1])]
    w = [TruncSeries(ring, [0, 7, 0, 0]), TruncSeries(ring, [1, 0, 0, 0])]
    assert pair(phi, v, w) == pair(phi, w, v).conj()


def test_non_hermitian_gram_is_rejected(f9):
    ring = SeriesRing(f9, 0, 2)
    gram = TruncMatrix.from_constant(ring, [[0, 1], [2, 0]])
    with pytest.raises(FormError):
        HermitianForm(ring, 2, gram)


@pytest.mark.parametrize("d", [2, 4])
def test_standard_lattices_dualize_in_pairs(f9, d):
    ring = SeriesRing(f9, -2, 2)
    phi = HermitianForm(ring, d)
    for i in range(d + 1):
        dual = dual_lattice(phi, standard_lattice(ring, d, i), -1)
        assert dual == standard_lattice(ring, d, d - i)


@pytest.mark.parametrize("d", [2, 4])
def test_double_dual_is_the_identity(f9, d):
    ring = SeriesRing(f9, -2, 2)
    phi = HermitianForm(ring, d)
    lattices = [coordinate_lattice(ring, d, bounds) for bounds in itertools.product([-1, 0], repeat=d)]
    lattices += [standard_lattice(ring, d, i) for i in range(d + 1)]
    for lattice in lattices:
        assert dual_lattice(phi, dual_lattice(phi, lattice, -1), -1) == lattice


@pytest.mark.parametrize("d", [2, 4])
def test_dual_of_a_shift_is_the_inverse_shift_of_the_dual(f9, d):
    ring = SeriesRing(f9, -2, 2)
    phi = HermitianForm(ring, d)
    for bounds in itertools.product([-1, 0], repeat=d):
        lattice = coordinate_lattice(ring, d, bounds)
        assert dual_lattice(phi, lattice.shift(1), -1) == dual_lattice(phi, lattice, -1).shift(-1)


@pytest.mark.parametrize("d", [2, 4])
def test_dual_reverses_inclusion(f9, d):
    ring = SeriesRing(f9, -2, 2)
    phi = HermitianForm(ring, d)
    lattices = [coordinate_lattice(ring, d, bounds) for bounds in itertools.product([-1, 0], repeat=d)]
    for small, large in itertools.product(lattices, repeat=2):
        if not large.contains(small):
            continue
        assert dual_lattice(phi, small, -1).contains(dual_lattice(phi, large, -1))
        if small != large:
            assert dual_lattice(phi, small, -1) != dual_lattice(phi, large, -1)


def test_dual_outside_window_raises(f9):
    ring = SeriesRing(f9, -1, 1)
    phi = HermitianForm(ring, 2)
    with pytest.raises(WindowError):
        dual_lattice(phi, coordinate_lattice(ring, 2, [0, 0]), 1)


def test_isotropy_threshold(f9):
    ring = SeriesRing(f9, -1, 2)
    phi = HermitianForm(ring, 2)
    lattice = coordinate_lattice(ring, 2, [0, 0])
    assert is_isotropic(phi, lattice, 0)
    assert not is_isotropic(phi, lattice, 1)
    assert is_isotropic(phi, coordinate_lattice(ring, 2, [0, 1]), 1)


# ---------------------------------------------------------
# Similitudes and unitarization
# ---------------------------------------------------------
@pytest.mark.parametrize("d", [2, 4])
def test_monomial_matrices_are_similitudes(f9, d):
    ring = SeriesRing(f9, -2, 4)
    phi = HermitianForm(ring, d)
    for w in admissible(Cocharacter.standard_minuscule(d)):
        g = monomial_matrix(w, ring)
        lhs = g.transpose() @ phi.gram.rewindow(ring) @ g.conj()
        assert lhs == phi.gram.rewindow(ring).shift(w.gamma)


def test_hensel_repairs_approximate_iwahori_elements():
    window = ModelWindow(4, 3, 1, 2)
    rng = np.random.default_rng(17)
    form = HermitianForm(generator_ring(window), window.d)
    flags = [standard_lattice(window.ring, window.d, j) for j in range(window.d)]
    for _ in range(3):
        g, c = approximate_iwahori(window, rng)
        assert multiplier_mod_t(g, form) == c
        fixed = hensel_unitarize(g, form, c, flags)
        assert is_similitude(fixed, form, c)
        assert np.array_equal(fixed.mod_t(), g.mod_t())
        for lattice in flags:
            assert lattice.contains(apply_matrix(fixed, lattice))


def test_hensel_leaves_exact_similitudes_alone():
    window = ModelWindow(2, 3, 1, 2)
    ring = generator_ring(window)
    form = HermitianForm(ring, window.d)
    identity = TruncMatrix.identity(ring, window.d)
    assert hensel_unitarize(identity, form, 1) == identity

    g, c = approximate_iwahori(window, np.random.default_rng(3))
    fixed = hensel_unitarize(g, form, c)
    assert hensel_unitarize(fixed, form, c) == fixed


@pytest.mark.parametrize("d", [2, pytest.param(4, marks=pytest.mark.slow)])
def test_hensel_over_the_default_trial_budget(d):
    window = ModelWindow(d, 3, 1, 2)
    rng = np.random.default_rng(DEFAULT_CONFIG["seed"])
    form = HermitianForm(generator_ring(window), window.d)
    flags = [standard_lattice(window.ring, window.d, j) for j in range(window.d)]
    for _ in range(DEFAULT_CONFIG["trials"]):
        g, c = approximate_iwahori(window, rng)
        fixed = hensel_unitarize(g, form, c, flags)
        assert is_similitude(fixed, form, c)
        assert np.array_equal(fixed.mod_t(), g.mod_t())
        assert all(lattice.contains(apply_matrix(fixed, lattice)) for lattice in flags)


def test_hensel_rejects_non_similitude(f9):
    ring = SeriesRing(f9, 0, 3)
    form = HermitianForm(ring, 2)
    g = TruncMatrix.from_constant(ring, [[1, 1], [0, 1]])
    assert multiplier_mod_t(g, form) is None
    with pytest.raises(FormError):
        hensel_unitarize(g, form, 1)


def test_hensel_requires_a_conjugation_fixed_multiplier(f9):
    ring = SeriesRing(f9, 0, 2)
    form = HermitianForm(ring, 2)
    with pytest.raises(FormError):
        hensel_unitarize(TruncMatrix.identity(ring, 2), form, f9.generator)


# ---------------------------------------------------------
# Trace correspondence
# ---------------------------------------------------------
def test_default_zeta_is_anti_fixed(f9, f25):
    for fld in (f9, f25):
        zeta = default_zeta(fld)
        assert zeta != 0
        assert fld.frob(zeta) == fld.neg(zeta)


@pytest.mark.parametrize("seed", range(5))
def test_trace_correspondence_roundtrip(f25, seed):
    gram = random_hermitian(f25, 4, seed)
    psi = convert_form(f25, gram, Direction.HERMITIAN_TO_ALTERNATING)
    assert psi.shape == (8, 8)
    assert not np.any((psi + psi.T) % f25.p)
    assert not np.any(np.diag(psi))
    back = convert_form(f25, psi, Direction.ALTERNATING_TO_HERMITIAN)
    assert np.array_equal(back, gram)


def test_trace_correspondence_over_many_grams(f9, f25):
    for seed in range(1000):
        fld = f9 if seed % 2 else f25
        gram = random_hermitian(fld, 2 + 2 * (seed % 3 == 0), seed)
        psi = convert_form(fld, gram, Direction.HERMITIAN_TO_ALTERNATING)
        assert np.array_equal(convert_form(fld, psi, Direction.ALTERNATING_TO_HERMITIAN), gram)


def test_alternating_input_must_be_internally_hermitian(f9):
    psi = np.zeros((4, 4), dtype=np.int64)
    # psi(alpha e0, e1) = 0 but psi(e0, conj(alpha) e1) = -1
    psi[0, 3], psi[3, 0] = 1, 2
    with pytest.raises(FormError):
        convert_form(f9, psi, "alternating->hermitian")


def test_non_hermitian_input_is_rejected(f9):
    with pytest.raises(FormError):
        convert_form(f9, [[0, 1], [2, 0]], Direction.HERMITIAN_TO_ALTERNATING)


# ---------------------------------------------------------
# Isometry classes
# ---------------------------------------------------------
def test_local_field_scalars():
    x = LocalFieldScalar.from_rational(Fraction(18, 5), 3)
    assert x.valuation == 2
    assert x.unit_class == (2 * pow(5, -1, 3)) % 3
    assert x.is_norm()
    assert not LocalFieldScalar.from_rational(3, 3).is_norm()
    with pytest.raises(FormError):
        LocalFieldScalar.from_rational(0, 3)
    with pytest.raises(TypeError):
        LocalFieldScalar(0, 1)


def test_inert_parameter_is_a_non_residue():
    assert inert_parameter(3) == 2
    assert inert_parameter(5) == 2
    assert inert_parameter(7) == 3


@pytest.mark.parametrize("p", [3, 5, 7])
def test_anti_identity_is_quasi_split(p):
    for d in (2, 4):
        assert isometry_class(anti_identity(d), p) is IsometryClass.QUASI_SPLIT


def test_uniformizer_twist_changes_the_class():
    assert isometry_class([[1, 0], [0, 3]], 3) is IsometryClass.NON_QUASI_SPLIT
    assert isometry_class([[1, 0], [0, 9]], 3) is IsometryClass.QUASI_SPLIT
    assert isometry_class([["p", 0], [0, 1]], 5) is IsometryClass.NON_QUASI_SPLIT


def test_class_is_invariant_under_congruence():
    gram = [[0, (1, 1)], [(1, -1), 3]]
    det = determinant_class(gram, 3)
    root = sympy.sqrt(inert_parameter(3))
    hm = sympy.Matrix([[0, 1 + root], [1 - root, 3]])
    g = sympy.Matrix([[1, root], [0, 3]])
    congruent = (g.T * hm * g.applyfunc(lambda x: x.subs(root, -root))).applyfunc(sympy.expand)
    assert isometry_class(congruent.tolist(), 3) is isometry_class(gram, 3)
    assert determinant_class(congruent.tolist(), 3).valuation == det.valuation + 2


@pytest.mark.slow
def test_class_is_invariant_under_many_congruences():
    root = sympy.sqrt(inert_parameter(3))
    grams = [
        sympy.Matrix([[0, 1 + root], [1 - root, 3]]),
        sympy.Matrix([[1, 0], [0, 3]]),
        sympy.Matrix([[0, 1], [1, 0]]),
        sympy.Matrix([[1, 0], [0, 1]]),
    ]
    classes = [isometry_class(hm.tolist(), 3) for hm in grams]
    rng = np.random.default_rng(5)
    done = 0
    while done < 1000:
        a, b = rng.integers(-3, 4, size=(2, 2, 2))
        g = sympy.Matrix(2, 2, lambda i, j: int(a[i, j]) + int(b[i, j]) * root)
        if sympy.expand(g.det()) == 0:
            continue
        k = done % len(grams)
        congruent = (g.T * grams[k] * g.applyfunc(lambda x: x.subs(root, -root))).applyfunc(sympy.expand)
        assert isometry_class(congruent.tolist(), 3) is classes[k]
        done += 1


def test_singular_or_non_hermitian_grams_are_rejected():
    with pytest.raises(FormError):
        determinant_class([[1, 1], [1, 1]], 3)
    with pytest.raises(FormError):
        determinant_class([[0, (0, 1)], [(0, 1), 0]], 3)
    with pytest.raises(FormError):
        isometry_class([[1]], 3)
