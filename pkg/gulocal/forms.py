# gulocal\forms.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.

Hermitian pairings and everything built directly on them.

Key Functions:
- `pair`, `is_isotropic`, `dual_lattice`: the twisted pairing
  t^k · v^T · G · conj(w) on truncated series vectors, and the dual of a
  lattice with respect to a vanishing threshold.
- `convert_form`: the trace correspondence between hermitian forms over
  F_{p^2} and alternating F_p-forms with the scalar-internal hermitian property.
- `isometry_class`: the quasi-split / non-quasi-split decision for a hermitian
  Gram over the unramified quadratic extension, from the parity of the
  determinant valuation (computed exactly with sympy).
- `hensel_unitarize`: Newton correction of an approximate similitude into an
  exact one, doubling the t-adic precision each round.
"""

# 1. IMPORTS ####################################################################################################
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np
import sympy
from sympy.functions.combinatorial.numbers import legendre_symbol
from sympy.ntheory import multiplicity

from .gfring import (
    INT,
    FieldCtx,
    SeriesRing,
    Submodule,
    TruncMatrix,
    TruncSeries,
    WindowError,
    matpoly_mul,
    module_from_vectors,
    nullspace,
)

# 2. SETUP & CONSTANTS ##########################################################################################
logger = logging.getLogger(__name__)


class FormError(ValueError):
    """Raised for malformed forms, invalid scalars or inputs outside the algorithms' hypotheses."""


class Direction(str, Enum):
    HERMITIAN_TO_ALTERNATING = "hermitian->alternating"
    ALTERNATING_TO_HERMITIAN = "alternating->hermitian"


class IsometryClass(str, Enum):
    QUASI_SPLIT = "quasi-split"
    NON_QUASI_SPLIT = "non-quasi-split"


# 3. HERMITIAN FORMS ############################################################################################
def _gram_ring(ring: SeriesRing) -> SeriesRing:
    return SeriesRing(ring.base, 0, max(ring.width, 1))


@dataclass(frozen=True, eq=False)
class HermitianForm:
    """t^twist · v^T · gram · conj(w) on (ring)^d; gram defaults to the anti-identity J."""
    ring: SeriesRing
    d: int
    gram: Optional[TruncMatrix] = None
    twist: int = 0

    def __post_init__(self):
        if self.ring.base.deg != 2:
            raise FormError("Hermitian forms need the quadratic coefficient field.")
        gram = self.gram if self.gram is not None else TruncMatrix.anti_identity(_gram_ring(self.ring), self.d)
        if gram.rows != self.d or gram.cols != self.d:
            raise FormError(f"Gram of shape {gram.rows}x{gram.cols} does not match rank {self.d}.")
        if gram.ring.base != self.ring.base:
            raise FormError("Gram coefficients live in a different field.")
        if gram.conj().transpose() != gram:
            raise FormError("Gram matrix is not hermitian (conj(G)^T != G).")
        object.__setattr__(self, "gram", gram)

    @property
    def gram_valuation(self) -> int:
        nz = np.flatnonzero(self.gram.entries.any(axis=(0, 1)))
        return int(nz[0]) + self.gram.ring.lo if nz.size else 0


def _as_vectors(ring: SeriesRing, vectors) -> np.ndarray:
    if isinstance(vectors, Submodule):
        return vectors.generators()
    arr = np.asarray(vectors, dtype=INT)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.shape[-1] != ring.width:
        raise WindowError(f"Vectors of shape {arr.shape} do not match window width {ring.width}.")
    return arr


def pairing_table(phi: HermitianForm, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int]:
    """
    Full (untruncated) pairings of the vectors a (na, d, W) with b (nb, d, W).

    Returns the coefficient table (na, nb, L) and the t-exponent of its first column.
    """
    fld = phi.ring.base
    left = matpoly_mul(fld, a, phi.gram.entries)
    table = matpoly_mul(fld, left, fld.frob(b).transpose(1, 0, 2))
    start = 2 * phi.ring.lo + phi.gram.ring.lo + phi.twist
    return table, start


def pair(phi: HermitianForm, v: Sequence[TruncSeries], w: Sequence[TruncSeries]) -> TruncSeries:
    if len(v) != phi.d or len(w) != phi.d:
        raise FormError(f"Vectors must have length {phi.d}.")
    a = np.stack([s.coeffs for s in v])[None]
    b = np.stack([s.coeffs for s in w])[None]
    table, start = pairing_table(phi, a, b)
    return TruncSeries(phi.ring, phi.ring.truncate(table[0, 0], start))


def is_isotropic(phi: HermitianForm, vectors, threshold: int) -> bool:
    """True iff every pairing among the given vectors vanishes below t^threshold."""
    vecs = _as_vectors(phi.ring, vectors)
    if vecs.shape[0] == 0:
        return True
    table, start = pairing_table(phi, vecs, vecs)
    cut = threshold - start
    if cut <= 0:
        return True
    return not np.any(table[:, :, :cut])


def dual_lattice(phi: HermitianForm, lattice: Submodule, threshold: int) -> Submodule:
    """
    {x : pair(g, x) has no terms below t^threshold for every generator g of the lattice}.

    Exact inside the window as long as threshold <= hi + lo + twist + (lowest gram exponent);
    beyond that the truncated generators no longer determine the answer.
    """
    ring = lattice.ring
    if ring != phi.ring or lattice.rank != phi.d:
        raise WindowError("Lattice and form live in different ambient modules.")
    limit = ring.hi + ring.lo + phi.twist + phi.gram_valuation
    if threshold > limit:
        raise WindowError(f"Window [{ring.lo}, {ring.hi}) is too narrow to express the dual at threshold "
                          f"{threshold} (limit {limit}).")
    fld = ring.base
    w = ring.width
    gens = lattice.generators()
    h = matpoly_mul(fld, gens, phi.gram.entries) if gens.shape[0] else np.zeros((0, phi.d, 1), dtype=INT)
    h_start = ring.lo + phi.gram.ring.lo
    first = phi.twist + h_start + ring.lo
    degrees = np.arange(first, threshold, dtype=INT)

    if gens.shape[0] == 0 or degrees.size == 0:
        system = np.zeros((0, phi.d * w), dtype=INT)
    else:
        idx = degrees[:, None] - phi.twist - ring.exponents()[None, :] - h_start
        valid = (idx >= 0) & (idx < h.shape[2])
        picked = h[:, :, np.clip(idx, 0, h.shape[2] - 1)]  # (n, d, nD, W)
        picked = np.where(valid[None, None], picked, 0)
        system = picked.transpose(0, 2, 1, 3).reshape(-1, phi.d * w)

    solutions = nullspace(fld, system)
    return module_from_vectors(ring, phi.d, fld.frob(solutions))


# 4. SIMILITUDES ################################################################################################
def _similitude_defect(g: TruncMatrix, phi: HermitianForm, c: int) -> TruncMatrix:
    gram = phi.gram.rewindow(g.ring)
    return g.transpose() @ gram @ g.conj() - gram.scale(c)


def is_similitude(g: TruncMatrix, phi: HermitianForm, c: int) -> bool:
    """Exact predicate g^T G conj(g) = c G inside the window of g."""
    return _similitude_defect(g, phi, c).is_zero()


def multiplier_mod_t(g: TruncMatrix, phi: HermitianForm) -> Optional[int]:
    """The constant c with g^T G conj(g) = c G mod t, or None if g is no similitude mod t."""
    fld = g.ring.base
    g0 = g.mod_t()
    gram0 = phi.gram.rewindow(g.ring).mod_t()
    lhs = fld.sum(fld.mul(fld.sum(fld.mul(g0.T[:, :, None], gram0[None, :, :]), axis=1)[:, :, None],
                          fld.frob(g0)[None, :, :]), axis=1)
    nz = np.flatnonzero(gram0)
    if nz.size == 0:
        return None
    i, j = np.unravel_index(nz[0], gram0.shape)
    c = int(fld.div(lhs[i, j], gram0[i, j]))
    if not np.array_equal(lhs, fld.mul(gram0, c)):
        return None
    return c


def apply_matrix(g: TruncMatrix, lattice: Submodule) -> Submodule:
    """Image g·L of a lattice under a matrix with power-series entries."""
    ring = lattice.ring
    if g.ring.lo != 0 or g.ring.width < ring.width or g.ring.base != ring.base:
        raise WindowError(f"Matrix window [{g.ring.lo}, {g.ring.hi}) cannot act on lattices in "
                          f"[{ring.lo}, {ring.hi}).")
    gens = lattice.generators()
    if gens.shape[0] == 0:
        return lattice
    full = matpoly_mul(ring.base, g.entries[:, :, :ring.width], gens.transpose(1, 0, 2))
    image = ring.truncate(full, ring.lo)
    return module_from_vectors(ring, lattice.rank, image.transpose(1, 0, 2))


def hensel_unitarize(g: TruncMatrix, phi: HermitianForm, c: int,
                     flag_bounds: Sequence[Submodule] = ()) -> TruncMatrix:
    """
    Corrects g (a similitude with multiplier c modulo t) into an exact similitude
    congruent to g modulo t.

    Each round solves Δ^T · G · conj(g) = −E/2 for the current defect
    E = g^T G conj(g) − cG. Since E ≡ 0 mod t^k, the new defect Δ^T G conj(Δ) is
    ≡ 0 mod t^{2k}, so the number of rounds is logarithmic in the window height.
    """
    ring = g.ring
    fld = ring.base
    if ring.lo != 0:
        raise WindowError("Unitarization works over power-series windows (lo = 0).")
    if fld.deg != 2:
        raise FormError("Unitarization needs the quadratic coefficient field.")
    c = int(c)
    if c == 0 or int(fld.frob(c)) != c:
        raise FormError(f"Multiplier {c} must be a nonzero element fixed by conjugation.")

    defect = _similitude_defect(g, phi, c)
    if np.any(defect.mod_t()):
        raise FormError("Input is not a similitude modulo t; nothing to lift.")

    gram = phi.gram.rewindow(ring)
    minus_half = int(fld.neg(fld.inv(2)))
    precision = 1
    rounds = 0
    while precision < ring.width and not defect.is_zero():
        correction = (defect @ (gram @ g.conj()).inverse()).scale(minus_half).transpose()
        g = g + correction
        defect = _similitude_defect(g, phi, c)
        precision *= 2
        rounds += 1
    if not defect.is_zero():
        raise FormError("Newton correction did not converge inside the window.")

    for flag in flag_bounds:
        if not flag.contains(apply_matrix(g, flag)):
            raise FormError(f"Corrected matrix no longer preserves the flag {flag!r}.")
    logger.debug(f"Unitarized a {g.rows}x{g.cols} matrix in {rounds} Newton round(s).")
    return g


# 5. TRACE CORRESPONDENCE #######################################################################################
def default_zeta(fld: FieldCtx) -> int:
    """2α + a for the modulus x^2 + a x + b; conj(ζ) = −ζ."""
    if fld.deg != 2:
        raise FormError("ζ lives in the quadratic extension.")
    return int(fld.encode(fld.modulus[1], 2))


def _scalar_action(fld: FieldCtx, x: int, d: int) -> np.ndarray:
    """Matrix of v ↦ x·v on F_p-coordinates (basis 1, α per entry), acting on row vectors."""
    block = np.zeros((2, 2), dtype=INT)
    for r, beta in enumerate((1, fld.generator)):
        c0, c1 = fld.decode(fld.mul(x, beta))
        block[r] = (c0, c1)
    return np.kron(np.eye(d, dtype=INT), block)


def convert_form(fld: FieldCtx, gram, direction: Direction, zeta: Optional[int] = None) -> np.ndarray:
    """
    hermitian->alternating: ψ(u, w) = Tr(ζ · φ(u, w)) written on the F_p-basis (e_i, α e_i).
    alternating->hermitian: the inverse, φ(u, w) = ½(ζ^{-1} ψ(u, w) + ζ^{-1}-conjugate average).
    """
    if fld.deg != 2:
        raise FormError("The trace correspondence needs the quadratic extension F_{p^2}.")
    zeta = default_zeta(fld) if zeta is None else int(zeta)
    if zeta == 0 or int(fld.frob(zeta)) != int(fld.neg(zeta)):
        raise FormError(f"ζ={zeta} is not a nonzero element with conj(ζ) = −ζ.")
    gram = np.asarray(gram, dtype=INT)
    direction = Direction(direction)
    betas = np.array([1, fld.generator], dtype=INT)

    if direction is Direction.HERMITIAN_TO_ALTERNATING:
        d = gram.shape[0]
        if gram.shape != (d, d) or not np.array_equal(fld.frob(gram).T, gram):
            raise FormError("Input Gram is not hermitian.")
        coef = fld.mul(fld.mul(zeta, betas[:, None]), fld.frob(betas)[None, :])  # (r, s)
        psi = fld.trace(fld.mul(coef[None, :, None, :], gram[:, None, :, None]))  # (i, r, j, s)
        return psi.reshape(2 * d, 2 * d)

    n = gram.shape[0]
    if gram.shape != (n, n) or n % 2:
        raise FormError("Alternating Gram must be square of even size.")
    if np.any(gram >= fld.p) or np.any(gram < 0):
        raise FormError("Alternating Gram entries must lie in F_p.")
    if np.any((gram + gram.T) % fld.p) or np.any(np.diag(gram)):
        raise FormError("Input Gram is not alternating.")
    d = n // 2
    alpha = fld.generator
    s_alpha = _scalar_action(fld, alpha, d)
    s_conj = _scalar_action(fld, int(fld.frob(alpha)), d)
    if np.any((s_alpha @ gram - gram @ s_conj.T) % fld.p):
        raise FormError("Alternating form is not internally hermitian.")

    zinv = int(fld.inv(zeta))
    y0, y1 = (int(c) for c in fld.decode(zinv))
    psi = gram.reshape(d, 2, d, 2)
    total = fld.add(fld.add(fld.mul(zinv, psi[:, 0, :, 0]), fld.mul(y0, psi[:, 0, :, 0])),
                    fld.mul(y1, psi[:, 1, :, 0]))
    herm = fld.mul(int(fld.inv(2)), total)
    if not np.array_equal(fld.frob(herm).T, herm):
        raise FormError("Correspondence produced a non-hermitian Gram; input is inconsistent.")
    return herm


# 6. ISOMETRY CLASSES ###########################################################################################
@dataclass(frozen=True)
class LocalFieldScalar:
    """p^valuation · u with u a unit of residue class unit_class; stands for that exact rational."""
    valuation: int
    unit_class: int
    p: int

    def __post_init__(self):
        if not 1 <= self.unit_class <= self.p - 1:
            raise FormError(f"Unit class {self.unit_class} outside 1..{self.p - 1}.")

    @classmethod
    def from_rational(cls, x, p: int) -> "LocalFieldScalar":
        x = sympy.Rational(x)
        if x == 0:
            raise FormError("Zero has no valuation.")
        num, den = int(x.p), int(x.q)
        v = multiplicity(p, num) - multiplicity(p, den)
        num //= p ** multiplicity(p, num)
        den //= p ** multiplicity(p, den)
        return cls(v, (num * pow(den, -1, p)) % p, p)

    def to_sympy(self):
        return sympy.Integer(self.unit_class) * sympy.Rational(self.p) ** self.valuation

    def is_norm(self) -> bool:
        return self.valuation % 2 == 0


def inert_parameter(p: int) -> int:
    """Least positive quadratic non-residue r; Q_p(√r) is the unramified quadratic extension."""
    return next(r for r in range(2, p) if legendre_symbol(r, p) == -1)


def _entry(x: Any, root, p: int):
    if isinstance(x, LocalFieldScalar):
        return x.to_sympy()
    if isinstance(x, (int, Fraction)):
        return sympy.Rational(x)
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return sympy.Rational(x[0]) + sympy.Rational(x[1]) * root
    if isinstance(x, str):
        return sympy.sympify(x, locals={"s": root, "p": sympy.Integer(p)})
    if isinstance(x, sympy.Expr):
        return x
    raise FormError(f"Unsupported Gram entry {x!r}.")


def determinant_class(gram: Sequence[Sequence[Any]], p: int) -> LocalFieldScalar:
    """Exact determinant of a hermitian Gram over Q(√r), as a p-adic class."""
    root = sympy.sqrt(inert_parameter(p))
    d = len(gram)
    if any(len(row) != d for row in gram):
        raise FormError("Gram must be square.")
    mat = sympy.Matrix(d, d, lambda i, j: _entry(gram[i][j], root, p))
    conj = mat.applyfunc(lambda x: sympy.expand(x.subs(root, -root)))
    if (conj.T - mat).applyfunc(sympy.expand) != sympy.zeros(d, d):
        raise FormError("Gram is not hermitian.")
    det = sympy.expand(mat.det(method="berkowitz"))
    if det == 0:
        raise FormError("Gram is singular.")
    if sympy.expand(det - det.subs(root, -root)) != 0 or not det.is_rational:
        raise FormError(f"Determinant {det} of a hermitian Gram should be rational.")
    return LocalFieldScalar.from_rational(det, p)


def isometry_class(gram: Sequence[Sequence[Any]], p: int) -> IsometryClass:
    """Quasi-split iff the determinant is a norm, i.e. has even valuation."""
    if len(gram) % 2:
        raise FormError("Isometry classes are only decided for even rank.")
    det = determinant_class(gram, p)
    result = IsometryClass.QUASI_SPLIT if det.is_norm() else IsometryClass.NON_QUASI_SPLIT
    logger.debug(f"Determinant class {det} -> {result.value}")
    return result
