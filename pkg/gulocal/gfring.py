# gulocal\gfring.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.

Finite-field and truncated power-series arithmetic for the lattice engine.

Everything the lattice, form and model modules compute ultimately reduces to
linear algebra over F_{p^2} on coefficient vectors of truncated Laurent series
K[t]/(t-window). This module provides that substrate as immutable values backed
by numpy integer arrays, so that whole coefficient blocks are combined with a
single table lookup instead of per-element Python arithmetic.

Key Features:
- **Table-Driven Fields:** `field_ctx(p, deg)` builds (and caches) log/antilog,
  multiplication, inverse and Frobenius tables for F_p or F_{p^2}. Elements are
  plain integers `c0 + c1*p` for `c0 + c1*alpha`, alpha a primitive root of the
  stored modulus.
- **Windowed Series Rings:** `SeriesRing(base, lo, hi)` holds exponents
  `lo..hi-1`. Products drop terms at or above `hi` and refuse to produce terms
  below `lo`.
- **Canonical Submodules:** `submodule_canonicalize` turns any generating set
  into the reduced echelon basis of its t-stable span, so equal modules compare
  bit-identically and hash consistently.
- **Subspace Streams:** `iter_t_stable` walks every t-stable subspace squeezed
  between two coordinate lattices in a fixed, reproducible order. It is the
  engine behind the local-model enumeration.
"""

# 1. IMPORTS ####################################################################################################
import functools
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np
from sympy import isprime
from sympy.functions.combinatorial.numbers import legendre_symbol
from sympy.ntheory import primitive_root

# 2. SETUP & CONSTANTS ##########################################################################################
logger = logging.getLogger(__name__)

INT = np.int64


class FieldError(ValueError):
    """Raised for invalid field parameters or impossible field operations."""


class WindowError(ValueError):
    """Raised when a computation would leave the exponent window of a series ring."""


# 3. FINITE FIELDS ##############################################################################################
@dataclass(frozen=True)
class FieldCtx:
    """
    Arithmetic context for F_q with q = p**deg, deg in {1, 2}.

    All element operations accept python ints or numpy integer arrays and
    broadcast like numpy does.
    """
    p: int
    deg: int
    modulus: tuple[int, ...]
    exp_table: np.ndarray = field(repr=False, compare=False)
    log_table: np.ndarray = field(repr=False, compare=False)
    mul_table: np.ndarray = field(repr=False, compare=False)
    inv_table: np.ndarray = field(repr=False, compare=False)
    frob_table: np.ndarray = field(repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.p ** self.deg

    @property
    def generator(self) -> int:
        return int(self.exp_table[1]) if self.q > 2 else 1

    def decode(self, x):
        x = np.asarray(x, dtype=INT)
        return x % self.p, x // self.p

    def encode(self, c0, c1=0):
        return np.asarray(c0, dtype=INT) % self.p + (np.asarray(c1, dtype=INT) % self.p) * self.p

    def element(self, c0: int, c1: int = 0) -> int:
        if self.deg == 1 and c1 % self.p:
            raise FieldError(f"F_{self.p} has no second coordinate (got c1={c1}).")
        return int(self.encode(c0, c1))

    def add(self, a, b):
        a0, a1 = self.decode(a)
        b0, b1 = self.decode(b)
        return self.encode(a0 + b0, a1 + b1)

    def sub(self, a, b):
        a0, a1 = self.decode(a)
        b0, b1 = self.decode(b)
        return self.encode(a0 - b0, a1 - b1)

    def neg(self, a):
        a0, a1 = self.decode(a)
        return self.encode(-a0, -a1)

    def mul(self, a, b):
        return self.mul_table[np.asarray(a, dtype=INT), np.asarray(b, dtype=INT)]

    def inv(self, a):
        a = np.asarray(a, dtype=INT)
        if np.any(a == 0):
            raise FieldError("Zero has no multiplicative inverse.")
        return self.inv_table[a]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def frob(self, a):
        return self.frob_table[np.asarray(a, dtype=INT)]

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            return 0 if k > 0 else 1
        return int(self.exp_table[(int(self.log_table[a]) * k) % (self.q - 1)])

    def sum(self, a, axis=None):
        a0, a1 = self.decode(a)
        return self.encode(a0.sum(axis=axis), a1.sum(axis=axis))

    def trace(self, a):
        return self.add(a, self.frob(a))

    def norm(self, a):
        return self.mul(a, self.frob(a))

    def is_prime_subfield(self, a) -> bool:
        return bool(np.all(self.frob(a) == np.asarray(a)))


def _primitive_quadratic(p: int) -> tuple[tuple[int, int, int], list[int]]:
    """Least monic x^2 + a x + b whose root is primitive in F_{p^2}, with the power table of that root."""
    size = p * p
    for a in range(p):
        for b in range(1, p):
            if legendre_symbol((a * a - 4 * b) % p, p) != -1:
                continue
            powers = []
            c0, c1 = 1, 0
            for _ in range(size - 1):
                powers.append(c0 + c1 * p)
                # (c0 + c1 x) * x with x^2 = -a x - b
                c0, c1 = (-b * c1) % p, (c0 - a * c1) % p
                if (c0, c1) == (1, 0):
                    break
            if len(powers) == size - 1:
                return (b, a, 1), powers
    raise FieldError(f"No primitive quadratic modulus found for p={p}.")


@functools.lru_cache(maxsize=None)
def field_ctx(p: int, deg: int = 2) -> FieldCtx:
    """Builds the cached arithmetic context for F_{p^deg}."""
    if deg not in (1, 2):
        raise FieldError(f"Only prime fields and quadratic extensions are supported (deg={deg}).")
    if p == 2 or not isprime(p):
        raise FieldError(f"The characteristic must be an odd prime (got p={p}).")

    size = p ** deg
    if deg == 1:
        g = int(primitive_root(p))
        modulus = ((-g) % p, 1)
        powers = [pow(g, k, p) for k in range(p - 1)]
    else:
        modulus, powers = _primitive_quadratic(p)

    exp_table = np.array(powers, dtype=INT)
    log_table = np.full(size, -1, dtype=INT)
    log_table[exp_table] = np.arange(size - 1, dtype=INT)

    logs = log_table[1:]
    mul_table = np.zeros((size, size), dtype=INT)
    mul_table[1:, 1:] = exp_table[(logs[:, None] + logs[None, :]) % (size - 1)]
    inv_table = np.zeros(size, dtype=INT)
    inv_table[1:] = exp_table[(-logs) % (size - 1)]
    frob_table = np.zeros(size, dtype=INT)
    frob_table[1:] = exp_table[(p * logs) % (size - 1)]

    for table in (exp_table, log_table, mul_table, inv_table, frob_table):
        table.setflags(write=False)

    logger.debug(f"Built F_{p}^{deg} tables with modulus {modulus}.")
    return FieldCtx(p, deg, modulus, exp_table, log_table, mul_table, inv_table, frob_table)


# 4. DENSE LINEAR ALGEBRA OVER F_q ##############################################################################
def rref(fld: FieldCtx, matrix) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row echelon form over the field; returns the nonzero rows and their pivot columns."""
    mat = np.array(matrix, dtype=INT, copy=True)
    if mat.ndim != 2:
        raise ValueError(f"rref expects a 2-d array, got shape {mat.shape}.")
    n_rows, n_cols = mat.shape
    pivots = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.flatnonzero(mat[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            mat[[r, k]] = mat[[k, r]]
        mat[r] = fld.mul(mat[r], fld.inv(mat[r, c]))
        others = np.flatnonzero(mat[:, c])
        others = others[others != r]
        if others.size:
            factors = mat[others, c]
            mat[others] = fld.sub(mat[others], fld.mul(factors[:, None], mat[r][None, :]))
        pivots.append(c)
        r += 1
    return mat[:r], tuple(pivots)


def rank(fld: FieldCtx, matrix) -> int:
    matrix = np.asarray(matrix, dtype=INT)
    if matrix.size == 0:
        return 0
    return len(rref(fld, matrix)[1])


def nullspace(fld: FieldCtx, matrix) -> np.ndarray:
    """Basis (as rows) of the right kernel {x : matrix @ x = 0}."""
    matrix = np.asarray(matrix, dtype=INT)
    n_cols = matrix.shape[1]
    reduced, pivots = rref(fld, matrix) if matrix.shape[0] else (np.zeros((0, n_cols), dtype=INT), ())
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = np.zeros((len(free), n_cols), dtype=INT)
    if free:
        basis[np.arange(len(free)), free] = 1
        if pivots:
            basis[:, list(pivots)] = fld.neg(reduced[:, free].T)
    return basis


def field_inverse(fld: FieldCtx, matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=INT)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise FieldError(f"Only square matrices can be inverted (shape {matrix.shape}).")
    reduced, pivots = rref(fld, np.hstack([matrix, np.eye(n, dtype=INT)]))
    if pivots[:n] != tuple(range(n)) or len(pivots) < n or pivots[n - 1] >= n:
        raise FieldError("Matrix is singular over the residue field.")
    return reduced[:, n:]


def matpoly_mul(fld: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full product of polynomial matrices a (r, s, Wa) and b (s, c, Wb), shape (r, c, Wa + Wb - 1)."""
    r, s, wa = a.shape
    s2, c, wb = b.shape
    if s != s2:
        raise ValueError(f"Inner dimensions differ ({s} vs {s2}).")
    prod = fld.mul_table[a[:, :, None, :, None], b[None, :, :, None, :]]
    c0, c1 = fld.decode(prod)
    c0 = c0.sum(axis=1)
    c1 = c1.sum(axis=1)
    out0 = np.zeros((r, c, wa + wb - 1), dtype=INT)
    out1 = np.zeros_like(out0)
    for i in range(wa):
        out0[:, :, i:i + wb] += c0[:, :, i, :]
        out1[:, :, i:i + wb] += c1[:, :, i, :]
    return fld.encode(out0, out1)


# 5. SERIES RINGS, SERIES AND MATRICES ##########################################################################
@dataclass(frozen=True)
class SeriesRing:
    """Truncated Laurent series over `base` with exponents lo..hi-1."""
    base: FieldCtx
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > 0 or self.hi <= self.lo:
            raise WindowError(f"Invalid window [{self.lo}, {self.hi}): need lo <= 0 and hi > lo.")

    @property
    def width(self) -> int:
        return self.hi - self.lo

    def exponents(self) -> np.ndarray:
        return np.arange(self.lo, self.hi, dtype=INT)

    def truncate(self, coeffs: np.ndarray, start: int) -> np.ndarray:
        """Re-window coefficients whose last axis begins at exponent `start`; mass below lo is an error."""
        coeffs = np.asarray(coeffs, dtype=INT)
        below = self.lo - start
        if below > 0:
            if np.any(coeffs[..., :below]):
                raise WindowError(f"Result has terms below t^{self.lo}; widen the window.")
            coeffs = coeffs[..., below:]
            start = self.lo
        out = np.zeros(coeffs.shape[:-1] + (self.width,), dtype=INT)
        offset = start - self.lo
        take = min(coeffs.shape[-1], self.width - offset)
        if take > 0:
            out[..., offset:offset + take] = coeffs[..., :take]
        return out


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=INT, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TruncSeries:
    ring: SeriesRing
    coeffs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.coeffs)
        if arr.shape != (self.ring.width,):
            raise WindowError(f"Coefficient vector of length {arr.shape} does not fit window width {self.ring.width}.")
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zero(cls, ring: SeriesRing) -> "TruncSeries":
        return cls(ring, np.zeros(ring.width, dtype=INT))

    @classmethod
    def monomial(cls, ring: SeriesRing, c: int, e: int) -> "TruncSeries":
        if not ring.lo <= e:
            raise WindowError(f"t^{e} lies below the window [{ring.lo}, {ring.hi}).")
        arr = np.zeros(ring.width, dtype=INT)
        if e < ring.hi:
            arr[e - ring.lo] = c
        return cls(ring, arr)

    @classmethod
    def constant(cls, ring: SeriesRing, c: int) -> "TruncSeries":
        return cls.monomial(ring, c, 0)

    def coefficient(self, e: int) -> int:
        if self.ring.lo <= e < self.ring.hi:
            return int(self.coeffs[e - self.ring.lo])
        return 0

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def valuation(self) -> Optional[int]:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[0]) + self.ring.lo if nz.size else None

    def _check(self, other: "TruncSeries"):
        if other.ring != self.ring:
            raise WindowError("Series live in different rings.")

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        return TruncSeries(self.ring, self.ring.base.add(self.coeffs, other.coeffs))

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        return TruncSeries(self.ring, self.ring.base.sub(self.coeffs, other.coeffs))

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.ring, self.ring.base.neg(self.coeffs))

    def __mul__(self, other) -> "TruncSeries":
        if isinstance(other, TruncSeries):
            self._check(other)
            full = matpoly_mul(self.ring.base, self.coeffs[None, None, :], other.coeffs[None, None, :])[0, 0]
            return TruncSeries(self.ring, self.ring.truncate(full, 2 * self.ring.lo))
        return TruncSeries(self.ring, self.ring.base.mul(self.coeffs, int(other)))

    __rmul__ = __mul__

    def shift(self, k: int) -> "TruncSeries":
        """Multiplication by t^k."""
        return TruncSeries(self.ring, self.ring.truncate(self.coeffs, self.ring.lo + k))

    def conj(self) -> "TruncSeries":
        return conj(self)

    def __eq__(self, other) -> bool:
        return isinstance(other, TruncSeries) and other.ring == self.ring and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self) -> int:
        return hash((self.ring, self.coeffs.tobytes()))

    def __repr__(self) -> str:
        terms = [f"{int(c)}*t^{e}" for e, c in zip(self.ring.exponents(), self.coeffs) if c]
        return f"TruncSeries({' + '.join(terms) or '0'})"


@dataclass(frozen=True, eq=False)
class TruncMatrix:
    ring: SeriesRing
    entries: np.ndarray  # (rows, cols, width)

    def __post_init__(self):
        arr = _frozen(self.entries)
        if arr.ndim != 3 or arr.shape[2] != self.ring.width:
            raise WindowError(f"Matrix entries of shape {arr.shape} do not match window width {self.ring.width}.")
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @classmethod
    def zeros(cls, ring: SeriesRing, rows: int, cols: int) -> "TruncMatrix":
        return cls(ring, np.zeros((rows, cols, ring.width), dtype=INT))

    @classmethod
    def from_constant(cls, ring: SeriesRing, matrix) -> "TruncMatrix":
        matrix = np.asarray(matrix, dtype=INT)
        if not ring.lo <= 0 < ring.hi:
            raise WindowError(f"Constants are not representable in [{ring.lo}, {ring.hi}).")
        arr = np.zeros(matrix.shape + (ring.width,), dtype=INT)
        arr[:, :, -ring.lo] = matrix
        return cls(ring, arr)

    @classmethod
    def identity(cls, ring: SeriesRing, n: int) -> "TruncMatrix":
        return cls.from_constant(ring, np.eye(n, dtype=INT))

    @classmethod
    def anti_identity(cls, ring: SeriesRing, n: int) -> "TruncMatrix":
        return cls.from_constant(ring, np.eye(n, dtype=INT)[::-1])

    @classmethod
    def diagonal(cls, ring: SeriesRing, entries: Sequence[TruncSeries]) -> "TruncMatrix":
        arr = np.zeros((len(entries), len(entries), ring.width), dtype=INT)
        for i, s in enumerate(entries):
            arr[i, i] = s.coeffs
        return cls(ring, arr)

    def entry(self, i: int, j: int) -> TruncSeries:
        return TruncSeries(self.ring, self.entries[i, j])

    def _check(self, other: "TruncMatrix"):
        if other.ring != self.ring:
            raise WindowError("Matrices live in different rings.")

    def __add__(self, other: "TruncMatrix") -> "TruncMatrix":
        self._check(other)
        return TruncMatrix(self.ring, self.ring.base.add(self.entries, other.entries))

    def __sub__(self, other: "TruncMatrix") -> "TruncMatrix":
        self._check(other)
        return TruncMatrix(self.ring, self.ring.base.sub(self.entries, other.entries))

    def __neg__(self) -> "TruncMatrix":
        return TruncMatrix(self.ring, self.ring.base.neg(self.entries))

    def __matmul__(self, other: "TruncMatrix") -> "TruncMatrix":
        self._check(other)
        full = matpoly_mul(self.ring.base, self.entries, other.entries)
        return TruncMatrix(self.ring, self.ring.truncate(full, 2 * self.ring.lo))

    def scale(self, c: int) -> "TruncMatrix":
        return TruncMatrix(self.ring, self.ring.base.mul(self.entries, int(c)))

    def shift(self, k: int) -> "TruncMatrix":
        return TruncMatrix(self.ring, self.ring.truncate(self.entries, self.ring.lo + k))

    def transpose(self) -> "TruncMatrix":
        return TruncMatrix(self.ring, self.entries.transpose(1, 0, 2))

    @property
    def T(self) -> "TruncMatrix":
        return self.transpose()

    def conj(self) -> "TruncMatrix":
        return conj(self)

    def rewindow(self, ring: SeriesRing) -> "TruncMatrix":
        if ring.base != self.ring.base:
            raise WindowError("Cannot move a matrix between different coefficient fields.")
        return TruncMatrix(ring, ring.truncate(self.entries, self.ring.lo))

    def mod_t(self) -> np.ndarray:
        if self.ring.lo != 0:
            raise WindowError("Reduction mod t needs a power-series window (lo = 0).")
        return np.array(self.entries[:, :, 0])

    def is_zero(self) -> bool:
        return not np.any(self.entries)

    def inverse(self) -> "TruncMatrix":
        """Inverse over a power-series window: residue-field inverse mod t, then Newton lifting."""
        if self.rows != self.cols:
            raise FieldError("Only square matrices can be inverted.")
        fld = self.ring.base
        x = TruncMatrix.from_constant(self.ring, field_inverse(fld, self.mod_t()))
        ident = TruncMatrix.identity(self.ring, self.rows)
        precision = 1
        while precision < self.ring.width:
            x = x + x @ (ident - self @ x)
            precision *= 2
        return x

    def __eq__(self, other) -> bool:
        return isinstance(other, TruncMatrix) and other.ring == self.ring and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.ring, self.entries.shape, self.entries.tobytes()))

    def to_lists(self) -> list:
        return self.entries.tolist()


def conj(x):
    """Coefficient-wise Frobenius on a series or matrix; t is fixed."""
    base = x.ring.base
    if base.deg != 2:
        raise FieldError("Conjugation needs a quadratic coefficient field.")
    if isinstance(x, TruncSeries):
        return TruncSeries(x.ring, base.frob(x.coeffs))
    if isinstance(x, TruncMatrix):
        return TruncMatrix(x.ring, base.frob(x.entries))
    raise TypeError(f"Cannot conjugate {type(x).__name__}.")


# 6. CANONICAL SUBMODULES #######################################################################################
@dataclass(frozen=True, eq=False)
class Submodule:
    """
    A t-stable K-subspace of the ambient module (K[t]-window)^rank, stored as the
    reduced echelon basis of its flattened coordinate vectors (row-major: ambient
    row, then exponent ascending). In that ordering the pivots inside each ambient
    row form an interval [start, hi), so the per-row starts are the divisor profile.
    """
    ring: SeriesRing
    rank: int
    basis: np.ndarray
    pivots: tuple[int, ...]
    row_bounds: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "basis", _frozen(self.basis).reshape(-1, self.rank * self.ring.width))

    @property
    def ambient_rank(self) -> int:
        return self.rank

    @property
    def dimension(self) -> int:
        return len(self.pivots)

    @property
    def fq_dimension(self) -> int:
        return self.dimension * self.ring.base.deg

    @property
    def row_starts(self) -> tuple[int, ...]:
        w = self.ring.width
        starts = [self.ring.hi] * self.rank
        for piv in self.pivots:
            row, e = divmod(piv, w)
            starts[row] = min(starts[row], e + self.ring.lo)
        return tuple(starts)

    @property
    def divisor_profile(self) -> tuple[int, ...]:
        return tuple(sorted(s for s in self.row_starts if s < self.ring.hi))

    def vectors(self) -> np.ndarray:
        return self.basis.reshape(-1, self.rank, self.ring.width)

    def generators(self) -> np.ndarray:
        """The canonical generators (pivot at the start of its row), shape (n, rank, width)."""
        w = self.ring.width
        starts = self.row_starts
        keep = [i for i, piv in enumerate(self.pivots) if piv % w + self.ring.lo == starts[piv // w]]
        return self.vectors()[keep]

    @property
    def canon(self) -> TruncMatrix:
        return TruncMatrix(self.ring, self.generators().transpose(1, 0, 2))

    def lowest_exponent(self) -> Optional[int]:
        cols = np.flatnonzero(self.basis.any(axis=0))
        if cols.size == 0:
            return None
        return int((cols % self.ring.width).min()) + self.ring.lo

    def full_from(self) -> int:
        """Least e such that t^e O^rank (truncated) lies inside the module."""
        for e in range(self.ring.lo, self.ring.hi + 1):
            if self.coordinate_meet_dimension([e] * self.rank) == self.rank * (self.ring.hi - e):
                return e
        return self.ring.hi

    def _check(self, other: "Submodule"):
        if other.ring != self.ring or other.rank != self.rank:
            raise WindowError("Submodules live in different ambient modules.")

    def reduce(self, vectors: np.ndarray) -> np.ndarray:
        """Residues of flattened vectors modulo the module (zero exactly for members)."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=INT))
        if self.dimension == 0:
            return vectors
        fld = self.ring.base
        coeffs = vectors[:, list(self.pivots)]
        prod = fld.mul(coeffs[:, :, None], self.basis[None, :, :])
        return fld.sub(vectors, fld.sum(prod, axis=1))

    def contains(self, other: "Submodule") -> bool:
        self._check(other)
        if other.dimension > self.dimension:
            return False
        return not np.any(self.reduce(other.basis))

    def contains_vector(self, vector) -> bool:
        return not np.any(self.reduce(np.asarray(vector, dtype=INT).reshape(1, -1)))

    def coordinate_meet_dimension(self, bounds: Sequence[int]) -> int:
        """dim of the intersection with {x : x_k has no terms below bounds[k]}."""
        w = self.ring.width
        outside = [k * w + j for k, b in enumerate(bounds) for j in range(0, min(max(b - self.ring.lo, 0), w))]
        if not outside or self.dimension == 0:
            return self.dimension
        return self.dimension - rank(self.ring.base, self.basis[:, outside])

    def shift(self, k: int) -> "Submodule":
        """t^k times the lattice; for k < 0 the top |k| exponents are filled (the module contains t^hi O)."""
        ring = self.ring
        if self.row_bounds is not None:
            for b in self.row_bounds:
                if b < ring.hi and b + k < ring.lo:
                    raise WindowError(f"Shift by t^{k} leaves the window [{ring.lo}, {ring.hi}).")
            return coordinate_lattice(ring, self.rank, [min(b + k, ring.hi) for b in self.row_bounds])
        moved = ring.truncate(self.vectors(), ring.lo + k).reshape(-1, self.rank * ring.width)
        fill = _unit_vectors(ring, self.rank, [ring.hi + k] * self.rank) if k < 0 else np.zeros((0, moved.shape[1]), INT)
        return _span(ring, self.rank, np.vstack([moved, fill]), stable=True)

    def lift(self, ring: SeriesRing) -> "Submodule":
        """The same lattice seen in a wider window (padding below, filling above)."""
        if ring.base != self.ring.base or ring.lo > self.ring.lo or ring.hi < self.ring.hi:
            raise WindowError(f"Cannot lift from [{self.ring.lo}, {self.ring.hi}) into [{ring.lo}, {ring.hi}).")
        if self.row_bounds is not None:
            return coordinate_lattice(ring, self.rank, [b if b < self.ring.hi else ring.hi if b > self.ring.hi else b
                                                        for b in self.row_bounds])
        vecs = np.zeros((self.dimension, self.rank, ring.width), dtype=INT)
        offset = self.ring.lo - ring.lo
        vecs[:, :, offset:offset + self.ring.width] = self.vectors()
        fill = _unit_vectors(ring, self.rank, [self.ring.hi] * self.rank)
        return _span(ring, self.rank, np.vstack([vecs.reshape(self.dimension, -1), fill]), stable=True)

    def serialize(self) -> dict:
        gens = self.generators()
        return {
            "lo": self.ring.lo,
            "hi": self.ring.hi,
            "p": self.ring.base.p,
            "modulus": list(self.ring.base.modulus),
            "rank": self.rank,
            "columns": [g.reshape(-1).tolist() for g in gens],
        }

    def __eq__(self, other) -> bool:
        return (isinstance(other, Submodule) and other.ring == self.ring and other.rank == self.rank
                and np.array_equal(other.basis, self.basis))

    def __hash__(self) -> int:
        return hash((self.ring, self.rank, self.basis.shape, self.basis.tobytes()))

    def __repr__(self) -> str:
        return f"Submodule(rank={self.rank}, window=[{self.ring.lo},{self.ring.hi}), starts={self.row_starts})"


def _t_closure(ring: SeriesRing, rank_: int, vectors: np.ndarray) -> np.ndarray:
    w = ring.width
    vecs = vectors.reshape(-1, rank_, w)
    blocks = [vecs]
    for j in range(1, w):
        moved = np.zeros_like(vecs)
        moved[:, :, j:] = vecs[:, :, :w - j]
        blocks.append(moved)
    return np.concatenate(blocks).reshape(-1, rank_ * w)


def _span(ring: SeriesRing, rank_: int, vectors: np.ndarray, stable: bool = False) -> Submodule:
    vectors = np.asarray(vectors, dtype=INT).reshape(-1, rank_ * ring.width)
    if not stable:
        vectors = _t_closure(ring, rank_, vectors)
    if vectors.shape[0] == 0:
        return Submodule(ring, rank_, np.zeros((0, rank_ * ring.width), dtype=INT), ())
    basis, pivots = rref(ring.base, vectors)
    return Submodule(ring, rank_, basis, pivots)


def _unit_vectors(ring: SeriesRing, rank_: int, bounds: Sequence[int]) -> np.ndarray:
    """Unit vectors at every (row k, exponent e) with max(bounds[k], lo) <= e < hi, in coordinate order."""
    w = ring.width
    cols = [k * w + (e - ring.lo) for k, b in enumerate(bounds) for e in range(max(b, ring.lo), ring.hi)]
    out = np.zeros((len(cols), rank_ * w), dtype=INT)
    out[np.arange(len(cols)), cols] = 1
    return out


def coordinate_lattice(ring: SeriesRing, rank_: int, bounds: Sequence[int]) -> Submodule:
    """The lattice ⊕_k t^{bounds[k]} O, truncated to the window."""
    if len(bounds) != rank_:
        raise WindowError(f"Expected {rank_} row bounds, got {len(bounds)}.")
    if any(b < ring.lo for b in bounds):
        raise WindowError(f"Row bounds {tuple(bounds)} reach below the window [{ring.lo}, {ring.hi}).")
    clipped = tuple(min(int(b), ring.hi) for b in bounds)
    units = _unit_vectors(ring, rank_, clipped)
    pivots = tuple(int(c) for c in np.flatnonzero(units.any(axis=0)))
    return Submodule(ring, rank_, units, pivots, row_bounds=clipped)


def zero_module(ring: SeriesRing, rank_: int) -> Submodule:
    return coordinate_lattice(ring, rank_, [ring.hi] * rank_)


def full_module(ring: SeriesRing, rank_: int) -> Submodule:
    return coordinate_lattice(ring, rank_, [ring.lo] * rank_)


def module_from_vectors(ring: SeriesRing, rank_: int, vectors) -> Submodule:
    """Canonical form of the t-stable span of flattened (or (n, rank, width)) vectors."""
    return _span(ring, rank_, np.asarray(vectors, dtype=INT))


def submodule_canonicalize(gens: TruncMatrix) -> Submodule:
    """Canonical form of the module spanned by the columns of `gens`."""
    vectors = gens.entries.transpose(1, 0, 2).reshape(gens.cols, -1)
    return _span(gens.ring, gens.rows, vectors)


def submodule_meet_join(a: Submodule, b: Submodule) -> tuple[Submodule, Submodule]:
    a._check(b)
    fld = a.ring.base
    join = _span(a.ring, a.rank, np.vstack([a.basis, b.basis]), stable=True)
    if a.dimension == 0 or b.dimension == 0:
        return zero_module(a.ring, a.rank), join
    kernel = nullspace(fld, np.vstack([a.basis, fld.neg(b.basis)]).T)
    alpha = kernel[:, :a.dimension]
    meet_vectors = fld.sum(fld.mul(alpha[:, :, None], a.basis[None, :, :]), axis=1)
    return _span(a.ring, a.rank, meet_vectors, stable=True), join


def meet_dimension(a: Submodule, b: Submodule) -> int:
    """dim(a ∩ b), with a fast path when either side is a coordinate lattice."""
    if b.row_bounds is not None:
        return a.coordinate_meet_dimension(b.row_bounds)
    if a.row_bounds is not None:
        return b.coordinate_meet_dimension(a.row_bounds)
    return submodule_meet_join(a, b)[0].dimension


def deserialize_submodule(data: dict) -> Submodule:
    fld = field_ctx(int(data["p"]), 2)
    if tuple(data["modulus"]) != fld.modulus:
        raise FieldError(f"Serialized modulus {data['modulus']} differs from the canonical {fld.modulus}.")
    ring = SeriesRing(fld, int(data["lo"]), int(data["hi"]))
    vectors = np.array(data["columns"], dtype=INT).reshape(-1, int(data["rank"]) * ring.width)
    return _span(ring, int(data["rank"]), vectors)


# 7. ENUMERATION OF t-STABLE SUBSPACES ##########################################################################
def _check_bounds(ring: SeriesRing, rank_: int, lower: Sequence[int], upper: Sequence[int]):
    if len(lower) != rank_ or len(upper) != rank_:
        raise WindowError("Row bounds must have one entry per ambient row.")
    for lo_k, up_k in zip(lower, upper):
        if not ring.lo <= lo_k <= up_k <= ring.hi:
            raise WindowError(f"Row bounds ({lo_k}, {up_k}) do not nest inside [{ring.lo}, {ring.hi}].")


def _profiles(ring: SeriesRing, lower: Sequence[int], upper: Sequence[int], dimension: int):
    for starts in itertools.product(*[range(lo_k, up_k + 1) for lo_k, up_k in zip(lower, upper)]):
        if sum(ring.hi - s for s in starts) == dimension:
            yield starts


def _free_slots(hi: int, starts: Sequence[int], lower: Sequence[int],
                upper: Sequence[int]) -> list[tuple[int, int, int]]:
    """
    (generator index, row, exponent) of every free entry for a profile.

    An entry e in a later row survives the first shift that pushes the generator's
    pivot past hi only if e + (hi - start) >= starts[row]; lower entries would put
    a pivot outside the profile.
    """
    slots = []
    gen_rows = [k for k, s in enumerate(starts) if s < upper[k]]
    for g, i in enumerate(gen_rows):
        for row in range(i + 1, len(starts)):
            for e in range(max(lower[row], starts[row] - (hi - starts[i])), starts[row]):
                slots.append((g, row, e))
    return slots


def count_t_stable(ring: SeriesRing, rank_: int, lower: Sequence[int], upper: Sequence[int], dimension: int) -> int:
    """
    Exact number of candidates `iter_t_stable` examines.

    For rank <= 2 every candidate is a module, so this is the length of the stream.
    From rank 3 on, the surviving candidates of a profile are cut out by polynomial
    conditions between free entries and the stream can be shorter.
    """
    _check_bounds(ring, rank_, lower, upper)
    q = ring.base.q
    return sum(q ** len(_free_slots(ring.hi, s, lower, upper)) for s in _profiles(ring, lower, upper, dimension))


def iter_t_stable(
    ring: SeriesRing,
    rank_: int,
    lower: Sequence[int],
    upper: Sequence[int],
    dimension: int,
    accept: Optional[Callable[[np.ndarray], bool]] = None,
) -> Iterator[Submodule]:
    """
    Yields every t-stable L with ⊕ t^{upper[k]} O ⊆ L ⊆ ⊕ t^{lower[k]} O and
    dim L = dimension (within the window), each exactly once.

    Candidates are parametrized by the start of the pivot interval in every row
    and the free entries of the echelon generators. A candidate whose t-span is
    larger than the profile is dropped; the others are the reduced echelon rows
    of distinct modules. `accept` sees the generator vectors (shape
    (n, rank, width)) of each candidate before it is canonicalized and can
    reject it cheaply.
    """
    _check_bounds(ring, rank_, lower, upper)
    w = ring.width
    q = ring.base.q
    fill = _unit_vectors(ring, rank_, upper).reshape(-1, rank_, w)

    for starts in _profiles(ring, lower, upper, dimension):
        gen_rows = [k for k, s in enumerate(starts) if s < upper[k]]
        slots = _free_slots(ring.hi, starts, lower, upper)
        base = np.zeros((len(gen_rows), rank_, w), dtype=INT)
        for g, row in enumerate(gen_rows):
            base[g, row, starts[row] - ring.lo] = 1
        if slots:
            slot_g = np.array([s[0] for s in slots])
            slot_row = np.array([s[1] for s in slots])
            slot_col = np.array([s[2] - ring.lo for s in slots])
        for values in itertools.product(range(q), repeat=len(slots)):
            gens = base.copy()
            if slots:
                gens[slot_g, slot_row, slot_col] = values
            vectors = np.concatenate([gens, fill])
            if accept is not None and not accept(vectors):
                continue
            module = _span(ring, rank_, vectors.reshape(-1, rank_ * w))
            if module.dimension != dimension:
                continue
            yield module
