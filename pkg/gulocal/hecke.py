# gulocal\hecke.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.

The Iwahori-Hecke algebra over Z[v, v^-1] with a (possibly unequal) parameter system.

Basis elements T_w are indexed by `WeylElement`s; the parameter of a simple
reflection s is q_s = v^(2 e_s), so every square root the Bernstein
normalization needs is again a monomial in v.

Key Features:
- **Products:** `HeckeAlgebra.multiply` expands T_x T_y along the reduced word of y
  using T_w T_s = T_{ws} (length up) or (q_s - 1) T_w + q_s T_{ws} (length down),
  caching basis products.
- **Bernstein Elements:** `theta`, `bernstein_z`, `sstrace_element`, `q_index`.
- **Center:** `is_central` (commutators with every T_s and with the generator of
  the length-zero group) and `central_from_characterization`, an independent
  exact linear solve over Q(v).
- **Parameters:** `fit_parameters` reads the exponents e_s off census cell sizes;
  nothing about them is assumed.
"""

# 1. IMPORTS ####################################################################################################
import logging
import threading
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import sympy
from sympy.polys.matrices import DomainMatrix

from . import weyl
from .weyl import Cocharacter, GroupCtx, WeylElement, compose, group_ctx, length, reduced_word

# 2. SETUP & CONSTANTS ##########################################################################################
logger = logging.getLogger(__name__)

V = sympy.Symbol("v")


class HeckeError(ValueError):
    """Raised for incompatible algebra contexts or malformed elements."""


class CharacterizationError(RuntimeError):
    """Raised when the central solve does not have the expected one-dimensional answer."""


class ParameterFitError(RuntimeError):
    """Raised when census cell sizes do not determine integral, consistent exponents."""


def laurent_terms(expr) -> list[tuple[int, int]]:
    """[(exponent of v, integer coefficient)] sorted by exponent."""
    terms: dict[int, int] = defaultdict(int)
    for term in sympy.Add.make_args(sympy.expand(expr)):
        if term == 0:
            continue
        coeff, exp = term.as_coeff_exponent(V)
        if coeff.free_symbols or not coeff.is_integer:
            raise HeckeError(f"{expr} is not a Laurent polynomial in v with integer coefficients.")
        terms[int(exp)] += int(coeff)
    return sorted((e, c) for e, c in terms.items() if c)


def from_laurent_terms(terms: Sequence[Sequence[int]]):
    return sympy.Add(*[int(c) * V ** int(e) for e, c in terms])


# 3. PARAMETERS #################################################################################################
@dataclass(frozen=True)
class ParameterSystem:
    """Exponent e >= 1 per conjugacy class of simple reflections; q_s = v^(2e)."""
    d: int
    classes: tuple[tuple[int, ...], ...]
    exponents: tuple[int, ...]

    def __post_init__(self):
        expected = weyl.reflection_classes(group_ctx(self.d))
        if tuple(self.classes) != expected:
            raise HeckeError(f"Classes {self.classes} differ from the conjugacy classes {expected}.")
        if len(self.exponents) != len(self.classes) or any(int(e) < 1 for e in self.exponents):
            raise HeckeError(f"Need one exponent >= 1 per class (got {self.exponents}).")

    @classmethod
    def equal(cls, d: int, e: int = 1) -> "ParameterSystem":
        classes = weyl.reflection_classes(group_ctx(d))
        return cls(d, classes, (e,) * len(classes))

    @classmethod
    def from_mapping(cls, d: int, exponents: Mapping[int, int]) -> "ParameterSystem":
        """Per-reflection exponents; conjugate reflections must agree."""
        classes = weyl.reflection_classes(group_ctx(d))
        values = []
        for cls_ in classes:
            found = {int(exponents[i]) for i in cls_ if i in exponents}
            if len(found) != 1:
                raise HeckeError(f"Reflections {cls_} are conjugate but have exponents {sorted(found)}.")
            values.append(found.pop())
        return cls(d, classes, tuple(values))

    def exponent(self, i: int) -> int:
        for cls_, e in zip(self.classes, self.exponents):
            if i in cls_:
                return e
        raise HeckeError(f"No simple reflection S_{i} for d={self.d}.")

    def word_exponent(self, word: Sequence[int]) -> int:
        return sum(self.exponent(i) for i in word)

    def to_dict(self) -> dict:
        return {"d": self.d, "classes": [list(c) for c in self.classes], "exponents": list(self.exponents)}


# 4. ELEMENTS ###################################################################################################
@dataclass(frozen=True)
class HeckeElement:
    """Finitely supported w -> Laurent polynomial; zero coefficients are never stored."""
    d: int
    terms: tuple[tuple[WeylElement, sympy.Expr], ...]

    @classmethod
    def from_mapping(cls, d: int, mapping: Mapping[WeylElement, sympy.Expr]) -> "HeckeElement":
        cleaned = []
        for w, c in mapping.items():
            if w.d != d:
                raise HeckeError(f"Element {w} does not have rank {d}.")
            c = sympy.expand(c)
            if c != 0:
                cleaned.append((w, c))
        cleaned.sort(key=lambda item: weyl.element_key(item[0]))
        return cls(d, tuple(cleaned))

    def as_dict(self) -> dict:
        return dict(self.terms)

    def coeff(self, w: WeylElement):
        return self.as_dict().get(w, sympy.Integer(0))

    @property
    def support(self) -> frozenset:
        return frozenset(w for w, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def to_json(self) -> list[dict]:
        return [{"element": w.to_dict(), "word": list(reduced_word(w)[0]),
                 "coeffs": [list(t) for t in laurent_terms(c)]} for w, c in self.terms]

    @classmethod
    def from_json(cls, d: int, data: Sequence[dict]) -> "HeckeElement":
        return cls.from_mapping(d, {WeylElement.from_dict(item["element"]): from_laurent_terms(item["coeffs"])
                                    for item in data})


# 5. ALGEBRA ####################################################################################################
class HeckeAlgebra:
    def __init__(self, params: ParameterSystem):
        self.params = params
        self.ctx: GroupCtx = group_ctx(params.d)
        self.d = params.d
        self._products: dict[tuple[WeylElement, WeylElement], dict] = {}
        self._lock = threading.Lock()

    # --- Construction ---
    def q_s(self, i: int):
        return V ** (2 * self.params.exponent(i))

    def basis(self, w: WeylElement) -> HeckeElement:
        return HeckeElement.from_mapping(self.d, {w: sympy.Integer(1)})

    def unit(self) -> HeckeElement:
        return self.basis(self.ctx.identity())

    def simple(self, i: int) -> HeckeElement:
        return self.basis(weyl.simple_reflection(self.ctx, i))

    def _check(self, *elements: HeckeElement):
        for h in elements:
            if h.d != self.d:
                raise HeckeError(f"Element of rank {h.d} used in the rank-{self.d} algebra.")

    # --- Linear structure ---
    def add(self, a: HeckeElement, b: HeckeElement) -> HeckeElement:
        self._check(a, b)
        out: dict = defaultdict(lambda: sympy.Integer(0))
        for h in (a, b):
            for w, c in h.terms:
                out[w] += c
        return HeckeElement.from_mapping(self.d, out)

    def scale(self, a: HeckeElement, c) -> HeckeElement:
        return HeckeElement.from_mapping(self.d, {w: c * x for w, x in a.terms})

    def sub(self, a: HeckeElement, b: HeckeElement) -> HeckeElement:
        return self.add(a, self.scale(b, -1))

    # --- Products ---
    def _right_simple(self, terms: Mapping[WeylElement, sympy.Expr], i: int) -> dict:
        s = weyl.simple_reflection(self.ctx, i)
        q = self.q_s(i)
        out: dict = defaultdict(lambda: sympy.Integer(0))
        for w, c in terms.items():
            ws = compose(w, s)
            if length(ws) > length(w):
                out[ws] += c
            else:
                out[w] += (q - 1) * c
                out[ws] += q * c
        return {w: sympy.expand(c) for w, c in out.items() if sympy.expand(c) != 0}

    def _basis_product(self, x: WeylElement, y: WeylElement) -> dict:
        key = (x, y)
        with self._lock:
            cached = self._products.get(key)
        if cached is not None:
            return cached
        word, om = reduced_word(y)
        terms = {x: sympy.Integer(1)}
        for i in word:
            terms = self._right_simple(terms, i)
        result = {compose(w, om): c for w, c in terms.items()}
        with self._lock:
            self._products[key] = result
        return result

    def multiply(self, a: HeckeElement, b: HeckeElement) -> HeckeElement:
        self._check(a, b)
        out: dict = defaultdict(lambda: sympy.Integer(0))
        for x, cx in a.terms:
            for y, cy in b.terms:
                for w, c in self._basis_product(x, y).items():
                    out[w] += cx * cy * c
        return HeckeElement.from_mapping(self.d, out)

    def commutator(self, a: HeckeElement, b: HeckeElement) -> HeckeElement:
        return self.sub(self.multiply(a, b), self.multiply(b, a))

    def T_inverse(self, w: WeylElement) -> HeckeElement:
        """T_w^{-1} via T_s^{-1} = q_s^{-1} T_s - (1 - q_s^{-1}) T_e along a reduced word."""
        word, om = reduced_word(w)
        terms = {weyl.invert(om): sympy.Integer(1)}
        for i in reversed(word):
            q_inv = 1 / self.q_s(i)
            moved = self._right_simple(terms, i)
            out: dict = defaultdict(lambda: sympy.Integer(0))
            for u, c in moved.items():
                out[u] += q_inv * c
            for u, c in terms.items():
                out[u] -= (1 - q_inv) * c
            terms = {u: sympy.expand(c) for u, c in out.items() if sympy.expand(c) != 0}
        return HeckeElement.from_mapping(self.d, terms)

    # --- Bernstein presentation ---
    def half_exponent(self, w: WeylElement) -> int:
        """k with q(w)^{1/2} = v^k, i.e. the sum of e_s over a reduced word of w."""
        return self.params.word_exponent(reduced_word(w)[0])

    def q_index(self, mu: Cocharacter):
        return V ** (2 * self.half_exponent(weyl.translation(mu)))

    def index(self, w: WeylElement):
        """q(w) = v^(2k), the size the Iwahori double coset of w contributes."""
        return V ** (2 * self.half_exponent(w))

    def specialized_index(self, w: WeylElement, q: int) -> int:
        return self.specialize(self.scale(self.unit(), self.index(w)), q)[self.ctx.identity()]

    def normalized_translation(self, lam: Cocharacter) -> HeckeElement:
        t = weyl.translation(lam)
        return self.scale(self.basis(t), V ** (-self.half_exponent(t)))

    def theta_from(self, lam1: Cocharacter, lam2: Cocharacter) -> HeckeElement:
        """Θ_{lam1 - lam2} for dominant lam1, lam2."""
        if not (lam1.is_dominant() and lam2.is_dominant()):
            raise HeckeError(f"Both parts must be dominant ({lam1.a}, {lam2.a}).")
        t2 = weyl.translation(lam2)
        inverse = self.scale(self.T_inverse(t2), V ** self.half_exponent(t2))
        return self.multiply(self.normalized_translation(lam1), inverse)

    def theta(self, lam: Cocharacter) -> HeckeElement:
        rho = Cocharacter.rho(self.d)
        c = 0
        while not (lam + rho.scaled(c)).is_dominant():
            c += 1
        return self.theta_from(lam + rho.scaled(c), rho.scaled(c))

    def bernstein_z(self, mu: Cocharacter) -> HeckeElement:
        total = HeckeElement(self.d, ())
        for lam in sorted(weyl.finite_orbit(mu)):
            total = self.add(total, self.theta(lam))
        return total

    def sstrace_element(self, mu: Cocharacter) -> HeckeElement:
        t_mu = weyl.translation(mu.dominant())
        sign = -1 if length(t_mu) % 2 else 1
        return self.scale(self.bernstein_z(mu), sign * V ** self.half_exponent(t_mu))

    # --- Center ---
    def center_generators(self) -> list[HeckeElement]:
        gens = [self.simple(i) for i in self.ctx.simple_indices]
        gens.append(self.basis(weyl.omega(self.ctx, 1)))
        return gens

    def is_central(self, h: HeckeElement) -> bool:
        return all(self.commutator(h, g).is_zero() for g in self.center_generators())

    def central_from_characterization(self, mu: Cocharacter, verify: bool = True) -> HeckeElement:
        """
        Solves for the central elements supported on Adm(mu) over Q(v), requires a
        one-dimensional solution space and normalizes the T_{t_mu} coefficient to q(mu)^{-1/2}.
        """
        adm = weyl.admissible(mu)
        t_mu = weyl.translation(mu.dominant())
        columns: list[dict] = [defaultdict(lambda: sympy.Integer(0)) for _ in adm]
        rows: dict[tuple[int, WeylElement], int] = {}
        for k, g in enumerate(self.center_generators()):
            for j, w in enumerate(adm):
                for u, c in self.commutator(self.basis(w), g).terms:
                    rows.setdefault((k, u), len(rows))
                    columns[j][rows[(k, u)]] += c

        if rows:
            shift = max([0] + [-e for col in columns for c in col.values() for e, _ in laurent_terms(c)])
            matrix = sympy.Matrix(len(rows), len(adm),
                                  lambda r, j: sympy.expand(columns[j].get(r, 0) * V ** shift))
            reduced, pivots = DomainMatrix.from_Matrix(matrix).to_field().rref()
            reduced = reduced.to_Matrix()
        else:
            reduced, pivots = sympy.zeros(0, len(adm)), ()

        free = [j for j in range(len(adm)) if j not in pivots]
        if len(free) != 1:
            raise CharacterizationError(f"Central elements supported on Adm({mu.a}) form a space of dimension "
                                        f"{len(free)}, expected 1.")
        solution = [sympy.Integer(0)] * len(adm)
        solution[free[0]] = sympy.Integer(1)
        for r, pc in enumerate(pivots):
            solution[pc] = -reduced[r, free[0]]

        anchor = solution[adm.index(t_mu)]
        if anchor == 0:
            raise CharacterizationError(f"The solution vanishes on the dominant cell t_{mu.a}.")
        factor = V ** (-self.half_exponent(t_mu)) / anchor
        result = HeckeElement.from_mapping(
            self.d, {w: sympy.expand(sympy.cancel(c * factor)) for w, c in zip(adm, solution)})
        if verify and result != self.bernstein_z(mu):
            raise CharacterizationError(f"The characterized element differs from z_{mu.a}.")
        return result

    # --- Specialization ---
    def specialize(self, h: HeckeElement, q: int) -> dict:
        """v^2 -> q; coefficients must come out as integers."""
        out = {}
        for w, c in h.terms:
            value = sympy.nsimplify(sympy.expand(c.subs(V, sympy.sqrt(q))))
            if not value.is_integer:
                raise HeckeError(f"Coefficient {c} of {w} does not specialize to an integer at q={q}.")
            out[w] = int(value)
        return out


def expected_point_count(mu: Cocharacter, params: ParameterSystem, q: int) -> int:
    """Σ_{w in Adm(mu)} Π q_s over a reduced word of w."""
    return sum(q ** params.word_exponent(reduced_word(w)[0]) for w in weyl.admissible(mu))


# 6. PARAMETER FITTING ##########################################################################################
def _integral_log(size: int, q: int) -> Optional[int]:
    k = 0
    while size % q == 0 and size > 1:
        size //= q
        k += 1
    return k if size == 1 else None


def fit_from_cells(d: int, cells_by_q: Mapping[int, Mapping[WeylElement, int]]) -> ParameterSystem:
    """Exponents e with |C_w(F_q)| = q^{Σ e over a reduced word of w} for every cell and every q."""
    classes = weyl.reflection_classes(group_ctx(d))
    class_of = {i: k for k, cls_ in enumerate(classes) for i in cls_}
    symbols = sympy.symbols(f"e0:{len(classes)}")
    equations = []
    for q, cells in cells_by_q.items():
        for w, size in cells.items():
            k = _integral_log(int(size), q)
            if k is None:
                raise ParameterFitError(f"|C_w| = {size} for w={w} is not a power of q={q}.")
            word = reduced_word(w)[0]
            equations.append(sympy.Add(*[symbols[class_of[i]] for i in word]) - k)

    nontrivial = [eq for eq in equations if eq.free_symbols]
    if any(eq != 0 for eq in equations if not eq.free_symbols):
        raise ParameterFitError(f"A length-zero cell has a size other than 1: {dict(cells_by_q)}")
    if not nontrivial:
        raise ParameterFitError(f"No cell of positive length to fit against: {dict(cells_by_q)}")
    solutions = sympy.linsolve(nontrivial, *symbols)
    if solutions == sympy.S.EmptySet:
        raise ParameterFitError(f"Cell sizes admit no consistent exponents: {dict(cells_by_q)}")
    (solution,) = tuple(solutions)
    if any(x.free_symbols for x in solution):
        raise ParameterFitError(f"Cell sizes do not determine every exponent: {solution}")
    if any(not x.is_integer or x < 1 for x in solution):
        raise ParameterFitError(f"Fitted exponents {solution} are not positive integers.")
    params = ParameterSystem(d, classes, tuple(int(x) for x in solution))
    logger.info(f"Fitted parameter exponents for d={d}: {params.to_dict()}")
    return params


def fit_parameters(d: int, q_list: Sequence[int], budget: int, pmap: Callable = map) -> ParameterSystem:
    """Runs the (0,1) census at every q and fits the exponents from the cell sizes."""
    from .latmodel import ModelWindow, cached_census

    cells_by_q = {}
    for q in q_list:
        census = cached_census(ModelWindow(d, q, 0, 1), budget=budget, pmap=pmap)
        cells_by_q[q] = census.counts()
        logger.info(f"Census for fitting at q={q}: {census.total} point(s) in {len(census.cells)} cell(s).")
    return fit_from_cells(d, cells_by_q)
