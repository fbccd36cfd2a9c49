# gulocal\weyl.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.

The Iwahori-Weyl group of even unitary similitude groups in its monomial model.

An element w = (pi, a, gamma) acts by g e_i = t^{a_i} e_{pi(i)}, where pi commutes
with i -> d+1-i and a_i + a_{d+1-i} = gamma. Lengths come from counting affine
hyperplanes of the relative apartment separating a base alcove from its image,
so no Coxeter presentation has to be trusted; the simple reflections and the
length-zero subgroup are then recovered from that length function.

Key Functions:
- `compose`, `invert`, `translation`, `simple_reflection`, `omega`
- `length`, `gl_length`, `reduced_word`, `bruhat_leq`, `downset`
- `finite_orbit`, `admissible`, `dominant_in_window`
- `coxeter_matrix`, `reflection_classes`, `bfs_lengths` (breadth-first oracle)
- `affine_permutation`, `from_affine_permutation`, `monomial_matrix`
"""

# 1. IMPORTS ####################################################################################################
import functools
import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .gfring import INT, SeriesRing, TruncMatrix, WindowError

# 2. SETUP & CONSTANTS ##########################################################################################
logger = logging.getLogger(__name__)

MAX_BRAID_ORDER = 12


class WeylError(ValueError):
    """Raised for elements violating the duality symmetry or for mismatched ranks."""


# 3. ELEMENTS ###################################################################################################
@dataclass(frozen=True, order=True)
class WeylElement:
    """(pi, a, gamma) with pi a 1-based permutation tuple: pi[i-1] = pi(i)."""
    pi: tuple[int, ...]
    a: tuple[int, ...]
    gamma: int

    def __post_init__(self):
        d = len(self.pi)
        object.__setattr__(self, "pi", tuple(int(x) for x in self.pi))
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if d == 0 or d % 2 or len(self.a) != d:
            raise WeylError(f"Need an even rank with matching vectors (pi={self.pi}, a={self.a}).")
        if sorted(self.pi) != list(range(1, d + 1)):
            raise WeylError(f"{self.pi} is not a permutation of 1..{d}.")
        for i in range(1, d + 1):
            if self.pi[d - i] != d + 1 - self.pi[i - 1]:
                raise WeylError(f"Permutation {self.pi} does not commute with i -> {d + 1} - i.")
            if self.a[i - 1] + self.a[d - i] != self.gamma:
                raise WeylError(f"a={self.a} is not symmetric around gamma={self.gamma}.")

    @property
    def d(self) -> int:
        return len(self.pi)

    @classmethod
    def identity(cls, d: int) -> "WeylElement":
        return cls(tuple(range(1, d + 1)), (0,) * d, 0)

    def to_dict(self) -> dict:
        return {"pi": list(self.pi), "a": list(self.a), "gamma": self.gamma}

    @classmethod
    def from_dict(cls, data: dict) -> "WeylElement":
        return cls(tuple(data["pi"]), tuple(data["a"]), int(data["gamma"]))

    def __repr__(self) -> str:
        return f"W(pi={self.pi}, a={self.a}, g={self.gamma})"


@dataclass(frozen=True, order=True)
class Cocharacter:
    a: tuple[int, ...]
    gamma: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        d = len(self.a)
        if d == 0 or d % 2:
            raise WeylError(f"Cocharacters need an even rank (got {d}).")
        if any(self.a[i] + self.a[d - 1 - i] != self.gamma for i in range(d)):
            raise WeylError(f"a={self.a} is not symmetric around gamma={self.gamma}.")

    @property
    def d(self) -> int:
        return len(self.a)

    def is_dominant(self) -> bool:
        return all(x >= y for x, y in zip(self.a, self.a[1:]))

    def dominant(self) -> "Cocharacter":
        return Cocharacter(tuple(sorted(self.a, reverse=True)), self.gamma)

    def __add__(self, other: "Cocharacter") -> "Cocharacter":
        return Cocharacter(tuple(x + y for x, y in zip(self.a, other.a)), self.gamma + other.gamma)

    def __neg__(self) -> "Cocharacter":
        return Cocharacter(tuple(-x for x in self.a), -self.gamma)

    def __sub__(self, other: "Cocharacter") -> "Cocharacter":
        return self + (-other)

    def scaled(self, k: int) -> "Cocharacter":
        return Cocharacter(tuple(k * x for x in self.a), k * self.gamma)

    @classmethod
    def zero(cls, d: int) -> "Cocharacter":
        return cls((0,) * d, 0)

    @classmethod
    def standard_minuscule(cls, d: int) -> "Cocharacter":
        """(1^{d/2}, 0^{d/2}; 1)."""
        return cls((1,) * (d // 2) + (0,) * (d // 2), 1)

    @classmethod
    def rho(cls, d: int) -> "Cocharacter":
        """(d-1, ..., 1, 0; d-1), strictly dominant."""
        return cls(tuple(range(d - 1, -1, -1)), d - 1)

    def to_dict(self) -> dict:
        return {"a": list(self.a), "gamma": self.gamma}


def compose(u: WeylElement, v: WeylElement) -> WeylElement:
    if u.d != v.d:
        raise WeylError(f"Cannot compose elements of rank {u.d} and {v.d}.")
    pi = tuple(u.pi[v.pi[i] - 1] for i in range(u.d))
    a = tuple(v.a[i] + u.a[v.pi[i] - 1] for i in range(u.d))
    return WeylElement(pi, a, u.gamma + v.gamma)


def invert(u: WeylElement) -> WeylElement:
    inv = [0] * u.d
    for i, target in enumerate(u.pi, start=1):
        inv[target - 1] = i
    return WeylElement(tuple(inv), tuple(-u.a[inv[i] - 1] for i in range(u.d)), -u.gamma)


def translation(lam: Cocharacter) -> WeylElement:
    return WeylElement(tuple(range(1, lam.d + 1)), lam.a, lam.gamma)


def translation_part(w: WeylElement) -> Optional[Cocharacter]:
    if w.pi != tuple(range(1, w.d + 1)):
        return None
    return Cocharacter(w.a, w.gamma)


def affine_permutation(w: WeylElement) -> tuple[int, ...]:
    """sigma(j) = pi(j) - d a_j for j = 1..d; the lattice-level picture of w."""
    return tuple(w.pi[j] - w.d * w.a[j] for j in range(w.d))


def from_affine_permutation(sigma: Sequence[int], gamma: Optional[int] = None) -> WeylElement:
    d = len(sigma)
    pi = tuple((s - 1) % d + 1 for s in sigma)
    a = tuple((p - s) // d for p, s in zip(pi, sigma))
    g = a[0] + a[-1] if gamma is None else gamma
    return WeylElement(pi, a, g)


def monomial_matrix(w: WeylElement, ring: SeriesRing) -> TruncMatrix:
    """g with g_{pi(i), i} = t^{a_i}."""
    if min(w.a) < ring.lo or max(w.a) >= ring.hi:
        raise WindowError(f"Exponents {w.a} do not fit the window [{ring.lo}, {ring.hi}).")
    arr = np.zeros((w.d, w.d, ring.width), dtype=INT)
    for i in range(w.d):
        arr[w.pi[i] - 1, i, w.a[i] - ring.lo] = 1
    return TruncMatrix(ring, arr)


# 4. GROUP CONTEXT ##############################################################################################
def _gl_reflection(d: int, i: int) -> tuple[list[int], list[int]]:
    """s_i of the affine symmetric group: i swaps (i, i+1); i = 0 is the affine reflection."""
    pi = list(range(1, d + 1))
    a = [0] * d
    if i == 0:
        pi[0], pi[d - 1] = d, 1
        a[0], a[d - 1] = 1, -1
    else:
        pi[i - 1], pi[i] = i + 1, i
    return pi, a


@dataclass(frozen=True)
class GroupCtx:
    d: int

    def __post_init__(self):
        if self.d < 2 or self.d % 2:
            raise WeylError(f"Rank must be even and at least 2 (got {self.d}).")

    @property
    def m(self) -> int:
        return self.d // 2

    @property
    def simple_indices(self) -> tuple[int, ...]:
        return tuple(range(self.m + 1))

    def identity(self) -> WeylElement:
        return WeylElement.identity(self.d)


@functools.lru_cache(maxsize=None)
def group_ctx(d: int) -> GroupCtx:
    return GroupCtx(d)


@functools.lru_cache(maxsize=None)
def simple_reflection(ctx: GroupCtx, i: int) -> WeylElement:
    """S_0 = s_0 and S_m = s_m of the affine symmetric group; S_i = s_i s_{d-i} in between."""
    d, m = ctx.d, ctx.m
    if not 0 <= i <= m:
        raise WeylError(f"Simple reflection index {i} outside 0..{m}.")
    pi, a = _gl_reflection(d, i)
    if 0 < i < m:
        # s_{d-i} swaps d-i and d+1-i, disjoint from s_i
        pi[d - i - 1], pi[d - i] = d + 1 - i, d - i
    return WeylElement(tuple(pi), tuple(a), 0)


# 5. LENGTH #####################################################################################################
@functools.lru_cache(maxsize=None)
def _base_point(d: int) -> tuple[Fraction, ...]:
    """A point of the base alcove (c = 1), off every relative hyperplane."""
    m = d // 2
    first = [1 - Fraction(2 * i - 1, 2 * d) for i in range(1, m + 1)]
    return tuple(first + [1 - x for x in reversed(first)])


def _act(w: WeylElement, x: Sequence[Fraction]) -> list[Fraction]:
    y = [Fraction(0)] * w.d
    for i in range(w.d):
        y[w.pi[i] - 1] = x[i] - w.a[i]
    return y


def _relative_values(x: Sequence[Fraction]) -> list[Fraction]:
    """The relative affine functionals x_i - x_j, x_i + x_j - c (i < j <= m) and 2 x_i - c."""
    d = len(x)
    m = d // 2
    c = x[0] + x[d - 1]
    values = []
    for i in range(m):
        for j in range(i + 1, m):
            values.append(x[i] - x[j])
            values.append(x[i] + x[j] - c)
        values.append(2 * x[i] - c)
    return values


@functools.lru_cache(maxsize=None)
def length(w: WeylElement) -> int:
    """Number of relative affine hyperplanes separating the base alcove from its w-translate."""
    base = _base_point(w.d)
    moved = _act(w, base)
    return sum(abs(math.floor(u) - math.floor(v)) for u, v in zip(_relative_values(base), _relative_values(moved)))


@functools.lru_cache(maxsize=None)
def gl_length(w: WeylElement) -> int:
    """Length of w as an element of the extended affine symmetric group."""
    base = _base_point(w.d)
    moved = _act(w, base)
    total = 0
    for i in range(w.d):
        for j in range(i + 1, w.d):
            total += abs(math.floor(base[i] - base[j]) - math.floor(moved[i] - moved[j]))
    return total


@functools.lru_cache(maxsize=None)
def reduced_word(w: WeylElement) -> tuple[tuple[int, ...], WeylElement]:
    """(word, omega) with w = S_{word[0]} ... S_{word[-1]} omega, always taking the least left descent."""
    ctx = group_ctx(w.d)
    word = []
    current = w
    current_length = length(w)
    while current_length > 0:
        for i in ctx.simple_indices:
            candidate = compose(simple_reflection(ctx, i), current)
            if length(candidate) < current_length:
                word.append(i)
                current = candidate
                current_length -= 1
                break
        else:
            raise WeylError(f"No descent found for {w} of length {current_length}.")
    return tuple(word), current


def word_product(ctx: GroupCtx, word: Iterable[int], omega_part: Optional[WeylElement] = None) -> WeylElement:
    result = ctx.identity()
    for i in word:
        result = compose(result, simple_reflection(ctx, i))
    return compose(result, omega_part) if omega_part is not None else result


@functools.lru_cache(maxsize=None)
def omega(ctx: GroupCtx, gamma: int) -> WeylElement:
    """The length-zero element with multiplier exponent gamma."""
    lam = Cocharacter((gamma,) * ctx.m + (0,) * ctx.m, gamma)
    return reduced_word(translation(lam))[1]


def is_length_zero(w: WeylElement) -> bool:
    return length(w) == 0


# 6. BRUHAT ORDER ###############################################################################################
@functools.lru_cache(maxsize=None)
def downset(y: WeylElement) -> frozenset:
    """{x : x <= y}: all subword products of a reduced word of y, times its omega part."""
    ctx = group_ctx(y.d)
    word, om = reduced_word(y)
    products = {ctx.identity()}
    for i in word:
        s = simple_reflection(ctx, i)
        products |= {compose(u, s) for u in products}
    return frozenset(compose(u, om) for u in products)


def bruhat_leq(x: WeylElement, y: WeylElement) -> bool:
    if x.d != y.d or x.gamma != y.gamma:
        return False
    return x in downset(y)


# 7. ORBITS, ADMISSIBLE SETS AND WINDOWS ########################################################################
def _orbit_moves(a: tuple[int, ...], gamma: int) -> Iterable[tuple[int, ...]]:
    d = len(a)
    m = d // 2
    for i in range(m - 1):
        b = list(a)
        b[i], b[i + 1] = b[i + 1], b[i]
        b[d - 2 - i], b[d - 1 - i] = b[d - 1 - i], b[d - 2 - i]
        yield tuple(b)
    for i in range(m):
        b = list(a)
        b[i], b[d - 1 - i] = b[d - 1 - i], b[i]
        yield tuple(b)


def finite_orbit(mu: Cocharacter) -> frozenset:
    """Orbit under the permutations commuting with i -> d+1-i together with the flips a_i <-> gamma - a_i."""
    start = mu.dominant().a
    seen = {start}
    queue = deque([start])
    while queue:
        a = queue.popleft()
        for b in _orbit_moves(a, mu.gamma):
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return frozenset(Cocharacter(a, mu.gamma) for a in seen)


def element_key(w: WeylElement) -> tuple:
    return (length(w), reduced_word(w)[0], w.pi, w.a)


@functools.lru_cache(maxsize=None)
def admissible(mu: Cocharacter) -> tuple[WeylElement, ...]:
    """Adm(mu), sorted by (length, reduced word)."""
    result = set()
    for lam in finite_orbit(mu):
        result |= downset(translation(lam))
    logger.debug(f"|Adm({mu.a})| = {len(result)}")
    return tuple(sorted(result, key=element_key))


def dominant_in_window(d: int, m: int, n: int) -> tuple[Cocharacter, ...]:
    """Dominant lambda with gamma = n - m and -m <= a_i <= n."""
    gamma = n - m
    half = d // 2
    found = []

    def extend(prefix: list[int]):
        if len(prefix) == half:
            a = prefix + [gamma - x for x in reversed(prefix)]
            if all(x >= y for x, y in zip(a, a[1:])) and all(-m <= x <= n for x in a):
                found.append(Cocharacter(tuple(a), gamma))
            return
        top = prefix[-1] if prefix else n
        for x in range(top, -m - 1, -1):
            extend(prefix + [x])

    extend([])
    return tuple(sorted(found, reverse=True))


# 8. COXETER DATA ###############################################################################################
def braid_order(ctx: GroupCtx, i: int, j: int) -> int:
    """Order of S_i S_j (0 when larger than MAX_BRAID_ORDER, i.e. treated as infinite)."""
    prod = compose(simple_reflection(ctx, i), simple_reflection(ctx, j))
    current = prod
    for k in range(1, MAX_BRAID_ORDER + 1):
        if current == ctx.identity():
            return k
        current = compose(current, prod)
    return 0


def coxeter_matrix(ctx: GroupCtx) -> list[list[int]]:
    idx = ctx.simple_indices
    return [[braid_order(ctx, i, j) for j in idx] for i in idx]


@functools.lru_cache(maxsize=None)
def reflection_classes(ctx: GroupCtx) -> tuple[tuple[int, ...], ...]:
    """Classes of simple reflections under conjugation in the extended group."""
    parent = {i: i for i in ctx.simple_indices}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        parent[find(i)] = find(j)

    for i in ctx.simple_indices:
        for j in ctx.simple_indices:
            order = braid_order(ctx, i, j)
            if i < j and order and order % 2:
                union(i, j)
    om = omega(ctx, 1)
    om_inv = invert(om)
    for i in ctx.simple_indices:
        conj = compose(compose(om, simple_reflection(ctx, i)), om_inv)
        for j in ctx.simple_indices:
            if conj == simple_reflection(ctx, j):
                union(i, j)
                break
        else:
            raise WeylError(f"omega does not normalize the simple reflections (S_{i}).")

    classes: dict[int, list[int]] = {}
    for i in ctx.simple_indices:
        classes.setdefault(find(i), []).append(i)
    return tuple(sorted(tuple(c) for c in classes.values()))


def bfs_lengths(ctx: GroupCtx, gamma: int, limit: int) -> dict:
    """Shortest word lengths over the simple reflections, from omega(gamma) out to `limit`."""
    start = omega(ctx, gamma)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        w = queue.popleft()
        if dist[w] == limit:
            continue
        for i in ctx.simple_indices:
            nxt = compose(simple_reflection(ctx, i), w)
            if nxt not in dist:
                dist[nxt] = dist[w] + 1
                queue.append(nxt)
    return dist
