# gulocal\latmodel.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.

Finite-field points of the lattice model M^(m,n), their Schubert cells and convolution counts.

A point is a chain L_0 ⊆ ... ⊆ L_{d/2} of t-stable lattices with
t^n V_i ⊆ L_i ⊆ t^{-m} V_i, of the right rank, whose end members are self-dual
for the standard anti-diagonal pairing. Lattices are stored in the window
[-(m+1), n) of F_{q^2}((t)); anything at or above t^n is contained in every
member, anything below t^{-m-1} in none.

Key Functions:
- `enumerate_points`: exhaustive, duplicate-free and deterministic enumeration,
  branching over the possible L_0 and handing branches to a parallel map.
- `relative_position` / `relative_position_between`: the jump invariant of two
  periodic chains, returned as an element of the Iwahori-Weyl group.
- `cell_census`: the partition of all points into cells, with optional
  verification that sampled Iwahori elements preserve every cell.
- `iwahori_generators`: random Iwahori elements, repaired into exact
  similitudes by Newton correction.
- `convolution_count`: structure constants of the Iwahori-Hecke algebra by
  direct counting of intermediate chains.
"""

# 1. IMPORTS ####################################################################################################
import itertools
import logging
import threading
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .forms import (
    HermitianForm,
    apply_matrix,
    default_zeta,
    dual_lattice,
    hensel_unitarize,
    is_isotropic,
    is_similitude,
    multiplier_mod_t,
)
from .gfring import (
    INT,
    FieldCtx,
    SeriesRing,
    Submodule,
    TruncMatrix,
    TruncSeries,
    WindowError,
    coordinate_lattice,
    count_t_stable,
    field_ctx,
    iter_t_stable,
    meet_dimension,
    module_from_vectors,
    nullspace,
    rref,
)
from .weyl import WeylElement, WeylError, from_affine_permutation

# 2. SETUP & CONSTANTS ##########################################################################################
logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 2_000_000
DEFAULT_SEED = 0


class RelativePositionError(RuntimeError):
    """Raised when a jump invariant matches no group element (an internal inconsistency)."""


class BudgetExceededError(RuntimeError):
    """Raised when an enumeration would examine more candidates than the configured ceiling."""

    def __init__(self, estimate: int, budget: int):
        super().__init__(f"Enumeration would examine {estimate:,} candidates; the budget is {budget:,}.")
        self.estimate = estimate
        self.budget = budget


class ConvolutionError(RuntimeError):
    """Raised when convolution counts depend on the chosen representative."""


# 3. WINDOWS AND CHAINS #########################################################################################
@dataclass(frozen=True)
class ModelWindow:
    d: int
    q: int
    m: int
    n: int

    def __post_init__(self):
        if self.d < 2 or self.d % 2:
            raise WindowError(f"Rank d must be even and at least 2 (got {self.d}).")
        if self.m < 0 or self.n < 0:
            raise WindowError(f"Truncation pair must be natural numbers (got m={self.m}, n={self.n}).")
        field_ctx(self.q, 2)

    @property
    def gamma(self) -> int:
        return self.n - self.m

    @property
    def half(self) -> int:
        return self.d // 2

    @property
    def field(self) -> FieldCtx:
        return field_ctx(self.q, 2)

    @property
    def ring(self) -> SeriesRing:
        return SeriesRing(self.field, -(self.m + 1), self.n)

    @property
    def form(self) -> HermitianForm:
        return HermitianForm(self.ring, self.d)

    @property
    def duality_threshold(self) -> int:
        return self.n - self.m - 1

    def member_dimension(self, i: int) -> int:
        """Window dimension (over F_{q^2}) of L_i."""
        return self.d * (self.m + self.n) // 2 + i

    def to_dict(self) -> dict:
        return {"d": self.d, "q": self.q, "m": self.m, "n": self.n}


def standard_lattice(ring: SeriesRing, d: int, level: int) -> Submodule:
    """λ_level with λ_{sd+r} = t^{-s} λ_r and λ_r = t^{-1}O^r ⊕ O^{d-r}."""
    s, r = divmod(level, d)
    return coordinate_lattice(ring, d, [-s - 1 if k < r else -s for k in range(d)])


def _row_bounds(d: int, level: int, hi: int) -> list[int]:
    s, r = divmod(level, d)
    return [min(-s - 1 if k < r else -s, hi) for k in range(d)]


@dataclass(frozen=True)
class LatticeChain:
    window: ModelWindow
    members: tuple[Submodule, ...]

    def __post_init__(self):
        if len(self.members) != self.window.half + 1:
            raise WindowError(f"A chain for d={self.window.d} has {self.window.half + 1} members.")
        object.__setattr__(self, "members", tuple(self.members))

    def apply(self, g: TruncMatrix) -> "LatticeChain":
        return LatticeChain(self.window, tuple(apply_matrix(g, member) for member in self.members))

    def to_dict(self) -> dict:
        return {"window": self.window.to_dict(), "members": [member.serialize() for member in self.members]}


def standard_chain(window: ModelWindow) -> LatticeChain:
    return LatticeChain(window, tuple(standard_lattice(window.ring, window.d, i) for i in range(window.half + 1)))


def monomial_point(w: WeylElement, window: ModelWindow) -> LatticeChain:
    """w·(standard chain), restricted to its first d/2 + 1 members."""
    chain = monomial_chain(w, window.ring)
    return LatticeChain(window, chain.members[:window.half + 1])


def embed_window(chain: LatticeChain, target: ModelWindow) -> LatticeChain:
    """The inclusion M^(m,n) ⊂ M^(m+k,n+k)."""
    source = chain.window
    if (target.d, target.q, target.gamma) != (source.d, source.q, source.gamma) or target.m < source.m:
        raise WindowError(f"Cannot embed window {source.to_dict()} into {target.to_dict()}.")
    return LatticeChain(target, tuple(member.lift(target.ring) for member in chain.members))


# 4. POINT CONDITIONS ###########################################################################################
@dataclass
class ChainDiagnostics:
    nesting: bool
    bounds: bool
    rank: bool
    self_dual_low: bool
    self_dual_high: bool
    details: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.nesting and self.bounds and self.rank and self.self_dual_low and self.self_dual_high

    def to_dict(self) -> dict:
        return {"nesting": self.nesting, "bounds": self.bounds, "rank": self.rank,
                "self_dual_low": self.self_dual_low, "self_dual_high": self.self_dual_high,
                "passed": self.passed, "details": list(self.details)}


def is_local_model_point(chain: LatticeChain) -> ChainDiagnostics:
    window = chain.window
    ring = window.ring
    d, m, n = window.d, window.m, window.n
    members = chain.members
    details = []

    nesting = all(members[i + 1].contains(members[i]) for i in range(len(members) - 1))
    if not nesting:
        details.append("members are not nested")

    bounds = True
    for i, member in enumerate(members):
        upper = standard_lattice(ring, d, i + d * m)
        lower = coordinate_lattice(ring, d, _row_bounds(d, i - d * n, ring.hi))
        if not (upper.contains(member) and member.contains(lower)):
            bounds = False
            details.append(f"L_{i} leaves the sandwich t^n V_{i} ⊆ L_{i} ⊆ t^-m V_{i}")

    rank = True
    for i, member in enumerate(members):
        if member.dimension != window.member_dimension(i):
            rank = False
            details.append(f"dim L_{i} = {member.dimension}, expected {window.member_dimension(i)}")

    form = window.form
    threshold = window.duality_threshold
    try:
        self_dual_low = dual_lattice(form, members[0], threshold) == members[0].shift(-1)
    except WindowError as e:
        self_dual_low = False
        details.append(f"L_0 duality not expressible: {e}")
    if not self_dual_low:
        details.append("L_0 is not self-dual")
    self_dual_high = dual_lattice(form, members[-1], threshold) == members[-1]
    if not self_dual_high:
        details.append(f"L_{window.half} is not self-dual")

    return ChainDiagnostics(nesting, bounds, rank, self_dual_low, self_dual_high, details)


# 5. PERIODIC CHAINS AND RELATIVE POSITION ######################################################################
@dataclass(frozen=True, eq=False)
class PeriodicChain:
    """F_0 ⊂ ... ⊂ F_{d-1} with F_{l + d s} = t^{-s} F_l."""
    ring: SeriesRing
    rank: int
    members: tuple[Submodule, ...]

    def __post_init__(self):
        if len(self.members) != self.rank:
            raise WindowError(f"A periodic chain of rank {self.rank} needs {self.rank} members.")
        object.__setattr__(self, "_cache", {})

    def member(self, level: int) -> Submodule:
        cache = self.__dict__["_cache"]
        if level not in cache:
            s, r = divmod(level, self.rank)
            cache[level] = self.members[r].shift(-s)
        return cache[level]

    @cached_property
    def valid_levels(self) -> tuple[int, ...]:
        """Levels whose member is faithfully represented in the window."""
        levels = []
        for r, member in enumerate(self.members):
            outer = member.lowest_exponent()
            outer = self.ring.hi if outer is None else outer
            inner = member.full_from()
            for s in range(inner - self.ring.hi, outer - self.ring.lo + 1):
                levels.append(r + s * self.rank)
        return tuple(sorted(levels))

    def lift(self, ring: SeriesRing) -> "PeriodicChain":
        return PeriodicChain(ring, self.rank, tuple(member.lift(ring) for member in self.members))


def monomial_chain(w: WeylElement, ring: SeriesRing) -> PeriodicChain:
    """(w λ)_j = span of t^{a_k - [k <= j]} e_{pi(k)}."""
    d = w.d
    members = []
    for j in range(d):
        bounds = [0] * d
        for k in range(d):
            bounds[w.pi[k] - 1] = w.a[k] - (1 if k < j else 0)
        members.append(coordinate_lattice(ring, d, bounds))
    return PeriodicChain(ring, d, tuple(members))


def full_chain(chain: LatticeChain) -> PeriodicChain:
    """The periodic self-dual chain with F_i = L_i and F_{d-i} the dual of L_i."""
    window = chain.window
    d, h = window.d, window.half
    members = list(chain.members)
    for i in range(h - 1, 0, -1):
        members.append(dual_lattice(window.form, chain.members[i], window.duality_threshold))
    return PeriodicChain(window.ring, d, tuple(members))


def relative_position_between(reference: PeriodicChain, other: PeriodicChain) -> WeylElement:
    """
    The w with (reference, other) in the position (λ, wλ): sigma(j) is the least level l
    at which other_j / other_{j-1} meets reference_l.
    """
    if reference.ring != other.ring or reference.rank != other.rank:
        raise WindowError("Chains live in different ambient modules.")
    levels = reference.valid_levels
    level_set = set(levels)
    sigma = []
    for j in range(1, reference.rank + 1):
        top, bottom = other.member(j), other.member(j - 1)

        def jump(level: int) -> int:
            ref = reference.member(level)
            return meet_dimension(top, ref) - meet_dimension(bottom, ref)

        if jump(levels[0]) != 0 or jump(levels[-1]) != 1:
            raise WindowError(f"Window [{reference.ring.lo}, {reference.ring.hi}) is too narrow to "
                              f"locate the jump of member {j}.")
        lo_idx, hi_idx = 0, len(levels) - 1
        while hi_idx - lo_idx > 1:
            mid = (lo_idx + hi_idx) // 2
            if jump(levels[mid]) == 1:
                hi_idx = mid
            else:
                lo_idx = mid
        found = levels[hi_idx]
        if found - 1 not in level_set:
            raise WindowError(f"Level {found - 1} is not representable; widen the window.")
        sigma.append(found)
    try:
        return from_affine_permutation(sigma)
    except WeylError as e:
        raise RelativePositionError(f"Jump levels {sigma} match no group element: {e}") from e


def relative_position(chain: LatticeChain) -> WeylElement:
    window = chain.window
    reference = monomial_chain(WeylElement.identity(window.d), window.ring)
    w = relative_position_between(reference, full_chain(chain))
    if w.gamma != window.gamma:
        raise RelativePositionError(f"Point has gamma={w.gamma} in a window with gamma={window.gamma}.")
    return w


# 6. ENUMERATION ################################################################################################
def _search_bounds(window: ModelWindow, i: int) -> tuple[list[int], list[int]]:
    d, hi = window.d, window.ring.hi
    return _row_bounds(d, i + d * window.m, hi), _row_bounds(d, i - d * window.n, hi)


def point_estimate(window: ModelWindow) -> int:
    """Number of candidate end members examined before the middle of the chain is filled in."""
    total = 0
    for i in sorted({0, window.half}):
        lower, upper = _search_bounds(window, i)
        total += count_t_stable(window.ring, window.d, lower, upper, window.member_dimension(i))
    return total


def _end_candidates(window: ModelWindow, i: int, threshold: int) -> list[Submodule]:
    form = window.form
    lower, upper = _search_bounds(window, i)
    return list(iter_t_stable(window.ring, window.d, lower, upper, window.member_dimension(i),
                              accept=lambda vecs: is_isotropic(form, vecs, threshold)))


def _fmatmul(fld: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[0] == 0 or a.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=INT)
    return fld.sum(fld.mul(a[:, :, None], b[None, :, :]), axis=1)


def _lines_between(bottom: Submodule, top: Submodule) -> Iterator[np.ndarray]:
    """Vectors v of top with t·v in bottom, one per line of the quotient by bottom."""
    ring = bottom.ring
    fld = ring.base
    vecs = top.vectors()
    moved = ring.truncate(vecs, ring.lo + 1).reshape(top.dimension, -1)
    residual = bottom.reduce(moved)
    combos = nullspace(fld, residual.T)
    kernel = _fmatmul(fld, combos, top.basis)
    if kernel.shape[0] == 0:
        return
    complement, _ = rref(fld, bottom.reduce(kernel))
    k = complement.shape[0]
    for first in range(k):
        for tail in itertools.product(range(fld.q), repeat=k - first - 1):
            coeffs = np.zeros(k, dtype=INT)
            coeffs[first] = 1
            coeffs[first + 1:] = tail
            yield _fmatmul(fld, coeffs[None, :], complement)[0]


def _extend_branch(window: ModelWindow, prefix: list[Submodule], top: Submodule) -> list[LatticeChain]:
    i = len(prefix)
    if i == window.half:
        return [LatticeChain(window, tuple(prefix + [top]))]
    ring, d = window.ring, window.d
    bottom = prefix[-1]
    lower, upper = _search_bounds(window, i)
    outer = coordinate_lattice(ring, d, lower)
    inner = coordinate_lattice(ring, d, upper)
    results = []
    for v in _lines_between(bottom, top):
        candidate = module_from_vectors(ring, d, np.vstack([bottom.basis, v[None, :]]))
        if outer.contains(candidate) and candidate.contains(inner):
            results.extend(_extend_branch(window, prefix + [candidate], top))
    return results


def enumerate_points(window: ModelWindow, budget: int = DEFAULT_BUDGET, pmap: Callable = map,
                     verify: bool = True) -> Iterator[LatticeChain]:
    """Every point of M^(m,n)(F_q) exactly once, in a deterministic order."""
    estimate = point_estimate(window)
    if estimate > budget:
        raise BudgetExceededError(estimate, budget)
    logger.debug(f"Enumerating {window.to_dict()}: {estimate} end-member candidate(s).")

    threshold = window.duality_threshold
    bottoms = _end_candidates(window, 0, threshold + 1)
    tops = _end_candidates(window, window.half, threshold)
    branches = [(bottom, [top for top in tops if top.contains(bottom)]) for bottom in bottoms]

    def run_branch(branch) -> list[LatticeChain]:
        bottom, compatible = branch
        chains = []
        for top in compatible:
            chains.extend(_extend_branch(window, [bottom], top))
        return chains

    rejected = 0
    for chains in pmap(run_branch, branches):
        for chain in chains:
            if verify and not is_local_model_point(chain).passed:
                rejected += 1
                continue
            yield chain
    if rejected:
        logger.warning(f"Dropped {rejected} candidate chain(s) failing the point conditions.")


# 7. IWAHORI ELEMENTS ###########################################################################################
def generator_ring(window: ModelWindow) -> SeriesRing:
    return SeriesRing(window.field, 0, window.ring.width)


def _random_series(rng: np.random.Generator, ring: SeriesRing, size: int, unit: bool = False,
                   divisible: bool = False) -> TruncSeries:
    coeffs = rng.integers(0, size, size=ring.width)
    if unit:
        coeffs[0] = rng.integers(1, size)
    if divisible:
        coeffs[0] = 0
    return TruncSeries(ring, coeffs)


def _elementary(ring: SeriesRing, d: int, entries: Sequence[tuple[int, int, TruncSeries]]) -> TruncMatrix:
    arr = np.array(TruncMatrix.identity(ring, d).entries)
    fld = ring.base
    for i, j, s in entries:
        arr[i, j] = fld.add(arr[i, j], s.coeffs)
    return TruncMatrix(ring, arr)


def approximate_iwahori(window: ModelWindow, rng: np.random.Generator,
                        factors: int = 3) -> tuple[TruncMatrix, int]:
    """
    A random Iwahori element with constant multiplier c (a torus element times root
    elements, t-divisible below the diagonal), disturbed by a random multiple of t.
    Returns the disturbed matrix, a similitude only modulo t, and c.
    """
    ring = generator_ring(window)
    fld = ring.base
    d, h = window.d, window.half
    zeta = default_zeta(fld)

    c = int(rng.integers(1, fld.p))
    diag = [_random_series(rng, ring, fld.q, unit=True) for _ in range(h)]
    for i in range(h - 1, -1, -1):
        inverse = TruncMatrix(ring, diag[i].conj().coeffs[None, None, :]).inverse().entry(0, 0)
        diag.append(inverse * c)
    g = TruncMatrix.diagonal(ring, diag)

    for _ in range(factors):
        i, j = (int(x) for x in rng.choice(d, size=2, replace=False))
        if j == d - 1 - i:
            y = _random_series(rng, ring, fld.p, divisible=i > j) * zeta
            g = g @ _elementary(ring, d, [(i, j, y)])
        else:
            z = _random_series(rng, ring, fld.q, divisible=i > j)
            g = g @ _elementary(ring, d, [(i, j, z), (d - 1 - j, d - 1 - i, -z.conj())])

    noise = TruncMatrix(ring, rng.integers(0, fld.q, size=(d, d, ring.width)))
    return g + noise.shift(1), c


def iwahori_generators(window: ModelWindow, count: int, seed: int = DEFAULT_SEED) -> list[TruncMatrix]:
    """Random exact Iwahori elements: `approximate_iwahori` repaired by Newton correction."""
    rng = np.random.default_rng(seed)
    form = HermitianForm(generator_ring(window), window.d)
    flags = [standard_lattice(window.ring, window.d, j) for j in range(window.d)]
    generators = []
    for _ in range(count):
        g, c = approximate_iwahori(window, rng)
        generators.append(hensel_unitarize(g, form, c, flags))
    logger.debug(f"Sampled {count} Iwahori element(s) for window {window.to_dict()}.")
    return generators


def is_iwahori_element(g: TruncMatrix, window: ModelWindow) -> bool:
    """Exact similitude with a constant multiplier that preserves every standard lattice."""
    form = HermitianForm(g.ring, window.d)
    c = multiplier_mod_t(g, form)
    if c is None or not is_similitude(g, form, c):
        return False
    return all(lat.contains(apply_matrix(g, lat))
               for lat in (standard_lattice(window.ring, window.d, j) for j in range(window.d)))


# 8. CENSUS #####################################################################################################
@dataclass(frozen=True)
class Cell:
    label: WeylElement
    members: tuple[LatticeChain, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class ClosureViolation:
    generator: int
    point: int
    expected: WeylElement
    found: Optional[WeylElement]

    def describe(self) -> str:
        return f"generator {self.generator} moves point {self.point} from {self.expected} to {self.found}"


@dataclass
class Census:
    window: ModelWindow
    points: tuple[LatticeChain, ...]
    labels: tuple[WeylElement, ...]
    cells: dict[WeylElement, Cell]
    violations: list[ClosureViolation] = field(default_factory=list)
    orbit_components: dict[WeylElement, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return len(self.points)

    def counts(self) -> dict[WeylElement, int]:
        return {w: cell.size for w, cell in self.cells.items()}

    def size_histogram(self) -> dict[int, int]:
        """Number of cells of each size."""
        return dict(sorted(Counter(cell.size for cell in self.cells.values()).items()))


def verify_generators(census: Census, generators: Sequence[TruncMatrix]) -> list[ClosureViolation]:
    """Checks that every generator maps each cell into itself; records orbit components per cell."""
    index = {chain: k for k, chain in enumerate(census.points)}
    parent = list(range(census.total))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    violations = []
    for g_idx, g in enumerate(generators):
        for k, chain in enumerate(census.points):
            image = chain.apply(g)
            target = index.get(image)
            found = census.labels[target] if target is not None else None
            if found != census.labels[k]:
                violations.append(ClosureViolation(g_idx, k, census.labels[k], found))
                continue
            parent[find(k)] = find(target)

    components: dict[WeylElement, set] = {}
    for k, label in enumerate(census.labels):
        components.setdefault(label, set()).add(find(k))
    census.violations = violations
    census.orbit_components = {w: len(roots) for w, roots in components.items()}
    for v in violations:
        logger.error(f"Closure violation: {v.describe()}")
    return violations


def cell_census(window: ModelWindow, budget: int = DEFAULT_BUDGET, pmap: Callable = map,
                generators: Sequence[TruncMatrix] = ()) -> Census:
    points = tuple(enumerate_points(window, budget=budget, pmap=pmap))
    labels = tuple(pmap(relative_position, points))
    grouped: dict[WeylElement, list[LatticeChain]] = {}
    for chain, label in zip(points, labels):
        grouped.setdefault(label, []).append(chain)
    cells = {w: Cell(w, tuple(members)) for w, members in grouped.items()}
    census = Census(window, points, labels, cells)
    if generators:
        verify_generators(census, generators)
    logger.info(f"Census {window.to_dict()}: {census.total} point(s) in {len(cells)} cell(s).")
    return census


_CENSUS_CACHE: dict[ModelWindow, Census] = {}
_CENSUS_LOCK = threading.Lock()


def cached_census(window: ModelWindow, budget: int = DEFAULT_BUDGET, pmap: Callable = map) -> Census:
    with _CENSUS_LOCK:
        census = _CENSUS_CACHE.get(window)
    if census is None:
        census = cell_census(window, budget=budget, pmap=pmap)
        with _CENSUS_LOCK:
            _CENSUS_CACHE[window] = census
    return census


# 9. CONVOLUTION ################################################################################################
def minimal_window(w: WeylElement, q: int, limit: int = 64) -> ModelWindow:
    """Smallest (m, n) with n - m = gamma(w) whose sandwich contains w·(standard chain)."""
    d, h = w.d, w.d // 2
    for m in range(max(0, -w.gamma), limit):
        n = m + w.gamma
        fits = True
        for j in range(h + 1):
            bounds = [0] * d
            for k in range(d):
                bounds[w.pi[k] - 1] = w.a[k] - (1 if k < j else 0)
            upper = [-m - 1 if r < j else -m for r in range(d)]
            lower = [n - 1 if r < j else n for r in range(d)]
            if any(b < u for b, u in zip(bounds, upper)) or any(b > lo for b, lo in zip(bounds, lower)):
                fits = False
                break
        if fits:
            return ModelWindow(d, q, m, n)
    raise WindowError(f"{w} does not fit any window with m < {limit}.")


def _convolution_ring(window: ModelWindow, w: WeylElement, margin: int) -> SeriesRing:
    lo = min(min(w.a) - 1, -(window.m + 1)) - margin
    hi = max(max(w.a), window.n) + margin
    return SeriesRing(window.field, lo, hi)


def convolution_count(x: WeylElement, y: WeylElement, w: WeylElement, window: ModelWindow,
                      samples: int = 3, budget: int = DEFAULT_BUDGET, pmap: Callable = map) -> int:
    """N^w_{x,y}(q) = #{F in C_x : F is in position y relative to w·(standard chain)}."""
    if x.gamma != window.gamma:
        raise WindowError(f"x={x} does not belong to the component gamma={window.gamma}.")
    census = cached_census(window, budget=budget, pmap=pmap)
    if x not in census.cells:
        raise WindowError(f"x={x} has no cell in window {window.to_dict()}; use a larger window.")
    if w.gamma != x.gamma + y.gamma:
        return 0

    margin = window.m + window.n + 2
    for _ in range(3):
        ring = _convolution_ring(window, w, margin)
        try:
            representatives = [monomial_chain(w, ring)]
            if samples > 1:
                w_window = minimal_window(w, window.q)
                if w_window.ring.lo < ring.lo or w_window.ring.hi > ring.hi:
                    raise WindowError("sample window exceeds the convolution ring")
                w_cell = cached_census(w_window, budget=budget, pmap=pmap).cells.get(w)
                if w_cell is None:
                    raise WindowError(f"w={w} has no cell in its minimal window.")
                for chain in w_cell.members[:samples - 1]:
                    representatives.append(full_chain(chain).lift(ring))
            references = [full_chain(chain).lift(ring) for chain in census.cells[x].members]
            counts = []
            for rep in representatives:
                positions = list(pmap(lambda ref: relative_position_between(ref, rep), references))
                counts.append(sum(1 for pos in positions if pos == y))
            break
        except WindowError as e:
            logger.debug(f"Convolution ring with margin {margin} too narrow ({e}); widening.")
            margin *= 2
    else:
        raise WindowError(f"Could not find a window wide enough to convolve {x} and {y} into {w}.")

    if len(set(counts)) != 1:
        raise ConvolutionError(f"Counts {counts} for N^{w}_{{{x},{y}}} depend on the representative of C_w.")
    return counts[0]
