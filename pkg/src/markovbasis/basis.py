"""Markov bases: computation by binomial completion, closed forms, verification.

Moves are integer kernel vectors ``b = b+ - b-`` and stand for the binomials
``x^{b+} - x^{b-}``. A set of moves is a Markov basis exactly when those
binomials generate the toric ideal of the design matrix.

The toric ideal is computed from a lattice basis of the kernel by
saturation. Each saturation step is a Buchberger completion on vectors
under graded reverse lexicographic order with one variable placed last.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .enumeration import enumerate_fiber_cells
from .errors import CompletionOverflow, DimensionError, EnumerationCapError
from .intlin import as_int_matrix, in_kernel, in_row_span, lattice_kernel_basis, matvec, normalize_sign
from .model import Table

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Move:
    vector: tuple[int, ...]

    def __post_init__(self):
        vec = tuple(int(x) for x in self.vector)
        if not any(vec):
            raise DimensionError("a move must be nonzero")
        object.__setattr__(self, "vector", vec)

    @property
    def positive_part(self) -> tuple[int, ...]:
        return tuple(max(x, 0) for x in self.vector)

    @property
    def negative_part(self) -> tuple[int, ...]:
        return tuple(max(-x, 0) for x in self.vector)

    @property
    def degree(self) -> int:
        return max(sum(self.positive_part), sum(self.negative_part))

    def canonical(self) -> "Move":
        return Move(normalize_sign(self.vector))

    def __neg__(self) -> "Move":
        return Move(tuple(-x for x in self.vector))

    def __len__(self):
        return len(self.vector)


@dataclass(frozen=True)
class MarkovBasis:
    """Moves deduplicated up to sign, canonically signed and sorted."""

    moves: tuple[Move, ...]
    design: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self):
        design = tuple(tuple(row) for row in as_int_matrix(self.design))
        object.__setattr__(self, "design", design)
        classes = set()
        for m in self.moves:
            mv = m if isinstance(m, Move) else Move(tuple(m))
            if len(mv) != len(design[0]):
                raise DimensionError("move length does not match design columns")
            if not in_kernel(design, mv.vector):
                raise DimensionError(f"move {mv.vector} is not in the kernel of the design")
            classes.add(normalize_sign(mv.vector))
        object.__setattr__(self, "moves", tuple(Move(v) for v in sorted(classes)))

    def __len__(self):
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)

    @property
    def max_degree(self) -> int:
        return max((m.degree for m in self.moves), default=0)

    def vectors(self) -> list[tuple[int, ...]]:
        return [m.vector for m in self.moves]


@dataclass(frozen=True)
class CompletionCaps:
    max_generators: int = 100_000
    max_degree: int = 40


def _vectors(moves: Iterable) -> list[tuple[int, ...]]:
    return [tuple(m.vector) if isinstance(m, Move) else tuple(int(x) for x in m) for m in moves]


def _has_positive_grading(A: list[list[int]]) -> bool:
    """Whether some strictly positive vector lies in the row span of ``A``."""
    if in_row_span(A, [1] * len(A[0])):
        return True
    from scipy.optimize import linprog

    # find y with A^T y >= 1
    At = np.array(A, dtype=float).T
    res = linprog(
        np.zeros(At.shape[1]), A_ub=-At, b_ub=-np.ones(At.shape[0]), bounds=[(None, None)] * At.shape[1]
    )
    return bool(res.status == 0)


class _Completion:
    """Vector-form Buchberger completion under one fixed term order.

    Every stored vector is oriented so that its positive part is the
    leading monomial. ``order`` lists variables from most to least
    significant; ties in degree are broken reverse-lexicographically.
    Critical pairs are pruned with the Gebauer-Moller criteria.
    """

    def __init__(self, n: int, order: Sequence[int], caps: CompletionCaps, graded: bool, counter: list[int]):
        self.n = n
        self.scan = list(reversed(order))
        self.caps = caps
        self.graded = graded
        self.counter = counter
        self.vecs: list[tuple[int, ...]] = []
        self.leads: list[tuple[tuple[int, int], ...]] = []
        self.classes: set[tuple[int, ...]] = set()
        self._dtype = np.int16 if caps.max_degree < 2**15 else np.int64
        self._L = np.zeros((64, n), dtype=self._dtype)
        self._active = np.zeros(64, dtype=bool)
        self._alloc_pairs(256)
        self._npairs = 0
        self._heap: list[tuple[int, int]] = []

    def orient(self, v: tuple[int, ...]) -> tuple[int, ...]:
        if self.graded:
            d = sum(v)
            if d:
                return v if d > 0 else tuple(-x for x in v)
        for k in self.scan:
            x = v[k]
            if x:
                return v if x < 0 else tuple(-x for x in v)
        raise ValueError("cannot orient the zero vector")

    def reduce(self, v: tuple[int, ...]) -> tuple[int, ...] | None:
        v = self.orient(v)
        k = len(self.vecs)
        if k == 0:
            return v
        L, active = self._L[:k], self._active[:k]
        while True:
            hits = np.flatnonzero(active & (L <= np.maximum(v, 0)).all(axis=1))
            if hits.size == 0:
                return v
            g = self.vecs[hits[0]]
            v = tuple(x - y for x, y in zip(v, g))
            if not any(v):
                return None
            v = self.orient(v)

    def add(self, v: tuple[int, ...]) -> None:
        key = normalize_sign(v)
        if key in self.classes:
            return
        deg = max(sum(x for x in v if x > 0), -sum(x for x in v if x < 0))
        if deg > self.caps.max_degree:
            raise CompletionOverflow(
                f"completion produced a move of degree {deg} > max_degree={self.caps.max_degree}",
                cap="max_degree",
            )
        self.counter[0] += 1
        if self.counter[0] > self.caps.max_generators:
            raise CompletionOverflow(
                f"completion generated more than max_generators={self.caps.max_generators} binomials",
                cap="max_generators",
            )
        self.classes.add(key)
        k = len(self.vecs)
        if k == len(self._L):
            self._L = np.concatenate([self._L, np.zeros_like(self._L)])
            self._active = np.concatenate([self._active, np.zeros_like(self._active)])
        lh = np.maximum(np.array(v, dtype=self._dtype), 0)
        self._L[k] = lh
        self.vecs.append(v)
        self.leads.append(tuple((i, x) for i, x in enumerate(v) if x > 0))
        self._update(k, lh)
        self._active[k] = True

    def _alloc_pairs(self, size: int, keep: np.ndarray | None = None) -> None:
        P = np.zeros((size, self.n), dtype=self._dtype)
        pi = np.zeros(size, dtype=np.int64)
        pj = np.zeros(size, dtype=np.int64)
        pdeg = np.zeros(size, dtype=np.int64)
        palive = np.zeros(size, dtype=bool)
        if keep is not None:
            m = keep.size
            P[:m], pi[:m], pj[:m], pdeg[:m] = self._P[keep], self._pi[keep], self._pj[keep], self._pdeg[keep]
            palive[:m] = True
        self._P, self._pi, self._pj, self._pdeg, self._palive = P, pi, pj, pdeg, palive

    def _compact_pairs(self) -> None:
        # renumbering keeps creation order, so the heap pops in the same order
        alive = np.flatnonzero(self._palive[: self._npairs])
        self._alloc_pairs(max(256, 2 * alive.size), alive)
        self._npairs = alive.size
        self._heap = [(int(d), p) for p, d in enumerate(self._pdeg[: alive.size])]
        heapq.heapify(self._heap)

    def _new_pair(self, i: int, j: int, lcm: np.ndarray, deg: int) -> None:
        p = self._npairs
        if p == len(self._pi):
            alive = int(self._palive[:p].sum())
            if alive < p // 2:
                self._compact_pairs()
            else:
                alive_mask = self._palive[:p].copy()
                self._alloc_pairs(2 * p, np.arange(p))
                self._palive[:p] = alive_mask
            p = self._npairs
        self._P[p] = lcm
        self._pi[p], self._pj[p] = i, j
        self._pdeg[p] = deg
        self._palive[p] = True
        self._npairs += 1
        heapq.heappush(self._heap, (deg, p))

    def _update(self, k: int, lh: np.ndarray) -> None:
        act = np.flatnonzero(self._active[:k])
        if act.size == 0:
            return
        # old pairs whose lcm the new lead divides, unless it touches both lcms
        alive = np.flatnonzero(self._palive[: self._npairs])
        if alive.size:
            Pl = self._P[alive]
            cand = alive[np.all(lh <= Pl, axis=1)]
            if cand.size:
                Pc = self._P[cand]
                lih = np.maximum(self._L[self._pi[cand]], lh)
                ljh = np.maximum(self._L[self._pj[cand]], lh)
                kill = ~np.all(lih == Pc, axis=1) & ~np.all(ljh == Pc, axis=1)
                self._palive[cand[kill]] = False
        Lg = self._L[act]
        lcm = np.maximum(Lg, lh)
        coprime = ~np.any((Lg > 0) & (lh > 0), axis=1)
        deg = lcm.sum(axis=1)
        order = np.lexsort((~coprime, deg))
        # proper divisibility by one of the cheapest lcms settles most pairs at once
        seed = lcm[order[:16]]
        divides = (seed[None, :, :] <= lcm[:, None, :]).all(axis=2)
        differs = (seed[None, :, :] != lcm[:, None, :]).any(axis=2)
        dropped = (divides & differs).any(axis=1)
        blockers = np.empty_like(lcm)
        nb = 0
        for a in order[~dropped[order]]:
            row = lcm[a]
            if nb and (blockers[:nb] <= row).all(axis=1).any():
                continue
            blockers[nb] = row
            nb += 1
            if not coprime[a]:
                self._new_pair(int(act[a]), k, row, int(deg[a]))
        self._active[act[np.all(lh <= Lg, axis=1)]] = False

    def run(self, inputs: Iterable[tuple[int, ...]], reduce_inputs: bool) -> list[tuple[int, ...]]:
        for v in inputs:
            v = self.reduce(v) if reduce_inputs else self.orient(v)
            if v is not None:
                self.add(v)
        while self._heap:
            _, p = heapq.heappop(self._heap)
            if not self._palive[p]:
                continue
            self._palive[p] = False
            i, j = self._pi[p], self._pj[p]
            s = tuple(b - a for a, b in zip(self.vecs[i], self.vecs[j]))
            if not any(s):
                continue
            r = self.reduce(s)
            if r is not None:
                self.add(r)
        return list(self.vecs)

    def minimal(self) -> list[tuple[int, ...]]:
        """Active elements with no leading term divisible by another's."""
        idx = [k for k in range(len(self.vecs)) if self._active[k]]
        idx.sort(key=lambda k: (int(self._L[k].sum()), k))
        kept: list[int] = []
        for k in idx:
            if not kept or not (self._L[kept] <= self._L[k]).all(axis=1).any():
                kept.append(k)
        return [self.vecs[k] for k in sorted(kept)]


def binomial_completion(
    generators: Iterable,
    A=None,
    caps: CompletionCaps | None = None,
    order: Sequence[int] | None = None,
    *,
    reduce_inputs: bool = True,
    _counter: list[int] | None = None,
) -> list[Move]:
    """Complete ``generators`` to a Gröbner basis of the binomial ideal they generate.

    The term order is graded reverse lexicographic with variables ranked by
    ``order`` (default: natural order, last variable least significant).
    Every S-vector of the output reduces to zero by the output. Raises
    :class:`CompletionOverflow` when a cap trips.
    """
    vecs = _vectors(generators)
    if not vecs:
        return []
    n = len(vecs[0])
    graded = False
    if A is not None:
        A = as_int_matrix(A)
        for v in vecs:
            if not in_kernel(A, v):
                raise DimensionError(f"generator {v} is not in the kernel")
        graded = not _has_positive_grading(A)
    comp = _Completion(n, order if order is not None else range(n), caps or CompletionCaps(), graded, _counter or [0])
    return [Move(v) for v in comp.run(vecs, reduce_inputs)]


def toric_markov_basis(A, caps: CompletionCaps | None = None, minimize: bool = True) -> MarkovBasis:
    """A Markov basis of ``A``: generators of its toric ideal.

    Starts from a lattice basis of ``ker_Z(A)`` and saturates by repeated
    completion, one variable at a time. With ``minimize`` set, moves whose two
    endpoints are already joined by the remaining moves inside their own
    fiber are dropped, largest degree first.
    """
    A = as_int_matrix(A)
    n = len(A[0])
    kernel = lattice_kernel_basis(A)
    if not kernel:
        return MarkovBasis((), A)
    caps = caps or CompletionCaps()
    graded = not _has_positive_grading(A)
    if graded:
        log.warning("design has no positive grading; saturation is not guaranteed to be complete")
    # J <= J' implies J : x^inf <= J' : x^inf, so one pass over the variables
    # reaches the full saturation even though each completion may overshoot.
    current = sorted({normalize_sign(v) for v in kernel} | set(_low_degree_moves(A)))
    counter = [0]
    for i in _saturation_variables(kernel, n):
        order = [k for k in range(n) if k != i] + [i]
        comp = _Completion(n, order, caps, graded, counter)
        comp.run(current, reduce_inputs=False)
        current = sorted({normalize_sign(v) for v in comp.minimal()})
        log.debug("saturated variable %d: %d moves", i, len(current))
    moves = sorted(current)
    if minimize:
        moves = _minimize(moves)
    return MarkovBasis(tuple(Move(v) for v in moves), A)


def _saturation_variables(kernel: list[list[int]], n: int) -> list[int]:
    """Variables that saturation must visit.

    ``kernel`` is in echelon form. When every pivot is 1 the basis restricted
    to the pivot columns is the identity, so walking from ``u+`` to ``u-``
    by basis steps never leaves the orthant in those coordinates; only the
    non-pivot variables can need a monomial multiplier.
    """
    pivots = []
    for row in kernel:
        j = next(c for c, x in enumerate(row) if x)
        if row[j] != 1 or any(other[j] for other in kernel if other is not row):
            return list(range(n))
        pivots.append(j)
    return [c for c in range(n) if c not in set(pivots)]


def _low_degree_moves(A: list[list[int]]) -> list[tuple[int, ...]]:
    """Moves joining all degree-two monomials that share statistics.

    Any such move lies in the toric ideal, so adding them to the lattice
    basis changes nothing but the size of the intermediate Gröbner bases.
    """
    n = len(A[0])
    cols = [tuple(row[c] for row in A) for c in range(n)]
    groups: dict[tuple[int, ...], list[tuple[int, int]]] = {}
    for a, b in itertools.combinations_with_replacement(range(n), 2):
        key = tuple(x + y for x, y in zip(cols[a], cols[b]))
        groups.setdefault(key, []).append((a, b))
    moves = []
    for members in groups.values():
        a0, b0 = members[0]
        for a, b in members[1:]:
            v = [0] * n
            v[a0] += 1
            v[b0] += 1
            v[a] -= 1
            v[b] -= 1
            if any(v):
                moves.append(normalize_sign(v))
    return moves


def _connected_in_fiber(start, target, moves, cap=200_000) -> bool | None:
    signed = [m for v in moves for m in (v, tuple(-x for x in v))]
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for m in signed:
            nxt = tuple(a + b for a, b in zip(cur, m))
            if min(nxt) < 0 or nxt in seen:
                continue
            if nxt == target:
                return True
            seen.add(nxt)
            if len(seen) > cap:
                return None
            queue.append(nxt)
    return False


def _minimize(moves: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    def deg(v):
        return sum(x for x in v if x > 0)

    kept = set(moves)
    for v in sorted(moves, key=lambda v: (-deg(v), v)):
        others = [w for w in kept if w != v]
        if not others:
            continue
        start = tuple(max(x, 0) for x in v)
        target = tuple(max(-x, 0) for x in v)
        if _connected_in_fiber(start, target, others):
            kept.discard(v)
    return sorted(kept)


def independence_basis(d1: int, d2: int) -> MarkovBasis:
    """The ``C(d1,2) * C(d2,2)`` basic moves swapping a 2x2 minor."""
    if d1 < 2 or d2 < 2:
        raise DimensionError(f"independence basis needs d1, d2 >= 2, got {d1}, {d2}")
    from .model import independence_design

    moves = []
    for i, k in itertools.combinations(range(d1), 2):
        for j, l in itertools.combinations(range(d2), 2):
            v = [0] * (d1 * d2)
            v[i * d2 + j] = v[k * d2 + l] = 1
            v[i * d2 + l] = v[k * d2 + j] = -1
            moves.append(Move(tuple(v)))
    return MarkovBasis(tuple(moves), independence_design(d1, d2).design)


def _basis_vectors(basis) -> list[tuple[int, ...]]:
    return _vectors(basis.moves if isinstance(basis, MarkovBasis) else basis)


def verify_connects(A, basis, u, cap: int = 5000) -> bool:
    """Whether the moves connect the whole fiber of ``u``.

    Raises :class:`EnumerationCapError` when the fiber has more than ``cap``
    points; that is not evidence either way.
    """
    cells = tuple(u.cells) if isinstance(u, Table) else tuple(int(x) for x in u)
    fiber = enumerate_fiber_cells(A, cells, cap)
    if len(fiber) <= 1:
        return True
    points = set(fiber)
    signed = [m for v in _basis_vectors(basis) for m in (v, tuple(-x for x in v))]
    seen = {fiber[0]}
    queue = deque([fiber[0]])
    while queue:
        cur = queue.popleft()
        for m in signed:
            nxt = tuple(a + b for a, b in zip(cur, m))
            if nxt in points and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(points)


@dataclass
class DistanceReport:
    pairs_checked: int = 0
    fibers_skipped: int = 0
    violations: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _l1(u, v) -> int:
    return sum(abs(a - b) for a, b in zip(u, v))


def _reduces(u, v, signed) -> bool:
    dist = _l1(u, v)
    for m in signed:
        for x, y in ((u, v), (v, u)):
            w = tuple(a + b for a, b in zip(x, m))
            if min(w) >= 0 and _l1(w, y) < dist:
                return True
    return False


def distance_reducing_check(
    A,
    basis,
    trials: int,
    seed: int,
    tables: Sequence[Sequence[int]] | None = None,
    max_entry: int = 2,
    cap: int = 5000,
) -> DistanceReport:
    """Sample pairs ``(u, v)`` in common fibers and test that some move,
    applied to either side, strictly lowers ``|u - v|_1``.

    Starting tables come from ``tables`` when given, otherwise they are
    drawn with entries in ``0..max_entry``. Fibers above ``cap`` are skipped.
    """
    A = as_int_matrix(A)
    r = len(A[0])
    rng = np.random.default_rng(seed)
    signed = [m for v in _basis_vectors(basis) for m in (v, tuple(-x for x in v))]
    report = DistanceReport()
    for _ in range(trials):
        if tables:
            u = tuple(int(x) for x in tables[rng.integers(len(tables))])
        else:
            u = tuple(int(x) for x in rng.integers(0, max_entry + 1, size=r))
        try:
            fiber = enumerate_fiber_cells(A, u, cap)
        except EnumerationCapError:
            report.fibers_skipped += 1
            continue
        others = [w for w in fiber if w != u]
        if not others:
            continue
        v = others[rng.integers(len(others))]
        report.pairs_checked += 1
        if not _reduces(u, v, signed):
            report.violations.append((u, v))
    return report
