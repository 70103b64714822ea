"""Fiber enumeration and Metropolis-Hastings walks on fibers.

Random numbers come from numpy's PCG64. Chain ``c`` of a run seeded with
``seed`` uses ``SeedSequence(seed, spawn_key=(c,))``, the same stream that
``SeedSequence(seed).spawn(k)[c]`` yields for any ``k > c``; a single chain
is chain 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .basis import MarkovBasis, Move
from .enumeration import enumerate_fiber_cells
from .errors import ConfigurationError, DimensionError
from .model import ModelSpec, Table, dyads, sufficient_statistics

TARGETS = ("uniform", "hypergeometric")
PROPOSALS = ("basis", "dynamic")

_BLOCK = 4096


def chain_rng(seed: int, chain: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chain,))))


def enumerate_fiber(A, u, cap: int = 100_000) -> list[Table]:
    """Every table sharing the statistics of ``u``, sorted by flattened cells."""
    if isinstance(A, ModelSpec):
        spec = A
        cells = u.cells if isinstance(u, Table) else tuple(u)
        return [spec.make_table(v) for v in enumerate_fiber_cells(spec.design, cells, cap)]
    if isinstance(u, Table):
        return [u.with_cells(v) for v in enumerate_fiber_cells(A, u.cells, cap)]
    return [Table(v, (len(v),)) for v in enumerate_fiber_cells(A, tuple(u), cap)]


@dataclass(frozen=True)
class WalkConfig:
    steps: int = 100_000
    burn_in: int | None = None
    thin: int = 1
    seed: int = 0
    target: str = "hypergeometric"
    proposal: str = "basis"

    def __post_init__(self):
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.steps // 10)
        if self.steps < 0 or not (0 <= self.burn_in <= self.steps):
            raise ConfigurationError(f"need 0 <= burn_in <= steps, got burn_in={self.burn_in}, steps={self.steps}")
        if self.thin < 1:
            raise ConfigurationError("thin must be at least 1")
        if self.target not in TARGETS:
            raise ConfigurationError(f"unknown target {self.target!r}")
        if self.proposal not in PROPOSALS:
            raise ConfigurationError(f"unknown proposal {self.proposal!r}")

    @property
    def recorded(self) -> int:
        return (self.steps - self.burn_in) // self.thin


@dataclass
class WalkSample:
    """Recorded states (post burn-in, thinned) and chain counters.

    Consecutive identical states share one tuple object.
    """

    states: list[tuple[int, ...]]
    statistics: list[int]
    acceptance_count: int = 0
    proposal_count: int = 0
    negative_count: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def acceptance_rate(self) -> float:
        return self.acceptance_count / self.proposal_count if self.proposal_count else 0.0


def _log_factorials(n: int) -> list[float]:
    return [math.lgamma(k + 1) for k in range(n + 1)]


def walk(
    spec: ModelSpec,
    basis: MarkovBasis | Sequence | None,
    u0,
    cfg: WalkConfig,
    rng: np.random.Generator | None = None,
) -> WalkSample:
    """Metropolis-Hastings random walk on the fiber of ``u0``.

    Basis proposals draw a move uniformly and a sign uniformly; dynamic
    proposals (p1 only) come from :func:`dynamic_p1_proposer`. A candidate
    with a negative entry, an empty dynamic draw, or an MH rejection leaves
    the chain in place and still counts as a step.
    """
    cells = list(u0.cells if isinstance(u0, Table) else u0)
    if len(cells) != spec.n_cells:
        raise DimensionError(f"{len(cells)} cells against {spec.n_cells} design columns")
    if any(c < 0 for c in cells):
        raise DimensionError("starting table has a negative entry")
    rng = rng if rng is not None else chain_rng(cfg.seed)
    stats = sufficient_statistics(spec, cells)
    hyper = cfg.target == "hypergeometric"
    lf = _log_factorials(sum(cells) + 1)

    if cfg.proposal == "basis":
        vectors = [m.vector if isinstance(m, Move) else tuple(m) for m in (basis or ())]
        if not vectors:
            raise ConfigurationError("basis proposal needs a nonempty Markov basis")
        for v in vectors:
            if len(v) != spec.n_cells or any(matvec_sparse(spec, v)):
                raise ConfigurationError(f"move {v} is not in the kernel of the design")
        signed = []
        for v in vectors:
            sparse = [(c, x) for c, x in enumerate(v) if x]
            signed.append(sparse)
            signed.append([(c, -x) for c, x in sparse])
        propose = None
    else:
        if spec.family != "p1":
            raise ConfigurationError("dynamic proposals are only available for p1 models")
        signed = None
        propose = _P1Proposer(spec)

    states: list[tuple[int, ...]] = []
    snapshot: tuple[int, ...] | None = None
    accepted = negative = 0
    burn, thin = cfg.burn_in, cfg.thin
    picks = uniforms = None
    pos = _BLOCK
    for t in range(1, cfg.steps + 1):
        if signed is not None:
            if pos == _BLOCK:
                picks = rng.integers(0, len(signed), size=_BLOCK)
                uniforms = rng.random(_BLOCK)
                pos = 0
            move = signed[picks[pos]]
            u = uniforms[pos]
            pos += 1
        else:
            move = propose(cells, rng)
            u = rng.random()
        if move is not None:
            if any(cells[c] + d < 0 for c, d in move):
                negative += 1
            else:
                ok = True
                if hyper:
                    delta = 0.0
                    for c, d in move:
                        delta += lf[cells[c]] - lf[cells[c] + d]
                    ok = delta >= 0.0 or u < math.exp(delta)
                if ok:
                    for c, d in move:
                        cells[c] += d
                    accepted += 1
                    snapshot = None
        if t > burn and (t - burn) % thin == 0:
            if snapshot is None:
                snapshot = tuple(cells)
            states.append(snapshot)
    return WalkSample(
        states=states,
        statistics=stats,
        acceptance_count=accepted,
        proposal_count=cfg.steps,
        negative_count=negative,
    )


def matvec_sparse(spec: ModelSpec, v: Sequence[int]) -> list[int]:
    out = [0] * len(spec.design)
    cols = spec.sparse_columns
    for c, x in enumerate(v):
        if x:
            for r, a in cols[c]:
                out[r] += a * x
    return out


class _P1Proposer:
    """Moves built from the current digraph, for the dyadic p1 layout.

    Primitive templates, on ordered node tuples drawn uniformly:

    * swap ``(i, j, k, l)``: ``i->j, k->l`` become ``i->l, k->j``
      (distinct nodes; preserves every in- and out-degree);
    * triangle ``(i, j, k)``: the directed cycle ``i->j->k->i`` is reversed.

    A draw is a single primitive or, with probability 1/3, two primitives in
    sequence; the intermediate digraph may leave the fiber, the composite
    must not. Each template is matched by its inverse drawn with the same
    probability, so the proposal is symmetric. Composites let a mutual dyad
    trade places with a pair of one-way edges under the reciprocity rows.
    Every emitted move is checked against the design before it is returned.
    """

    def __init__(self, spec: ModelSpec):
        self.n = spec.params["n"]
        self.index = {}
        for d, (i, j) in enumerate(dyads(self.n)):
            self.index[i, j] = d
            self.index[j, i] = d
        self.cols = spec.sparse_columns
        self.nrows = len(spec.design)

    @staticmethod
    def _state(cells, d):
        return cells[4 * d + 1] + 2 * cells[4 * d + 2] + 3 * cells[4 * d + 3]

    def _has(self, cells, over, a, b) -> bool:
        d = self.index[a, b]
        s = over[d] if d in over else self._state(cells, d)
        return bool(s & (1 if a < b else 2))

    def _toggle(self, cells, over, a, b) -> None:
        d = self.index[a, b]
        s = over[d] if d in over else self._state(cells, d)
        over[d] = s ^ (1 if a < b else 2)

    def _primitive(self, cells, over, rng) -> bool:
        n = self.n
        if rng.random() < 0.5:
            if n < 4:
                return False
            i, j, k, l = (int(x) for x in rng.choice(n, 4, replace=False))
            h = self._has
            if h(cells, over, i, j) and h(cells, over, k, l) and not h(cells, over, i, l) and not h(cells, over, k, j):
                for a, b in ((i, j), (k, l), (i, l), (k, j)):
                    self._toggle(cells, over, a, b)
                return True
            return False
        i, j, k = (int(x) for x in rng.choice(n, 3, replace=False))
        fwd = ((i, j), (j, k), (k, i))
        if all(self._has(cells, over, a, b) and not self._has(cells, over, b, a) for a, b in fwd):
            for a, b in fwd:
                self._toggle(cells, over, a, b)
                self._toggle(cells, over, b, a)
            return True
        return False

    def __call__(self, cells, rng) -> list[tuple[int, int]] | None:
        over: dict[int, int] = {}
        double = rng.random() < 1 / 3
        if not self._primitive(cells, over, rng):
            return None
        if double and not self._primitive(cells, over, rng):
            return None
        move = []
        for d, s in over.items():
            old = self._state(cells, d)
            if s != old:
                move.append((4 * d + old, -1))
                move.append((4 * d + s, 1))
        if not move:
            return None
        acc = [0] * self.nrows
        for c, x in move:
            for r, a in self.cols[c]:
                acc[r] += a * x
        if any(acc):
            return None
        return move


def dynamic_p1_proposer(current, spec: ModelSpec, rng: np.random.Generator) -> Move | None:
    """One dynamic move for ``current`` under the p1 ``spec``, or ``None``.

    The returned move is in the kernel of the design and keeps ``current``
    nonnegative.
    """
    if spec.family != "p1":
        raise ConfigurationError("dynamic proposals are only available for p1 models")
    cells = list(current.cells if isinstance(current, Table) else current)
    sparse = _P1Proposer(spec)(cells, rng)
    if sparse is None:
        return None
    vec = [0] * spec.n_cells
    for c, x in sparse:
        vec[c] += x
    return Move(tuple(vec))
