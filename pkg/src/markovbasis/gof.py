"""MLE fitting, the chi-square statistic and exact conditional p-values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .basis import MarkovBasis
from .enumeration import enumerate_fiber_cells
from .errors import ConfigurationError, DimensionError, InconsistentFitError, NonConvergenceError
from .fiber import WalkConfig, chain_rng, walk
from .model import ModelSpec, Table, conditional_log_weight

FIT_TOL = 1e-10
FIT_MAX_SWEEPS = 10_000
MOMENT_TOL = 1e-8
TIE_SLACK = 1e-12


@dataclass
class FitResult:
    fitted: np.ndarray
    converged: bool
    iterations: int
    max_moment_gap: float
    boundary: bool = False


@dataclass
class TestResult:
    """Observed statistic, tail count and histogram of the reference sample.

    For Monte Carlo results ``p_value == exceed_count / sample_size``. For
    enumerated results ``sample_size`` is the fiber size, ``exceed_count`` the
    number of fiber points at least as extreme, and ``p_value`` their
    conditional probability.
    """

    __test__ = False

    observed_stat: float
    sample_size: int
    exceed_count: int
    p_value: float
    mc_std_error: float
    histogram: list[tuple[tuple[float, float], int]]
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "observed_stat": self.observed_stat,
            "sample_size": self.sample_size,
            "exceed_count": self.exceed_count,
            "p_value": self.p_value,
            "mc_std_error": self.mc_std_error,
            "histogram": [[lo, hi, c] for (lo, hi), c in self.histogram],
        }


def _cells(u) -> np.ndarray:
    return np.asarray(u.cells if isinstance(u, Table) else u, dtype=float)


def _moment_gap(A: np.ndarray, e: np.ndarray, t: np.ndarray) -> float:
    return float(np.max(np.abs(A @ e - t))) if len(t) else 0.0


def _scale_row(e: np.ndarray, idx: np.ndarray, a: np.ndarray, t: float) -> bool:
    """Rescale ``e[idx]`` by ``exp(a * s)`` so that ``a . e[idx] == t``.

    Coordinate ascent on one natural parameter. Returns False when no
    finite ``s`` matches the target.
    """
    cur = e[idx]
    if np.all(a == 1):
        tot = cur.sum()
        if t == 0:
            e[idx] = 0.0
            return True
        if tot <= 0:
            return False
        e[idx] = cur * (t / tot)
        return True
    if np.all(a >= 0) and t == 0:
        e[idx] = 0.0
        return True

    def g(s):
        return float(np.dot(a, cur * np.exp(a * s))) - t

    # g is increasing in s; bracket then bisect with Newton steps
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if g(lo) <= 0:
            break
        lo *= 2
    else:
        return False
    for _ in range(200):
        if g(hi) >= 0:
            break
        hi *= 2
    else:
        return False
    s = 0.0 if lo <= 0 <= hi else 0.5 * (lo + hi)
    for _ in range(200):
        val = g(s)
        if abs(val) <= 1e-15 * max(1.0, abs(t)):
            break
        if val > 0:
            hi = s
        else:
            lo = s
        d = float(np.dot(a * a, cur * np.exp(a * s)))
        nxt = s - val / d if d > 0 else 0.5 * (lo + hi)
        s = nxt if lo < nxt < hi else 0.5 * (lo + hi)
        if hi - lo < 1e-15:
            break
    e[idx] = cur * np.exp(a * s)
    return True


def facial_cells(spec: ModelSpec, u) -> np.ndarray:
    """Cells that are positive somewhere in the real fiber polytope of ``u``.

    Outside this set every table with the statistics of ``u`` is zero, so
    the (extended) MLE vanishes there. One LP: maximize ``sum(s)`` subject
    to ``0 <= s <= 1``, ``s <= v``, ``A v = lam * A u``, ``v, lam >= 0``.
    """
    from scipy.optimize import linprog

    x = _cells(u)
    A = spec.design_array.astype(float)
    m, r = A.shape
    t = A @ x
    # variables: v (r), s (r), lam (1)
    c = np.concatenate([np.zeros(r), -np.ones(r), [0.0]])
    A_eq = np.hstack([A, np.zeros((m, r)), -t[:, None]])
    A_ub = np.hstack([-np.eye(r), np.eye(r), np.zeros((r, 1))])
    bounds = [(0, None)] * r + [(0, 1)] * r + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(r), A_eq=A_eq, b_eq=np.zeros(m), bounds=bounds, method="highs")
    if res.status != 0:
        return x > 0
    return (res.x[r : 2 * r] > 0.5) | (x > 0)


def fit_ips(spec: ModelSpec, u, tol: float = FIT_TOL, max_sweeps: int = FIT_MAX_SWEEPS) -> FitResult:
    """Cyclic scaling on the rows of the design, one statistic at a time.

    Cells outside :func:`facial_cells` are fixed at zero, which turns a
    boundary problem (no MLE with full support) into an interior one on the
    face; ``boundary`` flags that case. Starts from the uniform table on the
    face with the observed total and stops when the moment gap relative to
    ``max(1, |Au|_inf)`` falls below ``tol``.
    """
    x = _cells(u)
    if len(x) != spec.n_cells:
        raise DimensionError(f"{len(x)} cells against {spec.n_cells} design columns")
    total = x.sum()
    if total <= 0:
        raise DimensionError("fitting needs a table with positive total")
    A = spec.design_array.astype(float)
    t = A @ x
    scale = max(1.0, float(np.max(np.abs(t))))
    face = facial_cells(spec, x)
    rows = []
    for k, row in enumerate(spec.design):
        idx = np.array([c for c, a in enumerate(row) if a and face[c]], dtype=np.int64)
        if idx.size:
            rows.append((idx, np.array([row[c] for c in idx], dtype=float), float(t[k])))
    e = np.where(face, total / face.sum(), 0.0)
    boundary = not bool(face.all())
    gap = _moment_gap(A, e, t)
    sweeps = 0
    while gap > tol * scale and sweeps < max_sweeps:
        sweeps += 1
        for idx, a, tk in rows:
            if not _scale_row(e, idx, a, tk):
                return FitResult(e, False, sweeps, _moment_gap(A, e, t), boundary)
        gap = _moment_gap(A, e, t)
    return FitResult(e, gap <= tol * scale, sweeps, gap, boundary)


def fit_mle(spec: ModelSpec, u, tol: float = FIT_TOL, max_sweeps: int = FIT_MAX_SWEEPS) -> FitResult:
    """Maximum likelihood expected counts.

    Independence models use the closed form ``r_i c_j / N``; every other
    family goes through :func:`fit_ips`.
    """
    if spec.family == "independence":
        x = _cells(u)
        if len(x) != spec.n_cells:
            raise DimensionError(f"{len(x)} cells against {spec.n_cells} design columns")
        d1, d2 = spec.params["d1"], spec.params["d2"]
        tab = x.reshape(d1, d2)
        n = tab.sum()
        if n <= 0:
            raise DimensionError("fitting needs a table with positive total")
        e = np.outer(tab.sum(axis=1), tab.sum(axis=0)).ravel() / n
        A = spec.design_array.astype(float)
        return FitResult(e, True, 0, _moment_gap(A, e, A @ x), bool(np.any(e == 0)))
    return fit_ips(spec, u, tol, max_sweeps)


def chi_square(u, fit: FitResult) -> float:
    """Sum of ``(u - e)^2 / e`` over cells with positive fitted value."""
    if not fit.converged:
        raise NonConvergenceError(
            f"MLE fit did not converge ({fit.iterations} sweeps, moment gap {fit.max_moment_gap:.3g})"
        )
    x = _cells(u)
    e = fit.fitted
    if len(x) != len(e):
        raise DimensionError(f"{len(x)} cells against {len(e)} fitted values")
    zero = e <= 0
    if np.any(x[zero] > 0):
        c = int(np.flatnonzero(zero & (x > 0))[0])
        raise InconsistentFitError(f"cell {c} has count {x[c]:g} but fitted value 0")
    pos = ~zero
    return float(np.sum((x[pos] - e[pos]) ** 2 / e[pos]))


def histogram(values: Sequence[float], bin_count: int = 50) -> list[tuple[tuple[float, float], int]]:
    """Equal-width bins over ``[min, max]``; the last bin is closed."""
    if bin_count < 1:
        raise ConfigurationError("bin_count must be at least 1")
    if len(values) == 0:
        return []
    x = np.asarray(values, dtype=float)
    try:
        counts, edges = np.histogram(x, bins=bin_count)
    except ValueError:
        # range too narrow for finite bins (values equal up to rounding)
        counts, edges = np.histogram(x, bins=bin_count, range=(x.min() - 0.5, x.max() + 0.5))
    return [((float(edges[k]), float(edges[k + 1])), int(counts[k])) for k in range(bin_count)]


def _scorer(fit: FitResult):
    cache: dict[tuple[int, ...], float] = {}

    def score(state: tuple[int, ...]) -> float:
        s = cache.get(state)
        if s is None:
            s = cache[state] = chi_square(state, fit)
        return s

    return score


def exact_pvalue_mc(
    spec: ModelSpec,
    u,
    basis: MarkovBasis | Sequence | None,
    cfg: WalkConfig,
    chains: int = 1,
    bins: int = 50,
) -> TestResult:
    """Monte Carlo conditional p-value from Metropolis-Hastings walks.

    The fit is computed once from ``u``; every recorded state is scored
    against it. Several chains use independent streams split from
    ``cfg.seed`` and are pooled in chain order.
    """
    if chains < 1:
        raise ConfigurationError("chains must be at least 1")
    fit = fit_mle(spec, u)
    score = _scorer(fit)
    cells = tuple(u.cells if isinstance(u, Table) else u)
    observed = score(cells)
    values: list[float] = []
    accepted = proposed = 0
    for c in range(chains):
        sample = walk(spec, basis, cells, cfg, rng=chain_rng(cfg.seed, c))
        values.extend(score(s) for s in sample.states)
        accepted += sample.acceptance_count
        proposed += sample.proposal_count
    n = len(values)
    if n == 0:
        raise ConfigurationError("walk recorded no states; need steps > burn_in")
    exceed = sum(1 for v in values if v >= observed - TIE_SLACK)
    p = exceed / n
    return TestResult(
        observed_stat=observed,
        sample_size=n,
        exceed_count=exceed,
        p_value=p,
        mc_std_error=math.sqrt(p * (1 - p) / n),
        histogram=histogram(values, bins),
        extra={"acceptance_rate": accepted / proposed if proposed else 0.0, "values": values},
    )


def exact_pvalue_enumerated(spec: ModelSpec, u, cap: int = 100_000, bins: int = 50) -> TestResult:
    """Exact conditional p-value by enumerating the fiber of ``u``.

    Fiber points are weighted by ``1 / prod(v_c!)``.
    """
    cells = tuple(u.cells if isinstance(u, Table) else u)
    fit = fit_mle(spec, cells)
    observed = chi_square(cells, fit)
    fiber = enumerate_fiber_cells(spec.design, cells, cap)
    stats = [chi_square(v, fit) for v in fiber]
    logw = np.array([conditional_log_weight(v) for v in fiber])
    w = np.exp(logw - logw.max())
    extreme = np.array(stats) >= observed - TIE_SLACK
    p = float(w[extreme].sum() / w.sum())
    return TestResult(
        observed_stat=observed,
        sample_size=len(fiber),
        exceed_count=int(extreme.sum()),
        p_value=min(1.0, p),
        mc_std_error=0.0,
        histogram=histogram(stats, bins),
        extra={"values": stats},
    )


def autocorrelation_time(values: Sequence[float], cutoff: float = 0.02, max_lag: int | None = None) -> float:
    """Integrated autocorrelation time ``1 + 2 * sum(rho_k)``.

    The sum stops at the first lag whose autocorrelation falls below
    ``cutoff``. A constant series has time 1.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        return 1.0
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var == 0.0:
        return 1.0
    tau = 1.0
    for k in range(1, min(max_lag or n // 2, n - 1)):
        rho = float(np.dot(x[:-k], x[k:])) / n / var
        if rho < cutoff:
            break
        tau += 2 * rho
    return tau


def pilot_thin(spec: ModelSpec, u, basis, cfg: WalkConfig, pilot_seed: int = 0) -> int:
    """Thinning ``ceil(2 * tau)`` from a pilot chain on a separate seed.

    ``tau`` is the autocorrelation time of the indicator "at least as
    extreme as ``u``" along a pilot walk with the settings of ``cfg``.
    Samples this far apart are close to independent, so the binomial
    standard error reported by :func:`exact_pvalue_mc` is honest.
    """
    from dataclasses import replace

    fit = fit_mle(spec, u)
    score = _scorer(fit)
    cells = tuple(u.cells if isinstance(u, Table) else u)
    observed = score(cells)
    pilot = walk(spec, basis, cells, replace(cfg, seed=pilot_seed, thin=1), rng=chain_rng(pilot_seed))
    ind = [float(score(s) >= observed - TIE_SLACK) for s in pilot.states]
    return max(1, math.ceil(2 * autocorrelation_time(ind)))
