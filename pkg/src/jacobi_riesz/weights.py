"""Maximal function, A_p constants and Rubio de Francia weights on ``((0, pi), dmu_{alpha,beta})``.

Functions live on a grid of points in ``(0, pi)``; each point owns the cell
between the midpoints to its neighbours (the outer cells reach 0 and pi), and
a function is taken constant on its cell.  Cell masses are exact
``dmu_{alpha,beta}`` measures, so averages over unions of consecutive cells
are exact for such step functions.  Suprema over intervals run over all
``O(n^2)`` grid-aligned intervals, which bounds the continuum supremum from
below.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special import JacobiParams, measure_cdf

__all__ = [
    "GridFunction",
    "ApReport",
    "RdfResult",
    "HarnessRow",
    "uniform_grid",
    "power_weight",
    "cell_masses",
    "lp_norm",
    "maximal_function",
    "maximal_operator_norm",
    "ap_constant",
    "rubio_de_francia_weight",
    "vector_valued_harness",
    "write_harness_csv",
]


@dataclass(frozen=True, eq=False)
class GridFunction:
    theta_grid: np.ndarray
    values: np.ndarray
    params: JacobiParams

    def __post_init__(self):
        g = np.array(self.theta_grid, dtype=float)
        v = np.array(self.values, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise DomainError("grid must be a nonempty vector")
        if np.any(np.diff(g) <= 0) or g[0] <= 0 or g[-1] >= np.pi:
            raise DomainError("grid must be strictly increasing inside (0, pi)")
        if v.shape != g.shape:
            raise ValueError(f"values have shape {v.shape}, grid has {g.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid values must be finite")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "theta_grid", g)
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.theta_grid, values, self.params)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.params == other.params and np.array_equal(self.theta_grid, other.theta_grid)


@dataclass(frozen=True)
class ApReport:
    p: float
    constant: float
    worst_interval: tuple


@dataclass(frozen=True, eq=False)
class RdfResult:
    weight: GridFunction
    norm_estimate: float
    K: int
    tail: np.ndarray

    @property
    def tail_bound(self) -> float:
        """``2^-K``, the geometric bound on the neglected part relative to ``||f||_p``."""
        return 2.0**-self.K


@dataclass(frozen=True)
class HarnessRow:
    p: float
    weight_id: str
    lhs: float
    rhs: float
    ratio: float


def uniform_grid(n: int, params: JacobiParams, values=None) -> GridFunction:
    """Cell midpoints ``(i + 1/2) pi / n``; values default to ones."""
    if n < 1:
        raise DomainError("grid needs at least one point")
    theta = (np.arange(n) + 0.5) * np.pi / n
    return GridFunction(theta, np.ones(n) if values is None else values, params)


def power_weight(grid: GridFunction, gamma: float, delta: float) -> GridFunction:
    t = grid.theta_grid
    return grid.with_values(t**gamma * (np.pi - t) ** delta)


def _edges(theta):
    mid = 0.5 * (theta[1:] + theta[:-1])
    return np.concatenate([[0.0], mid, [np.pi]])


def cell_masses(f: GridFunction) -> np.ndarray:
    cdf = measure_cdf(f.params, _edges(f.theta_grid))
    return np.diff(np.atleast_1d(cdf))


def lp_norm(f: GridFunction, p: float) -> float:
    m = cell_masses(f)
    return float(np.sum(m * np.abs(f.values) ** p) ** (1.0 / p))


def _averages(values, masses):
    """``avg[a, b]`` over cells ``a..b`` for ``a <= b``; ``-inf`` below the diagonal."""
    # row a accumulates from cell a, so no differences of large prefix sums
    n = len(values)
    upper = np.triu(np.ones((n, n), dtype=bool))
    num = np.cumsum(np.where(upper, values * masses, 0.0), axis=1)
    den = np.cumsum(np.where(upper, masses, 0.0), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        avg = np.where(upper, num / den, -np.inf)
    return avg, den


def _maximal(values, masses):
    """Maximal averages and the maximising interval ``(a_i, b_i)`` at each cell."""
    n = len(values)
    avg, den = _averages(values, masses)
    # best[a, i] = max over b >= i of avg[a, b]
    best = np.maximum.accumulate(avg[:, ::-1], axis=1)[:, ::-1]
    rows = np.arange(n)
    best = np.where(rows[:, None] <= rows[None, :], best, -np.inf)
    a = np.argmax(best, axis=0)
    mf = best[a, rows]
    shifted = np.where(rows[None, :] >= rows[:, None], avg[a], -np.inf)
    b = np.argmax(shifted, axis=1)
    return mf, a, b, den[a, b]


def maximal_function(f: GridFunction) -> GridFunction:
    """Sup of ``dmu``-averages of ``|f|`` over grid-aligned intervals containing each point.

    Cost is ``O(n^2)`` time and memory: for each left end the averages are
    suffix-maximised over right ends, then maximised over left ends.
    """
    if f.values.size == 0:
        raise DomainError("empty grid")
    mf, *_ = _maximal(np.abs(f.values), cell_masses(f))
    return f.with_values(mf)


def _adjoint(y, a, b, iden, masses):
    # transpose of the linearised maximal operator x -> (sum_{c in [a_i,b_i]} m_c x_c)/M_i
    diff = np.zeros(len(y) + 1)
    np.add.at(diff, a, y / iden)
    np.add.at(diff, b + 1, -y / iden)
    return masses * np.cumsum(diff)[:-1]


def maximal_operator_norm(grid: GridFunction, p: float, max_iter: int = 200, rtol: float = 1e-6) -> float:
    """Lower estimate of ``||M||`` on ``L^p(dmu)`` restricted to the grid.

    Alternates between linearising ``M`` at the current iterate (fixing the
    maximising intervals) and a p-norm power step for that linear operator.
    Several deterministic starts are tried and the best ratio is kept.
    """
    if p <= 1:
        raise DomainError("p must exceed 1")
    masses = cell_masses(grid)
    n = len(masses)
    q = 1.0 / (p - 1.0)
    starts = [np.ones(n), np.eye(n)[0] + 1e-3, np.eye(n)[-1] + 1e-3, np.eye(n)[n // 2] + 1e-3]

    def norm(x):
        return np.sum(masses * x**p) ** (1.0 / p)

    best = 1.0
    for x in starts:
        x = x / norm(x)
        ratio = 0.0
        for _ in range(max_iter):
            mx, a, b, iden = _maximal(x, masses)
            new_ratio = norm(mx) / norm(x)
            g = _adjoint(mx ** (p - 1), a, b, iden, masses) / masses
            x = np.maximum(g, 0.0) ** q
            x = x / norm(x)
            if abs(new_ratio - ratio) <= rtol * new_ratio:
                ratio = new_ratio
                break
            ratio = new_ratio
        best = max(best, ratio)
    return float(best)


def ap_constant(w: GridFunction, p: float) -> ApReport:
    """``sup_I (avg_I w) (avg_I w^(-1/(p-1)))^(p-1)`` over grid-aligned intervals."""
    if p <= 1:
        raise DomainError("p must exceed 1")
    if np.any(w.values <= 0):
        raise DomainError("weights must be positive")
    masses = cell_masses(w)
    avg_w, _ = _averages(w.values, masses)
    avg_d, _ = _averages(w.values ** (-1.0 / (p - 1.0)), masses)
    with np.errstate(invalid="ignore"):
        prod = np.where(np.isfinite(avg_w), avg_w * avg_d ** (p - 1.0), -np.inf)
    a, b = np.unravel_index(np.argmax(prod), prod.shape)
    edges = _edges(w.theta_grid)
    return ApReport(float(p), float(prod[a, b]), (float(edges[a]), float(edges[b + 1])))


def rubio_de_francia_weight(f: GridFunction, p: float, K: int = 30, norm_estimate: float | None = None) -> RdfResult:
    """``Rf = sum_{k=0}^{K} M^k f / (2N)^k``.

    ``N`` is the larger of the power-iteration estimate of ``||M||_p`` and
    every growth ratio ``||M^k f||_p / ||M^(k-1) f||_p`` met while iterating,
    which makes ``||Rf||_p <= 2 ||f||_p`` hold for the computed series.  The
    returned ``tail`` is ``M^(K+1) f / (2N)^K``, the slack in
    ``M(Rf) <= 2N Rf + tail``.
    """
    if K < 1:
        raise DomainError("K must be at least 1")
    if np.any(f.values < 0):
        raise DomainError("f must be nonnegative")
    masses = cell_masses(f)
    est = maximal_operator_norm(f, p) if norm_estimate is None else float(norm_estimate)

    def norm(x):
        return np.sum(masses * np.abs(x) ** p) ** (1.0 / p)

    iterates = [f.values.astype(float)]
    for _ in range(K + 1):
        iterates.append(_maximal(iterates[-1], masses)[0])
    N = est
    for prev, cur in zip(iterates[:-2], iterates[1:-1]):
        if norm(prev) > 0:
            N = max(N, norm(cur) / norm(prev))
    total = np.zeros_like(iterates[0])
    for k in range(K + 1):
        total += iterates[k] / (2 * N) ** k
    tail = iterates[K + 1] / (2 * N) ** K
    return RdfResult(f.with_values(total), float(N), K, tail)


def vector_valued_harness(family, r: float, p: float, weights, weight_ids=None) -> list[HarnessRow]:
    """Both sides of the weighted ``l^r``-valued inequality for each weight.

    ``family`` is a list of ``(f, Sf)`` grid-function pairs.  For each weight
    ``w`` the rows report ``lhs = int (sum |Sf|^r)^(p/r) w dmu``,
    ``rhs = int (sum |f|^r)^(p/r) w dmu`` and ``lhs / rhs``.
    """
    if not family:
        raise DomainError("family is empty")
    grid = family[0][0]
    for f, sf in family:
        if not (f.same_grid(grid) and sf.same_grid(grid)):
            raise ValueError("all functions in the family must share one grid")
    weights = list(weights)
    for w in weights:
        if not w.same_grid(grid):
            raise ValueError("weights must live on the family's grid")
    if weight_ids is None:
        weight_ids = [f"w{i}" for i in range(len(weights))]
    masses = cell_masses(grid)
    F = np.sum([np.abs(f.values) ** r for f, _ in family], axis=0) ** (p / r)
    S = np.sum([np.abs(sf.values) ** r for _, sf in family], axis=0) ** (p / r)
    rows = []
    for wid, w in zip(weight_ids, weights):
        lhs = float(np.sum(S * w.values * masses))
        rhs = float(np.sum(F * w.values * masses))
        rows.append(HarnessRow(float(p), str(wid), lhs, rhs, lhs / rhs))
    return rows


def write_harness_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "weight_id", "lhs", "rhs", "ratio"])
        for row in rows:
            w.writerow([repr(row.p), row.weight_id, repr(row.lhs), repr(row.rhs), repr(row.ratio)])
