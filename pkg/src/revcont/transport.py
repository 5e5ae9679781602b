"""Exact Wasserstein distance between finite distributions.

The transportation problem is solved by the transportation simplex:
north-west-corner start, then MODI (u-v potential) pricing with stepping-
stone pivots around the basis tree. Degeneracy is removed with the classical
symbolic perturbation: supply ``i`` becomes ``a_i + eps`` and the last demand
``b_n + m*eps``. Every flow is kept as a pair ``(value, eps-coefficient)``
compared lexicographically, so no basic flow is ever zero and the method
cannot cycle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .valuation import AllocationSpace, DiscreteValuation, gamma_seminorm, l1_norm, linf_norm


@dataclass(frozen=True)
class GroundCost:
    """Named ground cost ``rho(x - y)`` on the valuation space."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def parse(cls, spec: "str | AllocationSpace | GroundCost") -> "GroundCost":
        if isinstance(spec, GroundCost):
            return spec
        if isinstance(spec, AllocationSpace):
            return gamma_cost(spec)
        text = str(spec).strip().lower()
        if text == "l1":
            return L1
        if text == "linf":
            return LINF
        if text.startswith("gamma:"):
            return gamma_cost(AllocationSpace.parse(text.split(":", 1)[1]))
        raise ValueError(f"unknown ground cost {spec!r}")

    def matrix(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(xs[:, None, :] - ys[None, :, :]), dtype=float)


L1 = GroundCost("l1", l1_norm)
LINF = GroundCost("linf", linf_norm)


def gamma_cost(space: AllocationSpace | str) -> GroundCost:
    space = AllocationSpace.parse(space)
    if space is AllocationSpace.ADDITIVE:
        return GroundCost("gamma:additive", l1_norm)
    return GroundCost(f"gamma:{space.value}", lambda z, _s=space: gamma_seminorm(_s, z))


@dataclass(frozen=True, eq=False)
class TransportPlan:
    matrix: np.ndarray
    cost: float
    ground_cost: str

    def to_dict(self) -> dict:
        return {"ground_cost": self.ground_cost, "cost": self.cost, "matrix": self.matrix.tolist()}


def _lt(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] < b[0] or (a[0] == b[0] and a[1] < b[1])


def transportation_simplex(
    supply: np.ndarray, demand: np.ndarray, cost: np.ndarray, tol: float = 1e-12
) -> tuple[np.ndarray, int]:
    """Minimum-cost plan for balanced ``supply``/``demand`` with ``cost``.

    Returns ``(plan, pivots)``.
    """
    a = np.asarray(supply, dtype=float)
    b = np.asarray(demand, dtype=float)
    C = np.asarray(cost, dtype=float)
    m, n = C.shape
    # push any rounding imbalance into the last demand
    b = b.copy()
    b[-1] += a.sum() - b.sum()
    if b[-1] < 0:
        b[-1] = 0.0

    val = np.zeros((m, n))
    eps = np.zeros((m, n))
    basic = np.zeros((m, n), dtype=bool)

    # north-west corner on the perturbed problem
    a = np.where(np.abs(a) <= tol, 0.0, a)
    b = np.where(np.abs(b) <= tol, 0.0, b)
    ra = [(float(a[i]), 1.0) for i in range(m)]
    rb = [(float(b[j]), 0.0) for j in range(n)]
    rb[-1] = (rb[-1][0], float(m))
    i = j = 0
    def snap(t):
        return (0.0 if abs(t[0]) <= tol else t[0], t[1])

    while i < m and j < n:
        basic[i, j] = True
        amt = rb[j] if _lt(rb[j], ra[i]) else ra[i]
        val[i, j], eps[i, j] = amt
        ra[i] = snap((ra[i][0] - amt[0], ra[i][1] - amt[1]))
        rb[j] = snap((rb[j][0] - amt[0], rb[j][1] - amt[1]))
        row_done = ra[i] == (0.0, 0.0)
        col_done = rb[j] == (0.0, 0.0)
        if not row_done and not col_done:
            raise AssertionError("north-west corner stalled")
        i += row_done
        j += col_done
    # the last cell closes both the last row and the last column
    assert basic.sum() == m + n - 1, "north-west corner produced a degenerate start"

    pivots = 0
    scale = max(1.0, float(np.abs(C).max(initial=0.0)))
    while True:
        u, v = _potentials(C, basic)
        red = C - u[:, None] - v[None, :]
        red[basic] = 0.0
        ei, ej = np.unravel_index(np.argmin(red), red.shape)
        if red[ei, ej] >= -tol * scale:
            break
        cycle = _cycle(basic, int(ei), int(ej))
        minus = cycle[1::2]
        leave = min(minus, key=lambda c: (val[c], eps[c], c))
        th = (val[leave], eps[leave])
        for t, c in enumerate(cycle):
            sgn = 1.0 if t % 2 == 0 else -1.0
            val[c] += sgn * th[0]
            eps[c] += sgn * th[1]
            if abs(val[c]) <= tol:
                val[c] = 0.0
        basic[ei, ej] = True
        basic[leave] = False
        val[leave] = 0.0
        eps[leave] = 0.0
        pivots += 1
    plan = np.where(basic, np.maximum(val, 0.0), 0.0)
    return plan, pivots


def _potentials(C: np.ndarray, basic: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m, n = C.shape
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    rows_of = [np.flatnonzero(basic[:, j]) for j in range(n)]
    cols_of = [np.flatnonzero(basic[i, :]) for i in range(m)]
    stack = [("r", 0)]
    while stack:
        kind, idx = stack.pop()
        if kind == "r":
            for j in cols_of[idx]:
                if np.isnan(v[j]):
                    v[j] = C[idx, j] - u[idx]
                    stack.append(("c", j))
        else:
            for i in rows_of[idx]:
                if np.isnan(u[i]):
                    u[i] = C[i, idx] - v[idx]
                    stack.append(("r", i))
    return u, v


def _cycle(basic: np.ndarray, ei: int, ej: int) -> list[tuple[int, int]]:
    """Stepping-stone cycle: entering cell first, then alternating -/+ cells."""
    m, n = basic.shape
    # BFS over the basis tree from row node ei to column node ej
    start = ("r", ei)
    parent = {start: None}
    queue = [start]
    goal = ("c", ej)
    while queue and goal not in parent:
        nxt = []
        for kind, idx in queue:
            if kind == "r":
                nbrs = [("c", j) for j in np.flatnonzero(basic[idx, :])]
            else:
                nbrs = [("r", i) for i in np.flatnonzero(basic[:, idx])]
            for nb in nbrs:
                if nb not in parent:
                    parent[nb] = (kind, idx)
                    nxt.append(nb)
        queue = nxt
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()  # row ei -> ... -> col ej
    cells = []
    for p, q in zip(path, path[1:]):
        cell = (p[1], q[1]) if p[0] == "r" else (q[1], p[1])
        cells.append(cell)
    # path cells alternate starting with a cell in row ei; entering cell closes the loop.
    # Going around from the entering cell (ei, ej) we meet the path in reverse.
    return [(ei, ej)] + cells[::-1]


def wasserstein(
    dX: DiscreteValuation, dY: DiscreteValuation, ground_cost="l1"
) -> tuple[float, TransportPlan]:
    """Order-1 Wasserstein distance with an optimal coupling."""
    if dX.k != dY.k:
        raise ValueError(f"dimension mismatch: {dX.k} vs {dY.k} goods")
    gc = GroundCost.parse(ground_cost)
    C = gc.matrix(dX.support, dY.support)
    plan, _ = transportation_simplex(dX.probs, dY.probs, C)
    value = float(np.sum(plan * C))
    return value, TransportPlan(plan, value, gc.name)


def wasserstein_gamma(
    dX: DiscreteValuation, dY: DiscreteValuation, space: AllocationSpace | str
) -> tuple[float, TransportPlan]:
    return wasserstein(dX, dY, gamma_cost(space))


def assignment_oracle(dX: DiscreteValuation, dY: DiscreteValuation, ground_cost="l1", max_n: int = 7) -> float:
    """Brute-force minimum over permutation couplings of two uniform distributions.

    Takes the raw point lists, so both inputs must be uniform with the same
    number of (distinct) points.
    """
    n = dX.n
    if dY.n != n or n > max_n:
        raise ValueError("oracle needs equal support sizes no larger than max_n")
    if not (np.allclose(dX.probs, 1.0 / n) and np.allclose(dY.probs, 1.0 / n)):
        raise ValueError("oracle needs uniform distributions")
    return permutation_min(dX.support, dY.support, ground_cost)


def permutation_min(xs, ys, ground_cost="l1") -> float:
    """``min_sigma (1/n) sum_i rho(x_i - y_sigma(i))`` over all permutations."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = xs.shape[0]
    C = GroundCost.parse(ground_cost).matrix(xs, ys)
    rows = np.arange(n)
    best = min(C[rows, list(p)].sum() for p in itertools.permutations(range(n)))
    return float(best) / n
