"""Optimal revenue on finite supports: the IC/IR linear program and closed forms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import simplex
from .mechanism import Menu, revenue
from .valuation import (
    AllocationSpace,
    DiscreteValuation,
    l1_distribution,
    marginal,
)


@dataclass
class Certificate:
    """Dual solution of the revenue LP with its quality measures."""

    dual: np.ndarray
    gap: float
    primal_residual: float
    dual_residual: float


@dataclass
class OptimalMechanismResult:
    menu: Menu
    value: float
    certificate: Certificate
    status: str
    iterations: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "menu": self.menu.to_dict(),
            "gap": self.certificate.gap,
            "status": self.status,
            "iterations": self.iterations,
        }


def _allocation_map(space: AllocationSpace, k: int) -> tuple[np.ndarray, np.ndarray]:
    """``q = base + G r`` with ``r >= 0`` the LP allocation variables."""
    if space is AllocationSpace.IMPLEMENTATION:
        base = np.zeros(k)
        base[-1] = 1.0
        G = np.vstack([np.eye(k - 1), -np.ones((1, k - 1))])
        return base, G
    return np.zeros(k), np.eye(k)


def build_program(d: DiscreteValuation, space: AllocationSpace):
    """Standard-form revenue program ``max c.z, A z <= b, z >= 0``.

    Per type ``j`` the variables are the free allocation coordinates ``r_j``
    followed by the price ``s_j``. Returns ``(c, A, b, types, probs, base, G)``.
    """
    X = np.asarray(d.support, dtype=float)
    P = np.asarray(d.probs, dtype=float)
    if space is AllocationSpace.IMPLEMENTATION and not np.any(np.all(X == 0, axis=1)):
        # zero type with no weight: forces a free entry, i.e. IR on all of R^k_+
        X = np.vstack([X, np.zeros((1, X.shape[1]))])
        P = np.concatenate([P, [0.0]])
    n, k = X.shape
    base, G = _allocation_map(space, k)
    r = G.shape[1]
    per = r + 1
    nv = n * per
    gx = X @ G  # gx[j] = G^T x_j
    bx = X @ base

    c = np.zeros(nv)
    c[r::per] = P

    pairs = [(j, l) for j in range(n) for l in range(n) if j != l]
    A_ic = np.zeros((len(pairs), nv))
    for t, (j, l) in enumerate(pairs):
        A_ic[t, j * per : j * per + r] -= gx[j]
        A_ic[t, l * per : l * per + r] += gx[j]
        A_ic[t, j * per + r] += 1.0
        A_ic[t, l * per + r] -= 1.0

    A_ir = np.zeros((n, nv))
    for j in range(n):
        A_ir[j, j * per : j * per + r] = -gx[j]
        A_ir[j, j * per + r] = 1.0
    b_ir = bx.copy()

    if space is AllocationSpace.ADDITIVE:
        A_sp = np.zeros((n * r, nv))
        for j in range(n):
            for i in range(r):
                A_sp[j * r + i, j * per + i] = 1.0
    elif r > 0:
        A_sp = np.zeros((n, nv))
        for j in range(n):
            A_sp[j, j * per : j * per + r] = 1.0
    else:
        A_sp = np.zeros((0, nv))
    A = np.vstack([A_ic, A_ir, A_sp])
    b = np.concatenate([np.zeros(len(pairs)), b_ir, np.ones(A_sp.shape[0])])
    return c, A, b, X, P, base, G


def _dedupe(q: np.ndarray, s: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    keep: list[int] = []
    for i in range(len(s)):
        if not any(
            abs(s[i] - s[j]) <= tol and np.all(np.abs(q[i] - q[j]) <= tol) for j in keep
        ):
            keep.append(i)
    return q[keep], s[keep]


def optimal_rev_lp(
    d: DiscreteValuation, space: AllocationSpace | str = AllocationSpace.ADDITIVE
) -> OptimalMechanismResult:
    """Revenue-maximizing IC/IR mechanism for ``d`` over the allocation ``space``.

    Types with zero mass still impose their IC constraints. Prices are kept
    nonnegative, which loses no revenue with an outside option available.
    """
    space = AllocationSpace.parse(space)
    if space is AllocationSpace.IMPLEMENTATION and d.k < 1:
        raise ValueError("implementation space needs at least one outcome")
    c, A, b, X, P, base, G = build_program(d, space)
    sol = simplex.maximize(c, A, b)
    n, k = X.shape
    r = G.shape[1]
    per = r + 1
    z = sol.x.reshape(n, per)
    q = base[None, :] + z[:, :r] @ G.T
    q = np.clip(q, 0.0, 1.0)
    s = z[:, r].copy()
    s[np.abs(s) < 1e-13] = 0.0
    if space is AllocationSpace.IMPLEMENTATION:
        zero_type = np.flatnonzero(np.all(X == 0, axis=1))
        s[zero_type] = 0.0
        q = q / q.sum(axis=1, keepdims=True)
    q, s = _dedupe(q, s)
    menu = Menu.build(zip(q, s), space, k=k)
    cert = Certificate(sol.dual, sol.gap, sol.primal_residual, sol.dual_residual)
    status = sol.status
    if status == "unbounded":
        status = "numeric_warning"
    return OptimalMechanismResult(menu, sol.value, cert, status, sol.iterations)


def myerson_one_good(d: DiscreteValuation) -> tuple[float, float]:
    """Optimal posted price ``argmax_t t * P[X >= t]`` over support prices.

    Ties go to the lowest price. Returns ``(price, revenue)``.
    """
    if d.k != 1:
        raise ValueError(f"one-good formula needs k = 1, got k = {d.k}")
    v = d.support[:, 0]
    order = np.argsort(v)
    v = v[order]
    p = d.probs[order]
    tail = np.cumsum(p[::-1])[::-1]  # P[X >= v_i]
    rev = v * tail
    best = rev.max()
    i = int(np.flatnonzero(rev >= best - 1e-12 * max(1.0, best))[0])
    return float(v[i]), float(rev[i])


def srev(d: DiscreteValuation) -> float:
    """Revenue of the best selling-separately mechanism."""
    return float(sum(myerson_one_good(marginal(d, i))[1] for i in range(d.k)))


def separate_prices_opt(d: DiscreteValuation) -> np.ndarray:
    return np.array([myerson_one_good(marginal(d, i))[0] for i in range(d.k)])


def brev(d: DiscreteValuation) -> float:
    """Revenue of the best grand-bundle price."""
    return myerson_one_good(l1_distribution(d))[1]


def brev_price(d: DiscreteValuation) -> float:
    return myerson_one_good(l1_distribution(d))[0]


def _max_prices(weights: np.ndarray) -> np.ndarray | None:
    """Largest prices meeting ``s_j - s_l <= w[l, j]``; node 0 is the free option.

    Shortest paths from node 0 (Floyd-Warshall); ``None`` on a negative cycle.
    """
    D = weights.copy()
    np.fill_diagonal(D, np.minimum(np.diag(D), 0.0))
    for t in range(D.shape[0]):
        D = np.minimum(D, D[:, [t]] + D[[t], :])
    if np.any(np.diag(D) < -1e-12):
        return None
    return D[0, 1:]


def drev_bruteforce(d: DiscreteValuation, max_k: int = 2, max_n: int = 6) -> float:
    """Best deterministic (0/1 allocation) additive mechanism, by enumeration.

    For each assignment of support points to bundles, the revenue-maximal
    prices are the pointwise-largest solution of the IC/IR difference
    constraints, found by shortest paths.
    """
    if d.k > max_k or d.n > max_n:
        raise ValueError(f"instance too large for enumeration (k={d.k}, n={d.n})")
    X, P = d.support, d.probs
    n, k = X.shape
    bundles = np.array(list(itertools.product((0.0, 1.0), repeat=k)))
    best = 0.0
    for assign in itertools.product(range(len(bundles)), repeat=n):
        Q = bundles[list(assign)]
        W = np.full((n + 1, n + 1), np.inf)
        W[0, 0] = 0.0
        for j in range(n):
            W[0, j + 1] = Q[j] @ X[j]  # IR: s_j <= q_j.x_j
            for l in range(n):
                if l != j:
                    W[l + 1, j + 1] = (Q[j] - Q[l]) @ X[j]  # IC: s_j - s_l <= (q_j - q_l).x_j
        prices = _max_prices(W)
        if prices is None:
            continue
        best = max(best, float(P @ prices))
    return best


def class_rev_check(menu: Menu, d: DiscreteValuation) -> float:
    """Revenue of one member of a mechanism class: a lower bound on its class revenue."""
    return revenue(menu, d)
