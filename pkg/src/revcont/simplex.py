"""Dense tableau simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The origin is feasible, so the slack basis starts the method directly.
Pricing is Dantzig's largest-coefficient rule; after a run of degenerate
pivots the solver switches to Bland's rule for the rest of the solve, which
rules out cycling. Pivot elements that are tiny relative to their column
are ignored as round-off; accepting one can wreck feasibility. On exit the final basis is refactorized to recover a
clean primal vertex and its dual, and the duality gap and residuals are
reported as an optimality certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
PIVOT_RTOL = 1e-7  # entries this small relative to their column are treated as round-off
STALL_LIMIT = 50


class LPError(RuntimeError):
    pass


@dataclass
class LPSolution:
    x: np.ndarray
    value: float
    dual: np.ndarray
    status: str  # "optimal" | "numeric_warning" | "unbounded"
    iterations: int
    gap: float
    primal_residual: float
    dual_residual: float
    basis: np.ndarray

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def maximize(
    c,
    A,
    b,
    *,
    tol: float = PIVOT_TOL,
    gap_tol: float = 1e-7,
    max_iter: int = 100_000,
) -> LPSolution:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise LPError("right-hand side must be nonnegative (origin must be feasible)")

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = np.arange(n, n + m)

    bland = False
    stalled = 0
    it = 0
    status = "optimal"
    cscale = max(1.0, float(np.abs(c).max(initial=0.0)))
    while True:
        red = T[m, :-1]
        if bland:
            cand = np.flatnonzero(red < -tol * cscale)
            if cand.size == 0:
                break
            col = int(cand[0])
        else:
            col = int(np.argmin(red))
            if red[col] >= -tol * cscale:
                break
        colv = T[:m, col]
        pos = colv > max(tol, PIVOT_RTOL * float(np.abs(colv).max()))
        if not np.any(pos):
            status = "unbounded"
            break
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / colv[pos]
        rmin = ratios.min()
        near = np.flatnonzero(ratios <= rmin + tol * max(1.0, abs(rmin)))
        if bland:
            row = int(near[np.argmin(basis[near])])
        else:
            row = int(near[np.argmax(colv[near])])
        if T[row, -1] <= tol:
            stalled += 1
            if stalled >= STALL_LIMIT:
                bland = True
        else:
            stalled = 0

        T[row] /= T[row, col]
        f = T[:, col].copy()
        f[row] = 0.0
        T -= np.outer(f, T[row])
        T[:m, -1] = np.maximum(T[:m, -1], 0.0)
        basis[row] = col
        it += 1
        if it >= max_iter:
            status = "numeric_warning"
            break

    x_full = np.zeros(n + m)
    x_full[basis] = T[:m, -1]
    y = T[m, n : n + m].copy()

    # refactorize on the final basis: removes drift accumulated over pivots
    full = np.hstack([A, np.eye(m)])
    cfull = np.concatenate([c, np.zeros(m)])
    B = full[:, basis]
    try:
        xb = np.linalg.solve(B, b)
        yy = np.linalg.solve(B.T, cfull[basis])
        if np.all(np.isfinite(xb)) and np.all(np.isfinite(yy)):
            x_full = np.zeros(n + m)
            x_full[basis] = np.maximum(xb, 0.0)
            y = yy
    except np.linalg.LinAlgError:
        pass

    x = x_full[:n]
    value = float(c @ x)
    y_clean = np.maximum(y, 0.0)
    primal_res = float(max(0.0, np.max(A @ x - b, initial=0.0)))
    dual_res = float(max(np.max(c - A.T @ y_clean, initial=0.0), np.max(-y, initial=0.0), 0.0))
    gap = float(abs(b @ y_clean - value))
    if status == "optimal" and (gap > gap_tol or primal_res > 1e-9 or dual_res > gap_tol):
        status = "numeric_warning"
    return LPSolution(x, value, y_clean, status, it, gap, primal_res, dual_res, basis.copy())
