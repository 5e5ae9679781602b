"""Exact rational simplex, used as an independent oracle for small programs.

Solves ``max c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``,
``x >= 0`` over :class:`fractions.Fraction` with a two-phase method and
Bland's rule throughout. Slow, but every answer is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .valuation import AllocationSpace, DiscreteValuation


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


def _F(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _pivot(T: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    pr = T[r]
    pv = pr[c]
    if pv != 1:
        T[r] = pr = [v / pv for v in pr]
    nz = [j for j, v in enumerate(pr) if v != 0]
    for i, row in enumerate(T):
        if i == r:
            continue
        f = row[c]
        if f != 0:
            for j in nz:
                row[j] -= f * pr[j]
    basis[r] = c


def _run(T: list[list[Fraction]], basis: list[int], allowed: int) -> None:
    """Bland-rule iterations on tableau ``T`` whose last row is the cost row."""
    m = len(T) - 1
    obj = T[m]
    while True:
        col = next((j for j in range(allowed) if obj[j] < 0), None)
        if col is None:
            return
        best = None
        for i in range(m):
            a = T[i][col]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise Unbounded()
        _pivot(T, basis, best[1], col)


def solve(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
) -> tuple[Fraction, list[Fraction]]:
    """Return ``(optimal value, optimal x)`` exactly."""
    c = [_F(v) for v in c]
    n = len(c)
    rows: list[tuple[list[Fraction], Fraction, bool]] = []
    for a, bi in zip(A_ub, b_ub):
        rows.append(([_F(v) for v in a], _F(bi), True))
    for a, bi in zip(A_eq, b_eq):
        rows.append(([_F(v) for v in a], _F(bi), False))
    m = len(rows)
    n_slack = sum(1 for r in rows if r[2])
    n_art = 0
    art_rows = []
    for i, (a, bi, ub) in enumerate(rows):
        if not ub or bi < 0:
            art_rows.append(i)
    n_art = len(art_rows)
    width = n + n_slack + n_art
    zero = Fraction(0)
    T: list[list[Fraction]] = []
    basis: list[int] = []
    slack_j = n
    art_j = n + n_slack
    for i, (a, bi, ub) in enumerate(rows):
        row = a + [zero] * (n_slack + n_art) + [bi]
        if ub:
            row[slack_j] = Fraction(1)
            slack_col = slack_j
            slack_j += 1
        if bi < 0:
            row = [-v for v in row]
        if i in art_rows:
            row[art_j] = Fraction(1)
            basis.append(art_j)
            art_j += 1
        else:
            basis.append(slack_col)
        T.append(row)

    if n_art:
        # phase 1: maximize -sum(artificials)
        obj = [zero] * (width + 1)
        for j in range(n + n_slack, width):
            obj[j] = Fraction(1)
        for i in range(m):
            if basis[i] >= n + n_slack:
                obj = [o - v for o, v in zip(obj, T[i])]
        T.append(obj)
        _run(T, basis, width)
        if T[m][-1] != 0:
            raise Infeasible()
        # drive remaining zero-level artificials out of the basis
        for i in range(m):
            if basis[i] >= n + n_slack:
                col = next((j for j in range(n + n_slack) if T[i][j] != 0), None)
                if col is not None:
                    _pivot(T, basis, i, col)
        T.pop()
        keep = [i for i in range(m) if basis[i] < n + n_slack]
        T = [T[i][: n + n_slack] + [T[i][-1]] for i in keep]
        basis = [basis[i] for i in keep]
        width = n + n_slack

    obj = [zero] * (width + 1)
    for j in range(n):
        obj[j] = -c[j]
    for i, bj in enumerate(basis):
        f = obj[bj]
        if f != 0:
            obj = [o - f * v for o, v in zip(obj, T[i])]
    T.append(obj)
    _run(T, basis, width)
    x = [zero] * width
    for i, bj in enumerate(basis):
        x[bj] = T[i][-1]
    return T[-1][-1], x[:n]


def exact_revenue(
    support: Sequence[Sequence], probs: Sequence, space: AllocationSpace | str = "additive"
) -> Fraction:
    """Optimal revenue of a finite-support valuation, in exact arithmetic.

    Built directly from the IC/IR program with free prices (split into
    positive and negative parts) and explicit allocation-space rows. For the
    implementation space, an extra entry must give the zero type nonnegative
    utility, which is individual rationality on the whole orthant.
    """
    space = AllocationSpace.parse(space)
    X = [[_F(v) for v in x] for x in support]
    P = [_F(p) for p in probs]
    k = len(X[0])
    if space is AllocationSpace.IMPLEMENTATION and not any(all(v == 0 for v in x) for x in X):
        X.append([Fraction(0)] * k)
        P.append(Fraction(0))
    n = len(X)
    per = k + 2  # q_1..q_k, s_plus, s_minus
    nv = n * per

    def q(j, i):
        return j * per + i

    def sp(j):
        return j * per + k

    def sm(j):
        return j * per + k + 1

    c = [Fraction(0)] * nv
    for j in range(n):
        c[sp(j)] = P[j]
        c[sm(j)] = -P[j]
    A_ub, b_ub, A_eq, b_eq = [], [], [], []

    def price_row(row, j, sign):
        row[sp(j)] += sign
        row[sm(j)] -= sign

    for j in range(n):
        # IR: s_j - q_j.x_j <= 0
        row = [Fraction(0)] * nv
        for i in range(k):
            row[q(j, i)] -= X[j][i]
        price_row(row, j, 1)
        A_ub.append(row)
        b_ub.append(Fraction(0))
        for l in range(n):
            if l == j:
                continue
            # IC: (q_l - q_j).x_j + s_j - s_l <= 0
            row = [Fraction(0)] * nv
            for i in range(k):
                row[q(j, i)] -= X[j][i]
                row[q(l, i)] += X[j][i]
            price_row(row, j, 1)
            price_row(row, l, -1)
            A_ub.append(row)
            b_ub.append(Fraction(0))
        for i in range(k):
            row = [Fraction(0)] * nv
            row[q(j, i)] = Fraction(1)
            A_ub.append(row)
            b_ub.append(Fraction(1))
        if space is not AllocationSpace.ADDITIVE:
            row = [Fraction(0)] * nv
            for i in range(k):
                row[q(j, i)] = Fraction(1)
            if space is AllocationSpace.UNIT_DEMAND:
                A_ub.append(row)
                b_ub.append(Fraction(1))
            else:
                A_eq.append(row)
                b_eq.append(Fraction(1))
    value, _ = solve(c, A_ub, b_ub, A_eq, b_eq)
    return value


def exact_revenue_of(d: DiscreteValuation, space: AllocationSpace | str = "additive") -> Fraction:
    """Exact revenue of ``d`` with its float data read as exact binary rationals."""
    return exact_revenue(
        [[Fraction(float(v)) for v in x] for x in np.asarray(d.support)],
        [Fraction(float(p)) for p in np.asarray(d.probs)],
        space,
    )
