"""Menu-form mechanisms: best response, revenue, rescaling and IC/IR checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .valuation import AllocationSpace, DiscreteValuation

# Utilities within TIE_RTOL * (||x||_1 + max price) of the best count as ties.
# Scale-free, so ties survive rescaling; absorbs LP round-off in optimal menus.
TIE_RTOL = 1e-10


class MenuEntry(NamedTuple):
    q: tuple[float, ...]
    s: float


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Menu:
    """A finite menu of (allocation, price) entries.

    ``q`` is ``(m, k)``, ``s`` is ``(m,)``. ``null_index`` points at the free
    outside option: the zero entry for additive and unit-demand spaces, and
    the first zero-price entry for implementation menus.
    """

    q: np.ndarray
    s: np.ndarray
    space: AllocationSpace = AllocationSpace.ADDITIVE
    null_index: int = 0

    @classmethod
    def build(
        cls,
        entries: Iterable,
        space: AllocationSpace | str = AllocationSpace.ADDITIVE,
        k: int | None = None,
        tol: float = 1e-9,
    ) -> "Menu":
        """Validate entries and attach the outside option.

        ``entries`` is an iterable of ``(q, s)`` pairs. Additive and
        unit-demand menus get a ``(0, 0)`` entry prepended unless one is
        already present; implementation menus must contain a zero-price
        entry themselves.
        """
        space = AllocationSpace.parse(space)
        qs, ss = [], []
        for q, s in entries:
            qs.append(np.atleast_1d(np.asarray(q, dtype=float)))
            ss.append(float(s))
        if k is None:
            if not qs:
                raise ValueError("cannot infer dimension of an empty menu; pass k")
            k = qs[0].shape[0]
        q = np.array(qs, dtype=float).reshape(len(qs), k)
        s = np.array(ss, dtype=float)
        for i in range(q.shape[0]):
            if not space.contains(q[i], tol):
                raise ValueError(f"entry {i} allocation {q[i].tolist()} is outside the {space.value} space")
        if np.any(s < 0):
            raise ValueError("negative menu price")
        q = np.clip(q, 0.0, 1.0)
        if space is AllocationSpace.IMPLEMENTATION:
            zero = np.flatnonzero(s == 0)
            if zero.size == 0:
                raise ValueError("implementation menus need a zero-price entry as the outside option")
            null = int(zero[0])
        else:
            is_null = (s == 0) & np.all(q == 0, axis=1)
            if np.any(is_null):
                null = int(np.flatnonzero(is_null)[0])
            else:
                q = np.vstack([np.zeros((1, k)), q])
                s = np.concatenate([[0.0], s])
                null = 0
        return cls(_readonly(q), _readonly(s), space, null)

    @property
    def k(self) -> int:
        return int(self.q.shape[1])

    @property
    def entries(self) -> list[MenuEntry]:
        return [MenuEntry(tuple(map(float, qi)), float(si)) for qi, si in zip(self.q, self.s)]

    def __len__(self) -> int:
        return int(self.s.shape[0])

    def __repr__(self) -> str:
        body = "; ".join(f"{list(map(float, qi))}@{float(si):.6g}" for qi, si in zip(self.q, self.s))
        return f"Menu[{self.space.value}]({body})"

    def to_dict(self) -> dict:
        return {
            "space": self.space.value,
            "entries": [{"q": qi.tolist(), "s": float(si)} for qi, si in zip(self.q, self.s)],
        }


class Choice(NamedTuple):
    index: int
    utility: float
    payment: float


def _utilities(menu: Menu, x: np.ndarray) -> np.ndarray:
    return x @ menu.q.T - menu.s[None, :]


def tie_sets(menu: Menu, points) -> np.ndarray:
    """Boolean ``(N, m)`` mask of utility-maximizing entries per point."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    u = _utilities(menu, x)
    scale = np.abs(x).sum(axis=1) + (menu.s.max() if len(menu) else 0.0)
    best = u.max(axis=1)
    return u >= (best - TIE_RTOL * scale)[:, None]


def choose(menu: Menu, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized best response: ``(index, utility, payment)`` arrays.

    Among (near-)maximal utilities the highest price wins, then the lowest
    index.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    ties = tie_sets(menu, x)
    pay = np.where(ties, menu.s[None, :], -np.inf)
    idx = np.argmax(pay, axis=1)
    util = np.einsum("ij,ij->i", x, menu.q[idx]) - menu.s[idx]
    return idx, util, menu.s[idx]


def best_response(menu: Menu, x) -> Choice:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != menu.k:
        raise ValueError(f"valuation has {x.shape[1]} goods, menu has {menu.k}")
    idx, util, pay = choose(menu, x)
    return Choice(int(idx[0]), float(util[0]), float(pay[0]))


def payments(menu: Menu, points) -> np.ndarray:
    return choose(menu, points)[2]


def revenue(menu: Menu, d: DiscreteValuation) -> float:
    """Expected payment ``E[s(X)]`` when every type best-responds to ``menu``."""
    if d.k != menu.k:
        raise ValueError(f"distribution has {d.k} goods, menu has {menu.k}")
    return float(np.dot(d.probs, payments(menu, d.support)))


def rescale(menu: Menu, lam: float) -> Menu:
    """The menu in new units: prices times ``lam``, allocations unchanged."""
    if not lam > 0:
        raise ValueError(f"rescale factor must be positive, got {lam}")
    return Menu(menu.q, _readonly(menu.s * float(lam)), menu.space, menu.null_index)


def discount(menu: Menu, eta: float) -> Menu:
    """Multiply every price by ``1 - eta``."""
    if not 0 < eta < 1:
        raise ValueError(f"discount rate must lie in (0, 1), got {eta}")
    return rescale(menu, 1.0 - eta)


def verify_lemma1(menu: Menu, x, y, lam: float) -> tuple[bool, float]:
    """Check ``s(x) <= s(lam*y) + lam/(lam-1) * rho(x - y)`` for one pair.

    ``rho`` is the dual seminorm of the menu's allocation space. Returns
    ``(holds, slack)`` with a ``1e-9`` tolerance.
    """
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    slack = payment_bound_slack(menu, np.asarray(x, float)[None, :], np.asarray(y, float)[None, :], np.array([lam]))
    return bool(slack[0] >= -1e-9), float(slack[0])


def payment_bound_slack(menu: Menu, xs: np.ndarray, ys: np.ndarray, lams: np.ndarray) -> np.ndarray:
    """Vectorized slack of ``s(x) <= s(lam*y) + lam/(lam-1) * rho(x - y)`` over rows."""
    lams = np.asarray(lams, dtype=float)
    sx = payments(menu, xs)
    sly = payments(menu, ys * lams[:, None])
    rho = menu.space.seminorm(xs - ys)
    return sly + lams / (lams - 1.0) * rho - sx


@dataclass(frozen=True, eq=False)
class DirectMechanismTable:
    """Explicit direct mechanism on a finite set of types."""

    x: np.ndarray
    q: np.ndarray
    s: np.ndarray

    @classmethod
    def from_menu(cls, menu: Menu, points) -> "DirectMechanismTable":
        x = np.atleast_2d(np.asarray(points, dtype=float))
        idx, _, pay = choose(menu, x)
        return cls(_readonly(x), _readonly(menu.q[idx]), _readonly(pay))


@dataclass
class IcIrReport:
    ic_violations: list[tuple[int, int]] = field(default_factory=list)
    ir_violations: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.ic_violations and not self.ir_violations


def check_ic_ir(table: DirectMechanismTable, tol: float = 1e-9) -> IcIrReport:
    """List every envious pair ``(j, l)`` and every type with negative utility."""
    x, q, s = table.x, table.q, table.s
    own = np.einsum("ij,ij->i", x, q) - s
    cross = x @ q.T - s[None, :]  # cross[j, l]: type j reporting l
    bad = own[:, None] < cross - tol
    np.fill_diagonal(bad, False)
    ic = [(int(j), int(l)) for j, l in zip(*np.nonzero(bad))]
    ir = [int(j) for j in np.flatnonzero(own < -tol)]
    return IcIrReport(ic, ir)


# --- standard classes -------------------------------------------------------


def separate_menu(prices: Sequence[float]) -> Menu:
    """Per-good posted prices, as the menu of all ``2**k`` bundles."""
    p = np.asarray(prices, dtype=float).reshape(-1)
    if np.any(p < 0):
        raise ValueError("negative price")
    k = p.shape[0]
    entries = []
    for bits in itertools.product((0.0, 1.0), repeat=k):
        q = np.array(bits)
        entries.append((q, float(q @ p)))
    return Menu.build(entries, AllocationSpace.ADDITIVE, k=k)


def bundle_menu(price: float, k: int) -> Menu:
    """Grand bundle at a single price."""
    if price < 0:
        raise ValueError("negative price")
    return Menu.build([(np.ones(k), float(price))], AllocationSpace.ADDITIVE, k=k)


def posted_price(price: float) -> Menu:
    return bundle_menu(price, 1)


def is_deterministic(menu: Menu) -> bool:
    return bool(np.all((menu.q == 0) | (menu.q == 1)))


def menu_size(menu: Menu) -> int:
    """Number of entries other than the outside option."""
    return len(menu) - 1


def separate_prices(menu: Menu, tol: float = 1e-12) -> np.ndarray | None:
    """Per-good prices if ``menu`` is a selling-separately menu, else ``None``."""
    k = menu.k
    if not is_deterministic(menu) or len(menu) != 2**k:
        return None
    singles = np.zeros(k)
    for i in range(k):
        e = np.zeros(k)
        e[i] = 1.0
        hit = np.flatnonzero(np.all(menu.q == e, axis=1))
        if hit.size != 1:
            return None
        singles[i] = menu.s[hit[0]]
    for qi, si in zip(menu.q, menu.s):
        if abs(qi @ singles - si) > tol * max(1.0, abs(si)):
            return None
    if len({tuple(r) for r in menu.q.tolist()}) != 2**k:
        return None
    return singles


def is_bundle(menu: Menu) -> bool:
    """True for a grand-bundle menu (bundle entry plus the outside option)."""
    if len(menu) != 2:
        return False
    other = 1 - menu.null_index
    return bool(np.all(menu.q[other] == 1) and np.all(menu.q[menu.null_index] == 0))
