"""Numerical certification of the revenue-continuity inequalities.

Every check returns :class:`BoundReport` objects: ``lhs <= rhs`` must hold
up to ``tolerance`` (absolute, on the slack). Fuzz corpora are generated
from explicit seeds so that every report is reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from .mechanism import Menu, discount, posted_price, revenue
from .optimal_revenue import optimal_rev_lp
from .transport import gamma_cost, wasserstein
from .valuation import (
    AllocationSpace,
    DiscreteValuation,
    expected_l1,
    perturb,
    point_mass,
    sample,
    scale,
    validate,
)

DEFAULT_TOL = 1e-6
TOL_ENV = "REVCONT_TOL"


def report_tolerance() -> float:
    """Report tolerance, overridable through ``REVCONT_TOL``."""
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw == "":
        return DEFAULT_TOL
    tol = float(raw)
    if not tol >= 0:
        raise ValueError(f"{TOL_ENV} must be a nonnegative number")
    return tol


@dataclass
class BoundReport:
    suite: str
    lhs: float
    rhs: float
    tolerance: float = DEFAULT_TOL
    digest: str = ""
    params: dict = field(default_factory=dict)
    skipped: bool = False

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.skipped or self.slack >= -self.tolerance

    def row(self) -> dict:
        return {
            "suite": self.suite,
            "instance_digest": self.digest,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
        }

    def to_dict(self) -> dict:
        out = asdict(self)
        out["slack"] = self.slack
        out["holds"] = self.holds
        return out


@dataclass
class LearningReport:
    n: int
    rev_target: float
    rev_achieved: float
    eta: float
    delta_budget: float
    regret: float
    realized_w: float
    within_budget: bool
    eps: float
    bound_m: float
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def digest(*parts) -> str:
    h = hashlib.sha1()
    for p in parts:
        if isinstance(p, DiscreteValuation):
            h.update(json.dumps(p.to_dict(), sort_keys=True).encode())
        elif isinstance(p, Menu):
            h.update(json.dumps(p.to_dict(), sort_keys=True).encode())
        else:
            h.update(repr(p).encode())
    return h.hexdigest()[:12]


def _rev(d: DiscreteValuation, space: AllocationSpace) -> float:
    res = optimal_rev_lp(d, space)
    if res.status != "optimal":
        raise ArithmeticError(f"revenue LP ended with status {res.status}")
    return res.value


# --- single checks ----------------------------------------------------------


def check_sqrt_bound(
    dX: DiscreteValuation,
    dY: DiscreteValuation,
    space: AllocationSpace | str = AllocationSpace.ADDITIVE,
    tol: float | None = None,
) -> BoundReport:
    """``|sqrt Rev(X) - sqrt Rev(Y)| <= sqrt W(X, Y)`` in the given space."""
    space = AllocationSpace.parse(space)
    tol = report_tolerance() if tol is None else tol
    rx, ry = _rev(dX, space), _rev(dY, space)
    w, _ = wasserstein(dX, dY, gamma_cost(space))
    return BoundReport(
        f"sqrt:{space.value}",
        abs(math.sqrt(rx) - math.sqrt(ry)),
        math.sqrt(w),
        tol,
        digest(dX, dY, space.value),
        {"rev_x": rx, "rev_y": ry, "w": w},
    )


def check_lambda_bound(
    dX: DiscreteValuation, dY: DiscreteValuation, lam: float, tol: float | None = None
) -> list[BoundReport]:
    """``Rev(X) <= lam Rev(Y) + lam/(lam-1) W`` at ``lam``, and at the optimal ``lam``.

    The second report checks that the bound at
    ``lam* = 1 + sqrt(W / Rev(Y))`` equals ``(sqrt Rev(Y) + sqrt W)**2``
    (skipped when ``Rev(Y)`` or ``W`` vanishes).
    """
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    tol = report_tolerance() if tol is None else tol
    rx, ry = _rev(dX, AllocationSpace.ADDITIVE), _rev(dY, AllocationSpace.ADDITIVE)
    w, _ = wasserstein(dX, dY)
    dig = digest(dX, dY, lam)
    out = [
        BoundReport("lambda", rx, lam * ry + lam / (lam - 1) * w, tol, dig,
                    {"lambda": lam, "rev_x": rx, "rev_y": ry, "w": w})
    ]
    if ry > 0 and w > 0:
        lam_star = 1 + math.sqrt(w / ry)
        at_star = lam_star * ry + lam_star / (lam_star - 1) * w
        closed = (math.sqrt(ry) + math.sqrt(w)) ** 2
        out.append(BoundReport("lambda:optimal", abs(at_star - closed), 0.0, 1e-9, dig,
                               {"lambda": lam_star, "bound": at_star}))
        out.append(BoundReport("lambda:at_optimal", rx, at_star, tol, dig, {"lambda": lam_star}))
    else:
        out.append(BoundReport("lambda:optimal", 0.0, 0.0, 1e-9, dig, {}, skipped=True))
    return out


def check_corollary_bounds(
    dX: DiscreteValuation, dY: DiscreteValuation, tol: float | None = None
) -> tuple[BoundReport, BoundReport]:
    """Revenue-difference bounds given a revenue cap ``M``.

    First: ``|dRev| <= 2 sqrt(M W) + W`` with ``M = min`` of the revenues.
    Second: ``|dRev| <= 2 sqrt(M W) - W`` with ``M = max``, only when ``W <= M``.
    """
    tol = report_tolerance() if tol is None else tol
    rx, ry = _rev(dX, AllocationSpace.ADDITIVE), _rev(dY, AllocationSpace.ADDITIVE)
    w, _ = wasserstein(dX, dY)
    diff = abs(rx - ry)
    dig = digest(dX, dY)
    lo, hi = min(rx, ry), max(rx, ry)
    first = BoundReport("corollary:min", diff, 2 * math.sqrt(lo * w) + w, tol, dig,
                        {"M": lo, "w": w, "rev_x": rx, "rev_y": ry})
    second = BoundReport("corollary:max", diff, 2 * math.sqrt(hi * w) - w, tol, dig,
                         {"M": hi, "w": w, "rev_x": rx, "rev_y": ry}, skipped=w > hi)
    return first, second


def theorem_c_params(eps: float, M: float) -> tuple[float, float]:
    """Distance budget and discount rate ``(eps**2 / (4M), eps / (2M))``."""
    if not (eps > 0 and M > 0):
        raise ValueError("eps and M must be positive")
    if not eps < 2 * M:
        raise ValueError("eps must be smaller than 2M")
    return eps**2 / (4 * M), eps / (2 * M)


def check_theorem_c(
    dX: DiscreteValuation,
    dY: DiscreteValuation,
    menu: Menu,
    eps: float,
    M: float,
    *,
    menu_is_optimal: bool | None = None,
    tol: float | None = None,
) -> list[BoundReport]:
    """Discounting guarantee for ``menu`` moved from ``X`` to a nearby ``Y``.

    Reports the additive ``eps`` bound, the tighter ``2 sqrt(M delta) - delta``
    bound and, when ``menu`` is optimal for ``X``, the ``2 eps``-optimality
    bound against ``Rev(Y)``. Preconditions are measured and reported as
    failures when violated.
    """
    tol = report_tolerance() if tol is None else tol
    space = menu.space
    delta, eta = theorem_c_params(eps, M)
    w, _ = wasserstein(dX, dY, gamma_cost(space))
    r_x = revenue(menu, dX)
    dig = digest(dX, dY, menu, eps, M)
    params = {"eps": eps, "M": M, "delta": delta, "eta": eta, "w": w, "r_x": r_x}
    pre = [
        BoundReport("theorem-c:distance", w, delta, tol, dig, dict(params)),
        BoundReport("theorem-c:revenue_cap", r_x, M, tol, dig, dict(params)),
    ]
    r_y = revenue(discount(menu, eta), dY)
    params["r_discounted"] = r_y
    out = pre + [
        BoundReport("theorem-c:eps", r_x - eps, r_y, tol, dig, dict(params)),
        BoundReport("theorem-c:tight", r_x - (2 * math.sqrt(M * delta) - delta), r_y, tol, dig,
                    dict(params)),
    ]
    if menu_is_optimal is None:
        menu_is_optimal = abs(r_x - _rev(dX, space)) <= 1e-7
    if menu_is_optimal:
        rev_y = _rev(dY, space)
        out.append(BoundReport("theorem-c:2eps_optimal", rev_y - 2 * eps, r_y, tol, dig,
                               dict(params, rev_y=rev_y)))
    return out


def check_multiplicative(
    dX: DiscreteValuation, dY: DiscreteValuation, menu: Menu, eps: float, tol: float | None = None
) -> list[BoundReport]:
    """``R(mu_{1-eps}; Y) >= (1-eps) R(mu; X) - eps`` when ``W <= eps**2/(1-eps)``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    tol = report_tolerance() if tol is None else tol
    delta = eps**2 / (1 - eps)
    w, _ = wasserstein(dX, dY, gamma_cost(menu.space))
    r_x = revenue(menu, dX)
    r_y = revenue(discount(menu, eps), dY)
    dig = digest(dX, dY, menu, eps)
    params = {"eps": eps, "delta": delta, "w": w}
    return [
        BoundReport("remark-b:distance", w, delta, tol, dig, dict(params)),
        BoundReport("remark-b", (1 - eps) * r_x - eps, r_y, tol, dig, dict(params)),
    ]


ZERO_DISTANCE_ETA = 1e-9


def check_remark_e(
    dX: DiscreteValuation, dY: DiscreteValuation, menu: Menu, tol: float | None = None
) -> BoundReport:
    """``sqrt R(mu_{1-eta}; Y) >= sqrt R(mu; X) - sqrt W`` with ``eta = sqrt(W / R(mu; X))``.

    Skipped when ``W >= R(mu; X)``; at ``W = 0`` the discount rate is pinned
    to ``1e-9`` since a zero discount is not a discount.
    """
    tol = report_tolerance() if tol is None else tol
    w, _ = wasserstein(dX, dY, gamma_cost(menu.space))
    r_x = revenue(menu, dX)
    dig = digest(dX, dY, menu)
    if not w < r_x:
        return BoundReport("remark-e", 0.0, 0.0, tol, dig, {"w": w, "r_x": r_x}, skipped=True)
    eta = math.sqrt(w / r_x) if w > 0 else ZERO_DISTANCE_ETA
    r_y = revenue(discount(menu, eta), dY)
    return BoundReport("remark-e", math.sqrt(r_x) - math.sqrt(w), math.sqrt(r_y), tol, dig,
                       {"w": w, "r_x": r_x, "eta": eta, "r_discounted": r_y})


def check_rescale_identity(
    d: DiscreteValuation,
    lam: float,
    space: AllocationSpace | str = AllocationSpace.ADDITIVE,
    tol: float | None = None,
) -> BoundReport:
    """``|Rev(lam X) - lam Rev(X)| <= tol * max(1, lam)``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    space = AllocationSpace.parse(space)
    tol = report_tolerance() if tol is None else tol
    base = _rev(d, space)
    scaled = _rev(scale(d, lam), space)
    return BoundReport("rescale", abs(scaled - lam * base), 0.0, tol * max(1.0, lam),
                       digest(d, lam, space.value), {"lambda": lam, "rev": base, "rev_scaled": scaled})


def check_w_gamma(dX: DiscreteValuation, dY: DiscreteValuation, space: AllocationSpace | str,
                  tol: float = 1e-9) -> BoundReport:
    """``W_Gamma <= 2 gamma W`` with ``gamma = max ||g||_inf = 1``."""
    space = AllocationSpace.parse(space)
    wg, _ = wasserstein(dX, dY, gamma_cost(space))
    w, _ = wasserstein(dX, dY)
    return BoundReport(f"w-gamma:{space.value}", wg, 2 * w, tol, digest(dX, dY, space.value),
                       {"w_gamma": wg, "w": w})


# --- experiments -----------------------------------------------------------


def convergence_experiment(
    target: DiscreteValuation,
    *,
    deltas: list[float] | None = None,
    sizes: list[int] | None = None,
    seed: int = 0,
    mode: str = "grid_round",
    tol: float | None = None,
) -> list[BoundReport]:
    """Revenue gaps along a sequence ``X_n -> target`` in Wasserstein distance.

    Either ``deltas`` (perturbations of radius ``delta_n``) or ``sizes``
    (empirical distributions of ``n`` draws) defines the sequence. Each
    report checks ``|Rev(X_n) - Rev(X)| <= 2 sqrt(M W) + W`` with
    ``M = Rev(X)``.
    """
    if (deltas is None) == (sizes is None):
        raise ValueError("give exactly one of deltas or sizes")
    tol = report_tolerance() if tol is None else tol
    r = _rev(target, AllocationSpace.ADDITIVE)
    out = []
    steps = deltas if deltas is not None else sizes
    for t, step in enumerate(steps):
        if deltas is not None:
            xn = perturb(target, step, mode, seed=seed + t)
        else:
            xn = sample(target, int(step), seed + t)
        rn = _rev(xn, AllocationSpace.ADDITIVE)
        w, _ = wasserstein(xn, target)
        out.append(BoundReport("convergence", abs(rn - r), 2 * math.sqrt(r * w) + w, tol,
                               digest(target, step, seed),
                               {"step": step, "w": w, "rev_n": rn, "rev": r}))
    return out


def learn_pipeline(
    dY: DiscreteValuation,
    n: int,
    eps: float,
    seed: int,
    space: AllocationSpace | str = AllocationSpace.ADDITIVE,
    rev_target: float | None = None,
) -> LearningReport:
    """Sample, optimize on the sample, discount, and score on the truth.

    The revenue cap comes from ``M_Y = E||Y||_1`` as
    ``M = (sqrt(M_Y) + sqrt(eps/2))**2``, which is known before sampling.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    space = AllocationSpace.parse(space)
    x = sample(dY, n, seed)
    m_y = expected_l1(dY)
    M = (math.sqrt(m_y) + math.sqrt(eps / 2)) ** 2
    delta, eta = theorem_c_params(eps, M)
    mu = optimal_rev_lp(x, space).menu
    achieved = revenue(discount(mu, eta), dY)
    if rev_target is None:
        rev_target = _rev(dY, space)
    w, _ = wasserstein(x, dY, gamma_cost(space))
    return LearningReport(
        n=int(n),
        rev_target=rev_target,
        rev_achieved=achieved,
        eta=eta,
        delta_budget=delta,
        regret=rev_target - achieved,
        realized_w=w,
        within_budget=w <= delta,
        eps=eps,
        bound_m=M,
        seed=int(seed),
    )


# --- canned instances -------------------------------------------------------


@dataclass
class SharpExample:
    name: str
    x: DiscreteValuation
    y: DiscreteValuation
    rev_x: float
    rev_y: float
    w: float
    params: dict

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "x": self.x.to_dict(),
            "y": self.y.to_dict(),
            "rev_x": self.rev_x,
            "rev_y": self.rev_y,
            "w": self.w,
            "params": self.params,
        }


def sharp_examples(M: float = 100.0, eps: float = 0.1, c: float = 4.0, M_sqrt: float = 10.0) -> dict[str, SharpExample]:
    """The worked one-good instances with their known revenues and distances.

    * ``prohorov_gap``: value ``M`` w.p. ``1/M`` against zero.
    * ``no_lipschitz``: constant 1 against ``1-eps`` w.p. ``eps``.
    * ``sqrt_gap``: constants ``M**4 + 2M`` and ``M**4``.
    * ``sharp_constant``: constant ``c`` against zero.
    """
    zero = point_mass([0.0])
    return {
        "prohorov_gap": SharpExample(
            "prohorov_gap", validate([[M], [0.0]], [1 / M, 1 - 1 / M]), zero, 1.0, 0.0, 1.0, {"M": M}
        ),
        "no_lipschitz": SharpExample(
            "no_lipschitz", point_mass([1.0]), validate([[1 - eps], [1.0]], [eps, 1 - eps]),
            1.0, 1 - eps, eps**2, {"eps": eps},
        ),
        "sqrt_gap": SharpExample(
            "sqrt_gap", point_mass([M_sqrt**4 + 2 * M_sqrt]), point_mass([M_sqrt**4]),
            M_sqrt**4 + 2 * M_sqrt, M_sqrt**4, 2 * M_sqrt, {"M": M_sqrt},
        ),
        "sharp_constant": SharpExample("sharp_constant", point_mass([c]), zero, c, 0.0, c, {"c": c}),
    }


# --- fuzz corpus ------------------------------------------------------------


def random_valuation(rng: np.random.Generator, k: int | None = None, max_support: int = 8,
                     heavy_frac: float = 0.2) -> DiscreteValuation:
    """Mixture of uniform ``[0, 5]^k`` points and sparse Pareto-tailed points."""
    if k is None:
        k = int(rng.integers(1, 4))
    n = int(rng.integers(1, max_support + 1))
    pts = rng.uniform(0.0, 5.0, size=(n, k))
    heavy = rng.random(n) < heavy_frac
    for j in np.flatnonzero(heavy):
        pts[j] = 0.0
        pts[j, rng.integers(k)] = rng.pareto(1.5) + 1.0
    probs = rng.dirichlet(np.ones(n))
    return validate(pts, probs)


def random_pair(rng: np.random.Generator, k: int | None = None, max_support: int = 8
                ) -> tuple[DiscreteValuation, DiscreteValuation]:
    """Independent pair half the time, otherwise a small perturbation of the first."""
    x = random_valuation(rng, k, max_support)
    if rng.random() < 0.5:
        y = random_valuation(rng, x.k, max_support)
    else:
        delta = float(rng.choice([1e-3, 1e-2, 0.1, 0.5]))
        y = perturb(x, delta, "seeded_noise", seed=int(rng.integers(2**31)))
    return x, y


SUITES = ("sqrt", "lambda", "corollary", "theorem-c", "remark-b", "remark-e", "rescale", "gamma")


def run_suite(suite: str, seed: int, count: int, tol: float | None = None) -> Iterator[BoundReport]:
    """Yield every report of ``count`` seeded instances of ``suite``."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    tol = report_tolerance() if tol is None else tol
    rng = np.random.default_rng(seed)
    for _ in range(count):
        if suite == "sqrt":
            x, y = random_pair(rng)
            yield check_sqrt_bound(x, y, AllocationSpace.ADDITIVE, tol)
        elif suite == "lambda":
            x, y = random_pair(rng)
            lam = float(rng.choice([1.1, 2.0, 10.0]))
            yield from check_lambda_bound(x, y, lam, tol)
        elif suite == "corollary":
            x, y = random_pair(rng)
            yield from check_corollary_bounds(x, y, tol)
        elif suite == "theorem-c":
            yield from _theorem_c_instance(rng, 0.2, tol)
        elif suite == "remark-b":
            x = random_valuation(rng)
            eps = float(rng.choice([0.05, 0.1, 0.3]))
            y = perturb(x, eps**2 / (1 - eps), "seeded_noise", seed=int(rng.integers(2**31)))
            yield from check_multiplicative(x, y, optimal_rev_lp(x).menu, eps, tol)
        elif suite == "remark-e":
            x, y = random_pair(rng)
            yield check_remark_e(x, y, optimal_rev_lp(x).menu, tol)
        elif suite == "rescale":
            x = random_valuation(rng)
            for lam in (0.5, 2.0, 10.0):
                yield check_rescale_identity(x, lam, tol=tol)
        elif suite == "gamma":
            x, y = random_pair(rng)
            for space in (AllocationSpace.UNIT_DEMAND, AllocationSpace.IMPLEMENTATION):
                yield check_sqrt_bound(x, y, space, tol)
                yield check_w_gamma(x, y, space)


def _theorem_c_instance(rng: np.random.Generator, eps: float, tol: float) -> list[BoundReport]:
    x = random_valuation(rng)
    M = expected_l1(x)
    if not eps < 2 * M:
        x = validate(x.support + 1.0, x.probs)
        M = expected_l1(x)
    delta, _ = theorem_c_params(eps, M)
    y = perturb(x, delta, "seeded_noise", seed=int(rng.integers(2**31)))
    res = optimal_rev_lp(x)
    return check_theorem_c(x, y, res.menu, eps, M, menu_is_optimal=True, tol=tol)


def posted_price_example(value: float = 1.01, price: float = 1.0, radius: float = 0.02,
                         eta: float = 0.02, grid: int = 41) -> list[float]:
    """Revenue of the discounted posted price on constant valuations near ``value``."""
    menu = discount(posted_price(price), eta)
    return [revenue(menu, point_mass([v])) for v in np.linspace(value - radius, value + radius, grid)]
