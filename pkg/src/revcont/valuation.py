"""Valuation points, finite-support random valuations and the seminorms on them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MASS_TOL = 1e-9


class AllocationSpace(str, enum.Enum):
    """Compact set of feasible allocations for a k-good mechanism.

    ``ADDITIVE`` is the unit cube, ``UNIT_DEMAND`` the cube cut by
    ``sum(q) <= 1`` and ``IMPLEMENTATION`` the simplex ``sum(q) == 1``.
    The dimension is carried by the data the space is applied to.
    """

    ADDITIVE = "additive"
    UNIT_DEMAND = "unit_demand"
    IMPLEMENTATION = "implementation"

    @classmethod
    def parse(cls, value: "str | AllocationSpace") -> "AllocationSpace":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            raise ValueError(f"unknown allocation space {value!r}") from None

    def seminorm(self, z) -> np.ndarray | float:
        return gamma_seminorm(self, z)

    def contains(self, q, tol: float = 1e-9) -> bool:
        q = np.asarray(q, dtype=float)
        if np.any(q < -tol) or np.any(q > 1 + tol):
            return False
        total = q.sum(axis=-1)
        if self is AllocationSpace.UNIT_DEMAND:
            return bool(np.all(total <= 1 + tol))
        if self is AllocationSpace.IMPLEMENTATION:
            return bool(np.all(np.abs(total - 1) <= tol))
        return True


def l1_norm(z) -> np.ndarray | float:
    """Sum of absolute coordinates, taken over the last axis."""
    z = np.asarray(z, dtype=float)
    out = np.abs(z).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def gamma_seminorm(space: AllocationSpace | str, z) -> np.ndarray | float:
    """Dual seminorm of ``space``: ``max_{g in space} g.z - min_{g in space} g.z``.

    Vectorized over leading axes of ``z``.
    """
    space = AllocationSpace.parse(space)
    z = np.asarray(z, dtype=float)
    if space is AllocationSpace.ADDITIVE:
        out = np.abs(z).sum(axis=-1)
    elif space is AllocationSpace.UNIT_DEMAND:
        out = np.maximum(z, 0).max(axis=-1) + np.maximum(-z, 0).max(axis=-1)
    else:
        out = z.max(axis=-1) - z.min(axis=-1)
    return float(out) if out.ndim == 0 else out


def linf_norm(z) -> np.ndarray | float:
    z = np.asarray(z, dtype=float)
    out = np.abs(z).max(axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class DiscreteValuation:
    """A k-good random valuation with finite support.

    Build instances through :func:`validate`; the constructor trusts its
    inputs. ``support`` is ``(n, k)`` and ``probs`` is ``(n,)``; both arrays
    are read-only.
    """

    support: np.ndarray
    probs: np.ndarray

    @property
    def k(self) -> int:
        return int(self.support.shape[1])

    @property
    def n(self) -> int:
        return int(self.support.shape[0])

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(zip(self.support, self.probs))

    def __repr__(self) -> str:
        pts = ", ".join(
            f"{list(map(float, x))}: {float(p):.6g}" for x, p in zip(self.support, self.probs)
        )
        return f"DiscreteValuation({{{pts}}})"

    def same_as(self, other: "DiscreteValuation", atol: float = 0.0) -> bool:
        """Exact (or ``atol``) equality of support and masses, order included."""
        if self.support.shape != other.support.shape:
            return False
        return bool(
            np.allclose(self.support, other.support, rtol=0, atol=atol)
            and np.allclose(self.probs, other.probs, rtol=0, atol=atol)
        )

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "support": self.support.tolist(),
            "probs": self.probs.tolist(),
        }


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def validate(support: Sequence, probs: Sequence | None = None) -> DiscreteValuation:
    """Check raw support/mass lists and return a normalized distribution.

    Duplicate points (exact coordinate equality) are merged with their
    masses summed; the merged support is sorted lexicographically. Total
    mass must be within ``1e-9`` of one and is then renormalized.
    """
    if isinstance(support, DiscreteValuation):
        support, probs = support.support, support.probs
    if probs is None:
        raise ValueError("probabilities are required")
    pts = np.asarray(support, dtype=float)
    p = np.asarray(probs, dtype=float).reshape(-1)
    if pts.size == 0 or p.size == 0:
        raise ValueError("empty support")
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[1] < 1:
        raise ValueError("support must be a list of equal-length points")
    if pts.shape[0] != p.shape[0]:
        raise ValueError(
            f"support has {pts.shape[0]} points but {p.shape[0]} probabilities were given"
        )
    if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(p)):
        raise ValueError("non-finite value in distribution")
    if np.any(pts < 0):
        raise ValueError("negative valuation coordinate")
    if np.any(p < 0):
        raise ValueError("negative probability")
    total = math.fsum(p)
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"probabilities sum to {total!r}, not 1")

    pts = pts + 0.0  # -0.0 -> 0.0
    uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
    merged = np.bincount(inverse.reshape(-1), weights=p, minlength=uniq.shape[0])
    total = math.fsum(merged)
    # only renormalize when off by more than accumulated rounding; keeps validate idempotent
    if abs(total - 1.0) > 4 * merged.size * np.finfo(float).eps:
        merged = merged / total
    return DiscreteValuation(_frozen(uniq), _frozen(merged))


def point_mass(x: Sequence[float]) -> DiscreteValuation:
    return validate([list(np.atleast_1d(np.asarray(x, dtype=float)))], [1.0])


def uniform(points: Sequence) -> DiscreteValuation:
    """Uniform distribution over ``points`` (repeats add mass)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    return validate(pts, np.full(pts.shape[0], 1.0 / pts.shape[0]))


def expected_l1(d: DiscreteValuation) -> float:
    """``E[||X||_1]``, an upper bound on the optimal revenue of ``d``."""
    return float(np.dot(d.probs, np.abs(d.support).sum(axis=1)))


def scale(d: DiscreteValuation, lam: float) -> DiscreteValuation:
    if not lam > 0:
        raise ValueError(f"scale factor must be positive, got {lam}")
    return DiscreteValuation(_frozen(d.support * float(lam)), d.probs)


def marginal(d: DiscreteValuation, i: int) -> DiscreteValuation:
    return validate(d.support[:, [i]], d.probs)


def l1_distribution(d: DiscreteValuation) -> DiscreteValuation:
    """Distribution of ``||X||_1`` as a one-good valuation."""
    return validate(np.abs(d.support).sum(axis=1, keepdims=True), d.probs)


def sample(d: DiscreteValuation, n: int, seed: int) -> DiscreteValuation:
    """Empirical distribution of ``n`` i.i.d. draws from ``d``."""
    if n < 1:
        raise ValueError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    idx = rng.choice(d.n, size=int(n), p=d.probs)
    counts = np.bincount(idx, minlength=d.n)
    keep = counts > 0
    return validate(d.support[keep], counts[keep] / float(n))


PERTURB_MODES = ("grid_round", "uniform_shift", "seeded_noise")


def perturb(
    d: DiscreteValuation, delta: float, mode: str = "seeded_noise", seed: int = 0
) -> DiscreteValuation:
    """Move every support point by at most ``delta`` in the l1 norm.

    ``grid_round`` snaps each coordinate to the nearest multiple of a cell
    of width ``delta * min(1, 2/k)``; ``uniform_shift`` adds ``delta/k`` to
    every coordinate; ``seeded_noise`` moves each point along a random
    direction by a random l1 length in ``[0, delta]``. Results are clamped
    to the nonnegative orthant and duplicates merged.
    """
    if not delta >= 0:
        raise ValueError(f"perturbation radius must be nonnegative, got {delta}")
    if mode not in PERTURB_MODES:
        raise ValueError(f"unknown perturbation mode {mode!r}")
    if delta == 0:
        return d
    k = d.k
    pts = d.support
    if mode == "grid_round":
        cell = delta * min(1.0, 2.0 / k)
        moved = np.round(pts / cell) * cell
    elif mode == "uniform_shift":
        moved = pts + delta / k
    else:
        rng = np.random.default_rng(seed)
        direction = rng.laplace(size=pts.shape)
        norms = np.abs(direction).sum(axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radius = rng.uniform(0.0, delta, size=(pts.shape[0], 1))
        moved = pts + direction / norms * radius
    moved = np.maximum(moved, 0.0)
    # float rounding in the move can overshoot the radius by an ulp
    step = moved - pts
    over = np.abs(step).sum(axis=1) > delta
    if np.any(over):
        step[over] *= delta / np.abs(step[over]).sum(axis=1, keepdims=True) * (1 - 1e-15)
        moved = np.maximum(pts + step, 0.0)
    return validate(moved, d.probs)
