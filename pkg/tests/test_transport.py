import numpy as np
import pytest

from revcont.transport import (
    GroundCost,
    assignment_oracle,
    permutation_min,
    transportation_simplex,
    wasserstein,
    wasserstein_gamma,
)
from revcont.valuation import AllocationSpace, point_mass, scale, uniform, validate


def _rand(rng, n, k, integer=False):
    pts = rng.integers(0, 5, (n, k)).astype(float) if integer else rng.uniform(0, 5, (n, k))
    return validate(pts, rng.dirichlet(np.ones(n)))


@pytest.mark.parametrize(
    "x, y, expected",
    [
        (point_mass([4.0]), point_mass([0.0]), 4.0),
        (point_mass([1.0]), validate([[0.9], [1.0]], [0.1, 0.9]), 0.01),
        (validate([[100], [0]], [0.01, 0.99]), point_mass([0.0]), 1.0),
        (uniform([[1, 2], [3, 0]]), uniform([[3, 0], [1, 2]]), 0.0),
    ],
)
def test_worked_distances(x, y, expected):
    value, plan = wasserstein(x, y)
    assert value == pytest.approx(expected, abs=1e-12)
    assert plan.cost == value


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        wasserstein(point_mass([1.0]), point_mass([1.0, 2.0]))


def test_oracle_examples():
    assert permutation_min([[0.0], [10.0]], [[1.0], [9.0]]) == 1.0
    assert assignment_oracle(point_mass([1, 3]), point_mass([2, 2])) == 2.0
    with pytest.raises(ValueError):
        assignment_oracle(uniform([[0], [1]]), point_mass([0]))
    with pytest.raises(ValueError):
        assignment_oracle(validate([[0], [1]], [0.3, 0.7]), uniform([[0], [1]]))


def test_ground_cost_parse():
    assert GroundCost.parse("L1").name == "l1"
    assert GroundCost.parse("gamma:unit_demand").name == "gamma:unit_demand"
    assert GroundCost.parse(AllocationSpace.IMPLEMENTATION).name == "gamma:implementation"
    with pytest.raises(ValueError):
        GroundCost.parse("l2")


@pytest.mark.parametrize("cost", ["l1", "linf", "gamma:unit_demand", "gamma:implementation"])
def test_matches_permutation_oracle(rng, cost):
    for _ in range(100):
        n, k = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        integer = rng.random() < 0.5  # integer grids give ties and degenerate plans
        pts = lambda: rng.integers(0, 4, (n, k)) if integer else rng.uniform(0, 4, (n, k))
        xs, ys = pts(), pts()
        if len({tuple(p) for p in xs}) < n or len({tuple(p) for p in ys}) < n:
            continue
        value, _ = wasserstein(uniform(xs), uniform(ys), cost)
        assert value == pytest.approx(permutation_min(xs, ys, cost), abs=1e-9)


def test_plan_marginals_and_cost(rng):
    for t in range(200):
        dX = _rand(rng, int(rng.integers(1, 9)), 2, integer=t % 2 == 0)
        dY = _rand(rng, int(rng.integers(1, 9)), 2, integer=t % 2 == 0)
        value, plan = wasserstein(dX, dY, "gamma:unit_demand" if t % 3 == 0 else "l1")
        m = plan.matrix
        assert np.all(m >= 0)
        assert np.allclose(m.sum(axis=1), dX.probs, atol=1e-9)
        assert np.allclose(m.sum(axis=0), dY.probs, atol=1e-9)
        C = GroundCost.parse(plan.ground_cost).matrix(dX.support, dY.support)
        assert abs(np.sum(m * C) - value) <= 1e-9


def test_metric_axioms(rng):
    for t in range(500):
        k = int(rng.integers(1, 3))
        a, b, c = (_rand(rng, int(rng.integers(1, 6)), k, integer=t % 2 == 0) for _ in range(3))
        ab, ba = wasserstein(a, b)[0], wasserstein(b, a)[0]
        assert abs(ab - ba) <= 1e-9
        assert ab <= wasserstein(a, c)[0] + wasserstein(c, b)[0] + 1e-9
        assert wasserstein(a, a)[0] == pytest.approx(0.0, abs=1e-12)


def test_scaling(rng):
    for _ in range(100):
        dX, dY = _rand(rng, 4, 2), _rand(rng, 3, 2)
        lam = float(rng.uniform(0.1, 20))
        w = wasserstein(dX, dY)[0]
        assert abs(wasserstein(scale(dX, lam), scale(dY, lam))[0] - lam * w) <= 1e-9 * lam


def test_gamma_variants(rng):
    for _ in range(200):
        k = int(rng.integers(1, 4))
        dX, dY = _rand(rng, 5, k), _rand(rng, 4, k)
        w = wasserstein(dX, dY)[0]
        assert wasserstein_gamma(dX, dY, "additive")[0] == w
        for space in ("unit_demand", "implementation"):
            assert wasserstein_gamma(dX, dY, space)[0] <= 2 * w + 1e-9


def test_implementation_ignores_common_shift(rng):
    for _ in range(50):
        dX = _rand(rng, 4, 3)
        t = float(rng.uniform(0, 3))
        shifted = validate(dX.support + t, dX.probs)
        assert wasserstein_gamma(dX, shifted, "implementation")[0] == pytest.approx(0.0, abs=1e-12)


def test_degenerate_transport_problem():
    # equal partial sums force zero basic flows without the epsilon perturbation
    supply = np.array([0.25, 0.25, 0.5])
    demand = np.array([0.25, 0.25, 0.25, 0.25])
    C = np.array([[0, 1, 2, 3], [1, 0, 1, 2], [3, 2, 1, 0.0]])
    plan, _ = transportation_simplex(supply, demand, C)
    assert np.sum(plan * C) == pytest.approx(0.25)
