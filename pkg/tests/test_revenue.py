from fractions import Fraction

import numpy as np
import pytest

from helpers import SPACES
from revcont.mechanism import (
    DirectMechanismTable,
    bundle_menu,
    check_ic_ir,
    revenue,
    separate_menu,
)
from revcont.rational_lp import exact_revenue, exact_revenue_of
from revcont.optimal_revenue import (
    brev,
    brev_price,
    drev_bruteforce,
    myerson_one_good,
    optimal_rev_lp,
    separate_prices_opt,
    srev,
)
from revcont.valuation import (
    AllocationSpace,
    expected_l1,
    point_mass,
    scale,
    uniform,
    validate,
)

UNIFORM_12 = uniform([[1, 1], [1, 2], [2, 1], [2, 2]])


@pytest.mark.parametrize(
    "space, expected",
    [("additive", 2.25), ("unit_demand", 1.5), ("implementation", 0.25)],
)
def test_uniform_grid_revenue(space, expected):
    res = optimal_rev_lp(UNIFORM_12, space)
    assert res.status == "optimal"
    assert res.value == pytest.approx(expected, abs=1e-9)
    assert exact_revenue_of(UNIFORM_12, space) == Fraction(expected)
    assert revenue(res.menu, UNIFORM_12) == pytest.approx(expected, abs=1e-9)


def test_lp_examples():
    assert optimal_rev_lp(point_mass([1, 2])).value == pytest.approx(3)
    assert optimal_rev_lp(point_mass([0, 0])).value == pytest.approx(0)
    assert optimal_rev_lp(uniform([[1], [2]])).value == pytest.approx(1.0, abs=1e-12)
    d = validate([[100], [0]], [0.01, 0.99])
    assert optimal_rev_lp(d).value == pytest.approx(1.0, abs=1e-9)
    # a point mass over outcomes earns its spread
    assert optimal_rev_lp(point_mass([3, 1, 2]), "implementation").value == pytest.approx(2)
    assert optimal_rev_lp(point_mass([3, 1, 2]), "unit_demand").value == pytest.approx(3)


def test_myerson_examples():
    assert myerson_one_good(validate([[100], [0]], [0.01, 0.99])) == pytest.approx((100, 1))
    # revenue 0.9 at both 0.9 and 1; the lower price is reported
    assert myerson_one_good(validate([[0.9], [1.0]], [0.1, 0.9])) == pytest.approx((0.9, 0.9))
    assert myerson_one_good(point_mass([2.5])) == (2.5, 2.5)
    with pytest.raises(ValueError):
        myerson_one_good(point_mass([1, 1]))


def test_class_revenues_point_mass():
    d = point_mass([1, 2])
    assert srev(d) == 3 and brev(d) == 3
    assert drev_bruteforce(d) == pytest.approx(expected_l1(d))


def test_class_revenues():
    assert srev(UNIFORM_12) == pytest.approx(2.0)
    assert brev(UNIFORM_12) == pytest.approx(2.25)
    assert brev_price(UNIFORM_12) == pytest.approx(3.0)
    assert drev_bruteforce(UNIFORM_12) == pytest.approx(2.25)
    p = separate_prices_opt(UNIFORM_12)
    assert revenue(separate_menu(p), UNIFORM_12) == pytest.approx(srev(UNIFORM_12))
    assert revenue(bundle_menu(brev_price(UNIFORM_12), 2), UNIFORM_12) == pytest.approx(2.25)
    with pytest.raises(ValueError):
        drev_bruteforce(uniform([[i, i] for i in range(8)]))


def test_drev_matches_myerson_one_good(rng):
    for _ in range(50):
        n = int(rng.integers(1, 6))
        d = validate(rng.integers(0, 6, (n, 1)), rng.dirichlet(np.ones(n)))
        assert drev_bruteforce(d) == pytest.approx(myerson_one_good(d)[1], abs=1e-12)


def _rand(rng, n, k):
    return validate(rng.uniform(0, 4, (n, k)), rng.dirichlet(np.ones(n)))


def test_sandwich_and_certificate(rng):
    for _ in range(60):
        k = int(rng.integers(1, 3))
        d = _rand(rng, int(rng.integers(1, 6)), k)
        res = optimal_rev_lp(d)
        assert res.status == "optimal"
        lower = max(srev(d), brev(d))
        if k <= 2 and d.n <= 5:
            lower = max(lower, drev_bruteforce(d))
        assert lower <= res.value + 1e-9
        assert res.value <= expected_l1(d) + 1e-9
        assert res.certificate.gap <= 1e-7


def test_menu_is_ic_ir_and_attains_value(rng):
    for t in range(90):
        space = SPACES[t % 3]
        d = _rand(rng, int(rng.integers(1, 7)), int(rng.integers(1, 4)))
        res = optimal_rev_lp(d, space)
        assert res.status == "optimal"
        table = DirectMechanismTable.from_menu(res.menu, d.support)
        assert check_ic_ir(table).ok
        assert revenue(res.menu, d) == pytest.approx(res.value, abs=1e-7)
        assert np.all(res.menu.s >= 0)
        assert all(res.menu.space.contains(q) for q in res.menu.q)


def test_space_ordering(rng):
    for _ in range(40):
        d = _rand(rng, int(rng.integers(1, 6)), int(rng.integers(2, 4)))
        add, ud, impl = (optimal_rev_lp(d, s).value for s in SPACES)
        assert impl <= ud + 1e-9 <= add + 2e-9


def test_scale_equivariance(rng):
    for t in range(40):
        d = _rand(rng, int(rng.integers(1, 6)), int(rng.integers(1, 3)))
        space = SPACES[t % 3]
        lam = float(rng.choice([0.5, 3.0, 7.0]))
        a = optimal_rev_lp(scale(d, lam), space).value
        assert a == pytest.approx(lam * optimal_rev_lp(d, space).value, rel=1e-8, abs=1e-9)


def test_zero_mass_type_still_constrains():
    # The point 4 carries no mass but is kept: the LP must match exact arithmetic.
    sup, pr = [[1], [4]], [Fraction(1), Fraction(0)]
    d = validate([[1], [4]], [1.0, 0.0])
    assert optimal_rev_lp(d).value == pytest.approx(float(exact_revenue(sup, pr)))


def test_exact_oracle_on_grid(rng):
    """Quarter-integer points with small integer weights, solved in exact arithmetic."""
    for t in range(20):
        n, k = int(rng.integers(1, 5)), int(rng.integers(1, 3))
        quarters = rng.integers(0, 12, (n, k))
        w = rng.integers(1, 5, n)
        space = SPACES[t % 3]
        exact = exact_revenue(
            [[Fraction(int(v), 4) for v in x] for x in quarters],
            [Fraction(int(wi), int(w.sum())) for wi in w],
            space,
        )
        d = validate(quarters / 4, w / w.sum())
        assert round(optimal_rev_lp(d, space).value, 9) == round(float(exact), 9)


def test_space_names():
    assert AllocationSpace.parse("unit-demand") is AllocationSpace.UNIT_DEMAND
    with pytest.raises(ValueError):
        AllocationSpace.parse("gross_substitutes")
