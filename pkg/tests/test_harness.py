import math

import numpy as np
import pytest

from revcont import harness
from revcont.harness import (
    BoundReport,
    check_corollary_bounds,
    check_lambda_bound,
    check_multiplicative,
    check_remark_e,
    check_rescale_identity,
    check_sqrt_bound,
    check_theorem_c,
    check_w_gamma,
    convergence_experiment,
    learn_pipeline,
    posted_price_example,
    run_suite,
    sharp_examples,
    theorem_c_params,
)
from revcont.mechanism import posted_price
from revcont.optimal_revenue import optimal_rev_lp
from revcont.valuation import point_mass, uniform, validate

UNIFORM_12 = uniform([[1, 1], [1, 2], [2, 1], [2, 2]])


def test_report_holds_iff_slack_within_tolerance():
    assert BoundReport("t", 1.0, 1.0 - 5e-7, 1e-6).holds
    assert not BoundReport("t", 1.0, 1.0 - 2e-6, 1e-6).holds
    assert BoundReport("t", 9.0, 0.0, 1e-6, skipped=True).holds
    row = BoundReport("t", 1.0, 3.0, digest="ab").row()
    assert row == {"suite": "t", "instance_digest": "ab", "lhs": 1.0, "rhs": 3.0,
                   "slack": 2.0, "holds": True}


def test_tolerance_env(monkeypatch):
    monkeypatch.delenv("REVCONT_TOL", raising=False)
    assert harness.report_tolerance() == 1e-6
    monkeypatch.setenv("REVCONT_TOL", "1e-4")
    assert harness.report_tolerance() == 1e-4
    monkeypatch.setenv("REVCONT_TOL", "-1")
    with pytest.raises(ValueError):
        harness.report_tolerance()


def test_sqrt_bound_examples():
    r = check_sqrt_bound(point_mass([4.0]), point_mass([0.0]))
    assert r.lhs == pytest.approx(2) and r.rhs == pytest.approx(2) and r.holds
    r = check_sqrt_bound(validate([[100], [0]], [0.01, 0.99]), point_mass([0.0]))
    assert r.lhs == pytest.approx(1, abs=1e-9) and r.rhs == pytest.approx(1, abs=1e-12)


def test_lambda_bound_examples():
    reps = check_lambda_bound(UNIFORM_12, UNIFORM_12, 3.0)
    assert reps[0].lhs == pytest.approx(2.25) and reps[0].rhs == pytest.approx(6.75)
    assert reps[1].skipped
    sharp = check_lambda_bound(point_mass([4.0]), point_mass([0.0]), 2.0)
    assert sharp[0].lhs == pytest.approx(4) and sharp[0].rhs == pytest.approx(8)
    with pytest.raises(ValueError):
        check_lambda_bound(UNIFORM_12, UNIFORM_12, 1.0)


def test_lambda_optimum_closed_form(rng):
    for _ in range(30):
        x = harness.random_valuation(rng, 2, 5)
        y = harness.random_valuation(rng, 2, 5)
        reps = check_lambda_bound(x, y, 2.0)
        assert all(r.holds for r in reps)
        assert reps[1].tolerance == 1e-9 and not reps[1].skipped


def test_revenue_difference_bounds():
    lo, hi = check_corollary_bounds(point_mass([1.0]), validate([[0.9], [1.0]], [0.1, 0.9]))
    assert lo.lhs == pytest.approx(0.1) and hi.lhs == pytest.approx(0.1)
    assert hi.rhs == pytest.approx(0.19) and not hi.skipped and hi.holds
    assert lo.holds
    same = check_corollary_bounds(UNIFORM_12, UNIFORM_12)
    assert all(r.lhs == 0 and r.rhs == 0 for r in same)
    # W = 1.5 exceeds both revenues, so the max-form bound says nothing
    far = check_corollary_bounds(point_mass([0.0]), uniform([[1.0], [2.0]]))
    assert far[1].skipped and far[0].holds


def test_budget_and_discount_params():
    assert theorem_c_params(0.2, 1) == pytest.approx((0.01, 0.1))
    assert theorem_c_params(1, 1) == (0.25, 0.5)
    _, eta = theorem_c_params(math.nextafter(2.0, 0.0), 1.0)
    assert eta < 1 and eta > 1 - 1e-15
    for bad in [(2.0, 1.0), (0.0, 1.0), (0.1, 0.0), (3.0, 1.0)]:
        with pytest.raises(ValueError):
            theorem_c_params(*bad)


def test_tight_bound_never_looser(rng):
    for _ in range(1000):
        M = float(rng.uniform(0.01, 100))
        eps = float(rng.uniform(1e-6, 2 * M * 0.999))
        delta, _ = theorem_c_params(eps, M)
        assert 2 * math.sqrt(M * delta) - delta <= eps + 1e-12


def test_discount_guarantee_on_self():
    res = optimal_rev_lp(UNIFORM_12)
    M = 3.0
    reps = check_theorem_c(UNIFORM_12, UNIFORM_12, res.menu, 0.2, M)
    names = [r.suite for r in reps]
    assert names == ["theorem-c:distance", "theorem-c:revenue_cap", "theorem-c:eps",
                     "theorem-c:tight", "theorem-c:2eps_optimal"]
    assert all(r.holds for r in reps)
    _, eta = theorem_c_params(0.2, M)
    discounted = reps[2].params["r_discounted"]
    assert discounted >= res.value - eta * M - 1e-12


def test_discount_guarantee_reports_violated_preconditions():
    far = point_mass([3.0, 3.0])
    reps = check_theorem_c(UNIFORM_12, far, optimal_rev_lp(UNIFORM_12).menu, 0.2, 3.0)
    assert not reps[0].holds  # distance budget exceeded, and said so
    capped = check_theorem_c(UNIFORM_12, UNIFORM_12, optimal_rev_lp(UNIFORM_12).menu, 0.2, 1.0)
    assert not capped[1].holds


def test_posted_price_discount_example():
    revs = posted_price_example()
    assert min(revs) >= 0.98 - 1e-12
    assert max(revs) == pytest.approx(0.98)


def test_multiplicative_and_sqrt_discount():
    menu = optimal_rev_lp(UNIFORM_12).menu
    dist, main = check_multiplicative(UNIFORM_12, UNIFORM_12, menu, 0.1)
    assert dist.holds and main.holds
    assert main.lhs == pytest.approx(0.9 * 2.25 - 0.1)
    with pytest.raises(ValueError):
        check_multiplicative(UNIFORM_12, UNIFORM_12, menu, 1.0)
    r = check_remark_e(UNIFORM_12, UNIFORM_12, menu)
    assert r.params["eta"] == harness.ZERO_DISTANCE_ETA and r.holds
    skip = check_remark_e(point_mass([4.0]), point_mass([0.0]), posted_price(4.0))
    assert skip.skipped and skip.holds


def test_rescale_identity_examples():
    assert check_rescale_identity(UNIFORM_12, 1.0).lhs == 0.0
    r = check_rescale_identity(UNIFORM_12, 10.0)
    assert r.params["rev_scaled"] == pytest.approx(22.5) and r.holds
    with pytest.raises(ValueError):
        check_rescale_identity(UNIFORM_12, 0.0)


def test_w_gamma_report():
    r = check_w_gamma(point_mass([1.0, 0.0]), point_mass([0.0, 1.0]), "unit_demand")
    assert r.lhs == 2.0 and r.rhs == 4.0


def test_sharp_examples_values():
    ex = sharp_examples(M=100, eps=0.1, c=4)
    assert set(ex) == {"prohorov_gap", "no_lipschitz", "sqrt_gap", "sharp_constant"}
    for e in ex.values():
        assert optimal_rev_lp(e.x).value == pytest.approx(e.rev_x, rel=1e-9, abs=1e-9)
        assert optimal_rev_lp(e.y).value == pytest.approx(e.rev_y, rel=1e-9, abs=1e-9)
    g = ex["sqrt_gap"]
    assert g.rev_x - g.rev_y == pytest.approx(20)
    assert math.sqrt(g.rev_x) - math.sqrt(g.rev_y) < 0.1


def test_convergence_dyadic_grid():
    target = validate([[0.33, 1.7], [2.21, 0.45], [1.0, 1.0]], [0.2, 0.5, 0.3])
    reps = convergence_experiment(target, deltas=[2.0**-n for n in range(1, 9)])
    assert len(reps) == 8 and all(r.holds for r in reps)
    for r in reps:
        assert r.params["w"] <= r.params["step"] + 1e-12
    const = convergence_experiment(target, deltas=[0.0, 0.0])
    assert all(r.lhs == 0.0 for r in const)
    with pytest.raises(ValueError):
        convergence_experiment(target)


def test_convergence_point_mass_sampling_is_exact():
    reps = convergence_experiment(point_mass([1.0, 2.0]), sizes=[10, 100])
    assert all(r.lhs == 0.0 and r.params["w"] == 0.0 for r in reps)


def test_learn_pipeline_point_mass():
    y = point_mass([1.0, 2.0])
    for n in (1, 5, 50):
        rep = learn_pipeline(y, n, 0.2, seed=n)
        assert rep.realized_w == 0.0 and rep.within_budget
        assert rep.regret <= rep.eta * rep.bound_m + 1e-12
        assert rep.rev_achieved >= 0
        assert rep.regret == pytest.approx(rep.rev_target - rep.rev_achieved)


@pytest.mark.parametrize("suite", harness.SUITES)
def test_suites_hold(suite):
    reps = list(run_suite(suite, seed=7, count=20))
    assert reps and all(r.holds for r in reps)


def test_suite_is_deterministic():
    a = [r.row() for r in run_suite("corollary", 3, 10)]
    b = [r.row() for r in run_suite("corollary", 3, 10)]
    assert a == b
    with pytest.raises(ValueError):
        list(run_suite("nope", 0, 1))


def test_fuzz_generator_shape(rng):
    for _ in range(50):
        d = harness.random_valuation(rng)
        assert 1 <= d.k <= 3 and 1 <= d.n <= 8
        assert np.all(d.support >= 0)
