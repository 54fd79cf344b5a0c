import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1css import l1solve

from _oracles import exact_l1_regression_enum, l1_norm_fsum


def _random_instance(rng, n, d, heavy=False):
    m = rng.standard_cauchy((n, d)) if heavy else rng.standard_normal((n, d))
    b = rng.standard_cauchy(n) if heavy else rng.standard_normal(n)
    return m, b


def test_exact_matches_enumeration_oracle():
    rng = np.random.default_rng(42)
    for trial in range(25):
        n = int(rng.integers(3, 12))
        d = int(rng.integers(1, min(4, n)))
        m, b = _random_instance(rng, n, d, heavy=trial % 2 == 0)
        got = l1solve.l1_regression_exact(m, b)
        want_cost, _ = exact_l1_regression_enum(m, b)
        assert got.cost == pytest.approx(want_cost, rel=1e-7, abs=1e-9)
        assert got.estimate == got.cost
        assert got.converged


def test_exact_single_column_weighted_median_path():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(2, 40))
        m = rng.standard_cauchy((n, 1))
        b = rng.standard_cauchy(n)
        got = l1solve.l1_regression_exact(m, b)
        want_cost, want_x = exact_l1_regression_enum(m, b)
        assert got.cost == pytest.approx(want_cost, rel=1e-9, abs=1e-12)
        # optimum interpolates one row: the fit is an exact data ratio
        ratios = (b / m[:, 0])[np.abs(m[:, 0]) > 0]
        assert np.min(np.abs(ratios - got.x[0])) < 1e-9 * max(1.0, abs(got.x[0]))


def test_exact_zero_denominators_single_column():
    m = np.array([[0.0], [0.0], [1.0]])
    b = np.array([5.0, -3.0, 2.0])
    got = l1solve.l1_regression_exact(m, b)
    assert got.cost == pytest.approx(8.0)
    assert got.x[0] == pytest.approx(2.0)


def test_exact_translation_invariance():
    rng = np.random.default_rng(3)
    m, b = _random_instance(rng, 15, 3)
    v = rng.standard_normal(3)
    base = l1solve.l1_regression_exact(m, b)
    shifted = l1solve.l1_regression_exact(m, b + m @ v)
    assert shifted.cost == pytest.approx(base.cost, rel=1e-8, abs=1e-9)


def test_capacity_cap_enforced():
    m = np.zeros((2001, 51))
    m[:, 0] = 1.0
    with pytest.raises(l1solve.CapacityError):
        l1solve.l1_regression_exact(m, np.zeros(2001))


def test_shape_and_eps_validation():
    m = np.ones((4, 2))
    b = np.ones(4)
    with pytest.raises(ValueError):
        l1solve.l1_regression_exact(m, np.ones(5))
    with pytest.raises(ValueError):
        l1solve.l1_regression_approx(m, b, eps=0.0)
    with pytest.raises(ValueError):
        l1solve.l1_regression_approx(m, b, eps=1.0)
    with pytest.raises(ValueError):
        l1solve.l1_regression_approx(m, np.array([1.0, np.nan, 0.0, 0.0]), eps=0.1)


def test_approx_certified_results_respect_exact_bound():
    rng = np.random.default_rng(11)
    eps = 0.1
    certified = 0
    total = 0
    for trial in range(40):
        n = int(rng.integers(4, 14))
        d = int(rng.integers(1, min(4, n)))
        m, b = _random_instance(rng, n, d, heavy=trial % 3 == 0)
        res = l1solve.l1_regression_approx(m, b, eps=eps)
        want_cost, _ = exact_l1_regression_enum(m, b)
        slack = 1e-9 * max(1.0, want_cost)
        # no solver may beat the optimum
        assert res.cost >= want_cost - slack
        # sandwich invariant holds regardless of certification
        assert res.cost <= res.estimate <= (1.0 + eps) * res.cost + slack
        total += 1
        if res.converged:
            certified += 1
            assert res.cost <= (1.0 + eps) * want_cost + slack
    assert certified >= int(0.8 * total)


def test_approx_cost_is_exact_recompute():
    rng = np.random.default_rng(13)
    m, b = _random_instance(rng, 30, 4)
    res = l1solve.l1_regression_approx(m, b, eps=0.2)
    assert res.cost == pytest.approx(l1_norm_fsum(m @ res.x - b), rel=1e-12)


def test_approx_zero_target():
    m = np.random.default_rng(1).standard_normal((10, 3))
    res = l1solve.l1_regression_approx(m, np.zeros(10), eps=0.5)
    assert res.cost == 0.0
    assert res.estimate == 0.0


def test_approx_zero_design_reports_unconverged():
    # eps small enough that the projected dual bound (which misses the mass
    # on the pivot rows of a rank-zero design) cannot certify
    m = np.zeros((8, 2))
    b = np.arange(1.0, 9.0)
    res = l1solve.l1_regression_approx(m, b, eps=0.01)
    assert res.cost == pytest.approx(np.sum(np.abs(b)))
    assert np.all(res.x == 0.0)
    assert not res.converged
    assert res.estimate == pytest.approx(res.cost * 1.01)


def test_multi_matches_single_calls_bitwise():
    rng = np.random.default_rng(17)
    m = rng.standard_normal((25, 4))
    bmat = rng.standard_cauchy((25, 6))
    multi = l1solve.l1_regression_multi(m, bmat, eps=0.1)
    assert len(multi) == 6
    for j, res in enumerate(multi):
        single = l1solve.l1_regression_approx(m, bmat[:, j], eps=0.1)
        assert res.cost == single.cost
        assert res.estimate == single.estimate
        assert res.converged == single.converged
        np.testing.assert_array_equal(res.x, single.x)


def test_smoothed_objective_monotone_within_level():
    rng = np.random.default_rng(19)
    m = rng.standard_normal((40, 5))
    bmat = rng.standard_cauchy((40, 3))
    trace = {}
    l1solve.l1_regression_multi(m, bmat, eps=0.05, trace=trace)
    rows = trace["smoothed"]
    assert rows, "trace hook recorded nothing"
    by_group = {}
    for level, col, phi in rows:
        by_group.setdefault((col, level), []).append(phi)
    for phis in by_group.values():
        for prev, cur in zip(phis, phis[1:]):
            assert cur <= prev * (1.0 + 1e-9) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_exact_never_beaten_by_candidate_points(seed):
    rng = np.random.default_rng(seed)
    m, b = _random_instance(rng, 8, 2)
    best = l1solve.l1_regression_exact(m, b).cost
    for _ in range(5):
        x = rng.standard_normal(2)
        assert best <= l1_norm_fsum(m @ x - b) + 1e-9


def test_estimate_monotone_in_eps_budget():
    rng = np.random.default_rng(23)
    m, b = _random_instance(rng, 30, 3, heavy=True)
    loose = l1solve.l1_regression_approx(m, b, eps=0.5)
    tight = l1solve.l1_regression_approx(m, b, eps=0.01)
    # tighter budgets may spend more work but never certify a worse sandwich
    assert tight.estimate <= (1.0 + 0.01) * tight.cost + 1e-9
    assert loose.estimate <= (1.0 + 0.5) * loose.cost + 1e-9
    assert tight.cost <= loose.estimate + 1e-9
