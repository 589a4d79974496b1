import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from tracethresh import bp_sim, const_analysis
from tracethresh import exp_analysis as ea
from tracethresh.dist import DistributionSpec as D, mgf
from tracethresh.errors import InvalidConfig
from tracethresh.params import ModelParams

INF = math.inf


def fig3(lam=1.5, **kw):
    base = dict(p=1.0, pi_r=1.0, pi_t=0.0, infectious=D.exponential(1.0), delay=D.exponential(0.7))
    base.update(kw)
    return ModelParams(lam=lam, **base)


def coef_oracle(params, j, theta):
    """Scalar transcription of the coefficient formulas, gamma = 1.

    Interviewed named children pass on the mean of an interviewed parent, so
    the naming probability of the chain carries a single factor of pi_R.
    """
    lam, p, pr, pt = params.lam, params.p, params.pi_r, params.pi_t
    xi = params.delay.rate
    u = j + theta
    phi = lambda t: mgf(params.latent, t)  # noqa: E731
    a = lam * (1 - pr * p) / u**2 + lam**2 * p * xi * (pr - pt) / (u * (xi - u)) * (
        phi(u) / (u + 1) ** 2 - phi(xi) / (xi + 1) ** 2
    )
    rho = lam * p * (pt * xi + pr) * phi(xi) / (u * (xi - u))
    b = lam * p * xi * (pt * u + pr) * phi(u) / (u**2 * (xi - u))
    return a, rho, b


def test_requires_exponential_laws():
    with pytest.raises(InvalidConfig):
        ea.r_u_exp(fig3(infectious=D.constant(1.0)))
    with pytest.raises(InvalidConfig):
        ea.r_u_exp(fig3(delay=D.constant(1.0)))


@pytest.mark.parametrize("latent", [D.zero(), D.exponential(2.0), D.gamma(0.6, 3.0)])
def test_coefficients_match_scalar_oracle(latent):
    params = fig3(lam=1.3, pi_t=0.4, pi_r=0.9, p=0.7, latent=latent)
    for theta in (0.0, 0.7, 2.2):
        t = ea.series_tables(params, theta)
        for j in (1, 2, 5):
            a, rho, b = coef_oracle(params, j, theta)
            assert t.a[j - 1] == pytest.approx(a, rel=1e-12)
            assert t.rho[j - 1] == pytest.approx(rho, rel=1e-12)
            assert t.b[j - 1] == pytest.approx(b, rel=1e-12)
        assert t.c[0] == 1.0
        assert np.allclose(t.c[1:], np.cumprod(t.b[: t.c.size - 1]), rtol=1e-12, atol=0)


def test_no_naming_coefficients():
    t = ea.series_tables(fig3(lam=1.7, p=0.0), 0.0)
    assert np.all(t.b == 0)
    assert np.all(t.c[1:] == 0)
    assert t.a[0] == pytest.approx(1.7)


def factorial_bound(params, xi, j, naming):
    growth = params.lam * naming * xi * (params.pi_t + params.pi_r) / (xi - math.floor(xi))
    return np.exp(j * math.log(growth) - gammaln(j + 1))


def test_truncation_and_factorial_bound():
    params = fig3()
    xi = 0.7
    t = ea.series_tables(params, xi)
    assert 0 < t.truncation_len < t.c.size
    j = np.arange(1, t.c.size)
    # with pi_R = 1 both forms of the naming factor coincide
    assert np.all(np.abs(t.c[1:]) <= factorial_bound(params, xi, j, params.pi_r * params.p) * (1 + 1e-9))


exp_params = st.builds(
    lambda lam, xi, p, pr, pt, lat: ModelParams(
        lam=lam, p=p, pi_r=pr, pi_t=pt, infectious=D.exponential(1.0), delay=D.exponential(xi), latent=lat
    ),
    st.floats(0.1, 3),
    st.floats(0.1, 4).filter(lambda x: abs(x - round(x)) > 1e-3),
    st.floats(0.05, 1),
    st.floats(0.05, 1),
    st.floats(0, 1),
    st.sampled_from([D.zero(), D.exponential(1.0), D.constant(0.5), D.gamma(0.6, 2.0)]),
)


@given(exp_params)
@settings(max_examples=30, deadline=None)
def test_factorial_bound_on_products(params):
    xi = params.delay.rate
    t = ea.series_tables(params, xi)
    j = np.arange(1, t.c.size)
    assert np.all(np.abs(t.c[1:]) <= factorial_bound(params, xi, j, params.p) * (1 + 1e-9))


def crho_bound(params, naming):
    xi = params.delay.rate
    lam, pr, pt = params.lam, params.pi_r, params.pi_t
    frac = xi - math.floor(xi)
    return lam * naming * (pt * xi + pr) / frac * math.exp(lam * naming * xi * (pt + pr) / frac)


@given(exp_params)
@settings(max_examples=30, deadline=None)
def test_convergence_bound_on_denominator_series(params):
    t = ea.series_tables(params, params.delay.rate)
    assert abs(t.sum_crho()) <= crho_bound(params, params.p) * (1 + 1e-9)
    full = params.replace(pi_r=1.0)
    t = ea.series_tables(full, full.delay.rate)
    assert abs(t.sum_crho()) <= crho_bound(full, full.p * full.pi_r) * (1 + 1e-9)


def test_y_star_examples():
    assert ea.y_star(fig3(lam=0.0)) == 0.0
    y = ea.y_star(fig3(lam=1.5))
    assert math.isfinite(y) and y > 0
    assert not ea._finite_at(fig3(lam=2.1))


def test_fig3_branch_is_monotone_before_blow_up():
    ys = [ea.y_star(fig3(lam=lam)) for lam in np.arange(0.05, 1.95, 0.05)]
    assert all(b > a for a, b in zip(ys, ys[1:]))


def test_ru_trivial_examples():
    assert ea.r_u_exp(fig3(lam=1.7, p=0.0)) == pytest.approx(1.7, abs=1e-12)
    assert ea.r_u_exp(fig3(lam=1.7, pi_r=0.0, pi_t=0.0)) == pytest.approx(1.7, abs=1e-12)


def test_ru_fig3_regression_values():
    res = ea.analyze_exp(fig3(lam=1.5))
    assert res.finite
    assert res.y_star == pytest.approx(0.77021, abs=1e-4)
    assert res.r_u == pytest.approx(2.46156, abs=1e-4)
    assert ea.analyze_exp(fig3(lam=2.05)).r_u == INF


def test_ru_matches_branching_simulation():
    params = fig3(lam=1.5)
    rs = bp_sim.sample_r_set(params, 10**6, seed=21, threshold=10**9)
    assert not rs.is_inf.any()
    assert abs(rs.mean - ea.r_u_exp(params)) < 3 * rs.se


@pytest.mark.parametrize(
    "kw",
    [dict(pi_r=0.5, delay=D.exponential(0.3)), dict(p=0.8, pi_r=0.7, pi_t=0.9, lam=1.2, delay=D.exponential(2.3), latent=D.gamma(0.4, 2.0))],
)
def test_ru_matches_simulation_with_partial_interviews(kw):
    params = fig3(**kw)
    rs = bp_sim.sample_r_set(params, 4 * 10**5, seed=5, threshold=10**9)
    assert abs(rs.mean - ea.r_u_exp(params)) < 4 * rs.se


def test_lambda_star_examples():
    assert ea.lambda_star_exp(fig3()) == pytest.approx(1.9876, abs=0.01)
    assert ea.lambda_star_exp(fig3(p=0.0)) == INF
    assert ea.lambda_star_exp(fig3(pi_r=0.0, pi_t=1.0)) == INF
    assert ea.lambda_star_exp(fig3()) < ea.tightest_sufficiency_bound(fig3())


@given(exp_params)
@settings(max_examples=15, deadline=None)
def test_lambda_star_exceeds_gamma(params):
    ls = ea.lambda_star_exp(params)
    assert ls > params.infectious.rate


def test_sufficiency_bound_example():
    params = fig3()
    short_life = 1 - 2 * math.exp(-1)
    tail = math.exp(-0.7)
    assert ea.ru_infinite_sufficiency_bound(params, 1.0) == pytest.approx(1 / (short_life * tail), rel=1e-10)
    assert ea.ru_infinite_sufficiency_bound(params, 1.0) == pytest.approx(7.62, abs=0.01)
    assert ea.ru_infinite_sufficiency_bound(fig3(p=0.0), 1.0) == INF
    with pytest.raises(InvalidConfig):
        ea.ru_infinite_sufficiency_bound(params, 0.0)
    with pytest.raises(InvalidConfig):
        ea.ru_infinite_sufficiency_bound(fig3(latent=D.constant(50.0), delay=D.constant(1.0), infectious=D.exponential(1.0)), 1.0)


@given(exp_params, st.lists(st.floats(0.01, 5), min_size=1, max_size=5))
@settings(max_examples=10, deadline=None)
def test_sufficiency_bound_dominates_lambda_star(params, eps_grid):
    ls = ea.lambda_star_exp(params)
    for eps in eps_grid:
        assert ea.ru_infinite_sufficiency_bound(params, eps) >= ls


def test_lambda_crit_without_naming():
    assert ea.lambda_crit(fig3(lam=1.0, p=0.0), ea.EXP_RU) == pytest.approx(1.0, abs=1e-6)


def test_lambda_crit_decreases_with_delay_mean():
    base = ModelParams(lam=1.0, p=0.8, pi_r=0.8, pi_t=0.8, infectious=D.exponential(1.0))
    crits = [ea.lambda_crit(base.replace(delay=D.exponential_mean(m)), ea.EXP_RU) for m in (0.1, 0.3, 0.6, 1.2, 2.5, 5.0)]
    assert all(a > b for a, b in zip(crits, crits[1:]))
    assert all(c > 1 for c in crits)


@pytest.mark.parametrize("p", [0.3, 0.6, 0.9])
def test_smallpox_above_influenza(p):
    def crit(latent_mean):
        params = ModelParams(lam=1.0, p=p, pi_r=0.8, pi_t=0.8, infectious=D.exponential(1.0),
                             latent=D.exponential_mean(latent_mean), delay=D.exponential_mean(0.5))
        return ea.lambda_crit(params, ea.EXP_RU)

    assert crit(0.58) > crit(0.10)


def test_lambda_crit_errors():
    from tracethresh.errors import NoBracket

    with pytest.raises(InvalidConfig):
        ea.lambda_crit(ModelParams(lam=1.0, infectious=D.constant(1.0)), "const-rx")
    # R0 stays below one for every contact rate in range when the infectious period is tiny
    with pytest.raises(NoBracket):
        ea.lambda_crit(ModelParams(lam=1.0, infectious=D.constant(1e-6)), ea.CONST_R0)


def test_normalization_invariance():
    gamma = 2.5
    unit = ModelParams(lam=1.2, p=0.7, pi_r=0.9, pi_t=0.5, infectious=D.exponential(1.0), delay=D.exponential(0.45),
                       latent=D.gamma(0.8, 2.0))
    scaled = unit.replace(
        lam=unit.lam * gamma,
        infectious=D.exponential(gamma),
        delay=D.exponential(0.45 * gamma),
        latent=unit.latent.scaled(1 / gamma),
    )
    assert ea.r_u_series(scaled) == pytest.approx(ea.r_u_series(unit), rel=1e-10)
    assert ea.y_star(scaled) == pytest.approx(ea.y_star(unit), rel=1e-10)
    assert ea.lambda_star_exp(scaled) == pytest.approx(gamma * ea.lambda_star_exp(unit), abs=2 * gamma * ea.BISECT_WIDTH)


def test_integer_xi_limit_matches_richardson():
    def ru(xi):
        return ea.r_u_series(fig3(lam=1.2, pi_t=0.5, p=0.8, pi_r=0.9, delay=D.exponential(xi)))

    for n in (1, 2):
        h = 1e-2
        avg = lambda w: 0.5 * (ru(n - w) + ru(n + w))  # noqa: E731
        extrapolated = (4 * avg(h) - avg(2 * h)) / 3
        assert ru(float(n)) == pytest.approx(extrapolated, rel=1e-4)


def grid_monotone(values, increasing, tol=1e-9):
    pairs = list(zip(values, values[1:]))
    if increasing:
        return all(b >= a - tol for a, b in pairs)
    return all(b <= a + tol for a, b in pairs)


def test_ru_monotonicity_grids():
    base = ModelParams(lam=1.0, p=0.6, pi_r=0.7, pi_t=0.5, infectious=D.exponential(1.0), delay=D.exponential(1.5),
                       latent=D.exponential(2.0))
    ls = ea.lambda_star_exp(base)
    lams = np.linspace(0.1, min(ls, 3.0) * 0.95, 10)
    assert grid_monotone([ea.r_u_exp(base.replace(lam=x)) for x in lams], True)
    means = [0.2, 0.4, 0.6, 0.9, 1.3, 1.9]
    assert grid_monotone([ea.r_u_exp(base.replace(delay=D.exponential_mean(m))) for m in means], True)
    for field in ("p", "pi_r", "pi_t"):
        vals = [ea.r_u_exp(base.replace(**{field: x})) for x in np.linspace(0.1, 1.0, 8)]
        assert grid_monotone(vals, False), field
    vals = [ea.r_u_exp(base.replace(latent=D.exponential_mean(m))) for m in (0.0001, 0.2, 0.5, 1.0, 2.0)]
    assert grid_monotone(vals, False)


def test_lambda_trace_rows():
    rows = ea.lambda_trace(fig3(), [0.5, 1.5, 2.05])
    assert [r[0] for r in rows] == [0.5, 1.5, 2.05]
    assert math.isfinite(rows[1][3]) and rows[2][3] == INF


def test_lambda_crit_at_blow_up_when_ru_stays_below_one():
    # every child is named, so R_U is 0 until the named chain is supercritical
    params = ModelParams(lam=1.0, p=1.0, pi_r=1.0, infectious=D.constant(1.0), latent=D.exponential(256.0),
                         delay=D.constant(2.0))
    ls = const_analysis.lambda_star_const(params)
    assert math.isfinite(ls)
    assert const_analysis.ru_const(params.replace(lam=0.99 * ls)) < 1
    assert ea.lambda_crit(params, ea.CONST_RU) == ls
