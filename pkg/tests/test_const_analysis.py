import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from tracethresh import const_analysis as ca
from tracethresh.dist import DistributionSpec as D, sample
from tracethresh.errors import InvalidConfig
from tracethresh.params import ModelParams

E1 = math.exp(-1)


def const(lam, **kw):
    kw.setdefault("infectious", D.constant(kw.pop("iota", 1.0)))
    return ModelParams(lam=lam, **kw)


def named_offspring_mc(params: ModelParams, n: int, seed: int):
    """First-generation (unnamed, named) counts of named individuals, simulated directly."""
    rng = np.random.default_rng(seed)
    iota = params.infectious.value
    v = rng.uniform(0, iota, n)
    w = np.maximum(0.0, v + sample(params.delay, rng, n) - sample(params.latent, rng, n))
    traced = w < iota
    active = np.where(traced, w, iota)
    interviewed = ~traced & (rng.random(n) < params.pi_r)
    births = rng.poisson(params.lam * active)
    named = np.where(interviewed, rng.binomial(births, params.p), 0)
    return births - named, named


def test_requires_constant_and_pi_t_zero():
    with pytest.raises(InvalidConfig):
        ca.r0(ModelParams(lam=1.0))
    with pytest.raises(InvalidConfig):
        ca.r0(const(1.0, pi_t=0.2))


def test_fate_prob_examples():
    fp = ca.fate_probs(const(1.0))
    assert (fp.p_N, fp.p_T) == (0.0, 0.0)
    fp = ca.fate_probs(const(1.0, delay=D.exponential(1.0)))
    assert fp.p_N == pytest.approx(1 - E1, abs=1e-12)
    assert fp.p_T == 0.0
    fp = ca.fate_probs(const(1.0, latent=D.constant(2.0)))
    assert (fp.p_N, fp.p_T) == (0.0, 1.0)


@given(
    st.floats(0.2, 3),
    st.sampled_from([D.zero(), D.constant(0.4), D.exponential(1.3), D.gamma(0.8, 2.0)]),
    st.sampled_from([D.zero(), D.constant(1.7), D.exponential(0.6), D.gamma(1.2, 3.0)]),
)
@settings(max_examples=25, deadline=None)
def test_fate_probs_are_subprobabilities(iota, latent, delay):
    fp = ca.fate_probs(const(1.0, iota=iota, latent=latent, delay=delay))
    assert 0 <= fp.p_N <= 1 and 0 <= fp.p_T <= 1
    assert fp.p_N + fp.p_T <= 1 + 1e-12


def test_mean_matrix_examples():
    m = ca.mean_matrix(const(2.0))
    # No one is named, so the named row is unreachable; it still holds the
    # conditional means of a hypothetical named individual (half its lifetime traced away).
    assert (m.m_UU, m.m_UN, m.m_NN) == (2.0, 0.0, 0.0)
    assert m.m_NU == pytest.approx(1.0)
    assert ca.r0(const(2.0)) == 2.0
    m = ca.mean_matrix(const(2.0, p=1.0, pi_r=1.0))
    assert (m.m_UU, m.m_UN, m.m_NU, m.m_NN) == pytest.approx((0.0, 2.0, 1.0, 0.0), abs=1e-12)
    m = ca.mean_matrix(const(1.5, p=0.5, pi_r=1.0, delay=D.exponential(1.0)))
    # p_N = 1 - 1/e, and the traced part is (lam / 2)(P(0<=X<1) - E[X^2; X<1]) = 0.75 (4/e - 1)
    assert m.m_UU == pytest.approx(0.75) and m.m_UN == pytest.approx(0.75)
    assert m.m_NN == pytest.approx(0.75 * (1 - E1), abs=1e-12)
    assert m.m_NU == pytest.approx(0.75 * (1 - E1) + 0.75 * (4 * E1 - 1), abs=1e-12)


@pytest.mark.parametrize(
    "params",
    [
        const(2.0, p=1.0, pi_r=1.0),
        const(1.5, p=0.5, pi_r=1.0, delay=D.exponential(1.0)),
        const(2.0, p=0.7, pi_r=0.6, iota=1.4, delay=D.gamma(0.9, 2.0), latent=D.exponential(1.5)),
    ],
)
def test_named_row_against_monte_carlo(params):
    n = 10**6
    zu, zn = named_offspring_mc(params, n, seed=17)
    m = ca.mean_matrix(params)
    assert abs(zu.mean() - m.m_NU) < 4 * zu.std() / math.sqrt(n)
    assert abs(zn.mean() - m.m_NN) < 4 * zn.std() / math.sqrt(n) + 1e-12
    s = 0.5**zu * 0.5**zn
    assert abs(s.mean() - ca.pgf_N(params, 0.5, 0.5)) < 3 * s.std() / math.sqrt(n)


def test_r0_examples():
    assert ca.r0(const(2.0)) == pytest.approx(2.0)
    assert ca.r0(const(2.0, p=1.0, pi_r=1.0)) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert ca.r0(const(0.0, p=0.3, pi_r=0.5, delay=D.exponential(1.0))) == 0.0
    m = ca.mean_matrix(const(1.7, p=0.6, pi_r=0.9, delay=D.exponential(0.8), latent=D.exponential(2.0)))
    assert ca.perron_root(m) == pytest.approx(max(np.linalg.eigvals(m.as_array()).real), abs=1e-12)


def test_pgf_examples():
    params = const(2.0, p=0.4, pi_r=0.7, delay=D.exponential(1.0), latent=D.exponential(2.0))
    assert ca.pgf_U(params, 1.0, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert ca.pgf_N(params, 1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert ca.pgf_U(const(2.0), 0.5, 0.3) == pytest.approx(E1, abs=1e-15)


def test_pgf_n_at_zero_contact_rate():
    params = const(0.0, p=0.5, pi_r=0.8, delay=D.exponential(1.0), latent=D.exponential(1.0))
    for s in (0.0, 0.3, 1.0):
        assert ca.pgf_N(params, s, s) == pytest.approx(1.0, abs=1e-12)


def fd_partial(f, i, h=1e-4):
    """One-sided three-point derivative at (1, 1) in coordinate i."""
    pt = lambda t: (1 - t, 1.0) if i == 0 else (1.0, 1 - t)  # noqa: E731
    return (3 * f(*pt(0)) - 4 * f(*pt(h)) + f(*pt(2 * h))) / (2 * h)


const_params = st.builds(
    lambda lam, p, pr, iota, lat, dly: const(lam, p=p, pi_r=pr, iota=iota, latent=lat, delay=dly),
    st.floats(0.1, 3),
    st.floats(0, 1),
    st.floats(0, 1),
    st.floats(0.3, 2),
    st.sampled_from([D.zero(), D.constant(0.5), D.exponential(1.0), D.exponential(3.0), D.gamma(0.7, 2.0)]),
    st.sampled_from([D.zero(), D.constant(0.3), D.exponential(0.5), D.exponential(2.0), D.gamma(1.0, 4.0)]),
)


@given(const_params)
@settings(max_examples=25, deadline=None)
def test_pgf_partials_match_mean_matrix(params):
    m = ca.mean_matrix(params)
    fu = lambda a, b: ca.pgf_U(params, a, b)  # noqa: E731
    fn = lambda a, b: ca.pgf_N(params, a, b)  # noqa: E731
    assert fd_partial(fu, 0) == pytest.approx(m.m_UU, abs=1e-6)
    assert fd_partial(fu, 1) == pytest.approx(m.m_UN, abs=1e-6)
    assert fd_partial(fn, 0) == pytest.approx(m.m_NU, abs=1e-6)
    assert fd_partial(fn, 1) == pytest.approx(m.m_NN, abs=1e-6)


@given(const_params, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=25, deadline=None)
def test_pgfs_monotone(params, a, b, c):
    lo, hi = sorted((a, b))
    for f in (ca.pgf_U, ca.pgf_N):
        assert f(params, lo, c) <= f(params, hi, c) + 1e-12
        assert f(params, c, lo) <= f(params, c, hi) + 1e-12


def test_extinction_examples():
    assert ca.extinction_const(const(0.5, p=0.5, pi_r=0.5, delay=D.exponential(1.0))) == ca.ExtinctionResult(1, 1, 1, 0)
    q = optimize.brentq(lambda q: math.exp(-2 * (1 - q)) - q, 0, 0.9)
    res = ca.extinction_const(const(2.0, m=3))
    assert res.q_U == pytest.approx(q, abs=1e-10)
    assert q == pytest.approx(0.203188, abs=1e-6)
    assert res.p_ext == pytest.approx(q**3, abs=1e-10)


@given(const_params)
@settings(max_examples=25, deadline=None)
def test_extinction_fixed_point_residual(params):
    res = ca.extinction_const(params)
    assert abs(ca.pgf_U(params, res.q_U, res.q_N) - res.q_U) < 1e-10
    assert abs(ca.pgf_N(params, res.q_U, res.q_N) - res.q_N) < 1e-10


def test_extinction_monotone_in_tracing_and_lambda():
    base = const(2.0, p=0.5, pi_r=0.8, delay=D.exponential(1.0), latent=D.exponential(1.0))
    qs = [ca.extinction_const(base.replace(lam=lam)).p_ext for lam in np.linspace(0.8, 4, 9)]
    assert all(a >= b - 1e-12 for a, b in zip(qs, qs[1:]))
    qs = [ca.extinction_const(base.replace(p=p)).p_ext for p in np.linspace(0, 1, 9)]
    assert all(a <= b + 1e-12 for a, b in zip(qs, qs[1:]))
    qs = [ca.extinction_const(base.replace(pi_r=x)).p_ext for x in np.linspace(0, 1, 9)]
    assert all(a <= b + 1e-12 for a, b in zip(qs, qs[1:]))


def test_ru_examples():
    assert ca.ru_const(const(2.0)) == 2.0
    assert ca.ru_const(const(2.0, p=1.0, pi_r=1.0)) == pytest.approx(2.0, abs=1e-12)
    heavy = const(1.2, p=1.0, pi_r=1.0, delay=D.constant(5.0))
    assert ca.mean_matrix(heavy).m_NN == pytest.approx(1.2)
    assert ca.ru_const(heavy) == math.inf


def test_lambda_star_examples():
    assert ca.lambda_star_const(const(1.0, p=1.0, pi_r=1.0, delay=D.exponential(1.0))) == pytest.approx(
        1 / (1 - E1), abs=1e-12
    )
    assert 1 / (1 - E1) == pytest.approx(1.581977, abs=1e-6)
    assert ca.lambda_star_const(const(1.0, p=0.0, pi_r=1.0)) == math.inf
    assert ca.lambda_star_const(const(1.0, p=1.0, pi_r=1.0)) == math.inf


@given(const_params)
@settings(max_examples=20, deadline=None)
def test_r0_and_ru_share_threshold(params):
    f = lambda lam: ca.r0(params.replace(lam=lam)) - 1  # noqa: E731
    if f(50.0) <= 0:
        return
    lam_c = optimize.brentq(f, 1e-9, 50.0, xtol=1e-12)
    lo, hi = lam_c - 5e-7, lam_c + 5e-7
    assert ca.r0(params.replace(lam=lo)) < 1 < ca.r0(params.replace(lam=hi))
    assert ca.ru_const(params.replace(lam=lo)) < 1 < ca.ru_const(params.replace(lam=hi))


def test_traced_pgf_term_is_smooth_near_one():
    params = const(0.1757703317541839, p=0.0, pi_r=0.0, iota=0.30078125, latent=D.constant(0.5), delay=D.exponential(0.5))
    m = ca.mean_matrix(params)
    fn = lambda a, b: ca.pgf_N(params, a, b)  # noqa: E731
    for h in (1e-3, 1e-4, 1e-5):
        assert fd_partial(fn, 0, h) == pytest.approx(m.m_NU, abs=1e-8)


def test_traced_pgf_series_matches_closed_bracket():
    mom = ca._Moments(const(1.3, p=0.6, pi_r=0.8, iota=1.0, latent=D.gamma(0.8, 2.0), delay=D.exponential(1.5)))
    cut = ca.SERIES_CUTOFF / mom.iota
    assert mom.traced_pgf_term(cut * (1 - 1e-12)) == pytest.approx(mom.traced_pgf_term(cut * (1 + 1e-12)), abs=1e-12)
