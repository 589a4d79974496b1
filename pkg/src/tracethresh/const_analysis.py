"""Two-type (unnamed/named) branching analysis for a constant infectious period.

Valid when ``T_I`` is the constant ``iota`` and only untraced removals are
interviewed (``pi_t == 0``).  Latent and delay laws are arbitrary.
"""
from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass

import numpy as np

from .dist import CONSTANT, DiffLaw, Integrand
from .errors import InvalidConfig, NoConvergence
from .params import ModelParams

INF = math.inf
SERIES_CUTOFF = 0.05  # theta * iota below which the traced pgf term is summed as a series
SERIES_TERMS = 12


@dataclass(frozen=True)
class TracedFateProbs:
    p_N: float  # named individual dies before its delay ends (untraced)
    p_T: float  # named individual traced while still latent


@dataclass(frozen=True)
class MeanMatrix:
    m_UU: float
    m_UN: float
    m_NU: float
    m_NN: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.m_UU, self.m_UN], [self.m_NU, self.m_NN]])


@dataclass(frozen=True)
class ExtinctionResult:
    q_U: float
    q_N: float
    p_ext: float
    iterations: int = 0


def require_const(params: ModelParams) -> float:
    """Return ``iota`` or raise if the constant-case analysis does not apply."""
    if params.infectious.kind != CONSTANT:
        raise InvalidConfig(f"constant-case analysis needs a constant infectious period, got {params.infectious.kind}")
    if params.pi_t != 0:
        raise InvalidConfig(f"constant-case analysis needs pi_t == 0, got {params.pi_t}")
    return params.infectious.value


class _Moments:
    """Truncated moments of T_D - T_L that do not depend on the pgf argument."""

    def __init__(self, params: ModelParams):
        iota = require_const(params)
        self.iota = iota
        self.law = law = DiffLaw(params.delay, params.latent)
        one = Integrand.one()
        self.p_above = law.prob(iota, INF)  # P(X > iota)
        self.p_below = law.prob(-INF, -iota, include_b=True)  # P(X <= -iota)
        self.p_neg = law.prob(-iota, 0.0)  # P(-iota < X < 0)
        self.p_pos = law.trunc_expect(one, 0.0, iota, include_a=True)  # P(0 <= X < iota)
        self.e_x_pos = law.trunc_expect(Integrand.x(), 0.0, iota, include_a=True, include_b=True)
        self.e_negx_neg = law.trunc_expect(Integrand.neg_x(), -iota, 0.0, include_b=True)
        self.e_sq_neg = law.trunc_expect(Integrand.shifted_square(iota), -iota, 0.0)
        self.e_x2_pos = law.trunc_expect(Integrand.x2(), 0.0, iota, include_a=True)

    @cached_property
    def p_N(self):
        return min(1.0, max(0.0, self.p_above + self.e_x_pos / self.iota))

    @cached_property
    def p_T(self):
        return min(1.0, max(0.0, self.p_below + self.e_negx_neg / self.iota))

    @cached_property
    def traced_active_mass(self):
        """P(named individual is traced after becoming active)."""
        iota = self.iota
        x_neg = self.law.trunc_expect(Integrand.x(), -iota, 0.0)
        return (self.p_neg * iota + x_neg) / iota + (self.p_pos * iota - self.e_x_pos_open) / iota

    @cached_property
    def e_x_pos_open(self):
        # E[X 1{0 <= X < iota}]; differs from e_x_pos only by an atom at iota.
        return self.law.trunc_expect(Integrand.x(), 0.0, self.iota, include_a=True)

    @cached_property
    def lifetime_moments(self) -> list[float]:
        """Entry n - 1 is E[(X + iota)^n; -iota < X < 0] + E[iota^n - X^n; 0 <= X < iota]."""
        iota, law = self.iota, self.law
        out = []
        for n in range(1, SERIES_TERMS + 1):
            shifted = Integrand(tuple((math.comb(n, k) * iota ** (n - k), k, 0.0) for k in range(n + 1)))
            gap = Integrand(((iota**n, 0, 0.0), (-1.0, n, 0.0)))
            out.append(law.trunc_expect(shifted, -iota, 0.0) + law.trunc_expect(gap, 0.0, iota, include_a=True))
        return out

    @cached_property
    def traced_mean_lifetime(self):
        """E[W 1{traced while active}] with W the active lifetime."""
        iota = self.iota
        return (self.e_sq_neg + iota * iota * self.p_pos - self.e_x2_pos) / (2 * iota)

    def traced_pgf_term(self, theta: float) -> float:
        """E[exp(-theta W) 1{0 < W < iota}] for the active lifetime W = V + X."""
        iota, law = self.iota, self.law
        if theta * iota < SERIES_CUTOFF:
            # the closed bracket below cancels to O(theta) here, so sum the Taylor series instead
            total, scale = 0.0, 1.0 / iota
            for n, m_n in enumerate(self.lifetime_moments, start=1):
                total += scale * m_n
                scale *= -theta / (n + 1)
            return total
        e_neg = law.trunc_expect(Integrand.shifted_exp_neg(theta, iota), -iota, 0.0)
        e_pos = law.trunc_expect(Integrand.exp_neg(theta), 0.0, iota, include_a=True)
        bracket = self.p_neg - e_neg + e_pos - math.exp(-theta * iota) * self.p_pos
        return bracket / (theta * iota)


def fate_probs(params: ModelParams) -> TracedFateProbs:
    mom = _Moments(params)
    return TracedFateProbs(p_N=mom.p_N, p_T=mom.p_T)


def _mean_matrix(params: ModelParams, mom: _Moments) -> MeanMatrix:
    lam, iota = params.lam, mom.iota
    named = params.pi_r * params.p
    m_uu = lam * (1 - named) * iota
    m_un = lam * named * iota
    p_n = mom.p_N
    m_nn = m_un * p_n
    m_nu = m_uu * p_n + lam * mom.traced_mean_lifetime
    return MeanMatrix(m_uu, m_un, m_nu, m_nn)


def mean_matrix(params: ModelParams) -> MeanMatrix:
    return _mean_matrix(params, _Moments(params))


def perron_root(m: MeanMatrix) -> float:
    disc = (m.m_UU - m.m_NN) ** 2 + 4 * m.m_UN * m.m_NU
    return 0.5 * (m.m_UU + m.m_NN + math.sqrt(max(disc, 0.0)))


def r0(params: ModelParams) -> float:
    """Perron root of the mean offspring matrix."""
    return perron_root(mean_matrix(params))


def _pgf_u(params: ModelParams, iota: float, s_u: float, s_n: float) -> float:
    lam, p, pi_r = params.lam, params.p, params.pi_r
    return (1 - pi_r) * math.exp(-lam * iota * (1 - s_u)) + pi_r * math.exp(
        -lam * iota * (1 - (1 - p) * s_u - p * s_n)
    )


def pgf_U(params: ModelParams, s_u: float, s_n: float) -> float:
    """Joint pgf of (unnamed, named) offspring of an unnamed individual."""
    return _pgf_u(params, require_const(params), s_u, s_n)


def _pgf_n(params: ModelParams, mom: _Moments, s_u: float, s_n: float) -> float:
    theta = params.lam * (1 - s_u)
    return mom.p_T + mom.p_N * _pgf_u(params, mom.iota, s_u, s_n) + mom.traced_pgf_term(theta)


def pgf_N(params: ModelParams, s_u: float, s_n: float) -> float:
    """Joint pgf of (unnamed, named) offspring of a named individual.

    Traced individuals are never interviewed here, so their offspring are
    all unnamed and Poisson given the active lifetime.
    """
    return _pgf_n(params, _Moments(params), s_u, s_n)


def extinction_const(params: ModelParams, tol: float = 1e-12, max_iter: int = 1_000_000) -> ExtinctionResult:
    """Minimal fixed point of (f_U, f_N) by monotone iteration from (0, 0)."""
    mom = _Moments(params)
    if perron_root(_mean_matrix(params, mom)) <= 1:
        return ExtinctionResult(1.0, 1.0, 1.0, 0)
    iota = mom.iota
    qu, qn = 0.0, 0.0
    for it in range(1, max_iter + 1):
        nu = _pgf_u(params, iota, qu, qn)
        nn = _pgf_n(params, mom, qu, qn)
        step = max(abs(nu - qu), abs(nn - qn))
        qu, qn = nu, nn
        if step < tol:
            return ExtinctionResult(qu, qn, qu**params.m, it)
    raise NoConvergence(f"extinction fixed point not reached in {max_iter} iterations")


def ru_const(params: ModelParams) -> float:
    """Mean offspring of the embedded process of unnamed individuals."""
    m = mean_matrix(params)
    if m.m_NN >= 1:
        return INF
    return m.m_UU + m.m_UN * m.m_NU / (1 - m.m_NN)


def lambda_star_const(params: ModelParams) -> float:
    """Contact rate above which the embedded mean is infinite."""
    iota = require_const(params)
    denom = params.pi_r * params.p * iota * fate_probs(params).p_N
    return INF if denom <= 0 else 1.0 / denom
