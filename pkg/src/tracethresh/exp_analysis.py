"""Series solution for the embedded mean with exponential infectious periods.

Time is rescaled internally so the infectious rate is 1; the delay must be
exponential, the latent law enters only through its Laplace transform.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import const_analysis
from .dist import EXPONENTIAL, DiffLaw, mgf
from .errors import InvalidConfig, NoBracket
from .params import ModelParams

INF = math.inf
TRUNC_EPS = 1e-300
INTEGER_XI_TOL = 1e-6
INTEGER_XI_SHIFT = 1e-4
SCAN_STEP = 0.05
SCAN_LIMIT = 100.0
BISECT_WIDTH = 1e-4


@dataclass(frozen=True)
class SeriesTables:
    xi: float
    theta: float
    a: np.ndarray  # a[j-1] = a_j(theta), j >= 1
    rho: np.ndarray
    b: np.ndarray
    c: np.ndarray  # c[i] = c_i(theta), i >= 0
    truncation_len: int

    def sum_ca(self) -> float:
        n = self.truncation_len
        return float(np.dot(self.c[:n], self.a[:n]))

    def sum_crho(self) -> float:
        n = self.truncation_len
        return float(np.dot(self.c[:n], self.rho[:n]))


@dataclass(frozen=True)
class ExpAnalysisResult:
    y_star: float
    r_u: float
    lambda_star: float
    finite: bool


@dataclass(frozen=True)
class _Scaled:
    """Parameters in units where the infectious rate is 1."""

    lam: float
    xi: float
    p: float
    pi_r: float
    pi_t: float
    gamma: float
    latent: object

    def phi(self, theta: float) -> float:
        return mgf(self.latent, theta * self.gamma)


def _scaled(params: ModelParams) -> _Scaled:
    if params.infectious.kind != EXPONENTIAL:
        raise InvalidConfig(f"exponential-case analysis needs an exponential infectious period, got {params.infectious.kind}")
    g = params.infectious.rate
    if params.p * params.pi_r == 0:
        # nobody is ever named, so the delay law drops out; any non-integer rate will do
        return _Scaled(params.lam / g, 0.5, 0.0, params.pi_r, params.pi_t, g, params.latent)
    if params.delay.kind != EXPONENTIAL:
        raise InvalidConfig(f"exponential-case analysis needs an exponential delay, got {params.delay.kind}")
    return _Scaled(params.lam / g, params.delay.rate / g, params.p, params.pi_r, params.pi_t, g, params.latent)


def _tables(s: _Scaled, theta: float, length: int = 64) -> SeriesTables:
    lam, xi, p, pr, pt = s.lam, s.xi, s.p, s.pi_r, s.pi_t
    phi_xi = s.phi(xi)
    while True:
        j = np.arange(1, length + 1, dtype=float)
        u = j + theta
        phi_u = np.array([s.phi(v) for v in u])
        gap = xi - u
        # A named child that is interviewed passes on the interviewed-parent mean,
        # so pi_R enters once through the parent's naming and once per fate below.
        a = lam * (1 - pr * p) / u**2 + lam**2 * p * xi * (pr - pt) / (u * gap) * (
            phi_u / (u + 1) ** 2 - phi_xi / (xi + 1) ** 2
        )
        rho = lam * p * (pt * xi + pr) * phi_xi / (u * gap)
        b = lam * p * xi * (pt * u + pr) * phi_u / (u**2 * gap)
        c = np.concatenate(([1.0], np.cumprod(b)))
        # term i pairs c_i with a_{i+1}, rho_{i+1}
        size = np.abs(c[:-1]) * np.maximum(np.abs(a), np.abs(rho))
        small = np.nonzero(size < TRUNC_EPS)[0]
        if small.size:
            n = int(small[0])
            return SeriesTables(xi * s.gamma, theta, a, rho, b, c[:-1], n)
        if length >= 1 << 16:
            return SeriesTables(xi * s.gamma, theta, a, rho, b, c[:-1], length)
        length *= 2


def _near_integer(xi: float) -> bool:
    return abs(xi - round(xi)) < INTEGER_XI_TOL


def _sides(params: ModelParams) -> list[_Scaled]:
    """One scaled parameter set, or two straddling an integer delay rate.

    Coefficients have removable poles at integer delay rates; averaging the
    two sides cancels the first-order pole term.
    """
    s = _scaled(params)
    if not _near_integer(s.xi):
        return [s]
    return [
        _Scaled(s.lam, s.xi + shift, s.p, s.pi_r, s.pi_t, s.gamma, s.latent)
        for shift in (-INTEGER_XI_SHIFT, INTEGER_XI_SHIFT)
    ]


def _averaged(fn, params: ModelParams):
    vals = [fn(s) for s in _sides(params)]
    return tuple(sum(v) / len(vals) for v in zip(*vals))


def series_tables(params: ModelParams, theta: float) -> SeriesTables:
    """Coefficient tables at ``theta`` (in units of the infectious rate)."""
    s = _scaled(params)
    if _near_integer(s.xi) or any(abs(s.xi - j - theta) < INTEGER_XI_TOL for j in range(1, int(s.xi) + 2)):
        # Tables themselves are singular here; callers that need values use the averaged path.
        s = _Scaled(s.lam, s.xi + INTEGER_XI_SHIFT, s.p, s.pi_r, s.pi_t, s.gamma, s.latent)
    return _tables(s, theta)


def _ystar_parts(s: _Scaled) -> tuple[float, float]:
    t = _tables(s, s.xi)
    return t.sum_ca(), 1.0 + t.sum_crho()


def _ystar_ru(s: _Scaled) -> tuple[float, float, float]:
    num, den = _ystar_parts(s)
    y = num / den if den != 0 else math.copysign(INF, num)
    t0 = _tables(s, 0.0)
    n = t0.truncation_len
    ru = float(np.dot(t0.c[:n], t0.a[:n] - t0.rho[:n] * y))
    return y, den, ru


def y_star_denominator(params: ModelParams) -> float:
    """1 + sum_i c_i(xi) rho_{i+1}(xi); y* blows up where this vanishes."""
    return _averaged(lambda s: _ystar_parts(s), params)[1]


def y_star(params: ModelParams) -> float:
    return _averaged(lambda s: _ystar_ru(s)[:1], params)[0]


def r_u_series(params: ModelParams) -> float:
    """Series value of R_U ignoring whether ``lam`` is below the blow-up point."""
    return _averaged(lambda s: _ystar_ru(s), params)[2]


def _finite_at(params: ModelParams) -> bool:
    for s in _sides(params):
        num, den = _ystar_parts(s)
        if den <= 0 or not num / den >= 0:
            return False
    return True


EPS_GRID = tuple(np.logspace(-2, 2, 41))
FAR_STEP = 0.01


def tightest_sufficiency_bound(params: ModelParams) -> float:
    """Smallest sufficiency bound over a log grid of eps in [0.01, 100]."""
    best = INF
    for eps in EPS_GRID:
        try:
            best = min(best, ru_infinite_sufficiency_bound(params, float(eps)))
        except InvalidConfig:
            continue
    return best


@functools.lru_cache(maxsize=4096)
def _lambda_star_cached(params: ModelParams, step: float) -> float:
    s = _scaled(params)
    gamma = s.gamma
    if s.p * s.pi_r == 0:
        return INF
    at = lambda lam: _finite_at(params.replace(lam=lam))  # noqa: E731
    # beyond the sufficiency bound R_U is known to be infinite, so the scan never needs to pass it
    bound = tightest_sufficiency_bound(params)
    ceiling = max(SCAN_LIMIT * gamma, bound)
    lo = gamma
    if not at(lo):
        # Not expected for lam <= gamma; search below instead of trusting the scan start.
        lo_good, hi_bad = 0.0, gamma
    else:
        hi = lo
        found = False
        while hi < ceiling:
            # fixed steps over the usual range, then relative ones out to the ceiling
            nxt = hi + step * gamma if hi < SCAN_LIMIT * gamma else hi * (1 + FAR_STEP)
            nxt = min(nxt, ceiling)
            if not at(nxt):
                lo_good, hi_bad, found = hi, nxt, True
                break
            hi = nxt
        if not found:
            return INF if math.isinf(bound) else ceiling
    while hi_bad - lo_good > BISECT_WIDTH * gamma:
        mid = 0.5 * (lo_good + hi_bad)
        if at(mid):
            lo_good = mid
        else:
            hi_bad = mid
    return 0.5 * (lo_good + hi_bad)


def lambda_star_exp(params: ModelParams, step: float = SCAN_STEP) -> float:
    """Contact rate where y* first stops being finite and nonnegative.

    The value of ``params.lam`` is ignored.  The scan runs to 100 times the
    infectious rate or to the tightest sufficiency bound, whichever is
    larger; if the series never blows up on that range the bound is
    returned.  Returns ``inf`` only when nobody can be named or no delay
    outlasts the latent period.
    """
    _scaled(params)
    return _lambda_star_cached(params.replace(lam=0.0), step)


def r_u_exp(params: ModelParams, lambda_star: float | None = None) -> float:
    if lambda_star is None:
        lambda_star = lambda_star_exp(params)
    if params.lam >= lambda_star:
        return INF
    return r_u_series(params)


def analyze_exp(params: ModelParams) -> ExpAnalysisResult:
    ls = lambda_star_exp(params)
    finite = params.lam < ls
    y, _den, ru = _averaged(lambda s: _ystar_ru(s), params)
    return ExpAnalysisResult(y_star=y, r_u=ru if finite else INF, lambda_star=ls, finite=finite)


def lambda_trace(params: ModelParams, lambdas) -> list[tuple[float, float, float, float]]:
    """(lam, y*, denominator, R_U) rows for a grid of contact rates."""
    ls = lambda_star_exp(params)
    rows = []
    for lam in lambdas:
        q = params.replace(lam=float(lam))
        y, den, ru = _averaged(lambda s: _ystar_ru(s), q)
        rows.append((float(lam), y, den, ru if lam < ls else INF))
    return rows


def ru_infinite_sufficiency_bound(params: ModelParams, eps: float) -> float:
    """Contact rate above which the embedded mean is certainly infinite.

    Counts only named descendants whose natural lifetime is below ``eps`` and
    whose delay exceeds their latent period by at least ``eps``.
    """
    if params.infectious.kind != EXPONENTIAL:
        raise InvalidConfig("the sufficiency bound needs an exponential infectious period")
    if eps <= 0:
        raise InvalidConfig(f"eps must be > 0, got {eps}")
    if params.p * params.pi_r == 0:
        return INF
    gamma = params.infectious.rate
    tail = DiffLaw(params.delay, params.latent).prob(eps, INF)
    if tail <= 0:
        raise InvalidConfig(f"P(T_D > T_L + {eps}) is zero; the bound does not apply")
    ge = gamma * eps
    # 1 - e^{-x}(x+1), computed without cancellation for small x
    short_life = -math.expm1(-ge) - ge * math.exp(-ge)
    return 1.0 / (params.p * params.pi_r / gamma * short_life * tail)


CONST_R0 = "const-r0"
CONST_RU = "const-ru"
EXP_RU = "exp-ru"
CASES = (CONST_R0, CONST_RU, EXP_RU)


def lambda_crit(params: ModelParams, case: str, xtol: float = 1e-6) -> float:
    """Contact rate at which the chosen reproduction number equals 1."""
    if case == CONST_R0:
        target = lambda lam: const_analysis.r0(params.replace(lam=lam))  # noqa: E731
        upper = 1e3
    elif case == CONST_RU:
        ls = const_analysis.lambda_star_const(params)
        target = lambda lam: const_analysis.ru_const(params.replace(lam=lam))  # noqa: E731
        upper = 1e3 if math.isinf(ls) else ls - 1e-6
    elif case == EXP_RU:
        ls = lambda_star_exp(params)
        target = lambda lam: r_u_series(params.replace(lam=lam))  # noqa: E731
        # the series is only vetted for blow-up up to the scan limit
        upper = SCAN_LIMIT * params.infectious.rate if math.isinf(ls) else ls - 1e-6
        # ls is known only to within the bisection width; step back onto the finite branch.
        gamma = params.infectious.rate
        while not math.isinf(ls) and upper > 1e-6 and not _finite_at(params.replace(lam=upper)):
            upper -= 0.25 * BISECT_WIDTH * gamma
    else:
        raise InvalidConfig(f"unknown lambda-crit case {case!r}; choose from {CASES}")
    lower = 1e-6
    f_lo, f_hi = target(lower) - 1, target(upper) - 1
    if case != CONST_R0 and not math.isinf(ls) and f_lo < 0 and f_hi < 0:
        # R_U stays below 1 until it blows up, so the crossing is the blow-up rate.
        return ls
    if not (f_lo < 0 < f_hi):
        raise NoBracket(f"{case}: R - 1 does not change sign on [{lower}, {upper}] ({f_lo:.3g}, {f_hi:.3g})")
    return optimize.bisect(lambda lam: target(lam) - 1, lower, upper, xtol=xtol)
