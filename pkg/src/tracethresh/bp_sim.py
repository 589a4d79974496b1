"""Monte Carlo for the modified birth-death process with tracing.

Each replicate grows the naming cluster of one unnamed individual and counts
the unnamed offspring of every member: a draw of the offspring variable R of
the embedded process of unnamed individuals.  Works for any of the supported
laws, any interview probabilities and both delay couplings.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import optimize

from .params import MUTUAL, ModelParams
from .streams import run_blocks

INF_CODE = -1
DEFAULT_THRESHOLD = 100
DEFAULT_CLUSTER_CAP = 1_000_000


@numba.njit(cache=True, nogil=True)
def draw(rng, code, p1, p2):
    if code == 0:
        return 0.0
    if code == 1:
        return p1
    if code == 2:
        return rng.standard_exponential() / p1
    return rng.gamma(p1, p2)


@numba.njit(cache=True, nogil=True)
def _name_offspring(rng, n_births, active, interviewed, p, mutual, d_code, d1, d2, q_v, q_d):
    """Split births into unnamed (returned) and named (pushed on the queue)."""
    if not interviewed:
        return n_births
    unnamed = 0
    shared = -1.0
    for _ in range(n_births):
        if rng.random() < p:
            if mutual:
                if shared < 0.0:
                    shared = draw(rng, d_code, d1, d2)
                d = shared
            else:
                d = draw(rng, d_code, d1, d2)
            # time from this birth to the parent's removal
            q_v.append(active * rng.random())
            q_d.append(d)
        else:
            unnamed += 1
    return unnamed


@numba.njit(cache=True, nogil=True)
def _sample_r(rng, lam, p, pi_r, pi_t, inf, lat, dly, mutual, threshold, cluster_cap):
    i_code, i1, i2 = inf
    l_code, l1, l2 = lat
    d_code, d1, d2 = dly
    q_v = [0.0]
    q_d = [0.0]
    q_v.pop()
    q_d.pop()

    t_root = draw(rng, i_code, i1, i2)
    births = rng.poisson(lam * t_root) if lam > 0.0 else 0
    interviewed = rng.random() < pi_r
    r = _name_offspring(rng, births, t_root, interviewed, p, mutual, d_code, d1, d2, q_v, q_d)
    if r >= threshold:
        return INF_CODE
    processed = 0
    while len(q_v) > 0:
        v = q_v.pop()
        d = q_d.pop()
        processed += 1
        if processed > cluster_cap:
            return INF_CODE
        t_lat = draw(rng, l_code, l1, l2)
        t_inf = draw(rng, i_code, i1, i2)
        w = v + d - t_lat
        if w < 0.0:
            w = 0.0
        if w < t_inf:
            active = w
            interviewed = rng.random() < pi_t
        else:
            active = t_inf
            interviewed = rng.random() < pi_r
        if active <= 0.0 or lam == 0.0:
            continue
        births = rng.poisson(lam * active)
        r += _name_offspring(rng, births, active, interviewed, p, mutual, d_code, d1, d2, q_v, q_d)
        if r >= threshold:
            return INF_CODE
    return r


@numba.njit(cache=True, nogil=True)
def _sample_block(rng, n, lam, p, pi_r, pi_t, inf, lat, dly, mutual, threshold, cluster_cap):
    out = np.empty(n, dtype=np.int64)
    for k in range(n):
        out[k] = _sample_r(rng, lam, p, pi_r, pi_t, inf, lat, dly, mutual, threshold, cluster_cap)
    return out


def _kernel_args(params: ModelParams):
    return (
        params.lam,
        params.p,
        params.pi_r,
        params.pi_t,
        params.infectious.encode(),
        params.latent.encode(),
        params.delay.encode(),
        params.delay_coupling == MUTUAL,
    )


def sample_r(
    params: ModelParams,
    rng: np.random.Generator,
    threshold: int = DEFAULT_THRESHOLD,
    cluster_cap: int = DEFAULT_CLUSTER_CAP,
) -> float:
    """One draw of R; ``math.inf`` once the unnamed count reaches ``threshold``."""
    v = _sample_block(rng, 1, *_kernel_args(params), threshold, cluster_cap)[0]
    return math.inf if v == INF_CODE else int(v)


@dataclass
class RSampleSet:
    """Draws of R; entries equal to ``INF_CODE`` stand for infinity."""

    samples: np.ndarray
    truncation_threshold: int = DEFAULT_THRESHOLD
    seed: int | None = None

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def is_inf(self) -> np.ndarray:
        return self.samples == INF_CODE

    @property
    def p_inf_hat(self) -> float:
        return float(self.is_inf.mean()) if self.n else float("nan")

    @property
    def mean(self) -> float:
        """Sample mean; infinite as soon as one draw is infinite."""
        if self.is_inf.any():
            return math.inf
        return float(self.samples.mean())

    @property
    def se(self) -> float:
        if self.is_inf.any():
            return math.inf
        return float(self.samples.std(ddof=1) / math.sqrt(self.n))

    def pgf(self, s: float) -> float:
        """Empirical E[s^R]; infinite draws contribute 0 for s < 1."""
        finite = self.samples[~self.is_inf]
        if s >= 1.0:
            return float(finite.size / self.n) if s < 1.0 else 1.0
        return float(np.sum(np.power(s, finite.astype(float))) / self.n)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replicate", "r_value", "is_inf"])
            for i, v in enumerate(self.samples.tolist()):
                w.writerow([i, "" if v == INF_CODE else v, int(v == INF_CODE)])


def sample_r_set(
    params: ModelParams,
    n: int,
    seed: int,
    threshold: int = DEFAULT_THRESHOLD,
    cluster_cap: int = DEFAULT_CLUSTER_CAP,
) -> RSampleSet:
    args = _kernel_args(params)

    def kernel(rng, size):
        return _sample_block(rng, size, *args, threshold, cluster_cap)

    return RSampleSet(run_blocks(kernel, n, seed), threshold, seed)


@dataclass(frozen=True)
class ExtinctionEstimate:
    p_ext_hat: float
    se: float
    q_hat: float  # extinction probability from a single unnamed initial case
    p_inf_hat: float
    mean_r: float
    n: int

    def summary(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean_r,
            "p_inf_hat": self.p_inf_hat,
            "p_ext_hat": self.p_ext_hat,
            "se": self.se,
        }


def _smallest_root(freq: np.ndarray, n: int, tol: float = 1e-10, max_iter: int = 1_000_000) -> float:
    """Smallest root in (0, 1] of H(s) = s for H(s) = sum_k freq[k] s^k / n."""
    coef = freq[::-1] / n  # highest power first for polyval
    mass = freq.sum() / n
    mean = float(np.dot(np.arange(freq.size), freq)) / n
    if mass >= 1.0 and mean <= 1.0:
        return 1.0
    s = 0.0
    for _ in range(max_iter):
        nxt = float(np.polyval(coef, s))
        if abs(nxt - s) < tol:
            return nxt
        s = nxt
    # Linear convergence too slow; the root is bracketed by s and 1.
    g = lambda x: float(np.polyval(coef, x)) - x  # noqa: E731
    hi = 1.0 - 1e-12
    if g(hi) >= 0:
        return 1.0
    return optimize.brentq(g, s, hi, xtol=tol)


def extinction_from_samples(rs: RSampleSet, m: int = 1) -> ExtinctionEstimate:
    finite = rs.samples[~rs.is_inf]
    freq = np.bincount(finite, minlength=1).astype(float)
    q = _smallest_root(freq, rs.n)
    if q >= 1.0:
        se_q = 0.0
    else:
        # delta method: dq = dH(q) / (1 - H'(q))
        powers = np.zeros(rs.n)
        powers[~rs.is_inf] = q ** finite.astype(float)
        k = np.arange(freq.size, dtype=float)
        h_prime = float(np.sum(freq[1:] * k[1:] * q ** (k[1:] - 1))) / rs.n
        se_q = float(powers.std(ddof=1) / math.sqrt(rs.n) / (1.0 - h_prime))
    p_ext = q**m
    se = m * q ** (m - 1) * se_q if m > 1 else se_q
    return ExtinctionEstimate(p_ext, se, q, rs.p_inf_hat, rs.mean, rs.n)


def estimate_extinction(
    params: ModelParams,
    n: int,
    seed: int,
    threshold: int = DEFAULT_THRESHOLD,
) -> ExtinctionEstimate:
    """Extinction probability from the empirical pgf of R, raised to the power m."""
    return extinction_from_samples(sample_r_set(params, n, seed, threshold), params.m)


def table2_cell(params: ModelParams, n: int, seed: int, threshold: int = DEFAULT_THRESHOLD) -> float:
    return estimate_extinction(params, n, seed, threshold).p_ext_hat


def write_summary(path, rs: RSampleSet, est: ExtinctionEstimate | None = None) -> None:
    data = {"n": rs.n, "mean": rs.mean, "se": rs.se, "p_inf_hat": rs.p_inf_hat}
    if est is not None:
        data["p_ext_hat"] = est.p_ext_hat
        data["p_ext_se"] = est.se
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
