"""Event-driven simulation of the finite-population SEIR epidemic with tracing.

Population: ``N`` initial susceptibles plus ``m`` initial infectives.  Each
infective makes contacts at total rate ``lam (N + m - 1) / N`` with a target
chosen uniformly among the others, which is the superposition of the pairwise
rate ``lam / N`` streams.
"""
from __future__ import annotations

import csv
import heapq
import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .bp_sim import draw
from .errors import DegenerateHistogram, InvalidConfig
from .params import MUTUAL, ModelParams
from .streams import run_blocks

SUSCEPTIBLE, LATENT, INFECTIVE, REMOVED = 0, 1, 2, 3
CONTACT, LATENCY_END, NATURAL_REMOVAL, TRACE = 0, 1, 2, 3
SMOOTH_WIDTH = 5
MIN_SIDE_MASS = 0.01


@numba.njit(cache=True, nogil=True)
def _run_one(rng, n_sus, m, lam, p, pi_r, pi_t, inf, lat, dly, mutual, check, status, parent, first_child, next_sib, stats):
    i_code, i1, i2 = inf
    l_code, l1, l2 = lat
    d_code, d1, d2 = dly
    total = n_sus + m
    for k in range(total):
        status[k] = SUSCEPTIBLE
        parent[k] = -1
        first_child[k] = -1
        next_sib[k] = -1
    counts = np.zeros(4, dtype=np.int64)
    counts[SUSCEPTIBLE] = n_sus
    contact_rate = lam * (total - 1) / n_sus if total > 1 else 0.0

    heap = [(0.0, np.int64(0), np.int64(0), np.int64(0))]
    heap.pop()
    seq = 0
    for k in range(m):
        status[k] = LATENT
        counts[LATENT] += 1
        heapq.heappush(heap, (0.0, np.int64(seq), np.int64(LATENCY_END), np.int64(k)))
        seq += 1

    noop_traces = 0
    t_prev = 0.0
    while len(heap) > 0:
        t, _s, kind, who = heapq.heappop(heap)
        if check:
            if t < t_prev:
                raise RuntimeError("clock went backwards")
            if counts.sum() != total:
                raise RuntimeError("population not conserved")
        t_prev = t
        st = status[who]
        if kind == CONTACT:
            if st != INFECTIVE:
                continue
            j = int(rng.random() * (total - 1))
            if j >= who:
                j += 1
            if status[j] == SUSCEPTIBLE:
                status[j] = LATENT
                counts[SUSCEPTIBLE] -= 1
                counts[LATENT] += 1
                parent[j] = who
                next_sib[j] = first_child[who]
                first_child[who] = j
                heapq.heappush(heap, (t + draw(rng, l_code, l1, l2), np.int64(seq), np.int64(LATENCY_END), np.int64(j)))
                seq += 1
            heapq.heappush(heap, (t + rng.standard_exponential() / contact_rate, np.int64(seq), np.int64(CONTACT), np.int64(who)))
            seq += 1
        elif kind == LATENCY_END:
            if st != LATENT:
                continue
            status[who] = INFECTIVE
            counts[LATENT] -= 1
            counts[INFECTIVE] += 1
            heapq.heappush(heap, (t + draw(rng, i_code, i1, i2), np.int64(seq), np.int64(NATURAL_REMOVAL), np.int64(who)))
            seq += 1
            if contact_rate > 0.0:
                heapq.heappush(heap, (t + rng.standard_exponential() / contact_rate, np.int64(seq), np.int64(CONTACT), np.int64(who)))
                seq += 1
        else:
            if st == REMOVED:
                if kind == TRACE:
                    noop_traces += 1
                continue
            traced = kind == TRACE
            if not traced and st != INFECTIVE:
                continue
            counts[st] -= 1
            counts[REMOVED] += 1
            status[who] = REMOVED
            interviewed = rng.random() < (pi_t if traced else pi_r)
            if interviewed:
                shared = -1.0
                c = first_child[who]
                while c != -1:
                    if rng.random() < p and status[c] != REMOVED:
                        if mutual:
                            if shared < 0.0:
                                shared = draw(rng, d_code, d1, d2)
                            d = shared
                        else:
                            d = draw(rng, d_code, d1, d2)
                        heapq.heappush(heap, (t + d, np.int64(seq), np.int64(TRACE), np.int64(c)))
                        seq += 1
                    c = next_sib[c]
    stats[0] += noop_traces
    return counts[REMOVED]


@numba.njit(cache=True, nogil=True)
def _run_block(rng, n, n_sus, m, lam, p, pi_r, pi_t, inf, lat, dly, mutual, check, stats):
    total = n_sus + m
    status = np.empty(total, dtype=np.int8)
    parent = np.empty(total, dtype=np.int64)
    first_child = np.empty(total, dtype=np.int64)
    next_sib = np.empty(total, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    for k in range(n):
        out[k] = _run_one(rng, n_sus, m, lam, p, pi_r, pi_t, inf, lat, dly, mutual, check, status, parent, first_child, next_sib, stats)
    return out


def _args(params: ModelParams):
    return (
        int(params.N),
        int(params.m),
        params.lam,
        params.p,
        params.pi_r,
        params.pi_t,
        params.infectious.encode(),
        params.latent.encode(),
        params.delay.encode(),
        params.delay_coupling == MUTUAL,
    )


def run_epidemic(params: ModelParams, rng: np.random.Generator, check: bool = False) -> int:
    """Total number removed when the epidemic dies out (initial infectives included)."""
    stats = np.zeros(1, dtype=np.int64)
    return int(_run_block(rng, 1, *_args(params), check, stats)[0])


def final_sizes(params: ModelParams, n: int, seed: int, check: bool = False) -> tuple[np.ndarray, int]:
    """Final sizes of ``n`` replicates and the number of traces that hit a removed individual."""
    args = _args(params)
    noops = []

    def kernel(rng, size):
        stats = np.zeros(1, dtype=np.int64)
        out = _run_block(rng, size, *args, check, stats)
        noops.append(int(stats[0]))
        return out

    return run_blocks(kernel, n, seed), sum(noops)


def find_cutoff(counts: np.ndarray, width: int = SMOOTH_WIDTH, min_mass: float = MIN_SIDE_MASS) -> int:
    """Deepest interior valley of the smoothed histogram.

    ``counts[k]`` is the frequency of final size ``k``.  Returns the size at
    the valley; sizes ``<= cutoff`` are minor outbreaks.
    """
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n <= 0 or counts.size < 3:
        raise DegenerateHistogram("histogram too small to separate minor and major outbreaks")
    smooth = np.convolve(counts, np.ones(width) / width, mode="same")
    cum = np.cumsum(counts) / n
    best, best_val = -1, math.inf
    for k in range(1, counts.size - 1):
        if smooth[k] <= smooth[k - 1] and smooth[k] <= smooth[k + 1]:
            left = smooth[:k].max()
            right = smooth[k + 1 :].max()
            if min(left, right) <= smooth[k]:
                continue
            if cum[k] < min_mass or 1.0 - cum[k] < min_mass:
                continue
            # depth relative to the lower of the two flanking peaks
            depth = smooth[k] / min(left, right)
            if depth < best_val:
                best, best_val = k, depth
    if best < 0:
        raise DegenerateHistogram("no interior valley with enough mass on both sides")
    return best


@dataclass
class FinalSizeHistogram:
    counts: np.ndarray  # counts[k] = number of replicates with final size k
    n: int
    N: int
    m: int
    cutoff: int | None = None
    noop_traces: int = 0
    seed: int | None = field(default=None, compare=False)

    @classmethod
    def from_sizes(cls, sizes: np.ndarray, N: int, m: int, **kw) -> "FinalSizeHistogram":
        counts = np.bincount(sizes, minlength=N + m + 1)
        return cls(counts, int(sizes.size), N, m, **kw)

    def with_cutoff(self, cutoff: int | None = None) -> "FinalSizeHistogram":
        c = find_cutoff(self.counts) if cutoff is None else int(cutoff)
        if not 0 <= c <= self.N + self.m:
            raise InvalidConfig(f"cutoff must lie in [0, {self.N + self.m}], got {c}")
        return FinalSizeHistogram(self.counts, self.n, self.N, self.m, c, self.noop_traces, self.seed)

    @property
    def p_minor(self) -> float:
        if self.cutoff is None:
            raise DegenerateHistogram("no cutoff set")
        return float(self.counts[: self.cutoff + 1].sum() / self.n)

    @property
    def se(self) -> float:
        q = self.p_minor
        return math.sqrt(q * (1 - q) / self.n)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["final_size", "count"])
            for k, c in enumerate(self.counts.tolist()):
                if c:
                    w.writerow([k, c])

    def summary(self) -> dict:
        out = {"n": self.n, "N": self.N, "m": self.m, "cutoff": self.cutoff, "noop_traces": self.noop_traces}
        if self.cutoff is not None:
            out["p_minor"] = self.p_minor
            out["se"] = self.se
        return out

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


def final_size_distribution(
    params: ModelParams,
    n: int,
    seed: int,
    cutoff: int | None = None,
    classify: bool = True,
    check: bool = False,
) -> FinalSizeHistogram:
    """Histogram of ``n`` final sizes, with the minor/major cutoff when ``classify``."""
    if n < 1:
        raise InvalidConfig(f"n must be >= 1, got {n}")
    sizes, noops = final_sizes(params, n, seed, check)
    h = FinalSizeHistogram.from_sizes(sizes, params.N, params.m, noop_traces=noops, seed=seed)
    if classify or cutoff is not None:
        h = h.with_cutoff(cutoff)
    return h


@dataclass(frozen=True)
class PERow:
    N: int
    p_hat: float
    se: float
    cutoff: int


def estimate_pE_vs_N(params: ModelParams, grid, n: int, seed: int) -> list[PERow]:
    """Proportion of minor outbreaks and its binomial standard error for each N."""
    rows = []
    for N in grid:
        if N < 20:
            raise InvalidConfig(f"population sizes must be >= 20, got {N}")
        h = final_size_distribution(params.replace(N=int(N)), n, seed)
        rows.append(PERow(int(N), h.p_minor, h.se, h.cutoff))
    return rows
