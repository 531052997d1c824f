"""Truncated Schwinger functions, empirical cumulants and partition algebra.

The analytic truncated n-point function is the single lattice sum

    S_n^T(x_1, ..., x_n) = c_n * a^d * sum_y prod_j G(x_j - y),

with c_n the n-th noise cumulant (c_1 = b + lam*r_1, c_2 = sigma2 + lam*r_2,
c_n = lam*r_n for n >= 3).  Empirical joint cumulants are estimated from
ensembles by the set-partition Moebius formula over sample moments, with
jackknife standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import ConfigurationError, RangeError
from .greens import ModelParams, green_real_fft
from .noise import LatticeSpec, LevyCharacteristic, noise_cumulant
from .sampler import Ensemble

MAX_ANALYTIC_ORDER = 6
MAX_EMPIRICAL_ORDER = 4


@dataclass(frozen=True)
class CumulantEstimate:
    value: float
    stderr: float
    n_samples: int
    order: int

    def __post_init__(self):
        if self.stderr < 0.0:
            raise ConfigurationError("stderr must be >= 0")
        if self.n_samples < 2:
            raise ConfigurationError("an estimate with stderr needs >= 2 samples")


def set_partitions(items):
    """Yield all partitions of a sequence as lists of blocks (lists)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _mobius_cumulant(moments, n):
    """Joint cumulant from subset moments: sum over partitions of
    (-1)^(b-1) (b-1)! prod of block moments."""
    total = 0.0
    for part in set_partitions(range(n)):
        b = len(part)
        prod = (-1.0) ** (b - 1) * _factorial(b - 1)
        for block in part:
            prod = prod * moments[frozenset(block)]
        total = total + prod
    return total


@lru_cache(maxsize=None)
def _factorial(n: int) -> float:
    out = 1.0
    for i in range(2, n + 1):
        out *= i
    return out


def _check_points(spec: LatticeSpec, pts):
    pts = [tuple(int(c) for c in p) for p in pts]
    for p in pts:
        if len(p) != spec.d:
            raise ConfigurationError(f"point {p} has wrong dimension (d={spec.d})")
        if any(not 0 <= c < spec.L for c in p):
            raise ConfigurationError(f"point {p} outside the lattice")
    return pts


@lru_cache(maxsize=32)
def _green_grid(p: ModelParams, spec: LatticeSpec) -> np.ndarray:
    return green_real_fft(p, spec).values


@lru_cache(maxsize=200_000)
def _schwinger_cached(p: ModelParams, chi: LevyCharacteristic,
                      spec: LatticeSpec, pts: tuple) -> float:
    n = len(pts)
    c_n = noise_cumulant(chi, n)
    if c_n == 0.0:
        return 0.0
    g = _green_grid(p, spec)
    axes = tuple(range(spec.d))
    prod = np.ones(spec.shape)
    for x in pts:
        prod = prod * np.roll(g, shift=x, axis=axes)
    return float(c_n * spec.cell_volume * prod.sum())


def analytic_truncated_schwinger(p: ModelParams, chi: LevyCharacteristic,
                                 spec: LatticeSpec, pts) -> float:
    """Exact lattice S_n^T at the given integer lattice points (n <= 6)."""
    pts = _check_points(spec, pts)
    n = len(pts)
    if not 1 <= n <= MAX_ANALYTIC_ORDER:
        raise RangeError(f"analytic order {n} outside [1, {MAX_ANALYTIC_ORDER}]")
    # canonical form: translate first (sorted) point to the origin, then sort;
    # exact on the torus and improves cache reuse
    base = min(pts)
    canon = tuple(sorted(tuple((c - b) % spec.L for c, b in zip(q, base)) for q in pts))
    return _schwinger_cached(p, chi, spec, canon)


def moments_from_cumulants(cumulants, n: int) -> float:
    """Moment of order n from a map frozenset(indices) -> joint cumulant."""
    if n < 1:
        raise RangeError("moment order must be >= 1")
    total = 0.0
    for part in set_partitions(range(n)):
        prod = 1.0
        for block in part:
            key = frozenset(block)
            if key not in cumulants:
                raise ConfigurationError(f"missing cumulant for subset {sorted(block)}")
            prod *= cumulants[key]
        total += prod
    return total


def full_schwinger_moment(p: ModelParams, chi: LevyCharacteristic,
                          spec: LatticeSpec, pts, centered: bool = False) -> float:
    """Full (non-truncated) Schwinger moment via the partition sum.

    With centered=True the order-1 cumulant is dropped (field minus its mean),
    so partitions containing singleton blocks contribute zero.
    """
    pts = _check_points(spec, pts)
    n = len(pts)
    if not 1 <= n <= MAX_ANALYTIC_ORDER:
        raise RangeError(f"moment order {n} outside [1, {MAX_ANALYTIC_ORDER}]")
    cums = {}
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            if centered and size == 1:
                cums[frozenset(idx)] = 0.0
            else:
                cums[frozenset(idx)] = analytic_truncated_schwinger(
                    p, chi, spec, [pts[i] for i in idx])
    return moments_from_cumulants(cums, n)


def joint_cumulant(values: np.ndarray) -> float:
    """Joint cumulant of the columns of an (N, n) sample matrix."""
    x = np.asarray(values, dtype=float)
    n = x.shape[1]
    moments = {frozenset(idx): float(x[:, idx].prod(axis=1).mean())
               for size in range(1, n + 1)
               for idx in combinations(range(n), size)}
    return _mobius_cumulant(moments, n)


def joint_cumulant_jackknife(values: np.ndarray) -> tuple[float, float]:
    """Joint cumulant plus leave-one-out jackknife standard error."""
    x = np.asarray(values, dtype=float)
    n_samp, n = x.shape
    prods = {}
    loo = {}
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            p = x[:, idx].prod(axis=1)
            key = frozenset(idx)
            prods[key] = float(p.mean())
            loo[key] = (p.sum() - p) / (n_samp - 1)
    value = _mobius_cumulant(prods, n)
    loo_vals = _mobius_cumulant(loo, n)
    stderr = float(np.sqrt((n_samp - 1) / n_samp * np.sum((loo_vals - loo_vals.mean()) ** 2)))
    return float(value), stderr


def empirical_cumulant(e: Ensemble, pts) -> CumulantEstimate:
    """Joint cumulant of (phi(x_1), ..., phi(x_n)) across ensemble samples."""
    pts = _check_points(e.spec, pts)
    n = len(pts)
    if not 1 <= n <= MAX_EMPIRICAL_ORDER:
        raise RangeError(f"empirical order {n} outside [1, {MAX_EMPIRICAL_ORDER}]")
    if e.n_samples < 10 * 2**n:
        raise RangeError(f"need >= {10 * 2**n} samples for order {n}, "
                         f"have {e.n_samples}")
    cols = np.stack([e.fields[(slice(None),) + p] for p in pts], axis=1)
    value, stderr = joint_cumulant_jackknife(cols)
    return CumulantEstimate(value, stderr, e.n_samples, n)


def _subset_keys(n: int):
    return [frozenset(idx) for size in range(1, n + 1)
            for idx in combinations(range(n), size)]


def accumulate_subset_sums(fields: np.ndarray, spec: LatticeSpec, pts) -> np.ndarray:
    """Sum over samples of prod_{j in S} phi(tau + x_j), for every subset S.

    Returns shape (n_subsets, V); tau runs over all lattice translations.
    Used by the translation-averaged cumulant estimator.
    """
    pts = _check_points(spec, pts)
    n = len(pts)
    keys = _subset_keys(n)
    axes = tuple(range(spec.d))
    sums = np.zeros((len(keys), spec.n_sites))
    neg = [tuple(-c for c in p) for p in pts]
    for f in fields:
        rolled = [np.roll(f, shift=s, axis=axes).ravel() for s in neg]
        for k, key in enumerate(keys):
            prod = None
            for j in sorted(key):
                prod = rolled[j] if prod is None else prod * rolled[j]
            sums[k] += prod
    return sums


def cumulant_from_subset_sums(block_sums: np.ndarray, block_counts,
                              order: int) -> CumulantEstimate:
    """Translation-averaged cumulant with delete-block jackknife stderr.

    block_sums: shape (B, n_subsets, V) of per-block subset sums.
    """
    block_sums = np.asarray(block_sums, dtype=float)
    counts = np.asarray(block_counts, dtype=float)
    n_total = int(counts.sum())
    keys = _subset_keys(order)
    total = block_sums.sum(axis=0)

    def estimate(sums, n_samp):
        moments = {key: sums[k] / n_samp for k, key in enumerate(keys)}
        return float(np.mean(_mobius_cumulant(moments, order)))

    value = estimate(total, n_total)
    b = len(counts)
    if b < 2:
        return CumulantEstimate(value, 0.0, n_total, order)
    deleted = np.array([estimate(total - block_sums[i], n_total - counts[i])
                        for i in range(b)])
    stderr = float(np.sqrt((b - 1) / b * np.sum((deleted - deleted.mean()) ** 2)))
    return CumulantEstimate(value, stderr, n_total, order)


def empirical_cumulant_translation_avg(e: Ensemble, pts,
                                       n_blocks: int = 50) -> CumulantEstimate:
    """Cumulant averaged over all lattice translations of the point set."""
    pts = _check_points(e.spec, pts)
    n = len(pts)
    if not 1 <= n <= MAX_EMPIRICAL_ORDER:
        raise RangeError(f"empirical order {n} outside [1, {MAX_EMPIRICAL_ORDER}]")
    chunks = np.array_split(np.arange(e.n_samples), min(n_blocks, e.n_samples))
    block_sums = np.stack([accumulate_subset_sums(e.fields[c], e.spec, pts)
                           for c in chunks])
    return cumulant_from_subset_sums(block_sums, [len(c) for c in chunks], n)


def empirical_two_point(e: Ensemble, n_blocks: int = 50):
    """Translation-averaged connected two-point map C(x) with jackknife errors.

    Returns (values, stderr) arrays of lattice shape; C(x) estimates
    S_2^T(0, x).  Uses the FFT autocorrelation per sample.
    """
    spec = e.spec
    chunks = np.array_split(np.arange(e.n_samples), min(n_blocks, e.n_samples))
    auto = np.zeros((len(chunks),) + spec.shape)
    mean = np.zeros(len(chunks))
    for i, c in enumerate(chunks):
        for f in e.fields[c]:
            fhat = np.fft.fftn(f)
            auto[i] += np.fft.ifftn(np.abs(fhat) ** 2).real / spec.n_sites
            mean[i] += f.mean()
    counts = np.array([len(c) for c in chunks], dtype=float)
    n_total = counts.sum()

    def connected(a_sum, m_sum, n_samp):
        return a_sum / n_samp - (m_sum / n_samp) ** 2

    full = connected(auto.sum(axis=0), mean.sum(), n_total)
    b = len(chunks)
    deleted = np.stack([connected(auto.sum(axis=0) - auto[i],
                                  mean.sum() - mean[i], n_total - counts[i])
                        for i in range(b)])
    stderr = np.sqrt((b - 1) / b * np.sum((deleted - deleted.mean(axis=0)) ** 2, axis=0))
    return full, stderr
