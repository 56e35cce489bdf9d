"""Seeded Monte Carlo estimation of the component-count distribution.

Sampling uses the Philox counter-based generator with an absolute,
trial-indexed counter layout: trial t always consumes the same 64-bit
outputs no matter how trials are chunked or how many workers run them,
so results are bit-identical for a given (config, trials, seed).
Estimates carry Wilson 95% intervals, and comparison against an exact
distribution produces per-m z-scores plus a pooled chi-square test.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2 as _chi2

from .model import (
    ComponentDistribution,
    NetworkConfig,
    Realization,
    count_components_batch,
    validate_config,
)

__all__ = [
    "McEstimate",
    "ComparisonRow",
    "ComparisonReport",
    "sample_realization",
    "estimate_distribution",
    "wilson_interval",
    "compare",
]

# 95% two-sided normal quantile, frozen so intervals are reproducible.
WILSON_Z = 1.959963984540054

# Trials per counter block.  A multiple of 4 keeps every block's first draw
# aligned to a Philox 4x64 counter boundary for any node count n.
_TRIALS_PER_BLOCK = 1 << 14


@dataclass(frozen=True)
class McEstimate:
    """Empirical probability of one component count m."""

    m: int
    count: int
    trials: int
    seed: int

    @property
    def p_hat(self) -> float:
        return self.count / self.trials

    @property
    def stderr(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def ci_low(self) -> float:
        return wilson_interval(self.count, self.trials)[0]

    @property
    def ci_high(self) -> float:
        return wilson_interval(self.count, self.trials)[1]


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score 95% interval; well-behaved at p_hat near 0 or 1."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    p = successes / trials
    zz = z * z
    denom = 1.0 + zz / trials
    center = (p + zz / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + zz / (4 * trials * trials)) / denom
    # Clamp so rounding can never push the bounds past [0, 1] or inside p.
    return (min(max(0.0, center - half), p), max(min(1.0, center + half), p))


def sample_realization(config: NetworkConfig, rng: np.random.Generator | int) -> Realization:
    """Draw one realization: n uniforms on [0, L] plus the access point."""
    validate_config(config)
    if isinstance(rng, (int, np.integer)):
        rng = np.random.Generator(np.random.Philox(key=int(rng)))
    points = (rng.random(config.n) * config.length).tolist()
    if config.access_point is not None:
        points.append(float(config.access_point))
    return Realization.from_unsorted(points, config)


def _block_counts(config: NetworkConfig, seed: int, t0: int, t1: int) -> np.ndarray:
    """Component-count histogram for trials [t0, t1) at their absolute
    counter offsets."""
    n = config.n
    rows = t1 - t0
    minlength = config.vertex_count + 1
    if n == 0:
        m = 1 if config.access_point is not None else 0
        counts = np.zeros(minlength, dtype=np.int64)
        counts[m] = rows
        return counts
    offset = t0 * n
    bits = np.random.Philox(key=seed)
    bits.advance(offset // 4)
    u = np.random.Generator(bits).random((rows, n))
    if offset % 4:
        # Realign: the block start falls inside a 4-draw counter word, so
        # regenerate from the last aligned draw and slice.  Never happens
        # with the default block size, which is a multiple of 4.
        bits = np.random.Philox(key=seed)
        bits.advance(offset // 4)
        flat = np.random.Generator(bits).random(offset % 4 + rows * n)
        u = flat[offset % 4 :].reshape(rows, n)
    positions = u * config.length
    if config.access_point is not None:
        positions = np.concatenate(
            [positions, np.full((rows, 1), config.access_point)], axis=1
        )
    positions.sort(axis=1)
    m = count_components_batch(positions, config.radius)
    return np.bincount(m, minlength=minlength)


def estimate_distribution(
    config: NetworkConfig,
    trials: int,
    seed: int,
    workers: int = 1,
) -> list[McEstimate]:
    """Per-m estimates over *trials* samples, reproducible for any worker count."""
    validate_config(config)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    blocks = [
        (t0, min(t0 + _TRIALS_PER_BLOCK, trials))
        for t0 in range(0, trials, _TRIALS_PER_BLOCK)
    ]
    minlength = config.vertex_count + 1
    counts = np.zeros(minlength, dtype=np.int64)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for c in pool.map(
                _block_counts,
                [config] * len(blocks),
                [seed] * len(blocks),
                [b[0] for b in blocks],
                [b[1] for b in blocks],
                chunksize=max(1, len(blocks) // (4 * workers)),
            ):
                counts += c
    else:
        for t0, t1 in blocks:
            counts += _block_counts(config, seed, t0, t1)
    return [
        McEstimate(m=m, count=int(c), trials=trials, seed=seed)
        for m, c in enumerate(counts)
        if c > 0
    ]


@dataclass(frozen=True)
class ComparisonRow:
    m: int
    q_exact: float
    p_hat: float
    stderr: float
    z: float


@dataclass(frozen=True)
class ComparisonReport:
    """Exact-vs-simulated comparison: per-m z-scores and a pooled chi-square."""

    rows: tuple[ComparisonRow, ...]
    chi_square: float
    dof: int
    p_value: float


def _z_score(q: float, count: int, trials: int) -> tuple[float, float, float]:
    p = count / trials
    if count == 0:
        # Degenerate empirical variance; fall back to the exact-variance
        # denominator so the z-score stays finite.
        se = math.sqrt(q * (1.0 - q) / trials) if 0.0 < q < 1.0 else 0.0
    else:
        se = math.sqrt(p * (1.0 - p) / trials)
    if se == 0.0:
        return p, 0.0, 0.0 if p == q else math.inf
    return p, se, (p - q) / se


def compare(
    config: NetworkConfig,
    estimates: list[McEstimate],
    exact: ComponentDistribution,
) -> ComparisonReport:
    """Statistical agreement report between estimates and an exact distribution."""
    if not estimates:
        raise ValueError("estimates must be non-empty")
    trials = estimates[0].trials
    _check_same_point(config, exact)
    observed = {e.m: e.count for e in estimates}
    if sum(observed.values()) != trials:
        raise ValueError("estimate counts do not sum to trials")
    support = sorted(set(m for m, q in exact.probs.items() if q > 0) | set(observed))

    rows = []
    for m in support:
        q = exact.probs.get(m, 0.0)
        p, se, z = _z_score(q, observed.get(m, 0), trials)
        rows.append(ComparisonRow(m=m, q_exact=q, p_hat=p, stderr=se, z=z))

    chi_square, dof, p_value = _pooled_chi_square(
        [(m, exact.probs.get(m, 0.0) * trials, observed.get(m, 0)) for m in support]
    )
    return ComparisonReport(tuple(rows), chi_square, dof, p_value)


def _check_same_point(config: NetworkConfig, exact: ComponentDistribution) -> None:
    ident = exact.config
    if isinstance(ident, NetworkConfig):
        same = (
            ident.n == config.n
            and math.isclose(ident.rho, config.rho, rel_tol=1e-12)
            and ident.access_point == config.access_point
        )
    elif isinstance(ident, tuple) and len(ident) == 3:
        model, n, ratio = ident
        anchored = config.access_point is not None
        same = (
            n == config.n
            and math.isclose(ratio.value, config.rho, rel_tol=1e-12)
            and (model.value == "anchored") == anchored
            and (config.access_point in (None, 0, 0.0))
        )
    else:
        same = False
    if not same:
        raise ValueError("estimates and exact distribution describe different points")


def _pooled_chi_square(
    bins: list[tuple[int, float, int]],
) -> tuple[float, int, float]:
    """Chi-square over bins pooled so every expected count is >= 5.

    Bins below the threshold merge with their nearest neighbour toward the
    mode of the expected counts.  dof is (pooled bins - 1), floored at 1.
    """
    pooled = [[exp, obs] for _, exp, obs in bins if exp > 0 or obs > 0]
    while len(pooled) > 1:
        exps = [b[0] for b in pooled]
        mode_idx = exps.index(max(exps))
        small = min(range(len(pooled)), key=lambda i: pooled[i][0])
        if pooled[small][0] >= 5:
            break
        neighbor = small + 1 if small < mode_idx else small - 1
        neighbor = min(max(neighbor, 0), len(pooled) - 1)
        if neighbor == small:
            neighbor = small - 1 if small > 0 else small + 1
        pooled[neighbor][0] += pooled[small][0]
        pooled[neighbor][1] += pooled[small][1]
        del pooled[small]
    chi = sum((obs - exp) ** 2 / exp for exp, obs in pooled if exp > 0)
    dof = max(1, len(pooled) - 1)
    p_value = float(_chi2.sf(chi, dof))
    return chi, dof, p_value
